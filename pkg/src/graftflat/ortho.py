"""Spine of the orthogeodesic foliation of a pair of pants.

Every point of a pair of pants has a closest boundary component; the points
with two or more closest components form a trivalent graph (the spine).  Each
spine edge is crossed by a band of leaves that runs between two boundary arcs
of equal length (the band width).  Widths follow from a linear system: the arcs
on boundary i have total length l_i and the two arcs of a band are equal.

Two combinatorial types occur.  Under strict triangle inequalities the spine is
a theta graph with band widths w_ij = (l_i + l_j - l_k)/2 and each band arc is
centred at the corresponding seam foot (the pants reflection fixes both).  When
l_k > l_i + l_j it is a dumbbell: loops around boundaries i and j of widths
l_i and l_j and a bar of width (l_k - l_i - l_j)/2 lying on the seam between i
and j, whose two arcs on boundary k are exchanged by s -> -s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hyp2 import H2Point, dist, dist_z, equidistant_point, frame_along, line_dist_z
from .pants import PantsGeometry, _apply_words, build_pants

THETA = "theta"
DUMBBELL = "dumbbell"
FIGURE_EIGHT = "figure-eight"

_PAIR_EDGE = {frozenset((0, 1)): 0, frozenset((0, 2)): 1, frozenset((1, 2)): 2}


@dataclass(frozen=True)
class SpineArc:
    """Boundary arc swept by one band: coordinates are boundary arclength."""

    edge: int
    length: float
    center: float
    partner: int

    @property
    def start(self) -> float:
        return self.center - 0.5 * self.length


@dataclass(frozen=True)
class SpineEdge:
    id: int
    width: float
    kind: str
    ends: tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class RibbonSpine:
    lengths: tuple[float, float, float]
    kind: str
    long_index: int | None
    edges: tuple[SpineEdge, ...]
    boundary_arcs: tuple[tuple[SpineArc, ...], ...]
    inradius: float
    vertices: tuple[tuple[complex, float], ...]

    def widths(self) -> tuple[float, ...]:
        return tuple(e.width for e in self.edges)

    def partner_arc(self, i: int, a: int) -> tuple[int, int]:
        edge = self.edges[self.boundary_arcs[i][a].edge]
        first, second = edge.ends
        return second if first == (i, a) else first

    def pair_coordinate(self, i: int, a: int, s):
        """Image of boundary coordinate s on arc a of boundary i under the band pairing."""
        j, b = self.partner_arc(i, a)
        ci = self.boundary_arcs[i][a].center
        cj = self.boundary_arcs[j][b].center
        return j, b, np.mod(cj - (np.asarray(s) - ci), self.lengths[j])


def classify(l1: float, l2: float, l3: float, tol: float = 0.0) -> tuple[str, int | None]:
    ls = (l1, l2, l3)
    k = int(np.argmax(ls))
    i, j = (m for m in range(3) if m != k)
    excess = ls[k] - ls[i] - ls[j]
    if excess > tol:
        return DUMBBELL, k
    if abs(excess) <= tol:
        return FIGURE_EIGHT, k
    return THETA, None


def _foot(ls, i: int, j: int) -> float:
    """Boundary coordinate on boundary i of the seam foot toward j."""
    others = [m for m in range(3) if m != i]
    return 0.0 if j == min(others) else 0.5 * ls[i]


def _vertices(pg: PantsGeometry, kind: str, k: int | None) -> tuple[tuple[complex, float], ...]:
    if kind == THETA:
        p, r = equidistant_point(*pg.lines)
        return ((p.z, r),)
    i, j = (m for m in range(3) if m != k)
    mirror = pg.reflections[_refl_index(i, j)].apply_geodesic(pg.lines[k])
    out = []
    for m in (i, j):
        p, r = equidistant_point(pg.lines[m], pg.lines[k], mirror)
        out.append((p.z, r))
    return tuple(out)


def _refl_index(i: int, j: int) -> int:
    # reflections are stored for seams (0,1), (1,2), (0,2)
    return {frozenset((0, 1)): 0, frozenset((1, 2)): 1, frozenset((0, 2)): 2}[frozenset((i, j))]


@lru_cache(maxsize=256)
def pants_spine(l1: float, l2: float, l3: float) -> RibbonSpine:
    """Combinatorial type, band widths, boundary arcs and inradius of the pants spine."""
    ls = (float(l1), float(l2), float(l3))
    kind, k = classify(*ls)
    arcs: list[list[SpineArc]] = [[], [], []]
    edges: list[SpineEdge] = []
    if kind == THETA:
        for key, eid in sorted(_PAIR_EDGE.items(), key=lambda kv: kv[1]):
            i, j = sorted(key)
            m = 3 - i - j
            w = 0.5 * (ls[i] + ls[j] - ls[m])
            arcs[i].append(SpineArc(eid, w, _foot(ls, i, j), j))
            arcs[j].append(SpineArc(eid, w, _foot(ls, j, i), i))
    else:
        i, j = (m for m in range(3) if m != k)
        e = max(0.0, 0.5 * (ls[k] - ls[i] - ls[j]))
        fi, fj = _foot(ls, k, i), _foot(ls, k, j)
        arcs[i].append(SpineArc(0, ls[i], _foot(ls, i, k), k))
        arcs[j].append(SpineArc(1, ls[j], _foot(ls, j, k), k))
        arcs[k].append(SpineArc(0, ls[i], fi, i))
        arcs[k].append(SpineArc(2, e, fi + 0.5 * ls[i] + 0.5 * e, k))
        arcs[k].append(SpineArc(1, ls[j], fj, j))
        arcs[k].append(SpineArc(2, e, fj + 0.5 * ls[j] + 0.5 * e, k))
    # cyclic order by start coordinate
    ordered = []
    for b in range(3):
        ordered.append(sorted(arcs[b], key=lambda a, b=b: (a.start % ls[b], a.edge)))
    ends: dict[int, list[tuple[int, int]]] = {}
    for b in range(3):
        for a, arc in enumerate(ordered[b]):
            ends.setdefault(arc.edge, []).append((b, a))
    names = {0: "band", 1: "band", 2: "band"} if kind == THETA else {0: "loop", 1: "loop", 2: "bar"}
    widths = {eid: _arc_length(ordered, ends[eid][0]) for eid in ends}
    for eid in sorted(ends):
        pair = ends[eid]
        edges.append(SpineEdge(eid, widths[eid], names[eid], (pair[0], pair[1])))
    pg = build_pants(*ls)
    verts = _vertices(pg, kind, k)
    return RibbonSpine(
        lengths=ls,
        kind=kind,
        long_index=k,
        edges=tuple(edges),
        boundary_arcs=tuple(tuple(o) for o in ordered),
        inradius=max(r for _, r in verts),
        vertices=verts,
    )


def _arc_length(ordered, end: tuple[int, int]) -> float:
    b, a = end
    return ordered[b][a].length


def inradius(l1: float, l2: float, l3: float) -> float:
    """Largest distance from a point of the pants to its boundary (attained at spine vertices)."""
    return pants_spine(l1, l2, l3).inradius


# --- predicted spine segments inside the front hexagon --------------------------

_SEAM_VERTS = {frozenset((0, 1)): (1, 2), frozenset((1, 2)): (3, 4), frozenset((0, 2)): (5, 0)}


def _seam_midpoint(pg: PantsGeometry, i: int, j: int) -> complex:
    a, b = (pg.hexagon.point(v) for v in _SEAM_VERTS[frozenset((i, j))])
    n = frame_along(a, b)
    return complex(n.inverse().apply_z(1j * math.exp(0.5 * pg.seam(i, j))))


def spine_segments(pg: PantsGeometry, spine: RibbonSpine) -> list[tuple[complex, complex]]:
    """Spine edges inside the front hexagon as geodesic segments."""
    if spine.kind == THETA:
        v = spine.vertices[0][0]
        return [(v, _seam_midpoint(pg, i, j)) for i, j in ((0, 1), (0, 2), (1, 2))]
    k = spine.long_index
    i, j = (m for m in range(3) if m != k)
    v1, v2 = spine.vertices[0][0], spine.vertices[1][0]
    segs = [(v1, _seam_midpoint(pg, i, k)), (v2, _seam_midpoint(pg, j, k))]
    if abs(v1 - v2) > 0:
        segs.append((v1, v2))
    return segs


def segment_distance(z: np.ndarray, a: complex, b: complex) -> np.ndarray:
    """Distance from points z to the geodesic segment [a, b]."""
    pa, pb = H2Point.from_complex(a), H2Point.from_complex(b)
    length = dist(pa, pb)
    if length < 1e-14:
        return dist_z(z, a)
    n = frame_along(pa, pb)
    w = n.apply_z(z)
    t = np.log(np.abs(w))
    inside = (t >= 0) & (t <= length)
    perp = np.arcsinh(np.abs(w.real) / w.imag)
    ends = np.minimum(dist_z(z, a), dist_z(z, b))
    return np.where(inside, perp, ends)


# --- sampling oracle --------------------------------------------------------------


@dataclass(frozen=True)
class SpineReport:
    grid_step: float
    max_ridge_deviation: float
    max_arc_deviation: float
    measured_widths: dict
    loops_closed: bool | None
    n_samples: int
    n_ridge: int
    sampled_inradius: float

    def row(self) -> tuple[float, float, float]:
        return self.grid_step, self.max_ridge_deviation, self.max_arc_deviation


def _lifted_lines(pg: PantsGeometry, word_bound: int):
    """Distinct lifts of the boundary lines under words up to word_bound letters.

    Returns endpoint arrays (a, b), boundary labels, word indices and parities.
    """
    table = pg.words(word_bound)
    sel = np.nonzero(table.lengths <= word_bound)[0]
    mats = table.mats[sel]
    out_a, out_b, labels, words = [], [], [], []
    seen = set()
    for m in range(3):
        e0, e1 = pg.lines[m].endpoints()
        for idx, mat in zip(sel, mats):
            ends = []
            for x in (e0, e1):
                if math.isinf(x):
                    y = math.inf if mat[1, 0] == 0 else mat[0, 0] / mat[1, 0]
                else:
                    den = mat[1, 0] * x + mat[1, 1]
                    y = math.inf if den == 0 else (mat[0, 0] * x + mat[0, 1]) / den
                ends.append(math.inf if abs(y) > 1e9 else y)
            lo, hi = sorted(ends, key=lambda v: (math.isinf(v), v))
            key = (round(lo, 7), round(hi, 7) if math.isfinite(hi) else "inf")
            if key in seen:
                continue
            seen.add(key)
            out_a.append(lo)
            out_b.append(hi)
            labels.append(m)
            words.append(idx)
    return np.array(out_a), np.array(out_b), np.array(labels), np.array(words)


def _grid(pg: PantsGeometry, h: float) -> np.ndarray:
    edge_pts = []
    for k in range(6):
        a, b = pg.hexagon.point(k), pg.hexagon.point(k + 1)
        n = frame_along(a, b)
        ts = np.linspace(0.0, dist(a, b), 400)
        edge_pts.append(n.inverse().apply_z(1j * np.exp(ts)))
    pts = np.concatenate(edge_pts)
    x0, x1 = pts.real.min(), pts.real.max()
    y0, y1 = pts.imag.min(), pts.imag.max()
    rows = []
    y = y0
    while y <= y1:
        xs = np.arange(x0, x1 + h * y, h * y)
        rows.append(xs + 1j * y)
        y *= math.exp(h)
    z = np.concatenate(rows)
    return z[pg.contains(z)]


def _circular_clusters(values: np.ndarray, period: float, gap: float) -> list[tuple[float, float]]:
    """Split points on a circle into clusters separated by gaps larger than ``gap``."""
    v = np.sort(np.mod(values, period))
    if v.size == 0:
        return []
    diffs = np.diff(np.concatenate([v, [v[0] + period]]))
    big = np.nonzero(diffs > gap)[0]
    if big.size == 0:
        return [(0.0, period)]
    clusters = []
    for n, b in enumerate(big):
        nb = big[(n + 1) % big.size]
        start = v[(b + 1) % v.size]
        end = v[nb]
        if end < start:
            end += period
        clusters.append((start, end))
    return clusters


def _circ_diff(a: float, b: float, period: float) -> float:
    d = (a - b) % period
    return min(d, period - d)


def verify_spine(pg: PantsGeometry, spine: RibbonSpine, gridStep: float, word_bound: int = 4) -> SpineReport:
    """Compare the spine with the cut locus measured on a grid of the realized pants.

    Grid points of the front hexagon (mirrored for the back sheet) are
    classified by their nearest boundary lift; points whose two nearest lifts
    are within ``gridStep`` of each other are ridge-adjacent.  Their feet on the
    nearest boundary trace the band arcs, and their positions trace the spine.
    """
    h = float(gridStep)
    z = _grid(pg, h)
    la, lb, labels, words = _lifted_lines(pg, word_bound)
    d = line_dist_z(z[:, None], la[None, :], lb[None, :])
    order = np.argsort(d, axis=1)
    first, second = order[:, 0], order[:, 1]
    d1 = d[np.arange(z.size), first]
    d2 = d[np.arange(z.size), second]
    sampled_inradius = float(d1.max())
    # arcs use a band of width 2h so that every leaf near the ridge is seen;
    # ridge positions are checked on the narrower band of width h
    ridge = (d2 - d1) <= 2.0 * h
    narrow = ((d2 - d1) <= h)[ridge]
    zr = z[ridge]
    near = labels[first[ridge]]
    part = labels[second[ridge]]
    # feet on the nearest lift, mapped to boundary coordinates
    feet = np.empty(zr.size)
    table = pg.words(word_bound)
    widx = words[first[ridge]]
    for w in np.unique(widx):
        sel = widx == w
        mat = table.mats[w]
        det = np.linalg.det(mat)
        inv = np.array([[mat[1, 1], -mat[0, 1]], [-mat[1, 0], mat[0, 0]]]) / det
        pre = _apply_words(inv[None], np.array([table.lengths[w]]), zr[sel])[0]
        for m in range(3):
            sm = near[sel] == m
            if sm.any():
                feet[np.nonzero(sel)[0][sm]] = pg.boundary_coordinate(m, table.lengths[w] % 2, pre[sm])
    segs = spine_segments(pg, spine)
    zn = zr[narrow]
    ridge_dev = np.min([segment_distance(zn, a, b) for a, b in segs], axis=0) if zn.size else np.zeros(0)

    max_arc = 0.0
    measured: dict = {}
    loops_closed: bool | None = None
    for i in range(3):
        ell = spine.lengths[i]
        for partner in range(3):
            sel = (near == i) & (part == partner)
            vals = np.concatenate([feet[sel], np.mod(-feet[sel], ell)])
            clusters = _circular_clusters(vals, ell, 8.0 * h)
            for arc in spine.boundary_arcs[i]:
                if arc.partner != partner or arc.length <= 0:
                    continue
                if not clusters:
                    max_arc = max(max_arc, arc.length)
                    continue
                best = min(clusters, key=lambda c: _circ_diff(0.5 * (c[0] + c[1]), arc.center, ell))
                start, end = best
                if end - start >= ell - 1e-12:
                    dev = abs(ell - arc.length)
                else:
                    dev = max(
                        _circ_diff(start, arc.center - 0.5 * arc.length, ell),
                        _circ_diff(end, arc.center + 0.5 * arc.length, ell),
                    )
                max_arc = max(max_arc, dev)
                measured.setdefault(arc.edge, []).append(min(end - start, ell))
    if spine.kind != THETA:
        k = spine.long_index
        closed = []
        for i in (m for m in range(3) if m != k):
            sel = (near == i) & (part == k)
            vals = np.concatenate([feet[sel], np.mod(-feet[sel], spine.lengths[i])])
            cl = _circular_clusters(vals, spine.lengths[i], 8.0 * h)
            closed.append(len(cl) == 1 and cl[0][1] - cl[0][0] >= spine.lengths[i] - 4.0 * h)
        loops_closed = all(closed)
    return SpineReport(
        grid_step=h,
        max_ridge_deviation=float(ridge_dev.max()) if ridge_dev.size else 0.0,
        max_arc_deviation=float(max_arc),
        measured_widths={k: float(np.mean(v)) for k, v in measured.items()},
        loops_closed=loops_closed,
        n_samples=int(z.size),
        n_ridge=int(zn.size),
        sampled_inradius=sampled_inradius,
    )
