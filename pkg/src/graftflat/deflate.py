"""Deflation of a fully grafted surface to a half-translation surface.

Every pants is collapsed onto its spine: each band of leaves becomes a single
segment, so the two boundary arcs it sweeps are glued to each other.  What is
left is the union of the cylinders, glued along their boundary circles by
piecewise isometries.

Flat coordinates.  Circle 2e + side is the bottom (side 0, v = 0) or top
(side 1, v = a_e) boundary of cylinder e.  Arc positions use the cylinder
coordinate u, which equals the boundary coordinate s on side 0 and
tau_e - s on side 1.  Arc starts are stored without reduction mod the
circumference, so the real twist tau_e (the marking) can be read back from the
top circle.  All stored values are unscaled; ``scale`` multiplies lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import DegenerateSpine, InconsistentGluing, PartialSupport
from .graft import GraftedComplex, GraftedNet, cylinder_distance, sample_points
from .net import DEFAULT_MAX_NODES, Attachment, DistanceNet, check_budget
from .ortho import FIGURE_EIGHT, RibbonSpine, classify, inradius, pants_spine
from .pants import PantsDecomposition
from .points import CurvePoint, CylinderPoint, PantsPoint, SurfacePoint

SPINE_TOL = 1e-9
LENGTH_TOL = 1e-9


@dataclass(frozen=True)
class FlatArc:
    circle: int
    start: float
    length: float
    partner: int
    pants: int
    slot: int
    index: int  # position among the spine arcs of (pants, slot)
    edge: int

    @property
    def end(self) -> float:
        return self.start + self.length

    @property
    def center(self) -> float:
        return self.start + 0.5 * self.length


@dataclass(frozen=True)
class FlatComplex:
    """Cylinders of circumference lengths[e] and height heights[e], glued along arcs."""

    decomposition: PantsDecomposition
    lengths: tuple[float, ...]
    heights: tuple[float, ...]
    arcs: tuple[FlatArc, ...]
    scale: float = 1.0

    @property
    def genus(self) -> int:
        return self.decomposition.genus

    @property
    def n_circles(self) -> int:
        return 2 * len(self.lengths)

    @property
    def circumferences(self) -> tuple[float, ...]:
        return tuple(self.scale * x for x in self.lengths)

    @property
    def scaled_heights(self) -> tuple[float, ...]:
        return tuple(self.scale * x for x in self.heights)

    def area(self) -> float:
        return float(self.scale**2 * sum(c * h for c, h in zip(self.lengths, self.heights)))

    @cached_property
    def circle_arcs(self) -> tuple[tuple[int, ...], ...]:
        """Arc ids on each circle in cyclic order of u."""
        out: list[list[int]] = [[] for _ in range(self.n_circles)]
        for k, a in enumerate(self.arcs):
            out[a.circle].append(k)
        return tuple(
            tuple(sorted(ids, key=lambda k: np.mod(self.arcs[k].start, self.lengths[self.arcs[k].circle // 2])))
            for ids in out
        )

    def reverses(self, k: int) -> bool:
        """Whether the pairing of arc k reverses u-parameters (same-side circles)."""
        a, b = self.arcs[k], self.arcs[self.arcs[k].partner]
        return a.circle % 2 == b.circle % 2

    def pair_parameter(self, k: int, x):
        """Arc parameter x in [0, 1] on arc k -> parameter on its partner."""
        x = np.asarray(x, dtype=float)
        return 1.0 - x if self.reverses(k) else x

    def locate(self, circle: int, u: float) -> tuple[int, float]:
        """(arc id, parameter) of the circle point at coordinate u."""
        ell = self.lengths[circle // 2]
        for k in self.circle_arcs[circle]:
            a = self.arcs[k]
            x = np.mod(u - a.start, ell)
            if x <= a.length + 1e-12:
                return k, float(min(x / a.length, 1.0)) if a.length > 0 else 0.0
            if ell - x <= 1e-12:
                return k, 0.0
        raise InconsistentGluing(f"no arc covers u = {u} on circle {circle}")

    def partner_point(self, circle: int, u: float) -> tuple[int, float]:
        k, x = self.locate(circle, u)
        p = self.arcs[k].partner
        y = float(self.pair_parameter(k, x))
        b = self.arcs[p]
        return b.circle, b.start + y * b.length

    def with_arcs(self, arcs) -> FlatComplex:
        return replace(self, arcs=tuple(arcs))


@dataclass(frozen=True, eq=False)
class DeflationMap:
    source: GraftedComplex
    target: FlatComplex
    spines: tuple[RibbonSpine, ...]


def _flat_arcs(g: GraftedComplex, spines: tuple[RibbonSpine, ...]) -> list[FlatArc]:
    dec = g.fn.decomposition
    index: dict[tuple[int, int, int], int] = {}
    raw = []
    for p, sp in enumerate(spines):
        for i in range(3):
            e, side = dec.slot_curve[(p, i)]
            tau = g.fn.twists[e]
            for a, arc in enumerate(sp.boundary_arcs[i]):
                start = arc.start if side == 0 else tau - arc.center - 0.5 * arc.length
                index[(p, i, a)] = len(raw)
                raw.append((2 * e + side, start, arc.length, p, i, a, arc.edge))
    out = []
    for circle, start, length, p, i, a, edge in raw:
        j, b = spines[p].partner_arc(i, a)
        out.append(FlatArc(circle, float(start), float(length), index[(p, j, b)], p, i, a, edge))
    return out


def deflate(g: GraftedComplex) -> tuple[FlatComplex, DeflationMap]:
    """Collapse every pants along its orthogeodesic foliation."""
    if len(g.mu.support) != len(g.mu.weights):
        raise PartialSupport("deflation needs a positive weight on every decomposition curve")
    spines = []
    for p in range(g.fn.decomposition.n_pants):
        ls = g.fn.pants_lengths(p)
        kind, _ = classify(*ls, tol=SPINE_TOL * max(ls))
        if kind == FIGURE_EIGHT:
            raise DegenerateSpine(f"pants {p} has a figure-eight spine {ls}")
        spines.append(pants_spine(*ls))
    spines_t = tuple(spines)
    flat = FlatComplex(
        g.fn.decomposition,
        tuple(g.fn.lengths),
        tuple(g.mu.weights),
        tuple(_flat_arcs(g, spines_t)),
        g.scale,
    )
    return flat, DeflationMap(g, flat, spines_t)


def deflate_point(D: DeflationMap, p: SurfacePoint) -> CylinderPoint:
    """Image of a grafted-surface point on the flat surface.

    Cylinder points are fixed.  A pants point goes to the foot of its leaf: the
    closest point on the pants boundary, found among the three boundary lines
    of its hexagon sheet (seam reflections never bring another lift closer).
    """
    if isinstance(p, CylinderPoint):
        return p
    g = D.source
    if isinstance(p, CurvePoint):
        return CylinderPoint(p.curve, p.u, 0.0)
    if isinstance(p, PantsPoint):
        pg = g.geometry.pants[p.pants]
        i = int(np.argmin(pg.boundary_distances([p.z])[:, 0]))
        s = float(pg.boundary_coordinate(i, p.sheet, p.z))
        e, side = g.fn.decomposition.slot_curve[(p.pants, i)]
        u = float(g.geometry.side_coordinate(e, side, s))
        return CylinderPoint(e, u, 0.0 if side == 0 else g.mu.weights[e])
    raise TypeError(f"not a surface point: {p!r}")


# --- cone angles ---------------------------------------------------------------


@dataclass(frozen=True)
class Singularity:
    """Class of arc junctions glued to one point; angle is pi per junction."""

    junctions: tuple[tuple[int, float], ...]  # (circle, u mod circumference)

    @property
    def angle(self) -> float:
        return math.pi * len(self.junctions)


def _junction_tables(f: FlatComplex) -> tuple[dict, dict]:
    """next/prev arc on each circle, with junction coordinates checked for closure."""
    nxt, prv = {}, {}
    for circle, ids in enumerate(f.circle_arcs):
        ell = f.lengths[circle // 2]
        if not ids:
            raise InconsistentGluing(f"circle {circle} carries no arcs")
        total = sum(f.arcs[k].length for k in ids)
        if abs(total - ell) > LENGTH_TOL * max(1.0, ell):
            raise InconsistentGluing(f"arcs on circle {circle} cover {total}, circumference {ell}")
        for a, b in zip(ids, ids[1:] + ids[:1]):
            gap = np.mod(f.arcs[b].start - f.arcs[a].end + 0.5 * ell, ell) - 0.5 * ell
            if abs(gap) > LENGTH_TOL * max(1.0, ell):
                raise InconsistentGluing(f"arcs {a} and {b} do not meet on circle {circle}")
            nxt[a], prv[b] = b, a
    return nxt, prv


def cone_audit(f: FlatComplex) -> list[Singularity]:
    """Walk the arc-endpoint identification cycles and report each cone point."""
    for k, a in enumerate(f.arcs):
        b = f.arcs[a.partner]
        if f.arcs[a.partner].partner != k:
            raise InconsistentGluing(f"pairing of arc {k} is not an involution")
        if abs(a.length - b.length) > LENGTH_TOL * max(1.0, a.length):
            raise InconsistentGluing(f"arc {k} and its partner have different lengths")
    nxt, prv = _junction_tables(f)
    # endpoints are (arc, 0 = start / 1 = end); a junction is named by the arc starting there
    seen: set[int] = set()
    out = []
    for first in range(len(f.arcs)):
        if first in seen:
            continue
        members = []
        junction, leave = first, (first, 0)
        for _ in range(2 * len(f.arcs) + 1):
            if junction in seen:
                raise InconsistentGluing(f"junction on arc {junction} lies on two cycles")
            seen.add(junction)
            c = f.arcs[junction]
            members.append((c.circle, float(np.mod(c.start, f.lengths[c.circle // 2]))))
            arc, t = leave
            p = f.arcs[arc].partner
            tp = 1 - t if f.reverses(arc) else t
            junction = p if tp == 0 else nxt[p]
            leave = (prv[p], 1) if tp == 0 else (nxt[p], 0)
            if junction == first:
                if (p, tp) != (prv[first], 1):
                    raise InconsistentGluing("identification cycle closes with reversed orientation")
                break
        else:
            raise InconsistentGluing("identification cycle does not close")
        out.append(Singularity(tuple(members)))
    excess = sum(s.angle - 2.0 * math.pi for s in out)
    target = 2.0 * math.pi * (2 * f.genus - 2)
    if abs(excess - target) > 1e-9:
        raise InconsistentGluing(f"total cone excess {excess} differs from {target}")
    return out


# --- flat distance net -----------------------------------------------------------


def _arc_subdivisions(length: float, net_step: float) -> int:
    if length <= 0:
        return 1
    need = max(1.0, length / net_step)
    return int(2 ** math.ceil(math.log2(need) - 1e-12))


class FlatNet(DistanceNet):
    """Distance oracle on a flat complex.

    Every arc is split into equal pieces (the same count on both arcs of a
    pairing); subdivision points that are glued together, by a pairing or at a
    junction, are merged into one node.  Edges are exact flat distances inside
    each cylinder, minimized over windings.
    """

    def __init__(self, f: FlatComplex, net_step: float, max_nodes: int = DEFAULT_MAX_NODES):
        if not net_step > 0:
            raise ValueError("netStep must be positive")
        self.f = f
        self.net_step = float(net_step)
        arcs = f.arcs
        counts = [_arc_subdivisions(f.scale * min(a.length, arcs[a.partner].length), net_step) for a in arcs]
        offsets = np.concatenate([[0], np.cumsum([m + 1 for m in counts])])
        n_pos = int(offsets[-1])
        check_budget(n_pos // 2, max_nodes)
        parent = list(range(n_pos))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a: int, b: int) -> None:
            parent[find(a)] = find(b)

        pos_circle = np.empty(n_pos, dtype=int)
        pos_u = np.empty(n_pos)
        for k, a in enumerate(arcs):
            m = counts[k]
            ids = offsets[k] + np.arange(m + 1)
            pos_circle[ids] = a.circle
            pos_u[ids] = a.start + a.length * np.arange(m + 1) / m
            p = a.partner
            for j in range(m + 1):
                jp = m - j if f.reverses(k) else j
                union(int(offsets[k] + j), int(offsets[p] + jp))
        nxt, _ = _junction_tables(f)
        for k, b in nxt.items():
            union(int(offsets[k] + counts[k]), int(offsets[b]))
        roots = np.array([find(i) for i in range(n_pos)])
        _, node_of = np.unique(roots, return_inverse=True)
        n = int(node_of.max()) + 1
        check_budget(n, max_nodes)
        self.node_of_pos = node_of
        self.pos_circle = pos_circle
        self.pos_u = pos_u
        self.arc_offsets = offsets
        self.arc_counts = counts
        w = np.full((n, n), np.inf)
        self.circle_pos = [np.flatnonzero(pos_circle == c) for c in range(f.n_circles)]
        for e in range(len(f.lengths)):
            both = np.concatenate([self.circle_pos[2 * e], self.circle_pos[2 * e + 1]])
            v = np.where(pos_circle[both] % 2 == 0, 0.0, f.heights[e])
            d = f.scale * cylinder_distance(pos_u[both][:, None] - pos_u[both][None, :], v[:, None] - v[None, :], f.lengths[e])
            nodes = node_of[both]
            # several positions may share a node: keep the smallest weight per node pair
            order = np.lexsort((d.ravel(), np.repeat(nodes, nodes.size), np.tile(nodes, nodes.size)))
            rows = np.repeat(nodes, nodes.size)[order]
            cols = np.tile(nodes, nodes.size)[order]
            vals = d.ravel()[order]
            first = np.ones(vals.size, dtype=bool)
            first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            w[rows[first], cols[first]] = np.minimum(w[rows[first], cols[first]], vals[first])
        np.fill_diagonal(w, np.inf)
        self._solve(w)

    def _reps(self, p: SurfacePoint) -> list[tuple[int, float, float]]:
        """(cylinder, u, v) representations; boundary points also appear on the glued cylinder."""
        f = self.f
        if isinstance(p, CurvePoint):
            p = CylinderPoint(p.curve, p.u, 0.0)
        if not isinstance(p, CylinderPoint):
            raise TypeError(f"flat points are cylinder points, got {p!r}")
        out = [(p.curve, float(p.u), float(p.v))]
        h = f.heights[p.curve]
        side = 0 if p.v <= 1e-12 * max(1.0, h) else (1 if p.v >= h - 1e-12 * max(1.0, h) else None)
        if side is not None:
            circle, u = f.partner_point(2 * p.curve + side, p.u)
            e2 = circle // 2
            out.append((e2, u, 0.0 if circle % 2 == 0 else f.heights[e2]))
        return out

    def attach(self, points: list) -> list[Attachment]:
        f = self.f
        out = []
        for p in points:
            nodes, dists = [], []
            for e, u, v in self._reps(p):
                both = np.concatenate([self.circle_pos[2 * e], self.circle_pos[2 * e + 1]])
                pv = np.where(self.pos_circle[both] % 2 == 0, 0.0, f.heights[e])
                nodes.append(self.node_of_pos[both])
                dists.append(f.scale * cylinder_distance(self.pos_u[both] - u, pv - v, f.lengths[e]))
            out.append(Attachment(np.concatenate(nodes), np.concatenate(dists)))
        return out

    def direct(self, p: SurfacePoint, q: SurfacePoint) -> float:
        best = math.inf
        for e, u, v in self._reps(p):
            for e2, u2, v2 in self._reps(q):
                if e == e2:
                    best = min(best, self.f.scale * float(cylinder_distance(u - u2, v - v2, self.f.lengths[e])))
        return best

    def distances_to_set(self, ys: list, zs: list) -> np.ndarray:
        """Upper bound on the distance from each y to the finite set zs."""
        f = self.f
        field = np.full(self.n_nodes, np.inf)
        for a in self.attach(list(zs)):
            field = np.minimum(field, (self.apsp[a.nodes] + a.dists[:, None]).min(axis=0))
        zreps: dict[int, list[tuple[float, float]]] = {}
        for z in zs:
            for e, u, v in self._reps(z):
                zreps.setdefault(e, []).append((u, v))
        zarr = {e: np.array(r) for e, r in zreps.items()}
        out = np.empty(len(ys))
        for k, (y, a) in enumerate(zip(ys, self.attach(list(ys)))):
            best = float((a.dists + field[a.nodes]).min())
            for e, u, v in self._reps(y):
                if e in zarr:
                    d = cylinder_distance(zarr[e][:, 0] - u, zarr[e][:, 1] - v, f.lengths[e])
                    best = min(best, f.scale * float(d.min()))
            out[k] = best
        return out


def flat_distance(f: FlatComplex, p: SurfacePoint, q: SurfacePoint, netStep: float) -> tuple[float, float]:
    """(lower, upper) bounds on the flat distance between p and q."""
    return FlatNet(f, netStep).distance(p, q)


def sample_flat_points(f: FlatComplex, n: int, rng: np.random.Generator) -> list[CylinderPoint]:
    areas = np.array([c * h for c, h in zip(f.lengths, f.heights)])
    cyl = rng.choice(len(areas), size=n, p=areas / areas.sum())
    u = rng.random(n)
    v = rng.random(n)
    return [CylinderPoint(int(e), float(u[k] * f.lengths[e]), float(v[k] * f.heights[e])) for k, e in enumerate(cyl)]


# --- distortion ------------------------------------------------------------------


@dataclass(frozen=True)
class DistortionStats:
    """Interval bounds on |d_flat(Dp, Dq) - d_Gr(p, q)| over sampled pairs.

    ``maxAbs`` is the point estimate from the two upper bounds; ``maxAbsLower``
    and ``maxAbsUpper`` bracket the true maximum over the sample.
    """

    maxAbs: float
    maxAbsLower: float
    maxAbsUpper: float
    mean: float
    surjSlack: float
    lipschitzExcess: float
    rows: np.ndarray  # (nPairs, 4): grafted lower, upper, flat lower, upper


def distortion_sample(
    D: DeflationMap,
    nPairs: int,
    netStep: float,
    rng: np.random.Generator | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> DistortionStats:
    """Sampled distortion of the deflation map, with surjectivity slack."""
    rng = np.random.default_rng(0) if rng is None else rng
    g, f = D.source, D.target
    ps = sample_points(g, nPairs, rng)
    qs = sample_points(g, nPairs, rng)
    gnet = GraftedNet(g, netStep, max_nodes)
    fnet = FlatNet(f, netStep, max_nodes)
    glo, gup = gnet.distance_pairs(ps, qs)
    dps = [deflate_point(D, p) for p in ps]
    dqs = [deflate_point(D, q) for q in qs]
    flo, fup = fnet.distance_pairs(dps, dqs)
    point = np.abs(fup - gup)
    lower = np.maximum.reduce([np.zeros_like(flo), flo - gup, glo - fup])
    upper = np.maximum(fup - glo, gup - flo)
    ys = sample_flat_points(f, nPairs, rng)
    slack = fnet.distances_to_set(ys, dps + dqs)
    return DistortionStats(
        maxAbs=float(point.max()),
        maxAbsLower=float(lower.max()),
        maxAbsUpper=float(upper.max()),
        mean=float(point.mean()),
        surjSlack=float(slack.max()),
        lipschitzExcess=float((fup - gup).max()),
        rows=np.column_stack([glo, gup, flo, fup]),
    )


def slimness_check(g: GraftedComplex) -> float:
    """Largest inradius of a pants of g, in the metric of g."""
    dec = g.fn.decomposition
    return float(max(inradius(*g.fn.pants_lengths(p)) for p in range(dec.n_pants)) * g.scale)


# --- text export -----------------------------------------------------------------

FORMAT_HEADER = "graftflat-flat 1"


def export_flat(f: FlatComplex) -> str:
    """Plain-text surface file: decomposition, cylinders and arc pairings."""
    lines = [FORMAT_HEADER, f"genus {f.genus}", f"scale {f.scale!r}"]
    for e, ((p, i), (q, j)) in enumerate(f.decomposition.curves):
        lines.append(f"curve {e} {p} {i} {q} {j}")
    for e, (c, h) in enumerate(zip(f.lengths, f.heights)):
        lines.append(f"cylinder {e} {c!r} {h!r}")
    for k, a in enumerate(f.arcs):
        lines.append(f"arc {k} {a.circle} {a.start!r} {a.length!r} {a.partner} {a.pants} {a.slot} {a.index} {a.edge}")
    return "\n".join(lines) + "\n"


def import_flat(text: str) -> FlatComplex:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows or " ".join(rows[0]) != FORMAT_HEADER:
        raise InconsistentGluing("not a flat surface file")
    genus, scale = 0, 1.0
    curves, cyls, arcs = {}, {}, {}
    for r in rows[1:]:
        if r[0] == "genus":
            genus = int(r[1])
        elif r[0] == "scale":
            scale = float(r[1])
        elif r[0] == "curve":
            curves[int(r[1])] = ((int(r[2]), int(r[3])), (int(r[4]), int(r[5])))
        elif r[0] == "cylinder":
            cyls[int(r[1])] = (float(r[2]), float(r[3]))
        elif r[0] == "arc":
            arcs[int(r[1])] = FlatArc(int(r[2]), float(r[3]), float(r[4]), *map(int, r[5:10]))
        else:
            raise InconsistentGluing(f"unknown record {r[0]!r}")
    dec = PantsDecomposition(genus, tuple(curves[e] for e in sorted(curves)))
    return FlatComplex(
        dec,
        tuple(cyls[e][0] for e in sorted(cyls)),
        tuple(cyls[e][1] for e in sorted(cyls)),
        tuple(arcs[k] for k in sorted(arcs)),
        scale,
    )
