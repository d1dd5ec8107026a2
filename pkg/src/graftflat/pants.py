"""Hyperbolic surfaces from Fenchel-Nielsen data over a pants decomposition.

Each pair of pants is the double of a right-angled hexagon.  The front sheet is
the hexagon H itself; the back sheet is its mirror image, stored in the same
H-coordinates.  The universal cover is tiled by images of H under the group
generated by the reflections in the three seams, and the even words form the
deck group.  Distances between points of one pair of pants are minima over
such words.

Boundary coordinates: on boundary i the origin is the foot of the seam toward
the lowest-indexed other boundary, and the coordinate s increases along the
orientation induced from the pants (interior on the left of the front sheet).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from .errors import InvalidDecomposition
from .hyp2 import (
    H2Geodesic,
    H2Isometry,
    H2Point,
    Hexagon,
    common_perpendicular,
    dist,
    dist_z,
    frame_along,
    reflection,
    right_hexagon,
    signed_distance_z,
)
from .points import PantsPoint

Slot = tuple[int, int]

# hexagon side index of boundary i and of the seam joining slots (i, j)
BOUNDARY_SIDE = (0, 2, 4)
SEAM_SIDE = {frozenset((0, 1)): 1, frozenset((1, 2)): 3, frozenset((0, 2)): 5}
# vertex indices of (origin foot, other foot) on each boundary
FOOT_VERTICES = ((1, 0), (2, 3), (5, 4))
# +1 when the walk from origin foot to other foot follows the boundary orientation
DIRECTIONS = (-1, 1, -1)


@dataclass(frozen=True)
class PantsDecomposition:
    """Combinatorics: each curve joins two (pants, slot) sides; loops are allowed."""

    genus: int
    curves: tuple[tuple[Slot, Slot], ...]

    def __post_init__(self) -> None:
        g = self.genus
        if g < 2:
            raise InvalidDecomposition("genus must be at least 2")
        n_pants = 2 * g - 2
        if len(self.curves) != 3 * g - 3:
            raise InvalidDecomposition(f"genus {g} needs {3 * g - 3} curves, got {len(self.curves)}")
        seen: set[Slot] = set()
        for pair in self.curves:
            for p, i in pair:
                if not (0 <= p < n_pants and 0 <= i < 3):
                    raise InvalidDecomposition(f"slot ({p}, {i}) out of range")
                if (p, i) in seen:
                    raise InvalidDecomposition(f"slot ({p}, {i}) used twice")
                seen.add((p, i))
        if len(seen) != 3 * n_pants:
            raise InvalidDecomposition("some slots are not glued")
        # connectivity of the gluing graph
        parent = list(range(n_pants))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for (p, _), (q, _) in self.curves:
            parent[find(p)] = find(q)
        if len({find(p) for p in range(n_pants)}) != 1:
            raise InvalidDecomposition("gluing graph is disconnected")

    @property
    def n_pants(self) -> int:
        return 2 * self.genus - 2

    @property
    def n_curves(self) -> int:
        return 3 * self.genus - 3

    @cached_property
    def slot_curve(self) -> dict[Slot, tuple[int, int]]:
        """(pants, slot) -> (curve, side) with side 0 for the first listed slot."""
        out = {}
        for e, (a, b) in enumerate(self.curves):
            out[a] = (e, 0)
            out[b] = (e, 1)
        return out

    def partner(self, slot: Slot) -> Slot:
        e, side = self.slot_curve[slot]
        return self.curves[e][1 - side]

    @classmethod
    def theta(cls) -> PantsDecomposition:
        """Genus 2: two pants glued slot-to-slot along three curves."""
        return cls(2, (((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))))

    @classmethod
    def dumbbell(cls) -> PantsDecomposition:
        """Genus 2: each pants glued to itself along one curve, joined by a third."""
        return cls(2, (((0, 0), (0, 1)), ((0, 2), (1, 2)), ((1, 0), (1, 1))))

    @classmethod
    def chain(cls, genus: int) -> PantsDecomposition:
        """Chain decomposition: loops at both ends, alternating single and double links."""
        n = 2 * genus - 2
        curves: list[tuple[Slot, Slot]] = [((0, 0), (0, 1))]
        for j in range(n - 1):
            if j % 2 == 0:
                curves.append(((j, 2), (j + 1, 0)))
            else:
                curves.append(((j, 1), (j + 1, 0)))
                curves.append(((j, 2), (j + 1, 1)))
        curves.append(((n - 1, 1), (n - 1, 2)))
        return cls(genus, tuple(curves))


@dataclass(frozen=True)
class FNSurface:
    decomposition: PantsDecomposition
    lengths: tuple[float, ...]
    twists: tuple[float, ...]

    def __post_init__(self) -> None:
        n = self.decomposition.n_curves
        if len(self.lengths) != n or len(self.twists) != n:
            raise InvalidDecomposition(f"expected {n} lengths and twists")
        if any(not (math.isfinite(x) and x > 0) for x in self.lengths):
            raise InvalidDecomposition("lengths must be positive and finite")
        if any(not math.isfinite(x) for x in self.twists):
            raise InvalidDecomposition("twists must be finite")

    @property
    def genus(self) -> int:
        return self.decomposition.genus

    def pants_lengths(self, p: int) -> tuple[float, float, float]:
        sc = self.decomposition.slot_curve
        return tuple(self.lengths[sc[(p, i)][0]] for i in range(3))  # type: ignore[return-value]

    def scaled(self, factor: float) -> FNSurface:
        """Multiply all lengths and twists by factor (twist fractions preserved)."""
        return FNSurface(
            self.decomposition,
            tuple(factor * x for x in self.lengths),
            tuple(factor * x for x in self.twists),
        )


@dataclass(frozen=True, eq=False)
class WordTable:
    """Reduced words in the three seam reflections up to a given length."""

    mats: np.ndarray  # (K, 2, 2)
    lengths: np.ndarray  # (K,)
    displacement: np.ndarray  # (K,) distance from centre to its image

    @property
    def parity(self) -> np.ndarray:
        return self.lengths % 2


def _words(gens: list[np.ndarray], max_len: int, center: complex) -> WordTable:
    mats = [np.eye(2)]
    lens = [0]
    frontier = [(np.eye(2), -1)]
    for length in range(1, max_len + 1):
        nxt = []
        for m, prev in frontier:
            for g, gm in enumerate(gens):
                if g == prev:
                    continue
                w = m @ gm
                nxt.append((w, g))
                mats.append(w)
                lens.append(length)
        frontier = nxt
    arr = np.array(mats)
    lens_arr = np.array(lens)
    with np.errstate(all="ignore"):
        img = _apply_words(arr, lens_arr, np.array([center]))[:, 0]
        disp = np.where(img.imag > 0, dist_z(img, center), np.inf)
    return WordTable(arr, lens_arr, disp)


def _apply_words(mats: np.ndarray, lengths: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Images of points z (M,) under words (K, 2, 2); odd words act on conj(z)."""
    w = np.where((lengths % 2 == 1)[:, None], np.conj(z)[None, :], z[None, :])
    a, b = mats[:, 0, 0, None], mats[:, 0, 1, None]
    c, d = mats[:, 1, 0, None], mats[:, 1, 1, None]
    return (a * w + b) / (c * w + d)


@dataclass(frozen=True, eq=False)
class PantsGeometry:
    """A pair of pants with boundary lengths (l0, l1, l2), realized on a right-angled hexagon."""

    lengths: tuple[float, float, float]
    hexagon: Hexagon
    lines: tuple[H2Geodesic, H2Geodesic, H2Geodesic]
    frames: tuple[H2Isometry, H2Isometry, H2Isometry]
    seam_lines: dict[frozenset, H2Geodesic]
    seam_lengths: dict[frozenset, float]
    side_lines: tuple[H2Geodesic, ...]
    side_signs: tuple[float, ...]
    interior_signs: tuple[float, float, float]
    center: complex
    circumradius: float
    _word_cache: dict = field(default_factory=dict, repr=False)

    @property
    def half(self) -> tuple[float, float, float]:
        return tuple(0.5 * x for x in self.lengths)  # type: ignore[return-value]

    def seam(self, i: int, j: int) -> float:
        return self.seam_lengths[frozenset((i, j))]

    def origin_foot(self, i: int) -> H2Point:
        return self.hexagon.point(FOOT_VERTICES[i][0])

    def other_foot(self, i: int) -> H2Point:
        return self.hexagon.point(FOOT_VERTICES[i][1])

    def seam_foot_coordinate(self, i: int, j: int) -> float:
        """Boundary coordinate on boundary i of the foot of the seam toward j."""
        others = [k for k in range(3) if k != i]
        return 0.0 if j == min(others) else 0.5 * self.lengths[i]

    @cached_property
    def reflections(self) -> tuple[H2Isometry, H2Isometry, H2Isometry]:
        keys = (frozenset((0, 1)), frozenset((1, 2)), frozenset((0, 2)))
        return tuple(reflection(self.seam_lines[k]) for k in keys)  # type: ignore[return-value]

    def words(self, max_len: int) -> WordTable:
        table = self._word_cache.get("table")
        if table is None or int(table.lengths.max()) < max_len:
            gens = [r.matrix for r in self.reflections]
            table = _words(gens, max(max_len, 8), self.center)
            self._word_cache["table"] = table
        return table

    @cached_property
    def prune_thresholds(self) -> tuple[float, float]:
        """Displacement beyond which a word cannot realize a distance (even, odd parity).

        For p, q in H and any word w, d(p, w q) >= d(c, w c) - 2R, while the
        identity (even) or a single reflection (odd) gives at most 2R or
        2R + min d(c, r c).
        """
        r = self.circumradius
        refl = min(float(dist_z(complex(m.apply_z(self.center)), self.center)) for m in self.reflections)
        return 4.0 * r + 1e-9, 4.0 * r + refl + 1e-9

    # --- boundary parametrization -------------------------------------------------

    def boundary_points(self, i: int, s) -> tuple[np.ndarray, np.ndarray]:
        """(sheet, z) of boundary points with coordinates s on boundary i."""
        s = np.asarray(s, dtype=float)
        ell = self.lengths[i]
        t = np.mod(DIRECTIONS[i] * s, ell)
        back = t > 0.5 * ell
        pos = np.where(back, ell - t, t)
        z = self.frames[i].apply_z(1j * np.exp(pos))
        return back.astype(int), z

    def boundary_coordinate(self, i: int, sheet, z) -> np.ndarray:
        """Boundary coordinate on boundary i of the closest-point foot of (sheet, z)."""
        w = self.frames[i].inverse().apply_z(np.asarray(z))
        t = np.log(np.abs(w))
        sign = np.where(np.asarray(sheet) == 0, 1.0, -1.0)
        return np.mod(DIRECTIONS[i] * sign * t, self.lengths[i])

    def boundary_distances(self, z) -> np.ndarray:
        """Distances from H-positions z to the three boundary lines, shape (3, N)."""
        z = np.atleast_1d(np.asarray(z))
        out = np.empty((3, z.size))
        for i in range(3):
            w = self.frames[i].inverse().apply_z(z)
            out[i] = np.arcsinh(np.abs(w.real) / w.imag)
        return out

    def contains(self, z, tol: float = 1e-12) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z))
        ok = np.ones(z.shape, dtype=bool)
        for g, sgn in zip(self.side_lines, self.side_signs):
            ok &= sgn * signed_distance_z(z, g) >= -tol
        return ok

    def fermi_point(self, i: int, t, d) -> np.ndarray:
        """Point at distance d from boundary line i, into the hexagon, above frame position t."""
        t = np.asarray(t, dtype=float)
        d = np.asarray(d, dtype=float)
        w = np.exp(t) * (self.interior_signs[i] * np.tanh(d) + 1j / np.cosh(d))
        return self.frames[i].apply_z(w)

    def _nearest_is(self, i: int, z: np.ndarray) -> np.ndarray:
        bd = self.boundary_distances(z)
        return np.argmin(bd, axis=0) == i

    @cached_property
    def band_depths(self) -> tuple[float, float, float]:
        """Upper bounds on how far leaves from each boundary run before meeting the spine."""
        out = []
        for i in range(3):
            a = self.half[i]
            t = np.linspace(0.0, a, 257)
            lo = np.zeros_like(t)
            hi = np.ones_like(t)
            for _ in range(60):
                z = self.fermi_point(i, t, hi)
                good = self.contains(z) & self._nearest_is(i, z)
                if not good.any():
                    break
                hi = np.where(good, 2.0 * hi, hi)
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                z = self.fermi_point(i, t, mid)
                good = self.contains(z) & self._nearest_is(i, z)
                lo = np.where(good, mid, lo)
                hi = np.where(good, hi, mid)
            out.append(float(hi.max()) * 1.02 + 1e-9)
        return tuple(out)  # type: ignore[return-value]

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Uniform (area-measure) samples on the pants: (sheets, H-positions).

        Proposals are drawn in Fermi coordinates (t, d) over the boundary line of
        a randomly chosen band, with density cosh(d), and kept when the point is
        in the hexagon and closest to that boundary.
        """
        boxes = np.array([self.half[i] * math.sinh(self.band_depths[i]) for i in range(3)])
        probs = boxes / boxes.sum()
        zs: list[np.ndarray] = []
        got = 0
        while got < n:
            m = max(64, 4 * (n - got))
            band = rng.choice(3, size=m, p=probs)
            t = rng.random(m) * np.array(self.half)[band]
            d = np.arcsinh(rng.random(m) * np.sinh(np.array(self.band_depths)[band]))
            z = np.empty(m, dtype=complex)
            keep = np.zeros(m, dtype=bool)
            for i in range(3):
                sel = band == i
                if sel.any():
                    zi = self.fermi_point(i, t[sel], d[sel])
                    z[sel] = zi
                    keep[sel] = self.contains(zi) & self._nearest_is(i, zi)
            take = z[keep][: n - got]
            zs.append(take)
            got += take.size
        sheets = rng.integers(0, 2, size=n)
        return sheets, np.concatenate(zs)

    def monte_carlo_area(self, n: int, rng: np.random.Generator) -> float:
        """Monte-Carlo area of the pants from the acceptance rate of n proposals."""
        boxes = np.array([self.half[i] * math.sinh(self.band_depths[i]) for i in range(3)])
        probs = boxes / boxes.sum()
        band = rng.choice(3, size=n, p=probs)
        t = rng.random(n)
        d = np.arcsinh(rng.random(n) * np.sinh(np.array(self.band_depths)[band]))
        hits = 0
        for i in range(3):
            sel = band == i
            zi = self.fermi_point(i, t[sel] * self.half[i], d[sel])
            hits += int(np.count_nonzero(self.contains(zi) & self._nearest_is(i, zi)))
        return 2.0 * boxes.sum() * hits / n


def _hyperbolic_midpoint(p: H2Point, q: H2Point) -> complex:
    n = frame_along(p, q)
    return complex(n.inverse().apply_z(1j * math.exp(0.5 * dist(p, q))))


@lru_cache(maxsize=256)
def build_pants(l1: float, l2: float, l3: float) -> PantsGeometry:
    """Realize the pants with boundary lengths (l1, l2, l3) as a doubled right-angled hexagon."""
    lengths = (float(l1), float(l2), float(l3))
    if min(lengths) <= 0:
        raise ValueError("boundary lengths must be positive")
    raw = right_hexagon(*(0.5 * x for x in lengths))
    verts = np.array(raw.vertices)
    cx, cy = float(verts.real.mean()), float(verts.imag.mean())
    move = H2Isometry.dilation(1.0 / cy) @ H2Isometry.translation(-cx)
    moved = tuple(complex(v) for v in move.apply_z(verts))
    hexagon = Hexagon(moved, raw.sides, raw.closure_residual)
    sides = tuple(hexagon.side_geodesic(k) for k in range(6))
    inner = _hyperbolic_midpoint(hexagon.point(0), hexagon.point(3))
    side_signs = tuple(float(np.sign(signed_distance_z(inner, g))) for g in sides)
    frames = []
    interior = []
    for i in range(3):
        o, f = (hexagon.point(k) for k in FOOT_VERTICES[i])
        fr = frame_along(o, f).inverse()
        frames.append(fr)
        interior.append(float(np.sign(fr.inverse().apply_z(inner).real)))
    lines = tuple(sides[k] for k in BOUNDARY_SIDE)
    seam_lines = {key: sides[k] for key, k in SEAM_SIDE.items()}
    seam_lengths = {key: hexagon.sides[k] for key, k in SEAM_SIDE.items()}
    center = complex(1j)
    radius = float(dist_z(np.array(moved), center).max())
    return PantsGeometry(
        lengths=lengths,
        hexagon=hexagon,
        lines=lines,  # type: ignore[arg-type]
        frames=tuple(frames),  # type: ignore[arg-type]
        seam_lines=seam_lines,
        seam_lengths=seam_lengths,
        side_lines=sides,
        side_signs=side_signs,
        interior_signs=tuple(interior),  # type: ignore[arg-type]
        center=center,
        circumradius=radius,
    )


def pants_of(lengths) -> PantsGeometry:
    return build_pants(*(float(x) for x in lengths))


def lifted_distances(
    pg: PantsGeometry,
    zp,
    sheets_p,
    zq,
    sheets_q,
    word_bound: int = 8,
    stabilize: bool = True,
    max_bound: int = 14,
    tol: float = 1e-9,
) -> np.ndarray:
    """Distances in the pants between points (sheet, H-position), shape (len p, len q).

    Minimum over developed images under reduced seam-reflection words up to
    ``word_bound`` letters, with parity fixed by the sheets.  With ``stabilize``
    the bound grows (up to ``max_bound``) until the minima at two successive
    bounds of equal parity agree to ``tol``.
    """
    zp = np.atleast_1d(np.asarray(zp, dtype=complex))
    zq = np.atleast_1d(np.asarray(zq, dtype=complex))
    par = (np.atleast_1d(sheets_p)[:, None] + np.atleast_1d(sheets_q)[None, :]) % 2
    n, m = zp.size, zq.size
    best = np.full((n, m), np.inf)
    table = pg.words(max_bound if stabilize else word_bound)
    t_even, t_odd = pg.prune_thresholds
    keep = np.where(table.parity == 0, table.displacement <= t_even, table.displacement <= t_odd)
    xp, yp = zp.real[:, None, None], zp.imag[:, None, None]
    history: list[np.ndarray] = []
    length = 0
    top = word_bound
    while True:
        sel = keep & (table.lengths == length)
        if sel.any():
            imgs = _apply_words(table.mats[sel], table.lengths[sel], zq)  # (W, m)
            xi, yi = imgs.real[None], imgs.imag[None]
            mask = par == (length % 2)
            chunk = max(1, int(4_000_000 // max(1, imgs.size)))
            for s in range(0, n, chunk):
                e = min(n, s + chunk)
                q = ((xp[s:e] - xi) ** 2 + (yp[s:e] - yi) ** 2) / yi
                val = q.min(axis=1) / yp[s:e, 0]
                d = 2.0 * np.arcsinh(0.5 * np.sqrt(val))
                best[s:e] = np.where(mask[s:e], np.minimum(best[s:e], d), best[s:e])
        history.append(best.copy())
        if length >= top:
            if not stabilize or length < 2:
                break
            if np.nanmax(np.abs(history[-1] - history[-3])) <= tol or length >= max_bound:
                break
            top += 1
        length += 1
    return best


def pants_distance(pg: PantsGeometry, p: PantsPoint, q: PantsPoint, wordBound: int = 8) -> float:
    """Distance between two points of the same pants (see ``lifted_distances``)."""
    return float(lifted_distances(pg, [p.z], [p.sheet], [q.z], [q.sheet], word_bound=wordBound)[0, 0])


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    """All pants of an FN surface realized, with curve-side parametrizations.

    Curve e has sides A = curves[e][0] and B = curves[e][1]; the point with
    coordinate s on side A is identified with coordinate (twist - s) on side B.
    """

    fn: FNSurface
    pants: tuple[PantsGeometry, ...]

    @property
    def decomposition(self) -> PantsDecomposition:
        return self.fn.decomposition

    def side_coordinate(self, e: int, side: int, u):
        """Boundary coordinate on the given side of curve e of the curve point u."""
        u = np.asarray(u, dtype=float)
        ell = self.fn.lengths[e]
        return np.mod(u, ell) if side == 0 else np.mod(self.fn.twists[e] - u, ell)

    def curve_coordinate(self, e: int, side: int, s):
        """Inverse of ``side_coordinate``."""
        return self.side_coordinate(e, side, s)


@lru_cache(maxsize=64)
def build_surface(fn: FNSurface) -> SurfaceGeometry:
    return SurfaceGeometry(fn, tuple(pants_of(fn.pants_lengths(p)) for p in range(fn.decomposition.n_pants)))


def systole_lower_bound(fn: FNSurface) -> float:
    """Shortest decomposition-curve length, used as the thickness parameter."""
    return float(min(fn.lengths))


def self_arc_length(pg: PantsGeometry, i: int) -> float:
    """Length of the shortest essential arc from boundary i back to itself."""
    j, k = (m for m in range(3) if m != i)
    length, _, _ = common_perpendicular(pg.lines[i], pg.seam_lines[frozenset((j, k))])
    return 2.0 * length


def systole_certificate(fn: FNSurface) -> float:
    """Certified lower bound for the length of every closed geodesic.

    A closed geodesic is either a decomposition curve or crosses the curves; in
    the latter case it is a cyclic chain of arcs, each running inside a pants
    between two boundaries and at least as long as the seam (distinct boundaries)
    or the shortest essential self-arc (same boundary).  The bound is the
    minimum of the curve lengths and the lightest closed walk in that arc graph.
    """
    dec = fn.decomposition
    geo = build_surface(fn)
    slots = [(p, i) for p in range(dec.n_pants) for i in range(3)]
    index = {s: k for k, s in enumerate(slots)}
    n = len(slots)
    w = np.full((n, n), np.inf)
    for slot in slots:
        p2, j = dec.partner(slot)
        pg = geo.pants[p2]
        for m in range(3):
            cost = pg.seam(j, m) if m != j else self_arc_length(pg, j)
            w[index[slot], index[(p2, m)]] = min(w[index[slot], index[(p2, m)]], cost)
    dist = shortest_path(csgraph_from_dense(w, null_value=np.inf), method="D")
    cyc = np.min(w + dist.T)
    return float(min(min(fn.lengths), cyc))
