"""Grafted surfaces Gr(X, mu) for weighted multicurves on decomposition curves.

Each curve e with weight a_e > 0 is cut open and a flat cylinder of
circumference l_e and height a_e is inserted.  Side A of the curve (its first
listed slot) is glued to the cylinder bottom v = 0 and side B to the top
v = a_e, with the cylinder coordinate u equal to the curve coordinate.

Point coordinates are stored unscaled; ``scale`` multiplies every length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import InvalidDecomposition
from .hyp2 import H2Point
from .net import DEFAULT_MAX_NODES, Attachment, DistanceNet, check_budget
from .pants import FNSurface, SurfaceGeometry, build_surface, lifted_distances
from .points import CurvePoint, CylinderPoint, PantsPoint, SurfacePoint


@dataclass(frozen=True)
class WeightedMulticurve:
    """Nonnegative weights (cylinder heights) on the decomposition curves."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not (math.isfinite(a) and a >= 0) for a in self.weights):
            raise ValueError("weights must be finite and nonnegative")

    @classmethod
    def zero(cls, n_curves: int) -> WeightedMulticurve:
        return cls((0.0,) * n_curves)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(e for e, a in enumerate(self.weights) if a > 0)

    @property
    def is_zero(self) -> bool:
        return not self.support

    def scaled(self, factor: float) -> WeightedMulticurve:
        return WeightedMulticurve(tuple(factor * a for a in self.weights))


@dataclass(frozen=True)
class Cylinder:
    curve: int
    circumference: float
    height: float

    @property
    def area(self) -> float:
        return self.circumference * self.height


def length_of_lamination(fn: FNSurface, mu: WeightedMulticurve) -> float:
    """Hyperbolic length of mu: sum of a_e * l_e."""
    return float(sum(a * l for a, l in zip(mu.weights, fn.lengths)))


@dataclass(frozen=True)
class GraftedComplex:
    fn: FNSurface
    mu: WeightedMulticurve
    scale: float = 1.0

    def __post_init__(self) -> None:
        if len(self.mu.weights) != self.fn.decomposition.n_curves:
            raise InvalidDecomposition("one weight per decomposition curve required")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be positive")

    @property
    def geometry(self) -> SurfaceGeometry:
        return build_surface(self.fn)

    @property
    def genus(self) -> int:
        return self.fn.genus

    def height(self, e: int) -> float:
        return self.mu.weights[e]

    @property
    def cylinders(self) -> tuple[Cylinder, ...]:
        s = self.scale
        return tuple(Cylinder(e, s * self.fn.lengths[e], s * self.mu.weights[e]) for e in self.mu.support)

    @cached_property
    def hyperbolic_pieces(self) -> tuple[frozenset[int], ...]:
        """Pants grouped into connected components of the complement of the cylinders."""
        dec = self.fn.decomposition
        parent = list(range(dec.n_pants))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e, ((p, _), (q, _)) in enumerate(dec.curves):
            if self.mu.weights[e] == 0:
                parent[find(p)] = find(q)
        groups: dict[int, set[int]] = {}
        for p in range(dec.n_pants):
            groups.setdefault(find(p), set()).add(p)
        return tuple(frozenset(g) for g in sorted(groups.values(), key=min))

    def pants_area(self, p: int) -> float:
        """Area of pants p from its realized hexagon angles (Gauss-Bonnet, doubled)."""
        angles = self.geometry.pants[p].hexagon.angles()
        return 2.0 * (4.0 * math.pi - float(sum(angles))) * self.scale**2


def graft(fn: FNSurface, mu: WeightedMulticurve) -> GraftedComplex:
    return GraftedComplex(fn, mu, 1.0)


def area(g: GraftedComplex) -> float:
    """Total area summed over pieces."""
    hyp = sum(g.pants_area(p) for p in range(g.fn.decomposition.n_pants))
    return float(hyp + sum(c.area for c in g.cylinders))


def area_closed_form(g: GraftedComplex) -> float:
    chi = 2 - 2 * g.genus
    return g.scale**2 * (2.0 * math.pi * abs(chi) + length_of_lamination(g.fn, g.mu))


def flat_area(g: GraftedComplex) -> float:
    return float(sum(c.area for c in g.cylinders))


def rescale(g: GraftedComplex, k: float) -> GraftedComplex:
    if not (math.isfinite(k) and k > 0):
        raise ValueError("rescaling factor must be positive")
    return replace(g, scale=g.scale * k)


def normalize_flat_unit(g: GraftedComplex) -> GraftedComplex:
    """Rescale so that the cylinders have total area 1."""
    a = flat_area(g)
    if a <= 0:
        raise ValueError("zero lamination has no flat part")
    return rescale(g, 1.0 / math.sqrt(a))


def collapse(g: GraftedComplex, p: SurfacePoint) -> SurfacePoint:
    """The collapsing map: cylinders are crushed onto their core curves."""
    if isinstance(p, CylinderPoint):
        return CurvePoint(p.curve, float(np.mod(p.u, g.fn.lengths[p.curve])))
    return p


# --- sampling ------------------------------------------------------------------


def sample_points(g: GraftedComplex, n: int, rng: np.random.Generator) -> list[SurfacePoint]:
    """n points drawn from the area measure of the grafted surface."""
    dec = g.fn.decomposition
    weights = [2.0 * math.pi] * dec.n_pants + [c.area / g.scale**2 for c in g.cylinders]
    probs = np.array(weights) / sum(weights)
    piece = rng.choice(len(weights), size=n, p=probs)
    out: list[SurfacePoint | None] = [None] * n
    for k in range(len(weights)):
        idx = np.flatnonzero(piece == k)
        if idx.size == 0:
            continue
        if k < dec.n_pants:
            sheets, z = g.geometry.pants[k].sample(idx.size, rng)
            for j, i in enumerate(idx):
                out[i] = PantsPoint(k, int(sheets[j]), H2Point.from_complex(z[j]))
        else:
            e = g.mu.support[k - dec.n_pants]
            u = rng.random(idx.size) * g.fn.lengths[e]
            v = rng.random(idx.size) * g.mu.weights[e]
            for j, i in enumerate(idx):
                out[i] = CylinderPoint(e, float(u[j]), float(v[j]))
    return out  # type: ignore[return-value]


def area_monte_carlo(g: GraftedComplex, n: int, rng: np.random.Generator) -> float:
    """Area estimate: pants areas by rejection sampling, cylinders exactly."""
    per = max(1, n // g.fn.decomposition.n_pants)
    hyp = sum(pg.monte_carlo_area(per, rng) for pg in g.geometry.pants)
    return float(g.scale**2 * hyp + flat_area(g))


# --- distance net --------------------------------------------------------------


def node_count(length: float, net_step: float) -> int:
    """Dyadic node count so that nets at smaller steps refine coarser ones."""
    need = max(4.0, length / net_step)
    return int(2 ** math.ceil(math.log2(need) - 1e-12))


def cylinder_distance(du, dv, circumference: float) -> np.ndarray:
    """Flat distance on a cylinder, minimized over windings."""
    du = np.mod(np.asarray(du, dtype=float), circumference)
    du = np.minimum(du, circumference - du)
    return np.hypot(du, np.asarray(dv, dtype=float))


class GraftedNet(DistanceNet):
    """Distance oracle on a grafted surface.

    Nodes sit on both sides (A and B) of every decomposition curve at the same
    curve coordinates.  Unweighted curves get zero-length crossing edges; a
    weighted curve contributes its cylinder.  Pants edges are exact pants
    distances.
    """

    def __init__(self, g: GraftedComplex, net_step: float, max_nodes: int = DEFAULT_MAX_NODES):
        if not net_step > 0:
            raise ValueError("netStep must be positive")
        self.g = g
        self.net_step = float(net_step)
        fn = g.fn
        dec = fn.decomposition
        geo = g.geometry
        counts = [node_count(fn.lengths[e] * g.scale, net_step) for e in range(dec.n_curves)]
        check_budget(2 * sum(counts), max_nodes)
        curve_of, side_of, u_of = [], [], []
        self.side_nodes: dict[tuple[int, int], np.ndarray] = {}
        for e, m in enumerate(counts):
            u = np.arange(m) * fn.lengths[e] / m
            for side in (0, 1):
                start = len(curve_of)
                self.side_nodes[(e, side)] = np.arange(start, start + m)
                curve_of += [e] * m
                side_of += [side] * m
                u_of += list(u)
        self.node_curve = np.array(curve_of)
        self.node_side = np.array(side_of)
        self.node_u = np.array(u_of)
        n = self.node_curve.size
        w = np.full((n, n), np.inf)
        # pants blocks
        self.pants_nodes: list[np.ndarray] = []
        self.pants_sheet: list[np.ndarray] = []
        self.pants_z: list[np.ndarray] = []
        for p in range(dec.n_pants):
            pg = geo.pants[p]
            ids, sheets, zs = [], [], []
            for i in range(3):
                e, side = dec.slot_curve[(p, i)]
                nodes = self.side_nodes[(e, side)]
                sh, z = pg.boundary_points(i, geo.side_coordinate(e, side, self.node_u[nodes]))
                ids.append(nodes)
                sheets.append(sh)
                zs.append(z)
            ids_a = np.concatenate(ids)
            sh_a = np.concatenate(sheets)
            z_a = np.concatenate(zs)
            self.pants_nodes.append(ids_a)
            self.pants_sheet.append(sh_a)
            self.pants_z.append(z_a)
            d = g.scale * lifted_distances(pg, z_a, sh_a, z_a, sh_a)
            d = np.minimum(d, d.T)
            block = w[np.ix_(ids_a, ids_a)]
            w[np.ix_(ids_a, ids_a)] = np.minimum(block, d)
        # curve blocks
        for e in range(dec.n_curves):
            a_nodes, b_nodes = self.side_nodes[(e, 0)], self.side_nodes[(e, 1)]
            if g.mu.weights[e] == 0:
                w[a_nodes, b_nodes] = 0.0
                w[b_nodes, a_nodes] = 0.0
            else:
                both = np.concatenate([a_nodes, b_nodes])
                v = np.where(self.node_side[both] == 0, 0.0, g.mu.weights[e])
                d = g.scale * cylinder_distance(
                    self.node_u[both][:, None] - self.node_u[both][None, :],
                    v[:, None] - v[None, :],
                    fn.lengths[e],
                )
                w[np.ix_(both, both)] = np.minimum(w[np.ix_(both, both)], d)
        np.fill_diagonal(w, np.inf)
        self._solve(w)

    # query points are reduced to (piece, local) representations
    def _reps(self, p: SurfacePoint) -> list[tuple]:
        g = self.g
        if isinstance(p, PantsPoint):
            return [("P", p.pants, p.sheet, p.z)]
        if isinstance(p, CurvePoint) and g.mu.weights[p.curve] > 0:
            p = CylinderPoint(p.curve, p.u, 0.0)
        if isinstance(p, CylinderPoint):
            if g.mu.weights[p.curve] == 0:
                return self._reps(CurvePoint(p.curve, p.u))
            return [("C", p.curve, float(p.u), float(p.v))]
        if isinstance(p, CurvePoint):
            dec = g.fn.decomposition
            out = []
            for side in (0, 1):
                pants, slot = dec.curves[p.curve][side]
                s = g.geometry.side_coordinate(p.curve, side, p.u)
                sh, z = g.geometry.pants[pants].boundary_points(slot, [s])
                out.append(("P", pants, int(sh[0]), complex(z[0])))
            return out
        raise TypeError(f"not a surface point: {p!r}")

    def attach(self, points: list) -> list[Attachment]:
        reps = [self._reps(p) for p in points]
        # batch pants representations per pants
        pants_queries: dict[int, list[tuple[int, int, int, complex]]] = {}
        for k, rs in enumerate(reps):
            for j, r in enumerate(rs):
                if r[0] == "P":
                    pants_queries.setdefault(r[1], []).append((k, j, r[2], r[3]))
        pants_d: dict[tuple[int, int], np.ndarray] = {}
        for pid, qs in pants_queries.items():
            pg = self.g.geometry.pants[pid]
            z = np.array([q[3] for q in qs])
            sh = np.array([q[2] for q in qs])
            d = self.g.scale * lifted_distances(pg, z, sh, self.pants_z[pid], self.pants_sheet[pid])
            for row, q in enumerate(qs):
                pants_d[(q[0], q[1])] = d[row]
        out = []
        for k, rs in enumerate(reps):
            nodes, dists = [], []
            for j, r in enumerate(rs):
                if r[0] == "P":
                    nodes.append(self.pants_nodes[r[1]])
                    dists.append(pants_d[(k, j)])
                else:
                    e, u, v = r[1], r[2], r[3]
                    a_nodes, b_nodes = self.side_nodes[(e, 0)], self.side_nodes[(e, 1)]
                    both = np.concatenate([a_nodes, b_nodes])
                    nv = np.where(self.node_side[both] == 0, 0.0, self.g.mu.weights[e])
                    d = self.g.scale * cylinder_distance(self.node_u[both] - u, nv - v, self.g.fn.lengths[e])
                    nodes.append(both)
                    dists.append(d)
            out.append(Attachment(np.concatenate(nodes), np.concatenate(dists)))
        return out

    def direct(self, p: SurfacePoint, q: SurfacePoint) -> float:
        best = math.inf
        for rp in self._reps(p):
            for rq in self._reps(q):
                if rp[0] != rq[0] or rp[1] != rq[1]:
                    continue
                if rp[0] == "P":
                    pg = self.g.geometry.pants[rp[1]]
                    d = lifted_distances(pg, [rp[3]], [rp[2]], [rq[3]], [rq[2]])[0, 0]
                else:
                    d = cylinder_distance(rp[2] - rq[2], rp[3] - rq[3], self.g.fn.lengths[rp[1]])
                best = min(best, self.g.scale * float(d))
        return best

    def crossings(self, nodes: list[int]) -> np.ndarray:
        """Per-curve count of side changes (crossing or cylinder edges) along a node path."""
        out = np.zeros(self.g.fn.decomposition.n_curves, dtype=int)
        for a, b in zip(nodes[:-1], nodes[1:]):
            e = self.node_curve[a]
            if e == self.node_curve[b] and self.node_side[a] != self.node_side[b]:
                out[e] += 1
        return out


def grafted_distance(
    g: GraftedComplex, p: SurfacePoint, q: SurfacePoint, netStep: float, max_nodes: int = DEFAULT_MAX_NODES
) -> tuple[float, float]:
    """(lower, upper) bounds on the grafted distance between p and q."""
    return GraftedNet(g, netStep, max_nodes).distance(p, q)
