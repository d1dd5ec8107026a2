"""Inflation: recover the grafted surface from its labelled flat surface, and rays toward it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .deflate import FlatComplex, deflate, distortion_sample, slimness_check
from .errors import InconsistentWidths
from .graft import GraftedComplex, WeightedMulticurve, length_of_lamination, normalize_flat_unit
from .ortho import pants_spine
from .pants import FNSurface

WIDTH_TOL = 1e-9


@dataclass(frozen=True)
class FlatSeed:
    """A labelled flat surface (arcs remember their pants, slot and band)."""

    flat: FlatComplex

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise InconsistentWidths("flat surface has zero area")

    @property
    def k(self) -> float:
        return math.sqrt(self.flat.area())

    def unit(self) -> FlatSeed:
        f = self.flat
        return FlatSeed(FlatComplex(f.decomposition, f.lengths, f.heights, f.arcs, f.scale / self.k))


def _pants_spines(f: FlatComplex) -> list:
    dec = f.decomposition
    return [pants_spine(*(f.lengths[dec.slot_curve[(p, i)][0]] for i in range(3))) for p in range(dec.n_pants)]


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= WIDTH_TOL * max(1.0, abs(b))


def _twists(f: FlatComplex) -> tuple[float, ...]:
    """Check the arcs against the pants relations and read off the gluing offsets.

    Each arc must have the width forced by the boundary lengths of its pants
    and be paired with the other end of its band.  On a bottom circle its
    centre sits at the spine coordinate s; on a top circle at tau - s, which
    determines tau.
    """
    dec = f.decomposition
    spines = _pants_spines(f)
    seen = set()
    twists: list[float | None] = [None] * len(f.lengths)
    for k, a in enumerate(f.arcs):
        spine = spines[a.pants]
        if not (0 <= a.slot < 3 and 0 <= a.index < len(spine.boundary_arcs[a.slot])):
            raise InconsistentWidths(f"arc {k} carries an unknown label")
        ref = spine.boundary_arcs[a.slot][a.index]
        e, side = dec.slot_curve[(a.pants, a.slot)]
        if a.circle != 2 * e + side or a.edge != ref.edge:
            raise InconsistentWidths(f"arc {k} lies on the wrong circle or band")
        if not _close(a.length, ref.length):
            raise InconsistentWidths(
                f"arc {k}: width {a.length} violates the pants relations (expected {ref.length})"
            )
        b = f.arcs[a.partner]
        if (b.pants, b.slot, b.index) != (a.pants, *spine.partner_arc(a.slot, a.index)):
            raise InconsistentWidths(f"arc {k} is not paired with the other end of its band")
        if side == 0:
            if not _close(a.center, ref.center):
                raise InconsistentWidths(f"arc {k} is displaced from its seam-foot position")
        else:
            tau = a.center + ref.center
            if twists[e] is None:
                twists[e] = tau
            elif not _close(tau, twists[e]):
                raise InconsistentWidths(f"arcs on curve {e} disagree on the gluing offset")
        seen.add((a.pants, a.slot, a.index))
    expected = sum(len(sp.boundary_arcs[i]) for sp in spines for i in range(3))
    if len(seen) != expected or len(f.arcs) != expected:
        raise InconsistentWidths("arc labels do not cover every band end exactly once")
    return tuple(float(t) for t in twists)  # type: ignore[arg-type]


def inflate(seed: FlatSeed) -> GraftedComplex:
    """Grafted surface whose deflation is the seed (inverse of ``deflate`` on its image)."""
    f = seed.flat
    twists = _twists(f)
    fn = FNSurface(f.decomposition, tuple(f.lengths), twists)
    return GraftedComplex(fn, WeightedMulticurve(tuple(f.heights)), f.scale)


def inflation_ray(seed: FlatSeed, t: float) -> GraftedComplex:
    """Gr(X(t), mu / t): lengths, twists and weights divided by t (twist fractions fixed)."""
    if not t > 0:
        raise ValueError("t must be positive")
    g = inflate(seed)
    fn = g.fn.scaled(1.0 / t)
    return GraftedComplex(fn, g.mu.scaled(1.0 / t), g.scale)


CONVERGENCE_COLUMNS = ("t", "k", "lXlambda", "maxAbs", "maxAbsLower", "maxAbsUpper", "surjSlack", "slim")


def convergence_experiment(
    seed: FlatSeed,
    ts,
    nPairs: int,
    netStep: float,
    rng_seed: int = 0,
) -> list[dict[str, float]]:
    """Distortion of the deflation map along the inflation ray, each surface at unit flat area."""
    rows = []
    for t in ts:
        g = inflation_ray(seed, t)
        ell = length_of_lamination(g.fn, g.mu)
        unit = normalize_flat_unit(g)
        _, D = deflate(unit)
        stats = distortion_sample(D, nPairs, netStep, np.random.default_rng(rng_seed))
        rows.append(
            {
                "t": float(t),
                "k": math.sqrt(ell) * g.scale,
                "lXlambda": ell,
                "maxAbs": stats.maxAbs,
                "maxAbsLower": stats.maxAbsLower,
                "maxAbsUpper": stats.maxAbsUpper,
                "surjSlack": stats.surjSlack,
                "slim": slimness_check(unit),
            }
        )
    return rows


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
