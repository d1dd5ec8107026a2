"""Experiment drivers: each returns CSV rows plus named pass/fail checks."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import cantor
from .deflate import cone_audit, deflate, distortion_sample, slimness_check
from .fixtures import generic_genus2, random_grafted, symmetric_genus2
from .graft import (
    GraftedComplex,
    GraftedNet,
    WeightedMulticurve,
    area,
    area_closed_form,
    area_monte_carlo,
    collapse,
    length_of_lamination,
    normalize_flat_unit,
    sample_points,
)
from .hyp2 import H2Geodesic, H2Isometry, hexagon_residuals, right_hexagon, trapezium_area_check
from .errors import InvalidRegion
from .inflate import FlatSeed, convergence_experiment, inflate, inflation_ray, loglog_slope
from .ortho import DUMBBELL, THETA, classify, inradius, pants_spine, verify_spine
from .pants import build_pants, systole_certificate
from .points import CylinderPoint


@dataclass
class Result:
    name: str
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)
    notes: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


@dataclass(frozen=True)
class Params:
    """Experiment parameters after config parsing (see cli for the file format)."""

    seed: int = 0
    nPairs: int = 500
    netStep: float = 0.02
    ts: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    scales: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    gridStep: float = 0.01
    samples: int = 1_000_000
    configs: int | None = None  # area: 20 per genus, round-trip: 50
    depths: tuple[int, ...] = (6, 8, 10, 12)
    surface: GraftedComplex | None = None
    jobs: int = 1


def _map(fn: Callable, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _spawn(seed: int, n: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n)


# --- area ----------------------------------------------------------------------------


def _area_row(item) -> dict:
    genus, k, ss, samples = item
    rng = np.random.default_rng(ss)
    g = random_grafted(genus, rng)
    parts, closed = area(g), area_closed_form(g)
    mc = area_monte_carlo(g, samples, rng)
    return {
        "genus": genus,
        "config": k,
        "partsArea": parts,
        "closedForm": closed,
        "absError": abs(parts - closed),
        "mcArea": mc,
        "mcRelError": abs(mc - closed) / closed,
    }


def run_area(p: Params) -> Result:
    res = Result("area", ("genus", "config", "partsArea", "closedForm", "absError", "mcArea", "mcRelError"))
    items = []
    n_cfg = p.configs or 20
    seqs = _spawn(p.seed, 2 * n_cfg)
    for gi, genus in enumerate((2, 3)):
        for k in range(n_cfg):
            items.append((genus, k, seqs[gi * n_cfg + k], p.samples))
    if p.surface is not None:
        rng = np.random.default_rng(p.seed)
        g = p.surface
        parts, closed = area(g), area_closed_form(g)
        mc = area_monte_carlo(g, p.samples, rng)
        res.rows.append(
            {"genus": g.genus, "config": -1, "partsArea": parts, "closedForm": closed,
             "absError": abs(parts - closed), "mcArea": mc, "mcRelError": abs(mc - closed) / closed}
        )
    res.rows += _map(_area_row, items, p.jobs)
    res.checks["parts sum equals closed form to 1e-9"] = all(r["absError"] <= 1e-9 for r in res.rows)
    res.checks["Monte-Carlo within 1%"] = all(r["mcRelError"] <= 0.01 for r in res.rows)
    return res


# --- spine ---------------------------------------------------------------------------


def run_spine(p: Params) -> Result:
    res = Result("spine", ("lengths", "kind", "edge", "closedWidth", "measuredWidth", "absDiff", "tolerance"))
    h = p.gridStep
    ok_widths = True
    for ls in ((2.0, 3.0, 4.0), (1.0, 1.0, 5.0)):
        spine = pants_spine(*ls)
        rep = verify_spine(build_pants(*ls), spine, h)
        for edge in spine.edges:
            measured = rep.measured_widths.get(edge.id, math.nan)
            diff = abs(measured - edge.width)
            ok_widths &= diff <= 2 * h
            res.rows.append(
                {"lengths": "/".join(f"{x:g}" for x in ls), "kind": spine.kind, "edge": edge.id,
                 "closedWidth": edge.width, "measuredWidth": measured, "absDiff": diff, "tolerance": 2 * h}
            )
        res.notes[f"arc deviation {ls}"] = rep.max_arc_deviation
        if spine.kind == DUMBBELL:
            res.checks["dumbbell loops close"] = bool(rep.loops_closed)
    res.checks["measured widths within 2 gridStep"] = ok_widths
    res.checks["(2,3,4) widths are (0.5, 1.5, 2.5)"] = np.allclose(
        sorted(pants_spine(2.0, 3.0, 4.0).widths()), [0.5, 1.5, 2.5], atol=1e-12
    )
    res.checks["(1,1,5) is a dumbbell"] = classify(1.0, 1.0, 5.0)[0] == DUMBBELL
    below, above = pants_spine(1.0, 2.0, 3.0 - 1e-9), pants_spine(1.0, 2.0, 3.0 + 1e-9)
    res.checks["widths continuous across l3 = l1 + l2"] = (
        below.kind == THETA
        and above.kind == DUMBBELL
        and np.allclose(sorted(below.widths()), sorted(above.widths()), atol=1e-6)
        and abs(below.inradius - above.inradius) <= 1e-6
    )
    return res


# --- cone audit ----------------------------------------------------------------------


def run_cone_audit(p: Params) -> Result:
    res = Result("cone-audit", ("singularity", "angleOverPi", "junctions"))
    g = p.surface or generic_genus2()
    flat, _ = deflate(g)
    sing = cone_audit(flat)
    for k, s in enumerate(sing):
        res.rows.append({"singularity": k, "angleOverPi": s.angle / math.pi, "junctions": len(s.junctions)})
    excess = sum(s.angle - 2 * math.pi for s in sing)
    n_expected = 4 * g.genus - 4
    res.checks[f"{n_expected} singularities of angle 3 pi"] = len(sing) == n_expected and all(
        abs(s.angle - 3 * math.pi) <= 1e-12 for s in sing
    )
    res.checks["total excess equals 2 pi (2g - 2)"] = abs(excess - 2 * math.pi * (2 * g.genus - 2)) <= 1e-9
    return res


# --- deflation is 1-Lipschitz --------------------------------------------------------


def run_deflate_lipschitz(p: Params) -> Result:
    res = Result("deflate-lipschitz", ("pair", "grLower", "grUpper", "flatLower", "flatUpper", "excess"))
    g = p.surface or generic_genus2()
    _, D = deflate(g)
    stats = distortion_sample(D, p.nPairs, p.netStep, np.random.default_rng(p.seed))
    slack = 4 * p.netStep
    violations = 0
    for k, (glo, gup, flo, fup) in enumerate(stats.rows):
        excess = fup - gup
        violations += excess > slack
        res.rows.append(
            {"pair": k, "grLower": glo, "grUpper": gup, "flatLower": flo, "flatUpper": fup, "excess": excess}
        )
    res.notes["violations"] = violations
    res.checks["d_flat(Dp, Dq) <= d_Gr(p, q) + 4 netStep"] = violations == 0
    return res


# --- convergence rate ---------------------------------------------------------------


def run_deflate_rate(p: Params) -> Result:
    cols = ("t", "k", "lXlambda", "maxAbs", "maxAbsLower", "maxAbsUpper", "surjSlack", "slim", "slope")
    res = Result("deflate-rate", cols)
    g = p.surface or symmetric_genus2()
    seed = FlatSeed(deflate(g)[0])
    rows = convergence_experiment(seed, p.ts, p.nPairs, p.netStep, p.seed)
    slope = loglog_slope([r["t"] for r in rows], [r["maxAbsUpper"] for r in rows]) if len(rows) > 1 else math.nan
    for r in rows:
        res.rows.append({**r, "slope": slope})
    ups = [r["maxAbsUpper"] for r in rows]
    decreasing = all(t2 < t1 for t1, t2 in zip(p.ts, p.ts[1:]))
    if decreasing and len(rows) > 1:
        res.checks["distortion non-increasing beyond net slack"] = all(
            b <= a + 4 * p.netStep for a, b in zip(ups, ups[1:])
        )
        res.checks["log-log slope in [0.7, 1.3]"] = 0.7 <= slope <= 1.3
    res.notes["slope"] = slope
    if len(rows) > 1:
        res.notes["point-estimate slope"] = loglog_slope([r["t"] for r in rows], [r["maxAbs"] for r in rows])
    return res


# --- degrafting ---------------------------------------------------------------------


def _degraft_row(item) -> dict:
    g0, s, ps0, qs0, step = item
    g = GraftedComplex(g0.fn, g0.mu.scaled(s), g0.scale)
    x = GraftedComplex(g0.fn, WeightedMulticurve.zero(len(g0.mu.weights)), g0.scale)
    ps, qs = _squash(ps0, s), _squash(qs0, s)
    _, gup = GraftedNet(g, step).distance_pairs(ps, qs)
    _, xup = GraftedNet(x, step).distance_pairs([collapse(g, q) for q in ps], [collapse(g, q) for q in qs])
    gap = gup - xup
    ell = length_of_lamination(g.fn, g.mu)
    return {"s": s, "lXmu": ell, "supGap": float(gap.max()), "minGap": float(gap.min()),
            "ratio": float(gap.max()) / ell}


def _squash(points: list, s: float) -> list:
    """Move cylinder points to the same relative height in cylinders scaled by s."""
    return [CylinderPoint(q.curve, q.u, q.v * s) if isinstance(q, CylinderPoint) else q for q in points]


def run_degraft(p: Params) -> Result:
    """Sup of d_Gr - d_X as the weights shrink.

    One sample of pairs is drawn on the unscaled grafted surface and reused for
    every s (cylinder points keep their relative height), so the sup estimates
    share their random numbers.
    """
    res = Result("degraft", ("s", "lXmu", "supGap", "minGap", "ratio", "slope"))
    g0 = p.surface or generic_genus2()
    rng = np.random.default_rng(p.seed)
    ps, qs = sample_points(g0, p.nPairs, rng), sample_points(g0, p.nPairs, rng)
    rows = _map(_degraft_row, [(g0, s, ps, qs, p.netStep) for s in p.scales], p.jobs)
    tail = rows[-3:]
    slope = loglog_slope([r["s"] for r in tail], [r["supGap"] for r in tail]) if len(tail) > 1 else math.nan
    for r in rows:
        res.rows.append({**r, "slope": slope})
    res.checks["sup gap linear in s (slope within 30%)"] = 0.7 <= slope <= 1.3
    res.checks["d_Gr >= d_X - 4 netStep"] = all(r["minGap"] >= -4 * p.netStep for r in rows)
    res.notes["slope"] = slope
    return res


# --- intersection bound --------------------------------------------------------------


def run_intersection(p: Params) -> Result:
    cols = ("path", "dX", "dGr", "weightedCrossings", "bound", "extensionExcess")
    res = Result("intersection", cols)
    g = p.surface or symmetric_genus2()
    eps = systole_certificate(g.fn)
    x = GraftedComplex(g.fn, WeightedMulticurve.zero(len(g.mu.weights)), g.scale)
    xnet, gnet = GraftedNet(x, p.netStep), GraftedNet(g, p.netStep)
    rng = np.random.default_rng(p.seed)
    ell = length_of_lamination(g.fn, g.mu)
    bound = 2.0 / eps * ell
    slack = 4 * p.netStep
    weights = np.array(g.mu.weights)
    ps, qs = sample_points(x, p.nPairs, rng), sample_points(x, p.nPairs, rng)
    _, xup = xnet.distance_pairs(ps, qs)
    _, gup = gnet.distance_pairs(ps, qs)
    viol_bound = viol_ext = 0
    for k, (a, b) in enumerate(zip(ps, qs)):
        nodes = xnet.geodesic_nodes(a, b)
        crossings = xnet.crossings(nodes) if nodes is not None else np.zeros_like(weights, dtype=int)
        i_alpha = float(weights @ crossings) * g.scale
        ext = gup[k] - (xup[k] + i_alpha)
        viol_bound += i_alpha > bound + slack
        viol_ext += ext > slack
        res.rows.append(
            {"path": k, "dX": xup[k], "dGr": gup[k], "weightedCrossings": i_alpha, "bound": bound,
             "extensionExcess": ext}
        )
    res.notes["epsilon"] = eps
    res.checks["weighted crossings <= (2/eps) l_X(mu) + slack"] = viol_bound == 0
    res.checks["d_Gr <= d_X + i(alpha, mu) + slack"] = viol_ext == 0
    return res


# --- slimness ------------------------------------------------------------------------


def run_slimness(p: Params) -> Result:
    res = Result("slimness", ("t", "k", "slim", "slimTimesK", "maxInradius"))
    g = p.surface or symmetric_genus2()
    seed = FlatSeed(deflate(g)[0])
    for t in p.ts:
        gt = inflation_ray(seed, t)
        k = math.sqrt(length_of_lamination(gt.fn, gt.mu)) * gt.scale
        unit = normalize_flat_unit(gt)
        slim = slimness_check(unit)
        top = max(inradius(*gt.fn.pants_lengths(q)) for q in range(gt.fn.decomposition.n_pants))
        res.rows.append({"t": t, "k": k, "slim": slim, "slimTimesK": slim * k, "maxInradius": top})
    prod = [r["slimTimesK"] for r in res.rows]
    res.notes["spread"] = max(prod) - min(prod)
    res.checks["slimness times k constant to 1e-9"] = max(prod) - min(prod) <= 1e-9
    return res


# --- hyperbolic lemmas ---------------------------------------------------------------


def _random_trapezium(rng: np.random.Generator):
    """Disjoint geodesics r (the imaginary axis moved by a random isometry) and l."""
    a = rng.uniform(0.2, 3.0)
    b = a * math.exp(rng.uniform(0.3, 3.0))
    move = H2Isometry.translation(rng.uniform(-2, 2)) @ H2Isometry.dilation(math.exp(rng.uniform(-1, 1)))
    r = move.apply_geodesic(H2Geodesic.from_endpoints(0.0, math.inf))
    l = move.apply_geodesic(H2Geodesic.from_endpoints(a, b))
    return r, l


def run_hexagon_lemmas(p: Params) -> Result:
    res = Result("hexagon-lemmas", ("kind", "config", "value", "bound", "margin"))
    rng = np.random.default_rng(p.seed)
    n = 0
    worst = math.inf
    while n < 100:
        r, l = _random_trapezium(rng)
        t0 = rng.uniform(-1.5, 1.5)
        delta = rng.uniform(0.01, 0.5)
        try:
            value, bound = trapezium_area_check(r, l, t0, delta)
        except InvalidRegion:
            continue
        worst = min(worst, value - bound)
        res.rows.append({"kind": "trapezium", "config": n, "value": value, "bound": bound, "margin": value - bound})
        n += 1
    resid = 0.0
    for k in range(100):
        a = rng.uniform(0.05, 6.0, 3)
        r = max(hexagon_residuals(right_hexagon(*a)).values())
        resid = max(resid, r)
        res.rows.append({"kind": "hexagon", "config": k, "value": r, "bound": 1e-10, "margin": 1e-10 - r})
    res.checks["trapezium area >= 2 delta h(t0) (margin >= -1e-6)"] = worst >= -1e-6
    res.checks["hexagon residuals < 1e-10"] = resid < 1e-10
    return res


# --- cantor --------------------------------------------------------------------------


def run_cantor(p: Params) -> Result:
    res = Result("cantor", ("depth", "pushforwardError", "netError"))
    m = cantor.CantorMeasure.ternary()
    rows = cantor.cantor_rows(m, p.depths)
    res.rows = rows
    exact = all(
        cantor.Graft1D(m, d).translated_measure() + cantor.Graft1D(m, d).residual() == 1 for d in p.depths
    )
    res.checks["|U'| = 1 exactly"] = exact and cantor.Graft1D(m, max(p.depths)).translated_measure_limit() == 1
    errs = [r["pushforwardError"] for r in rows]
    at12 = [r["pushforwardError"] for r in rows if r["depth"] == 12]
    res.checks["pushforward error < 1e-3 at depth 12"] = bool(at12) and at12[0] < 1e-3
    res.checks["pushforward error decreasing with depth"] = all(b < a for a, b in zip(errs, errs[1:]))
    g = cantor.Graft1D(m, max(p.depths))
    iso = 0.0
    for gap in g.gaps():
        lo, hi = (float(v) for v in gap.translated)
        ys = [lo + (hi - lo) * c for c in (0.1, 0.5, 0.9)]
        ks = [float(cantor.kappa(g, y)) for y in ys]
        iso = max(iso, abs((ks[2] - ks[0]) - (ys[2] - ys[0])), abs(ks[1] - (ys[1] - float(gap.f_a))))
    res.notes["gap isometry error"] = iso
    res.checks["kappa isometric on gaps to 1e-12"] = iso <= 1e-12
    middle = cantor.kappa(g, Fraction(5, 6) + Fraction(1, 7))
    res.checks["kappa(5/6 + s) = 1/3 + s"] = middle == Fraction(1, 3) + Fraction(1, 7)
    return res


# --- round trip ----------------------------------------------------------------------


def run_round_trip(p: Params) -> Result:
    res = Result("round-trip", ("config", "maxAbsError"))
    rng = np.random.default_rng(p.seed)
    worst = 0.0
    for k in range(p.configs or 50):
        g = random_grafted(2, rng, full_support=True, theta_spines=True)
        back = inflate(FlatSeed(deflate(g)[0]))
        a = np.array(g.fn.lengths + g.fn.twists + g.mu.weights)
        b = np.array(back.fn.lengths + back.fn.twists + back.mu.weights)
        err = float(np.max(np.abs(a - b)))
        worst = max(worst, err)
        res.rows.append({"config": k, "maxAbsError": err})
    res.checks["inflate after deflate is the identity to 1e-9"] = worst <= 1e-9
    return res


EXPERIMENTS: dict[str, Callable[[Params], Result]] = {
    "area": run_area,
    "spine": run_spine,
    "cone-audit": run_cone_audit,
    "deflate-lipschitz": run_deflate_lipschitz,
    "deflate-rate": run_deflate_rate,
    "degraft": run_degraft,
    "intersection": run_intersection,
    "slimness": run_slimness,
    "hexagon-lemmas": run_hexagon_lemmas,
    "cantor": run_cantor,
    "round-trip": run_round_trip,
}
