from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graftflat.deflate import deflate
from graftflat.errors import InconsistentWidths
from graftflat.experiments import Params, run_slimness
from graftflat.fixtures import chain_genus3, generic_genus2, random_grafted, symmetric_genus2
from graftflat.graft import length_of_lamination
from graftflat.inflate import FlatSeed, convergence_experiment, inflate, inflation_ray, loglog_slope


def _fn_vector(g):
    return np.array(g.fn.lengths + g.fn.twists + g.mu.weights)


@pytest.mark.parametrize("make", [symmetric_genus2, generic_genus2, chain_genus3])
def test_inflate_inverts_deflate_on_fixtures(make):
    g = make()
    back = inflate(FlatSeed(deflate(g)[0]))
    assert np.max(np.abs(_fn_vector(back) - _fn_vector(g))) <= 1e-9
    assert back.fn.decomposition == g.fn.decomposition


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_round_trip_on_random_theta_configs(seed, genus):
    g = random_grafted(genus, np.random.default_rng(seed), full_support=True, theta_spines=True)
    back = inflate(FlatSeed(deflate(g)[0]))
    assert np.max(np.abs(_fn_vector(back) - _fn_vector(g))) <= 1e-9


def test_perturbed_width_rejected():
    flat, _ = deflate(generic_genus2())
    arcs = list(flat.arcs)
    arcs[1] = replace(arcs[1], length=arcs[1].length * 1.01)
    with pytest.raises(InconsistentWidths):
        inflate(FlatSeed(flat.with_arcs(arcs)))


def test_displaced_arc_rejected():
    flat, _ = deflate(generic_genus2())
    arcs = list(flat.arcs)
    k = next(k for k, a in enumerate(arcs) if a.circle % 2 == 0)
    arcs[k] = replace(arcs[k], start=arcs[k].start + 0.05)
    with pytest.raises(InconsistentWidths):
        inflate(FlatSeed(flat.with_arcs(arcs)))


def test_wrong_partner_rejected():
    flat, _ = deflate(generic_genus2())
    arcs = list(flat.arcs)
    arcs[0], arcs[1] = replace(arcs[0], partner=arcs[1].partner), replace(arcs[1], partner=arcs[0].partner)
    with pytest.raises(InconsistentWidths):
        inflate(FlatSeed(flat.with_arcs(arcs)))


def test_unit_seed_has_unit_area():
    seed = FlatSeed(deflate(generic_genus2())[0])
    assert seed.k == pytest.approx(math.sqrt(2.0 + 2.5 * 0.8 + 3.0 * 1.2))
    assert seed.unit().flat.area() == pytest.approx(1.0)


@given(st.floats(0.05, 2.0))
def test_inflation_ray_scales_fn_data(t):
    g = generic_genus2()
    gt = inflation_ray(FlatSeed(deflate(g)[0]), t)
    assert np.allclose(gt.fn.lengths, np.array(g.fn.lengths) / t)
    assert np.allclose(gt.fn.twists, np.array(g.fn.twists) / t)
    assert np.allclose(gt.mu.weights, np.array(g.mu.weights) / t)
    assert length_of_lamination(gt.fn, gt.mu) == pytest.approx(length_of_lamination(g.fn, g.mu) / t**2)


@pytest.mark.parametrize("make", [generic_genus2, chain_genus3])
@pytest.mark.parametrize("t", [0.5, 0.125])
def test_ray_deflates_to_the_scaled_seed(make, t):
    """Holding twist fractions fixed, the deflated ray surface is the seed with every length divided by t."""
    flat = deflate(make())[0]
    ray = deflate(inflation_ray(FlatSeed(flat), t))[0]
    assert np.allclose(ray.lengths, np.array(flat.lengths) / t)
    assert np.allclose(ray.heights, np.array(flat.heights) / t)
    for a, b in zip(flat.arcs, ray.arcs):
        assert (a.circle, a.partner, a.edge) == (b.circle, b.partner, b.edge)
        assert b.start == pytest.approx(a.start / t, abs=1e-12)
        assert b.length == pytest.approx(a.length / t, abs=1e-12)


def test_inflation_ray_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        inflation_ray(FlatSeed(deflate(generic_genus2())[0]), 0.0)


@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_loglog_slope_recovers_power_laws(power, c):
    x = np.array([1.0, 0.5, 0.25, 0.125])
    assert loglog_slope(x, c * x**power) == pytest.approx(power, abs=1e-9)


def test_convergence_rows_are_normalized():
    seed = FlatSeed(deflate(symmetric_genus2())[0])
    rows = convergence_experiment(seed, (1.0, 0.5), 40, 0.05, 0)
    assert [r["t"] for r in rows] == [1.0, 0.5]
    for r in rows:
        assert r["k"] == pytest.approx(math.sqrt(r["lXlambda"]))
        assert r["maxAbsLower"] <= r["maxAbs"] <= r["maxAbsUpper"] + 1e-12


def test_slimness_along_the_ray_is_order_one_over_k():
    """slim * k is the largest pants inradius at lengths l / t: bounded, non-increasing as t -> 0."""
    res = run_slimness(Params(ts=(1.0, 0.5, 0.25, 0.125, 0.0625)))
    prod = [r["slimTimesK"] for r in res.rows]
    assert prod == pytest.approx([r["maxInradius"] for r in res.rows], abs=1e-12)
    assert all(b <= a + 1e-12 for a, b in zip(prod, prod[1:]))
    # long boundaries: the pants inradius tends to that of the ideal triangle
    assert all(p > 0.5 * math.log(3.0) for p in prod)
    assert prod[-1] - 0.5 * math.log(3.0) < 1e-3


def test_distortion_constant_is_stable_along_the_ray():
    """maxAbsUpper <= C / sqrt(l_X(lambda)) with the fitted C within 30% across the ray."""
    seed = FlatSeed(deflate(symmetric_genus2())[0])
    rows = convergence_experiment(seed, (1.0, 0.5, 0.25, 0.125), 500, 0.02, 0)
    cs = np.array([r["maxAbsUpper"] * math.sqrt(r["lXlambda"]) for r in rows])
    assert np.all(np.abs(cs / cs.mean() - 1.0) <= 0.3), cs
