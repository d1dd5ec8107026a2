from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graftflat.errors import InvalidDecomposition
from graftflat.pants import (
    FNSurface,
    PantsDecomposition,
    build_pants,
    build_surface,
    lifted_distances,
    self_arc_length,
    systole_certificate,
)

lengths = st.floats(0.3, 5.0)


def test_standard_decompositions_are_valid():
    assert PantsDecomposition.theta().n_curves == 3
    assert PantsDecomposition.dumbbell().n_pants == 2
    for g in range(2, 6):
        dec = PantsDecomposition.chain(g)
        assert dec.n_curves == 3 * g - 3 and dec.n_pants == 2 * g - 2


@pytest.mark.parametrize(
    "curves",
    [
        (((0, 0), (1, 0)), ((0, 1), (1, 1))),  # too few curves
        (((0, 0), (1, 0)), ((0, 0), (1, 1)), ((0, 2), (1, 2))),  # slot used twice
        (((0, 0), (0, 1)), ((1, 0), (1, 1)), ((0, 2), (0, 3))),  # slot out of range
        (((0, 0), (0, 1)), ((0, 2), (0, 2)), ((1, 0), (1, 1))),  # (1, 2) never glued
    ],
)
def test_invalid_decompositions(curves):
    with pytest.raises(InvalidDecomposition):
        PantsDecomposition(2, curves)


def test_fn_surface_validation():
    with pytest.raises(InvalidDecomposition):
        FNSurface(PantsDecomposition.theta(), (1.0, 1.0), (0.0, 0.0))
    with pytest.raises(InvalidDecomposition):
        FNSurface(PantsDecomposition.theta(), (1.0, -1.0, 1.0), (0.0, 0.0, 0.0))
    fn = FNSurface(PantsDecomposition.theta(), (1.0, 2.0, 3.0), (0.5, 0.0, -1.0)).scaled(2.0)
    assert fn.lengths == (2.0, 4.0, 6.0) and fn.twists == (1.0, 0.0, -2.0)


@given(lengths, lengths, lengths)
def test_seams_match_hexagon_formula(l1, l2, l3):
    pg = build_pants(l1, l2, l3)
    a = (l1 / 2, l2 / 2, l3 / 2)
    ch, sh = math.cosh, math.sinh
    for i, j in ((0, 1), (1, 2), (0, 2)):
        k = 3 - i - j
        expected = math.acosh((ch(a[i]) * ch(a[j]) + ch(a[k])) / (sh(a[i]) * sh(a[j])))
        assert pg.seam(i, j) == pytest.approx(expected, rel=1e-10)


@given(lengths, lengths, lengths, st.integers(0, 2), st.floats(0, 1), st.floats(0.001, 0.2))
def test_boundary_is_geodesic(l1, l2, l3, i, frac, step):
    """Nearby boundary points are at distance equal to their arclength separation."""
    pg = build_pants(l1, l2, l3)
    ell = pg.lengths[i]
    eps = step * ell
    s = frac * ell
    sp, zp = pg.boundary_points(i, [s])
    sq, zq = pg.boundary_points(i, [s + eps])
    d = lifted_distances(pg, zp, sp, zq, sq)[0, 0]
    assert d == pytest.approx(eps, rel=1e-7, abs=1e-9)
    assert float(pg.boundary_coordinate(i, sp, zp)[0]) == pytest.approx(s % ell, abs=1e-9)
    assert pg.boundary_distances(zp)[i, 0] == pytest.approx(0.0, abs=1e-9)


@given(lengths, lengths, lengths)
def test_lifted_distances_symmetric(l1, l2, l3):
    pg = build_pants(l1, l2, l3)
    sheets, z = pg.sample(6, np.random.default_rng(1))
    d = lifted_distances(pg, z, sheets, z, sheets)
    assert np.allclose(d, d.T, atol=1e-9)
    assert np.allclose(np.diag(d), 0.0, atol=1e-9)


def test_pants_area_monte_carlo():
    pg = build_pants(2.0, 3.0, 4.0)
    est = pg.monte_carlo_area(200_000, np.random.default_rng(0))
    assert est == pytest.approx(2 * math.pi, rel=0.02)


def test_samples_lie_in_the_hexagon():
    pg = build_pants(1.0, 2.5, 4.0)
    _, z = pg.sample(500, np.random.default_rng(2))
    assert pg.contains(z, tol=1e-9).all()


@given(lengths, lengths, lengths, st.integers(0, 2))
def test_self_arc_matches_pentagon_formula(l1, l2, l3, i):
    # splitting the hexagon by the perpendicular from side a_i to the opposite seam
    # gives a right-angled pentagon with cosh(h) = sinh(s_ij) sinh(a_j)
    pg = build_pants(l1, l2, l3)
    j = (i + 1) % 3
    expected = 2 * math.acosh(math.sinh(pg.seam(i, j)) * math.sinh(pg.half[j]))
    assert self_arc_length(pg, i) == pytest.approx(expected, rel=1e-9)


def test_systole_certificates():
    theta = FNSurface(PantsDecomposition.theta(), (2.0, 2.0, 2.0), (0.0, 0.0, 0.0))
    dumbbell = FNSurface(PantsDecomposition.dumbbell(), (2.0, 2.0, 2.0), (0.0, 0.0, 0.0))
    assert systole_certificate(theta) == pytest.approx(2.0, abs=1e-12)
    assert systole_certificate(dumbbell) == pytest.approx(1.7049128323580138, abs=1e-9)


def test_side_coordinates_follow_the_twist():
    fn = FNSurface(PantsDecomposition.theta(), (2.0, 2.5, 3.0), (0.3, -0.7, 1.1))
    geo = build_surface(fn)
    u = np.array([0.0, 0.4, 1.9])
    assert np.allclose(geo.side_coordinate(0, 0, u), u)
    assert np.allclose(geo.side_coordinate(0, 1, u), np.mod(0.3 - u, 2.0))
    assert np.allclose(geo.curve_coordinate(1, 1, geo.side_coordinate(1, 1, u)), u)
