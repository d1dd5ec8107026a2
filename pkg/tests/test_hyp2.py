from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graftflat.errors import IntersectingOrAsymptotic, InvalidRegion
from graftflat.hyp2 import (
    H2Geodesic,
    H2Isometry,
    H2Point,
    common_perpendicular,
    dist,
    dist_point_geodesic,
    dist_z,
    equidistant_point,
    hexagon_residuals,
    perpendicular_height,
    reflection,
    right_hexagon,
    trapezium_area_check,
)

sides = st.floats(0.05, 6.0)
coords = st.tuples(st.floats(-3, 3), st.floats(0.1, 5))


def _iso(a, b, c, flip):
    m = H2Isometry.translation(a) @ H2Isometry.dilation(math.exp(b)) @ H2Isometry.rotation(c)
    if flip:
        m = m @ reflection(H2Geodesic.from_endpoints(0.0, math.inf))
    return m


def test_distance_along_imaginary_axis():
    for t in (0.1, 1.0, 3.5):
        assert dist(H2Point(0, 1), H2Point(0, math.exp(t))) == pytest.approx(t, abs=1e-14)


@given(coords, coords, st.floats(-2, 2), st.floats(-1, 1), st.floats(0, 2 * math.pi), st.booleans())
def test_isometries_preserve_distance(p, q, a, b, c, flip):
    m = _iso(a, b, c, flip)
    z, w = complex(*p), complex(*q)
    assert float(dist_z(m.apply_z(z), m.apply_z(w))) == pytest.approx(float(dist_z(z, w)), rel=1e-9, abs=1e-9)
    assert m.reversing == flip


@given(coords, coords)
def test_reflection_is_an_involution_fixing_its_axis(p, q):
    g = H2Geodesic.through(H2Point(*p), H2Point(*q)) if p != q else H2Geodesic.from_endpoints(-1, 1)
    r = reflection(g)
    z = complex(0.3, 0.7)
    assert complex(r.apply_z(r.apply_z(z))) == pytest.approx(z, abs=1e-8)
    assert r.det < 0


def test_common_perpendicular_of_concentric_semicircles():
    for big in (2.0, math.e, 10.0):
        d, f1, f2 = common_perpendicular(H2Geodesic.from_endpoints(-1, 1), H2Geodesic.from_endpoints(-big, big))
        assert d == pytest.approx(math.log(big), abs=1e-12)
        assert abs(f1.z) == pytest.approx(1.0) and abs(f2.z) == pytest.approx(big)


def test_common_perpendicular_rejects_crossing_and_asymptotic_lines():
    with pytest.raises(IntersectingOrAsymptotic):
        common_perpendicular(H2Geodesic.from_endpoints(-1, 1), H2Geodesic.from_endpoints(0, 2))
    with pytest.raises(IntersectingOrAsymptotic):
        common_perpendicular(H2Geodesic.from_endpoints(0, 1), H2Geodesic.from_endpoints(1, 2))


def test_point_to_vertical_geodesic():
    d, foot = dist_point_geodesic(H2Point(1.0, 1.0), H2Geodesic.from_endpoints(0, math.inf))
    assert d == pytest.approx(math.asinh(1.0), abs=1e-14)
    assert foot.z == pytest.approx(1j * math.sqrt(2.0))


@given(sides, sides, sides)
def test_right_hexagon_closes_with_right_angles(a1, a2, a3):
    res = hexagon_residuals(right_hexagon(a1, a2, a3))
    assert max(res.values()) < 1e-10


@given(sides, sides, sides)
def test_hexagon_seams_match_cosine_law(a1, a2, a3):
    h = right_hexagon(a1, a2, a3)
    ch = math.cosh
    expected = math.acosh((ch(a1) * ch(a2) + ch(a3)) / (math.sinh(a1) * math.sinh(a2)))
    assert h.seams[0] == pytest.approx(expected, rel=1e-10)


def test_right_hexagon_rejects_nonpositive_sides():
    with pytest.raises(ValueError):
        right_hexagon(1.0, 0.0, 1.0)


def test_equidistant_point_of_symmetric_lines():
    # three pairwise disjoint lines symmetric under z -> -conj(z)
    g1, g2, g3 = (H2Geodesic.from_endpoints(*e) for e in ((-3, -1), (1, 3), (-10, 10)))
    p, r = equidistant_point(g1, g2, g3)
    assert p.z.real == pytest.approx(0.0, abs=1e-9)
    for g in (g1, g2, g3):
        assert dist_point_geodesic(p, g)[0] == pytest.approx(r, abs=1e-9)


def test_perpendicular_height_meets_the_second_line():
    r, l = H2Geodesic.from_endpoints(0, math.inf), H2Geodesic.from_endpoints(1, math.inf)
    for t in (0.2, 1.0, 2.0):
        h = float(perpendicular_height(r, l, t))
        theta = math.acos(math.exp(-t))
        w = math.exp(t) * complex(math.cos(theta), math.sin(theta))
        assert h == pytest.approx(float(dist_z(1j * math.exp(t), w)), abs=1e-12)


def test_trapezium_area_closed_form():
    # region between the imaginary axis and x = 1: area = asin(e^-lo) - asin(e^-hi)
    r, l = H2Geodesic.from_endpoints(0, math.inf), H2Geodesic.from_endpoints(1, math.inf)
    value, bound = trapezium_area_check(r, l, 1.0, 0.5)
    assert value == pytest.approx(math.asin(math.exp(-0.5)) - math.asin(math.exp(-1.5)), abs=1e-9)
    assert bound == pytest.approx(2 * 0.5 * math.atanh(math.exp(-1.0)), abs=1e-12)
    assert value >= bound


def test_trapezium_scales_with_curvature():
    r, l = H2Geodesic.from_endpoints(0, math.inf), H2Geodesic.from_endpoints(2, 5)
    v1, b1 = trapezium_area_check(r, l, 1.15, 0.1)
    v2, b2 = trapezium_area_check(r, l, 1.15, 0.1, curvature_scale=3.0)
    assert v2 == pytest.approx(9 * v1) and b2 == pytest.approx(9 * b1)


def test_trapezium_rejects_bad_regions():
    r = H2Geodesic.from_endpoints(0, math.inf)
    with pytest.raises(InvalidRegion):
        trapezium_area_check(r, H2Geodesic.from_endpoints(-1, 1), 0.0, 0.1)
    with pytest.raises(InvalidRegion):
        trapezium_area_check(r, H2Geodesic.from_endpoints(1, 2), 0.0, 0.0)


@given(st.floats(0.2, 3.0), st.floats(0.3, 3.0), st.floats(-1.0, 1.0), st.floats(0.01, 0.4))
def test_trapezium_area_dominates_height(a, log_ratio, t0, delta):
    r = H2Geodesic.from_endpoints(0, math.inf)
    l = H2Geodesic.from_endpoints(a, a * math.exp(log_ratio))
    try:
        value, bound = trapezium_area_check(r, l, t0, delta)
    except InvalidRegion:
        return
    assert value - bound >= -1e-6


def test_matrix_round_trip():
    m = _iso(0.4, -0.2, 1.1, True)
    back = H2Isometry.from_matrix(m.matrix)
    assert np.allclose(back.matrix, m.matrix)
    assert complex((m @ m.inverse()).apply_z(0.5 + 2j)) == pytest.approx(0.5 + 2j)
