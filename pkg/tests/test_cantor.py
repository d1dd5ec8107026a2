from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graftflat.cantor import (
    Branch,
    CantorMeasure,
    Graft1D,
    cells,
    deflate1d,
    f,
    is_isometric_on_gap,
    kappa,
    net_error,
    pushforward_error,
)

TERNARY = CantorMeasure.ternary()


def devil_staircase(x: Fraction, digits: int = 60) -> tuple[Fraction, Fraction]:
    """Classical Cantor function by ternary digits, bracketed after ``digits`` steps."""
    if x == 1:
        return Fraction(1), Fraction(1)
    value, weight = Fraction(0), Fraction(1, 2)
    for _ in range(digits):
        x *= 3
        d = int(x)
        x -= d
        if d == 1:
            return value + weight, value + weight
        value += weight * (d // 2)
        weight /= 2
    return value, value + 2 * weight


fractions01 = st.fractions(min_value=0, max_value=1, max_denominator=10**6)


def test_ternary_is_exact_rational():
    assert all(isinstance(b.ratio, Fraction) for b in TERNARY.branches)
    assert TERNARY.top_gap_length == Fraction(1, 3)


@given(fractions01)
def test_f_matches_devil_staircase(x):
    got = f(TERNARY, x, 40)
    lo, hi = devil_staircase(x)
    assert got.lo <= hi and lo <= got.hi


def test_f_known_values():
    assert f(TERNARY, Fraction(1, 2), 10).lo == Fraction(1, 2)
    assert f(TERNARY, Fraction(1, 6), 10).lo == Fraction(1, 4)
    assert f(TERNARY, Fraction(1, 3), 30).mid == pytest.approx(0.5, abs=1e-8)


def test_translated_gap_measure_is_exactly_one():
    for depth in (1, 5, 9):
        g = Graft1D(TERNARY, depth)
        assert g.translated_measure() + g.residual() == 1
    assert Graft1D(TERNARY, 3).translated_measure_limit() == 1


def test_translated_gaps_are_disjoint():
    assert Graft1D(TERNARY, 7).translated_disjoint()


def test_kappa_on_the_middle_gap():
    g = Graft1D(TERNARY, 8)
    s = Fraction(1, 7)
    assert kappa(g, Fraction(5, 6) + s) == Fraction(1, 3) + s


@given(fractions01)
def test_kappa_inverts_phi_in_gaps(x):
    g = Graft1D(TERNARY, 30)
    v = f(TERNARY, x, 30)
    if v.lo != v.hi:  # x not resolved to a gap at this depth
        return
    assert kappa(g, x + v.lo) == x


@given(st.floats(0, 2), st.floats(0, 2))
def test_kappa_is_one_lipschitz_and_monotone(y1, y2):
    g = Graft1D(TERNARY, 10)
    k1, k2 = kappa(g, y1), kappa(g, y2)
    assert abs(k1 - k2) <= abs(y1 - y2) + 1e-12
    if y1 <= y2:
        assert k1 <= k2 + 1e-12


def test_kappa_isometric_on_gaps():
    g = Graft1D(TERNARY, 6)
    assert max(is_isometric_on_gap(g, gap) for gap in g.gaps()) == 0.0


def test_deflation_on_a_gap_is_constant():
    g = Graft1D(TERNARY, 6)
    gap = g.gaps()[3]
    lo, hi = gap.translated
    vals = {deflate1d(g, lo + (hi - lo) * Fraction(k, 5)) for k in range(1, 5)}
    assert vals == {gap.f_a}


def test_pushforward_error_decreases():
    errs = [pushforward_error(TERNARY, d) for d in (6, 8, 10)]
    assert errs[0] > errs[1] > errs[2]
    assert net_error(TERNARY, 6) == pytest.approx(2.0**-6)


def test_cell_masses_sum_to_total():
    cs = cells(TERNARY, 5)
    assert len(cs) == 32 and sum(c.mass for c in cs) == 1
    assert sum(c.length for c in cs) == Fraction(2, 3) ** 5


def test_asymmetric_measure():
    m = CantorMeasure((Branch(Fraction(0), Fraction(1, 4), Fraction(1, 3)),
                       Branch(Fraction(1, 2), Fraction(1, 2), Fraction(2, 3))), Fraction(3))
    g = Graft1D(m, 12)
    assert g.total_length == 4
    assert g.translated_measure_limit() == 1
    assert g.translated_disjoint()
    assert f(m, Fraction(3, 8), 5).lo == Fraction(1)


@pytest.mark.parametrize(
    "branches",
    [
        (Branch(0, 0.5, 1.0),),
        (Branch(0, 0.5, 0.5), Branch(0.5, 0.5, 0.5)),  # no gap
        (Branch(0.5, 0.2, 0.5), Branch(0, 0.2, 0.5)),  # out of order
        (Branch(0, 0.2, 0.3), Branch(0.5, 0.2, 0.3)),  # weights do not sum to 1
    ],
)
def test_invalid_measures(branches):
    with pytest.raises(ValueError):
        CantorMeasure(branches)
