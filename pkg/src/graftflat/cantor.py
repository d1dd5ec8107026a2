"""One-dimensional grafting along a Cantor set.

A self-similar Cantor set L in [0, 1] carries a finite atomless measure lam.
Grafting inserts, at each point x, mass lam((0, x)): the map phi(x) = x + f(x)
with f(x) = lam((0, x)) sends the gaps of L isometrically onto translated gaps
U' and stretches L onto a set L_hat of measure |lam|.  The collapse kappa is
the inverse of phi and the deflation is D = f o kappa.

Everything is computed by descent through the iterated function system.  With
Fraction parameters the arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real


@dataclass(frozen=True)
class Branch:
    """Affine piece x -> offset + ratio * x carrying the fraction ``weight`` of the mass."""

    offset: Real
    ratio: Real
    weight: Real


@dataclass(frozen=True)
class Interval:
    lo: Real
    hi: Real

    @property
    def mid(self) -> Real:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Real:
        return self.hi - self.lo


@dataclass(frozen=True)
class CantorMeasure:
    branches: tuple[Branch, ...]
    mass: Real = 1

    def __post_init__(self) -> None:
        if len(self.branches) < 2:
            raise ValueError("need at least two branches")
        end = 0
        for b in self.branches:
            if not (b.ratio > 0 and 0 < b.weight < 1):
                raise ValueError("ratios must be positive and weights in (0, 1)")
            if b.offset < end:
                raise ValueError("branch intervals must be ordered and disjoint")
            end = b.offset + b.ratio
        if end > 1:
            raise ValueError("branches must lie in [0, 1]")
        if sum(b.ratio for b in self.branches) >= 1:
            raise ValueError("the Cantor set must have empty interior")
        if abs(sum(b.weight for b in self.branches) - 1) > 1e-12:
            raise ValueError("branch weights must sum to 1")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    @classmethod
    def ternary(cls, mass: Real = Fraction(1)) -> CantorMeasure:
        third, half = Fraction(1, 3), Fraction(1, 2)
        return cls((Branch(Fraction(0), third, half), Branch(2 * third, third, half)), mass)

    def as_float(self) -> CantorMeasure:
        return CantorMeasure(
            tuple(Branch(float(b.offset), float(b.ratio), float(b.weight)) for b in self.branches), float(self.mass)
        )

    @property
    def ratio_sum(self) -> Real:
        return sum(b.ratio for b in self.branches)

    @property
    def top_gap_length(self) -> Real:
        return 1 - self.ratio_sum


def f(m: CantorMeasure, x: Real, depth: int) -> Interval:
    """lam((0, x)) bracketed by one cell of the given depth (exact when x lies in a gap)."""
    acc = 0 * m.mass
    scale = m.mass
    for _ in range(depth):
        for b in m.branches:
            if x >= b.offset + b.ratio:
                acc += scale * b.weight
            elif x >= b.offset:
                x = (x - b.offset) / b.ratio
                scale = scale * b.weight
                break
            else:
                return Interval(acc, acc)
        else:
            return Interval(acc, acc)
    return Interval(acc, acc + scale)


@dataclass(frozen=True)
class Cell:
    """Depth-n cell [x0, x0 + length] of mass ``mass`` with lam((0, x0)) = before."""

    x0: Real
    length: Real
    mass: Real
    before: Real


def cells(m: CantorMeasure, depth: int) -> list[Cell]:
    out = [Cell(0 * m.mass, 1 + 0 * m.mass, m.mass, 0 * m.mass)]
    for _ in range(depth):
        nxt = []
        for c in out:
            before = c.before
            for b in m.branches:
                nxt.append(Cell(c.x0 + c.length * b.offset, c.length * b.ratio, c.mass * b.weight, before))
                before = before + c.mass * b.weight
        out = nxt
    return out


@dataclass(frozen=True)
class Gap:
    a: Real
    b: Real
    f_a: Real

    @property
    def translated(self) -> tuple[Real, Real]:
        return self.a + self.f_a, self.b + self.f_a


@dataclass(frozen=True)
class Graft1D:
    """The grafted interval (0, 1 + |lam|), with the gaps of L found up to ``depth``."""

    measure: CantorMeasure
    depth: int

    @property
    def total_length(self) -> Real:
        return 1 + self.measure.mass

    def gaps(self) -> list[Gap]:
        """Gaps of L opened at levels below ``depth``, left to right."""
        m = self.measure
        out = []
        for level in range(self.depth):
            for c in cells(m, level):
                end, before = 0, c.before
                for b in m.branches:
                    lo, hi = c.x0 + c.length * end, c.x0 + c.length * b.offset
                    if hi > lo:
                        out.append(Gap(lo, hi, before))
                    before = before + c.mass * b.weight
                    end = b.offset + b.ratio
                lo, hi = c.x0 + c.length * end, c.x0 + c.length
                if hi > lo:
                    out.append(Gap(lo, hi, before))
        out.sort(key=lambda gp: gp.a)
        return out

    def translated_measure(self) -> Real:
        """Total length of the translated gaps found so far."""
        return sum((gp.b - gp.a for gp in self.gaps()), 0 * self.measure.mass)

    def residual(self) -> Real:
        """Length of the depth-level cells, i.e. what the gaps found so far leave uncovered."""
        return self.measure.ratio_sum**self.depth

    def translated_measure_limit(self) -> Real:
        """|U'| summed to infinity: self-similarity gives |U| = gap / (1 - sum of ratios)."""
        m = self.measure
        return m.top_gap_length / (1 - m.ratio_sum)

    def translated_disjoint(self) -> bool:
        gaps = self.gaps()
        return all(g1.translated[1] <= g2.translated[0] for g1, g2 in zip(gaps, gaps[1:]))


def kappa(g: Graft1D, y: Real, tol: float = 1e-15) -> Real:
    """Inverse of x -> x + f(x) by nested-cell search.

    The search follows the cell whose image contains y; on a gap the answer is
    y - f(a) exactly.  Otherwise it stops once the cell is shorter than tol
    and interpolates linearly across it.
    """
    m = g.measure
    if not (0 <= y <= g.total_length):
        raise ValueError("y outside the grafted interval")
    exact = isinstance(y, Fraction) and isinstance(m.mass, Fraction)
    if not exact:
        m, y = m.as_float(), float(y)
    x0, length, mass, before = 0 * m.mass, 1 + 0 * m.mass, m.mass, 0 * m.mass
    for _ in range(10_000):
        if not exact and length < tol:
            break
        end = 0
        for b in m.branches:
            gap_lo = x0 + length * end
            gap_hi = x0 + length * b.offset
            if y <= gap_hi + before:
                if y >= gap_lo + before:
                    return y - before
            cell_hi = x0 + length * (b.offset + b.ratio) + before + mass * b.weight
            if y <= cell_hi:
                x0, length, mass = x0 + length * b.offset, length * b.ratio, mass * b.weight
                break
            before = before + mass * b.weight
            end = b.offset + b.ratio
        else:
            return y - before
        if exact and length < Fraction(1, 10**40):
            break
    # inside a tiny cell: interpolate
    span = length + mass
    return x0 + length * (y - x0 - before) / span


def deflate1d(g: Graft1D, y: Real, depth: int | None = None) -> Real:
    """D = f o kappa, as the midpoint of the f-bracket (exact on translated gaps)."""
    x = kappa(g, y)
    return f(g.measure, x, depth if depth is not None else max(g.depth, 48)).mid


def pushforward_error(m: CantorMeasure, depth: int, n_intervals: int = 100, level: int = 7) -> float:
    """Worst deviation of |D^{-1}(I) within L_hat| from |I| over dyadic intervals I.

    L_hat is enclosed by the images of the depth-level cells.  The preimage of I
    contains every cell image whose f-range lies in I and is contained in the
    union of those whose f-range meets I; both bounds are compared with |I|.
    """
    cs = cells(m, depth)
    lo_f = [float(c.before) for c in cs]
    hi_f = [float(c.before + c.mass) for c in cs]
    size = [float(c.length + c.mass) for c in cs]
    width = float(m.mass) / 2**level
    worst = 0.0
    for j in range(min(n_intervals, 2**level)):
        a, b = j * width, (j + 1) * width
        inner = sum(s for s, l, h in zip(size, lo_f, hi_f) if l >= a - 1e-15 and h <= b + 1e-15)
        outer = sum(s for s, l, h in zip(size, lo_f, hi_f) if h > a and l < b)
        worst = max(worst, abs(inner - width), abs(outer - width))
    return worst


def net_error(m: CantorMeasure, depth: int) -> float:
    """Largest hole in (0, |lam|) left by the values of D on gaps found up to depth."""
    vals = sorted({float(gp.f_a) for gp in Graft1D(m, depth).gaps()} | {0.0, float(m.mass)})
    return max(b - a for a, b in zip(vals, vals[1:]))


def cantor_rows(m: CantorMeasure, depths) -> list[dict[str, float]]:
    return [
        {"depth": d, "pushforwardError": pushforward_error(m, d), "netError": net_error(m, d)} for d in depths
    ]


def is_isometric_on_gap(g: Graft1D, gap: Gap, samples: int = 5) -> float:
    """Largest |kappa(y2) - kappa(y1) - (y2 - y1)| over points inside one translated gap."""
    lo, hi = gap.translated
    ys = [lo + (hi - lo) * Fraction(k + 1, samples + 1) for k in range(samples)]
    if not isinstance(lo, Fraction):
        ys = [float(y) for y in ys]
    ks = [kappa(g, y) for y in ys]
    return float(max(abs((k2 - k1) - (y2 - y1)) for k1, k2, y1, y2 in zip(ks, ks[1:], ys, ys[1:])))

