"""Hyperbolic plane kernel in the upper half-plane model.

Points are stored as ``H2Point`` values; bulk code works directly on complex
numpy arrays.  Geodesics are half-circles orthogonal to the real axis or
vertical lines.  Isometries are real 2x2 matrices with determinant +1 (Moebius
maps) or -1 (orientation-reversing maps acting on the conjugate of z), so that
composition is the plain matrix product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import IntersectingOrAsymptotic, InvalidRegion, NoSolution

TOL = 1e-9


@dataclass(frozen=True)
class H2Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)) or self.y <= 0.0:
            raise ValueError(f"not a point of the upper half-plane: ({self.x}, {self.y})")

    @classmethod
    def from_complex(cls, z: complex) -> H2Point:
        return cls(float(z.real), float(z.imag))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class H2Geodesic:
    """Geodesic line; ``radius = inf`` marks the vertical line ``x = center``.

    ``orientation = +1`` runs from the left ideal endpoint to the right one for
    circles and upward for vertical lines.
    """

    center: float
    radius: float = math.inf
    orientation: int = 1

    def __post_init__(self) -> None:
        if not math.isfinite(self.center) or not self.radius > 0.0:
            raise ValueError("invalid geodesic parameters")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    @property
    def vertical(self) -> bool:
        return math.isinf(self.radius)

    def endpoints(self) -> tuple[float, float]:
        """Ideal endpoints (start, end) in the direction of travel."""
        if self.vertical:
            ends = (self.center, math.inf)
        else:
            ends = (self.center - self.radius, self.center + self.radius)
        return ends if self.orientation > 0 else (ends[1], ends[0])

    def reversed(self) -> H2Geodesic:
        return H2Geodesic(self.center, self.radius, -self.orientation)

    @classmethod
    def from_endpoints(cls, a: float, b: float) -> H2Geodesic:
        if math.isinf(a) and math.isinf(b):
            raise ValueError("both endpoints at infinity")
        if math.isinf(b):
            return cls(float(a), math.inf, 1)
        if math.isinf(a):
            return cls(float(b), math.inf, -1)
        if a == b:
            raise ValueError("coincident endpoints")
        return cls(0.5 * (a + b), 0.5 * abs(b - a), 1 if a < b else -1)

    @classmethod
    def through(cls, p: H2Point, q: H2Point) -> H2Geodesic:
        """Geodesic through p and q, oriented from p to q."""
        dx = q.x - p.x
        if abs(dx) <= 1e-14 * max(1.0, abs(p.x), abs(q.x), p.y, q.y):
            if q.y == p.y:
                raise ValueError("coincident points")
            return cls(0.5 * (p.x + q.x), math.inf, 1 if q.y > p.y else -1)
        c = (p.x**2 + p.y**2 - q.x**2 - q.y**2) / (2.0 * (p.x - q.x))
        r = math.hypot(p.x - c, p.y)
        return cls(c, r, 1 if dx > 0 else -1)

    def contains(self, p: H2Point, tol: float = TOL) -> bool:
        if self.vertical:
            return abs(p.x - self.center) <= tol * max(1.0, p.y)
        return abs(math.hypot(p.x - self.center, p.y) - self.radius) <= tol * self.radius


def _mobius_real(m: tuple[float, float, float, float], x: float) -> float:
    a, b, c, d = m
    if math.isinf(x):
        return math.inf if c == 0.0 else a / c
    den = c * x + d
    if den == 0.0:
        return math.inf
    return (a * x + b) / den


@dataclass(frozen=True)
class H2Isometry:
    """Isometry z -> (a w + b)/(c w + d), with w = z when ad - bc = 1 and w = conj(z) when ad - bc = -1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        det = self.a * self.d - self.b * self.c
        scale = max(1.0, self.a**2 + self.b**2 + self.c**2 + self.d**2)
        if abs(abs(det) - 1.0) > 1e-12 * scale:
            raise ValueError(f"determinant {det} is not +-1")

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> H2Isometry:
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @classmethod
    def identity(cls) -> H2Isometry:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation(cls, x: float) -> H2Isometry:
        return cls(1.0, x, 0.0, 1.0)

    @classmethod
    def dilation(cls, k: float) -> H2Isometry:
        s = math.sqrt(k)
        return cls(s, 0.0, 0.0, 1.0 / s)

    @classmethod
    def rotation(cls, theta: float) -> H2Isometry:
        """Rotation about i turning tangent vectors counterclockwise by theta."""
        c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
        return cls(c, s, -s, c)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def reversing(self) -> bool:
        return self.det < 0

    def __matmul__(self, other: H2Isometry) -> H2Isometry:
        return H2Isometry.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> H2Isometry:
        det = self.det
        return H2Isometry(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def apply_z(self, z):
        w = np.conj(z) if self.reversing else z
        return (self.a * w + self.b) / (self.c * w + self.d)

    def apply(self, p: H2Point) -> H2Point:
        return H2Point.from_complex(complex(self.apply_z(p.z)))

    def apply_real(self, x: float) -> float:
        return _mobius_real((self.a, self.b, self.c, self.d), x)

    def apply_geodesic(self, g: H2Geodesic) -> H2Geodesic:
        a, b = g.endpoints()
        return H2Geodesic.from_endpoints(self.apply_real(a), self.apply_real(b))

    def derivative_at_i(self) -> complex:
        """Complex derivative at i (orientation-preserving maps only)."""
        return 1.0 / (self.c * 1j + self.d) ** 2


def dist_z(z, w):
    """Vectorized hyperbolic distance between complex arrays."""
    z = np.asarray(z)
    w = np.asarray(w)
    return 2.0 * np.arcsinh(np.abs(z - w) / (2.0 * np.sqrt(z.imag * w.imag)))


def dist(p: H2Point, q: H2Point) -> float:
    return float(dist_z(p.z, q.z))


def line_dist_z(z, a, b):
    """Distance from points z to the geodesic with ideal endpoints a, b (b may be inf)."""
    z = np.asarray(z)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x, y = z.real, z.imag
    binf = np.isinf(b)
    ainf = np.isinf(a)
    foot = np.where(binf, a, np.where(ainf, b, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        c = 0.5 * (a + b)
        r = 0.5 * np.abs(b - a)
        circ = np.abs((x - c) ** 2 + y**2 - r**2) / (2.0 * r * y)
        vert = np.abs(x - foot) / y
    s = np.where(binf | ainf, vert, circ)
    return np.arcsinh(s)


def to_axis(g: H2Geodesic) -> H2Isometry:
    """Orientation-preserving isometry taking g onto the imaginary axis, oriented upward."""
    a, b = g.endpoints()
    if math.isinf(b):
        return H2Isometry(1.0, -a, 0.0, 1.0)
    if math.isinf(a):
        return H2Isometry(0.0, -1.0, 1.0, -b)
    s = math.sqrt(abs(b - a))
    if b > a:
        return H2Isometry(1.0 / s, -a / s, -1.0 / s, b / s)
    return H2Isometry(1.0 / s, -a / s, 1.0 / s, -b / s)


def frame_along(p: H2Point, q: H2Point) -> H2Isometry:
    """Isometry N with N(p) = i and N(q) = i*exp(dist(p, q))."""
    m = to_axis(H2Geodesic.through(p, q))
    r = abs(complex(m.apply_z(p.z)))
    return H2Isometry.dilation(1.0 / r) @ m


def reflection(g: H2Geodesic) -> H2Isometry:
    """Reflection across g (determinant -1)."""
    m = to_axis(g)
    flip = H2Isometry(-1.0, 0.0, 0.0, 1.0)
    return m.inverse() @ flip @ m


def signed_distance_z(z, g: H2Geodesic):
    """Distance to g, positive on the left of the oriented geodesic."""
    w = to_axis(g).apply_z(np.asarray(z))
    return -np.arcsinh(w.real / w.imag)


def dist_point_geodesic(p: H2Point, g: H2Geodesic) -> tuple[float, H2Point]:
    m = to_axis(g)
    w = complex(m.apply_z(p.z))
    d = math.asinh(abs(w.real) / w.imag)
    foot = m.inverse().apply(H2Point(0.0, abs(w)))
    return d, foot


def common_perpendicular(g1: H2Geodesic, g2: H2Geodesic) -> tuple[float, H2Point, H2Point]:
    m = to_axis(g1)
    u, v = (m.apply_real(e) for e in g2.endpoints())
    if not (math.isfinite(u) and math.isfinite(v)):
        raise IntersectingOrAsymptotic("geodesics share an ideal endpoint")
    if u * v <= 0.0:
        raise IntersectingOrAsymptotic("geodesics intersect or share an endpoint")
    if min(abs(u), abs(v)) <= 1e-15 * max(abs(u), abs(v)):
        raise IntersectingOrAsymptotic("geodesics are asymptotic")
    uv = u * v
    mid = 0.5 * (u + v)
    x = uv / mid
    y = math.sqrt(max(uv - x * x, 0.0))
    if y <= 0.0:
        raise IntersectingOrAsymptotic("degenerate configuration")
    inv = m.inverse()
    f1 = inv.apply(H2Point(0.0, math.sqrt(uv)))
    f2 = inv.apply(H2Point(x, y))
    return dist(f1, f2), f1, f2


def perpendicular_bisector(g1: H2Geodesic, g2: H2Geodesic) -> tuple[H2Isometry, float]:
    """Locus of points equidistant from two disjoint geodesics.

    Returns (frame, half) where ``frame.inverse()`` maps i*exp(s) onto the locus
    by arclength s, s = 0 being the midpoint of the common perpendicular whose
    half-length is ``half``.
    """
    length, f1, f2 = common_perpendicular(g1, g2)
    n = frame_along(f1, f2)
    mid = n.inverse().apply(H2Point(0.0, math.exp(0.5 * length)))
    # bisector is the circle |w| = e^{L/2} in the frame of n; re-frame it upward
    e = math.exp(0.5 * length)
    bis = n.inverse().apply_geodesic(H2Geodesic(0.0, e, 1))
    m = to_axis(bis)
    r = abs(complex(m.apply_z(mid.z)))
    return H2Isometry.dilation(1.0 / r) @ m, 0.5 * length


def equidistant_point(g1: H2Geodesic, g2: H2Geodesic, g3: H2Geodesic) -> tuple[H2Point, float]:
    """Centre and radius of the circle tangent to three disjoint geodesics bounding a region.

    The root is bracketed and bisected along the bisector of g1 and g2, where
    the distances to g1 and g2 agree identically.
    """
    lines = (g1, g2, g3)
    feet = {}
    try:
        for i in range(3):
            for j in range(i + 1, 3):
                _, fi, fj = common_perpendicular(lines[i], lines[j])
                feet[i, j] = fi
                feet[j, i] = fj
    except IntersectingOrAsymptotic as exc:
        raise NoSolution(f"geodesics are not pairwise disjoint: {exc}") from exc
    signs = []
    for i in range(3):
        sides = [float(np.sign(signed_distance_z(feet[j, i].z, lines[i]))) for j in range(3) if j != i]
        if sides[0] != sides[1] or sides[0] == 0.0:
            raise NoSolution("the geodesics do not bound a common region")
        signs.append(sides[0])

    frame, _ = perpendicular_bisector(g1, g2)
    inv = frame.inverse()

    def along(s):
        return inv.apply_z(1j * np.exp(s))

    def s_val(z, i):
        return signs[i] * signed_distance_z(z, lines[i])

    grid = np.linspace(-30.0, 30.0, 6001)
    zs = along(grid)
    s1 = s_val(zs, 0)
    h = s1 - s_val(zs, 2)
    ok = s1 > 0
    roots = []
    for k in np.nonzero(ok[:-1] & ok[1:] & (np.sign(h[:-1]) != np.sign(h[1:])))[0]:
        lo, hi = grid[k], grid[k + 1]
        hlo = h[k]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            zm = along(mid)
            hm = float(s_val(zm, 0) - s_val(zm, 2))
            if np.sign(hm) == np.sign(hlo):
                lo, hlo = mid, hm
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        z = complex(along(0.5 * (lo + hi)))
        r = float(s_val(z, 0))
        if r > 0 and float(s_val(z, 2)) > 0:
            roots.append((r, z))
    if not roots:
        raise NoSolution("no interior equidistant point")
    r, z = min(roots)
    return H2Point.from_complex(z), r


@dataclass(frozen=True, eq=False)
class Hexagon:
    """Right-angled hexagon with sides A1, S12, A2, S23, A3, S31 in counterclockwise order.

    ``vertices[k]`` is the start of side k, so side k joins vertices k and k+1.
    """

    vertices: tuple[complex, ...]
    sides: tuple[float, ...]
    closure_residual: float

    @property
    def alternating(self) -> tuple[float, float, float]:
        return self.sides[0], self.sides[2], self.sides[4]

    @property
    def seams(self) -> tuple[float, float, float]:
        """Lengths (s12, s23, s31)."""
        return self.sides[1], self.sides[3], self.sides[5]

    def point(self, k: int) -> H2Point:
        return H2Point.from_complex(self.vertices[k % 6])

    def side_geodesic(self, k: int) -> H2Geodesic:
        return H2Geodesic.through(self.point(k), self.point(k + 1))

    def measured_sides(self) -> np.ndarray:
        return np.array([dist(self.point(k), self.point(k + 1)) for k in range(6)])

    def angles(self) -> np.ndarray:
        """Interior angles from the hyperbolic law of cosines in the triangle at each vertex."""
        z = np.array(self.vertices)
        prev, nxt = np.roll(z, 1), np.roll(z, -1)
        ca, cb, cc = _cosh_dist(z, prev), _cosh_dist(z, nxt), _cosh_dist(prev, nxt)
        cos = (ca * cb - cc) / np.sqrt((ca * ca - 1.0) * (cb * cb - 1.0))
        return np.arccos(np.clip(cos, -1.0, 1.0))


def _cosh_dist(z, w):
    return 1.0 + np.abs(z - w) ** 2 / (2.0 * z.imag * w.imag)


def _seam_length(a1: float, a2: float, a3: float) -> float:
    """Side opposite a3 in a right-angled hexagon with alternating sides a1, a2, a3."""
    x = (math.cosh(a1 - a2) + math.cosh(a3)) / (math.sinh(a1) * math.sinh(a2))
    return math.log1p(x + math.sqrt(x * (x + 2.0)))


def right_hexagon(a1: float, a2: float, a3: float) -> Hexagon:
    """Construct the right-angled hexagon with alternating sides a1, a2, a3 by turtle walk."""
    if min(a1, a2, a3) <= 0:
        raise ValueError("alternating sides must be positive")
    s12 = _seam_length(a1, a2, a3)
    s23 = _seam_length(a2, a3, a1)
    s31 = _seam_length(a3, a1, a2)
    sides = (a1, s12, a2, s23, a3, s31)
    frame = H2Isometry.identity()
    turn = H2Isometry.rotation(0.5 * math.pi)
    verts = []
    for length in sides:
        verts.append(complex(frame.apply_z(1j)))
        frame = frame @ H2Isometry.dilation(math.exp(length)) @ turn
    residual = float(dist_z(complex(frame.apply_z(1j)), verts[0]))
    return Hexagon(tuple(verts), sides, residual)


def hexagon_residuals(hexagon: Hexagon) -> dict[str, float]:
    """Largest deviations of a realized hexagon from its defining data."""
    angles = hexagon.angles()
    sides = hexagon.measured_sides()
    return {
        "angle": float(np.max(np.abs(angles - 0.5 * math.pi))),
        "side": float(np.max(np.abs(sides - np.array(hexagon.sides)))),
        "closure": hexagon.closure_residual,
    }


def _trapezium_setup(r: H2Geodesic, l: H2Geodesic):
    m = to_axis(r)
    if r.vertical:
        top = H2Point(r.center, 1.0)
    else:
        top = H2Point(r.center, r.radius)
    rho = abs(complex(m.apply_z(top.z)))
    n = H2Isometry.dilation(1.0 / rho) @ m
    u, v = (n.apply_real(e) for e in l.endpoints())
    if math.isinf(u):
        u, v = v, u
    if math.isfinite(v) and u * v < 0.0:
        raise InvalidRegion("the two geodesics intersect")
    if u == 0.0 and (math.isinf(v) or v == 0.0):
        raise InvalidRegion("the two geodesics coincide")
    side = 1.0 if (u > 0 or (u == 0 and v > 0)) else -1.0
    return u, v, side


def _cos_angle(u: float, v: float, t):
    """|cos| of the polar angle where the perpendicular |w| = e^t meets l."""
    t = np.asarray(t, dtype=float)
    if math.isinf(v):
        return np.abs(u) * np.exp(-t)
    mid = 0.5 * (u + v)
    return np.abs((np.exp(2.0 * t) + u * v) / (2.0 * mid * np.exp(t)))


def perpendicular_height(r: H2Geodesic, l: H2Geodesic, t) -> np.ndarray:
    """Length of the segment perpendicular to r at arclength t running to l.

    Arclength on r is measured in its orientation from the top of the half-circle
    (or from height 1 on a vertical line).
    """
    u, v, _ = _trapezium_setup(r, l)
    c = _cos_angle(u, v, t)
    if np.any(c >= 1.0):
        raise InvalidRegion("a perpendicular misses the second geodesic")
    return np.arctanh(c)


def trapezium_area_check(
    r: H2Geodesic,
    l: H2Geodesic,
    t0: float,
    delta: float,
    curvature_scale: float = 1.0,
) -> tuple[float, float]:
    """Area of the region between r, l and the perpendiculars to r at t0 +- delta.

    The area form dx dy / y^2 is integrated in polar coordinates of a frame where
    r is the imaginary axis.  Returns (area, 2 * delta * h(t0)); with
    ``curvature_scale = k`` every length is multiplied by k and areas by k^2.
    """
    if delta <= 0:
        raise InvalidRegion("delta must be positive")
    u, v, side = _trapezium_setup(r, l)
    lo, hi = t0 - delta, t0 + delta
    ts = np.linspace(lo, hi, 33)
    if np.any(_cos_angle(u, v, ts) >= 1.0):
        raise InvalidRegion("a perpendicular misses the second geodesic")

    def theta(t: float) -> float:
        return math.acos(min(float(_cos_angle(u, v, t)), 1.0))

    if side > 0:
        area, _ = integrate.dblquad(
            lambda th, t: 1.0 / math.sin(th) ** 2, lo, hi, theta, lambda t: 0.5 * math.pi,
            epsabs=1e-11, epsrel=1e-10,
        )
    else:
        area, _ = integrate.dblquad(
            lambda th, t: 1.0 / math.sin(th) ** 2, lo, hi, lambda t: 0.5 * math.pi,
            lambda t: math.pi - theta(t), epsabs=1e-11, epsrel=1e-10,
        )
    h0 = float(np.arctanh(_cos_angle(u, v, t0)))
    k2 = curvature_scale**2
    return k2 * area, k2 * 2.0 * delta * h0
