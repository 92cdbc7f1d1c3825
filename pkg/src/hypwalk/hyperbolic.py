"""Floating-point primitives for the Poincare disk.

Points are plain Python ``complex`` numbers with modulus < 1. Isometries are
stored as the pair ``(a, b)`` of the unit-determinant matrix
``[[a, b], [conj(b), conj(a)]]`` together with an orientation flag; an
orientation-reversing isometry conjugates its argument before applying the
Mobius map.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from hypwalk.exceptions import DegenerateAxis, GeometryError

# algebraic identities (inverse, involutions, determinant)
ALGEBRA_TOL = 1e-12
# constructed geometry (feet, intersections)
GEOMETRY_TOL = 1e-9

TWO_PI = 2.0 * math.pi


def as_point(z):
    """Coerce ``z`` to a complex disk point, rejecting points outside the disk."""
    z = complex(z)
    if not abs(z) < 1.0:
        raise GeometryError(f"point {z!r} is not inside the unit disk")
    return z


def dist(p, q):
    """Hyperbolic distance between two disk points.

    Uses ``sinh(d/2) = |p - q| / sqrt((1 - |p|^2)(1 - |q|^2))``, which stays
    accurate both for nearby points and for points close to the boundary.
    """
    num = abs(p - q)
    if num == 0.0:
        return 0.0
    den = math.sqrt((1.0 - abs(p) ** 2) * (1.0 - abs(q) ** 2))
    return 2.0 * math.asinh(num / den)


def midpoint(p, q):
    """Hyperbolic midpoint of the segment from ``p`` to ``q``."""
    h = moving_to_origin(p)
    w = h(q)
    r = abs(w)
    if r == 0.0:
        return p
    rm = math.tanh(0.5 * math.atanh(r))
    return h.inverse()(rm * w / r)


def angle_at(vertex, u, w):
    """Unsigned angle in [0, pi] at ``vertex`` between the geodesic rays to ``u`` and ``w``."""
    h = moving_to_origin(vertex)
    du, dw = h(u), h(w)
    if du == 0 or dw == 0:
        raise GeometryError("angle undefined: ray of zero length")
    return abs(cmath.phase(dw / du))


def _wrap(theta):
    t = math.fmod(theta, TWO_PI)
    if t < 0:
        t += TWO_PI
    # fmod can return exactly 2*pi after the shift for tiny negative inputs
    return 0.0 if t >= TWO_PI else t


@dataclass(frozen=True)
class Geodesic:
    """Complete geodesic given by its two ideal endpoint angles (radians).

    The order of the endpoints orients the geodesic from ``theta1`` to
    ``theta2``.
    """

    theta1: float
    theta2: float

    def __post_init__(self):
        t1, t2 = _wrap(self.theta1), _wrap(self.theta2)
        gap = abs(t1 - t2)
        if min(gap, TWO_PI - gap) < ALGEBRA_TOL:
            raise DegenerateAxis("geodesic endpoints coincide")
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)

    @classmethod
    def from_foot(cls, direction, distance):
        """Geodesic perpendicular to the ray at angle ``direction`` at hyperbolic ``distance``."""
        half = math.acos(math.tanh(distance))
        return cls(direction - half, direction + half)

    @classmethod
    def through(cls, p, q):
        """The geodesic through two distinct points, oriented from ``p`` to ``q``."""
        if abs(p - q) == 0.0:
            raise DegenerateAxis("cannot draw a geodesic through a single point")
        h = moving_to_origin(p)
        w = h(q)
        u = w / abs(w)
        back = h.inverse()
        return cls(cmath.phase(back(-u)), cmath.phase(back(u)))

    @property
    def endpoints(self):
        return cmath.exp(1j * self.theta1), cmath.exp(1j * self.theta2)

    def reversed(self):
        return Geodesic(self.theta2, self.theta1)

    def foot_from_origin(self):
        """Closest point of the geodesic to the origin."""
        delta = _wrap(self.theta2 - self.theta1)
        beta = 0.5 * delta
        psi = self.theta1 + beta
        if beta > 0.5 * math.pi:
            psi += math.pi
            beta = math.pi - beta
        # tanh(artanh(cos b) / 2) = cos b / (1 + sin b)
        r = math.cos(beta) / (1.0 + math.sin(beta))
        return r * cmath.exp(1j * psi)

    def foot_angle_and_distance(self):
        """Direction of the foot from the origin and the distance to it."""
        foot = self.foot_from_origin()
        return _wrap(cmath.phase(foot)), 2.0 * math.atanh(abs(foot))

    def point_at(self, t):
        """Point at signed arc length ``t`` from the origin's foot, moving toward ``theta2``."""
        return frame(self)(math.tanh(0.5 * t))

    def side(self, z):
        """Sign (+1/-1, 0 on the line) of ``z`` relative to the oriented geodesic.

        +1 means ``z`` lies to the left when travelling from ``theta1`` to
        ``theta2``. Computed in the Klein model, where geodesics are chords.
        """
        k = 2.0 * z / (1.0 + abs(z) ** 2)
        e1, e2 = self.endpoints
        d = e2 - e1
        c = (d.conjugate() * (k - e1)).imag
        if abs(c) < 1e-15:
            return 0
        return 1 if c > 0 else -1

    def contains(self, z, tol=GEOMETRY_TOL):
        return dist(z, foot_of_perpendicular(self, z)) < tol

    def image(self, f):
        """Image of this geodesic under an isometry ``f``."""
        e1, e2 = self.endpoints
        return Geodesic(cmath.phase(f(e1)), cmath.phase(f(e2)))


def _canonical_sign(a, b):
    keys = (a.real, a.imag, b.real, b.imag)
    for k in keys:
        if k > 0:
            return 1.0
        if k < 0:
            return -1.0
    return 1.0


def _renormalize(a, b):
    aa, bb = abs(a), abs(b)
    det = aa * aa - bb * bb
    if det <= 0.0 or not math.isfinite(det):
        raise GeometryError("matrix is not a disk isometry (|a| <= |b|)")
    if det > 1e-6 * aa * aa:
        s = math.sqrt(det)
        return a / s, b / s
    # |a|^2 - |b|^2 is lost to cancellation for large entries; rebuild the
    # moduli from the half translation length seen by both entries instead
    u = 0.5 * (math.acosh(aa) + math.asinh(bb))
    return a * (math.cosh(u) / aa), b * (math.sinh(u) / bb)


@dataclass(frozen=True)
class Isometry:
    """Isometry of the disk, ``z -> (a z + b) / (conj(b) z + conj(a))``.

    When ``reverses`` is set the argument is conjugated first. Instances built
    through :meth:`normalized` have unit determinant and a canonical sign
    (``Re a > 0``, ties broken by ``Im a``, then ``Re b``, then ``Im b``).
    """

    a: complex
    b: complex
    reverses: bool = False

    @classmethod
    def normalized(cls, a, b, reverses=False):
        a, b = _renormalize(complex(a), complex(b))
        s = _canonical_sign(a, b)
        return cls(s * a, s * b, bool(reverses))

    @classmethod
    def identity(cls):
        return cls(1.0 + 0j, 0j, False)

    def canonical(self):
        s = _canonical_sign(self.a, self.b)
        return Isometry(s * self.a, s * self.b, self.reverses)

    @property
    def determinant(self):
        return abs(self.a) ** 2 - abs(self.b) ** 2

    def __call__(self, z):
        if self.reverses:
            z = z.conjugate()
        return (self.a * z + self.b) / (self.b.conjugate() * z + self.a.conjugate())

    def __matmul__(self, other):
        return compose(self, other)

    def inverse(self):
        a, b = self.a, self.b
        if self.reverses:
            # f(z) = M(conj z)  =>  f^-1(w) = conj(M^-1 w) = conj(M^-1)(conj w)
            return Isometry.normalized(a, -b.conjugate(), True)
        return Isometry.normalized(a.conjugate(), -b, False)

    def close_to(self, other, tol=ALGEBRA_TOL):
        """Equality as isometries (up to the sign of the matrix)."""
        if self.reverses != other.reverses:
            return False
        d_plus = max(abs(self.a - other.a), abs(self.b - other.b))
        d_minus = max(abs(self.a + other.a), abs(self.b + other.b))
        return min(d_plus, d_minus) < tol

    def is_identity(self, tol=ALGEBRA_TOL):
        return self.close_to(Isometry.identity(), tol)

    def displacement_of_origin(self):
        """``d(0, f(0))``; equals ``2 asinh|b|`` for a unit-determinant matrix."""
        return 2.0 * math.asinh(abs(self.b))

    def key(self, decimals=9):
        """Hashable key identifying the isometry up to rounding of its entries."""
        vals = np.round([self.a.real, self.a.imag, self.b.real, self.b.imag], decimals)
        vals = vals + 0.0  # drop negative zeros
        s = 1.0
        for v in vals:
            if v != 0:
                s = 1.0 if v > 0 else -1.0
                break
        vals = s * vals + 0.0
        return (self.reverses,) + tuple(float(v) for v in vals)


def compose(f, g):
    """``f o g``: apply ``g`` first, then ``f``."""
    a2, b2 = g.a, g.b
    if f.reverses:
        a2, b2 = a2.conjugate(), b2.conjugate()
    a = f.a * a2 + f.b * b2.conjugate()
    b = f.a * b2 + f.b * a2.conjugate()
    return Isometry.normalized(a, b, f.reverses != g.reverses)


def apply(f, p):
    return f(p)


def rotation(theta):
    """Rotation about the origin by ``theta``."""
    return Isometry.normalized(cmath.exp(0.5j * theta), 0j)


def moving_to_origin(p):
    """The transvection along the diameter through ``p`` sending ``p`` to 0."""
    s = math.sqrt(1.0 - abs(p) ** 2)
    return Isometry(1.0 / s + 0j, -p / s, False)


def rotation_pi(center=0j):
    """Half-turn about ``center``."""
    half_turn = Isometry(1j, 0j, False)
    if center == 0:
        return half_turn
    h = moving_to_origin(center)
    return compose(h.inverse(), compose(half_turn, h))


def _real_translation(length):
    return Isometry(complex(math.cosh(0.5 * length)), complex(math.sinh(0.5 * length)), False)


def frame(g):
    """Orientation-preserving isometry taking the real diameter (-1 -> 1) onto ``g``.

    The origin goes to the foot of ``g`` from the origin.
    """
    delta = _wrap(g.theta2 - g.theta1)
    beta = 0.5 * delta
    psi = g.theta1 + beta
    d = math.atanh(math.cos(beta))
    return compose(rotation(psi), compose(_real_translation(d), rotation(0.5 * math.pi)))


def reflection(g):
    """Reflection in the geodesic ``g``."""
    f = frame(g)
    conj = Isometry(1.0 + 0j, 0j, True)
    return compose(f, compose(conj, f.inverse()))


def translation(axis, length):
    """Translation along ``axis`` (from ``theta1`` toward ``theta2``) by ``length``."""
    if not length > 0:
        raise GeometryError("translation length must be positive")
    f = frame(axis)
    return compose(f, compose(_real_translation(length), f.inverse()))


def make_isometry(kind, **kwargs):
    """Dispatch on ``kind`` in {"rotation_pi", "reflection", "translation"}."""
    builders = {
        "rotation_pi": lambda center=0j: rotation_pi(center),
        "reflection": lambda geodesic: reflection(geodesic),
        "translation": lambda axis, length: translation(axis, length),
    }
    try:
        builder = builders[kind]
    except KeyError:
        raise GeometryError(f"unknown isometry kind {kind!r}") from None
    return builder(**kwargs)


def translation_length(f):
    """Translation length ``2 arccosh(|Re a|)``; 0 for elliptic or parabolic ``f``."""
    if f.reverses:
        raise GeometryError("translation length is defined for orientation-preserving isometries")
    x = abs(f.a.real)
    if x <= 1.0:
        return 0.0
    return 2.0 * math.acosh(x)


def foot_of_perpendicular(g, p):
    """Closest point of geodesic ``g`` to ``p``."""
    h = moving_to_origin(p)
    foot = g.image(h).foot_from_origin()
    return h.inverse()(foot)


def _interleaved(g1, g2):
    a1, a2 = sorted((g1.theta1, g1.theta2))
    inside = [a1 < t < a2 for t in (g2.theta1, g2.theta2)]
    return inside[0] != inside[1]


def intersect_angle(g1, g2):
    """Crossing point of two geodesics and the angle there, or ``None``.

    The angle is measured between the rays heading to ``g1.theta2`` and to
    ``g2.theta2`` and lies in (0, pi).
    """
    if not _interleaved(g1, g2):
        return None
    p1, p2 = g1.endpoints
    q1, q2 = g2.endpoints
    # chords in the Klein model: p1 + s (p2 - p1) = q1 + t (q2 - q1)
    u, v, w = p2 - p1, q2 - q1, q1 - p1
    cross = (u.conjugate() * v).imag
    if abs(cross) < 1e-15:
        return None
    s = (w.conjugate() * v).imag / cross
    k = p1 + s * u
    rk = abs(k)
    if rk >= 1.0:
        return None
    point = k / (1.0 + math.sqrt(1.0 - rk * rk))
    h = moving_to_origin(point)
    angle = abs(cmath.phase(h(q2) / h(p2)))
    if not 0.0 < angle < math.pi:
        return None
    return point, angle
