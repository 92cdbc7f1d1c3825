"""Centrally symmetric hyperbolic 2m-gons and their side pairings.

A polygon is described by its ``m`` apothems ``a_i`` (distance from the
centre ``o = 0`` to side ``i``) and the directions ``phi_i`` of the feet of
the perpendiculars. Sides ``i`` and ``i + m`` are images of each other under
the half-turn about the origin.

Indexing (0-based throughout): vertex ``p_i`` is the crossing of sides ``i``
and ``i + 1``, its interior angle is ``gamma_i``, and the midpoint ``q_i`` of
side ``i`` lies between ``p_{i-1}`` and ``p_i``. Two central-angle
conventions coexist: ``alpha`` (between consecutive feet) drives the
vertex-angle formula, ``midpoint_central_angles`` (between consecutive side
midpoints) drives the dual polygon.
"""

import cmath
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from hypwalk import hyperbolic as hyp
from hypwalk.exceptions import (
    DegenerateAngle,
    DegenerateVertex,
    DualTrickRequired,
    GeometryError,
    NoIntegerCycle,
    NoIntersection,
    PreconditionAngleSum,
    PreconditionViolated,
    ReconstructionFailed,
    SidesDoNotMeet,
    TargetUnreachable,
)

ANGLE_EDGE_TOL = 1e-12
CYCLE_TOL = 1e-8
MAX_CYCLE_K = 64
RESIDUAL_TOL = 1e-10
WELL_CONDITIONED_ANGLE = 1e-2
HALF_PI = 0.5 * math.pi


def vertex_angle_cos(a_i, a_j, alpha):
    """``-cosh a_i cosh a_j cos alpha + sinh a_i sinh a_j``, arranged to avoid cancellation."""
    half = math.sin(0.5 * alpha)
    return -math.cosh(a_i - a_j) + 2.0 * math.cosh(a_i) * math.cosh(a_j) * half * half


def vertex_angle_cos_z(z_i, z_j, alpha):
    """Same cosine written in ``z = tanh(a)`` coordinates."""
    return (z_i * z_j - math.cos(alpha)) / (math.sqrt(1.0 - z_i * z_i) * math.sqrt(1.0 - z_j * z_j))


def vertex_angle(a_i, a_j, alpha):
    """Angle where the sides at distances ``a_i`` and ``a_j`` meet.

    The feet of the two perpendiculars from the centre subtend ``alpha``.
    """
    c = vertex_angle_cos(a_i, a_j, alpha)
    if c >= 1.0 - ANGLE_EDGE_TOL:
        raise SidesDoNotMeet(f"sides do not meet (cos gamma = {c:.10g})")
    if c <= -1.0 + ANGLE_EDGE_TOL:
        raise DegenerateAngle(f"vertex angle degenerates to pi (cos gamma = {c:.10g})")
    return math.acos(c)


@dataclass
class PolygonSpec:
    """Shape request: ``m`` central angles summing to pi and relative apothems.

    When ``target_k`` is set the apothem weights are rescaled by a common factor
    so that the vertex angles satisfy the cycle condition with that ``k``.
    """

    m: int
    central_angles: np.ndarray
    apothem_weights: np.ndarray
    target_k: int = None

    def __post_init__(self):
        self.central_angles = np.asarray(self.central_angles, dtype=float)
        self.apothem_weights = np.asarray(self.apothem_weights, dtype=float)
        if self.m < 3:
            raise GeometryError("need m >= 3")
        if self.central_angles.shape != (self.m,) or self.apothem_weights.shape != (self.m,):
            raise GeometryError("central_angles and apothem_weights must have length m")
        if np.any(self.central_angles <= 0):
            raise GeometryError("central angles must be positive")
        if abs(self.central_angles.sum() - math.pi) > 1e-12:
            raise GeometryError("central angles must sum to pi")
        if np.any(self.apothem_weights <= 0):
            raise GeometryError("apothem weights must be positive")
        if self.target_k is not None and self.target_k < 1:
            raise GeometryError("target_k must be >= 1")

    @classmethod
    def uniform(cls, m, k=None, weights=None):
        w = np.ones(m) if weights is None else weights
        return cls(m, np.full(m, math.pi / m), w, k)


@dataclass(eq=False)
class SymmetricPolygon:
    m: int
    k: int
    feet_angles: np.ndarray
    apothems: np.ndarray
    gamma: np.ndarray
    vertices: np.ndarray
    midpoints: np.ndarray
    k_values: list = field(default=None)

    @property
    def alpha(self):
        """Central angles between consecutive feet (sums to pi)."""
        phi = np.append(self.feet_angles, self.feet_angles[0] + math.pi)
        return np.diff(phi)

    @property
    def z(self):
        return np.tanh(self.apothems)

    @property
    def midpoint_distances(self):
        return np.array([hyp.dist(0j, q) for q in self.midpoints[: self.m]])

    @property
    def midpoint_central_angles(self):
        q = self.midpoints
        return np.array([hyp.angle_at(0j, q[i], q[i + 1]) for i in range(self.m)])

    @property
    def sides(self):
        m = self.m
        phi = np.concatenate([self.feet_angles, self.feet_angles + math.pi])
        a = np.concatenate([self.apothems, self.apothems])
        return [hyp.Geodesic.from_foot(phi[i], a[i]) for i in range(2 * m)]

    @property
    def all_gamma(self):
        return np.concatenate([self.gamma, self.gamma])

    @property
    def area(self):
        """Gauss-Bonnet area ``(2m - 2) pi - sum of all interior angles``."""
        return (2 * self.m - 2) * math.pi - 2.0 * float(self.gamma.sum())

    def geometric_gamma(self):
        """Vertex angles measured in the disk from the vertices and the side endpoints.

        Rays are aimed at the ideal endpoints of the two sides rather than at
        the neighbouring vertices, which keeps short sides near the boundary
        well conditioned.
        """
        p, q = self.vertices, self.midpoints
        sides = self.sides
        n = 2 * self.m
        out = np.empty(self.m)
        for i in range(self.m):
            h = hyp.moving_to_origin(complex(p[i]))
            rays = []
            for side, toward in ((sides[i], q[i]), (sides[(i + 1) % n], q[(i + 1) % n])):
                aim = h(complex(toward))
                ends = [h(e) for e in side.endpoints]
                rays.append(max(ends, key=lambda e: (e * aim.conjugate()).real))
            out[i] = abs(cmath.phase(rays[1] / rays[0]))
        return out

    def vertex_residuals(self):
        """cos(measured vertex angle) minus the apothem formula, per vertex."""
        a = np.append(self.apothems, self.apothems[0])
        alpha = self.alpha
        measured = self.geometric_gamma()
        return np.array([
            math.cos(measured[i]) - vertex_angle_cos(a[i], a[i + 1], alpha[i])
            for i in range(self.m)
        ])

    def symmetry_defect(self):
        m = self.m
        dp = np.abs(self.vertices[m:] + self.vertices[:m]).max()
        dq = np.abs(self.midpoints[m:] + self.midpoints[:m]).max()
        return float(max(dp, dq))

    def to_dict(self):
        doc = {
            "m": self.m,
            "k": self.k,
            "alpha": [float(x) for x in self.alpha],
            "apothems": [float(x) for x in self.apothems],
            "gamma": [float(x) for x in self.gamma],
            "vertices": [[z.real, z.imag] for z in self.vertices],
            "midpoints": [[z.real, z.imag] for z in self.midpoints],
            "feet_angles": [float(x) for x in self.feet_angles],
        }
        if self.k_values is not None:
            doc["k_values"] = [int(k) for k in self.k_values]
        return doc

    @classmethod
    def from_dict(cls, doc):
        m = int(doc["m"])
        if "feet_angles" in doc:
            phi = np.array(doc["feet_angles"], dtype=float)
        else:
            alpha = np.array(doc["alpha"], dtype=float)
            phi = np.concatenate([[0.0], np.cumsum(alpha[:-1])])
        vertices = np.array([complex(x, y) for x, y in doc["vertices"]])
        midpoints = np.array([complex(x, y) for x, y in doc["midpoints"]])
        if len(vertices) != 2 * m or len(midpoints) != 2 * m:
            raise GeometryError("polygon document must list 2m vertices and midpoints")
        return cls(
            m=m,
            k=doc.get("k"),
            feet_angles=phi,
            apothems=np.array(doc["apothems"], dtype=float),
            gamma=np.array(doc["gamma"], dtype=float),
            vertices=vertices,
            midpoints=midpoints,
            k_values=doc.get("k_values"),
        )


def _gamma_from_feet(phi, apothems):
    m = len(apothems)
    alpha = np.diff(np.append(phi, phi[0] + math.pi))
    a = np.append(apothems, apothems[0])
    return np.array([vertex_angle(a[i], a[i + 1], alpha[i]) for i in range(m)])


def _crossing(phi, a_i, a_j, alpha):
    """Disk point where the sides (phi, a_i) and (phi + alpha, a_j) cross, or None.

    Hyperboloid cross product of the two side normals, written out in the
    frame rotated by ``-phi`` so nearly parallel sides stay accurate.
    """
    ci = math.cosh(a_i)
    cj = math.cosh(a_j)
    half = math.sin(0.5 * alpha)
    x0 = ci * cj * math.sin(alpha)
    x1 = math.sinh(a_i) * cj * math.sin(alpha)
    x2 = 2.0 * math.sinh(a_i) * cj * half * half - math.sinh(a_i - a_j)
    norm2 = (cj * math.sin(alpha)) ** 2 - x2 * x2
    if not (norm2 > 0.0 and x0 > 0.0):
        return None
    r = math.sqrt(norm2)
    return complex(x1 / r, x2 / r) / (1.0 + x0 / r) * cmath.exp(1j * phi)


def assemble(feet_angles, apothems, k=None):
    """Build the polygon cut out by the sides with the given feet and apothems.

    Raises DegenerateVertex when consecutive sides fail to meet or some side
    is cut off by its neighbours.
    """
    phi = np.asarray(feet_angles, dtype=float)
    a = np.asarray(apothems, dtype=float)
    m = len(a)
    alpha = np.diff(np.append(phi, phi[0] + math.pi))
    if np.any(alpha <= 0) or np.any(a <= 0):
        raise DegenerateVertex("feet must be strictly ordered and apothems positive")
    try:
        gamma = _gamma_from_feet(phi, a)
    except (SidesDoNotMeet, DegenerateAngle) as exc:
        raise DegenerateVertex(str(exc)) from exc

    phi2 = np.concatenate([phi, phi + math.pi])
    a2 = np.concatenate([a, a])
    sides = [hyp.Geodesic.from_foot(phi2[i], a2[i]) for i in range(2 * m)]
    vertices = np.empty(2 * m, dtype=complex)
    for i in range(m):
        p = _crossing(phi2[i], a2[i], a2[i + 1], phi2[i + 1] - phi2[i])
        if p is None:
            raise DegenerateVertex(f"sides {i} and {i + 1} do not cross")
        vertices[i] = p
        vertices[i + m] = -p
    _check_convex(sides, vertices)

    midpoints = np.empty(2 * m, dtype=complex)
    for i in range(m):
        q = hyp.midpoint(vertices[i - 1], vertices[i])
        midpoints[i] = q
        midpoints[i + m] = -q
    poly = SymmetricPolygon(m, k, phi, a, gamma, vertices, midpoints)
    # vertices hugging the boundary cannot be certified in double precision
    worst = float(np.abs(poly.vertex_residuals()).max())
    if not worst < RESIDUAL_TOL:
        raise DegenerateVertex(f"vertex-angle residual {worst:.3g} exceeds {RESIDUAL_TOL:g}")
    return poly


def _check_convex(sides, vertices):
    n = len(sides)
    turns = np.angle(np.roll(vertices, -1) / vertices)
    if np.any(turns <= 0) or abs(turns.sum() - 2 * math.pi) > 1e-9:
        raise DegenerateVertex("vertices are not in convex position around the centre")
    for j, side in enumerate(sides):
        inner = side.side(0j)
        for i in range(n):
            if i in (j, (j - 1) % n):
                continue
            if side.side(vertices[i]) != inner:
                raise DegenerateVertex(f"vertex {i} lies beyond side {j}")


def angle_sum_at_scale(spec, t):
    """Sum of the m vertex angles when every apothem is ``t * weight``."""
    phi = np.concatenate([[0.0], np.cumsum(spec.central_angles[:-1])])
    return float(_gamma_from_feet(phi, t * spec.apothem_weights).sum())


def _crossing_ok(spec, t):
    w = np.append(spec.apothem_weights, spec.apothem_weights[0]) * t
    alpha = spec.central_angles
    for i in range(spec.m):
        c = vertex_angle_cos(w[i], w[i + 1], alpha[i])
        if not -1.0 + ANGLE_EDGE_TOL < c < 1.0 - ANGLE_EDGE_TOL:
            return False
    return True


def _scale_limit(spec):
    """Largest common scale keeping every pair of consecutive sides crossing."""
    hi = 1.0
    while _crossing_ok(spec, hi):
        hi *= 2.0
        if hi > 1e6:
            raise DegenerateVertex("sides keep crossing at every scale")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _crossing_ok(spec, mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return lo


def build(spec):
    """Construct the polygon described by ``spec``.

    With ``spec.target_k`` set, the apothems are ``t * weights`` where ``t`` is
    found by bracketing so that the m vertex angles sum to ``2 pi / k``.
    """
    phi = np.concatenate([[0.0], np.cumsum(spec.central_angles[:-1])])
    if spec.target_k is None:
        poly = assemble(phi, spec.apothem_weights)
        try:
            poly.k = check_cycle(poly)
        except NoIntegerCycle:
            pass
        return poly

    k = int(spec.target_k)
    target = 2.0 * math.pi / k
    if not target < (spec.m - 1) * math.pi:
        raise TargetUnreachable(
            f"angle sum 2pi/{k} is not below (m-1)pi for m={spec.m}; no hyperbolic polygon exists"
        )
    t_lo = 1e-6
    t_hi = _scale_limit(spec)
    if t_hi <= t_lo or angle_sum_at_scale(spec, t_lo) <= target:
        raise DegenerateVertex("no admissible scale bracket for the cycle solve")
    if angle_sum_at_scale(spec, t_hi) >= target:
        raise DegenerateVertex(
            "a vertex degenerates before the angle sum reaches the target"
        )
    t = brentq(lambda s: angle_sum_at_scale(spec, s) - target, t_lo, t_hi,
               xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    poly = assemble(phi, t * spec.apothem_weights, k)
    if abs(poly.gamma.sum() - target) > 1e-11:
        raise DegenerateVertex("cycle solve did not reach the target angle sum")
    return poly


def build_with_angles(vertex_angles, apothem_weights):
    """Polygon with prescribed vertex angles ``gamma_i`` and apothems ``t * weights``.

    The central angles follow from the vertex-angle formula solved for
    ``alpha``; the common scale ``t`` is chosen so they sum to pi.
    """
    gamma = np.asarray(vertex_angles, dtype=float)
    w = np.asarray(apothem_weights, dtype=float)
    m = len(gamma)
    if m < 3 or w.shape != (m,):
        raise GeometryError("need m >= 3 angles and matching weights")
    if np.any(gamma <= 0) or np.any(gamma >= math.pi):
        raise GeometryError("vertex angles must lie in (0, pi)")
    if not gamma.sum() < (m - 1) * math.pi:
        raise TargetUnreachable("vertex angles too large for a hyperbolic polygon")

    def central(t):
        a = np.append(w, w[0]) * t
        # half-angle form of cos alpha = (sinh sinh - cos gamma) / (cosh cosh)
        near = np.sqrt(np.maximum(np.cosh(a[:-1] - a[1:]) + np.cos(gamma), 0.0))
        far = np.sqrt(np.maximum(np.cosh(a[:-1] + a[1:]) - np.cos(gamma), 0.0))
        return 2.0 * np.arctan2(near, far)

    hi = 1.0
    while central(hi).sum() > math.pi:
        hi *= 2.0
        if hi > 1e4:
            raise DegenerateVertex("could not bracket the central angle sum")
    t = brentq(lambda s: central(s).sum() - math.pi, 1e-9, hi, xtol=1e-15,
               rtol=4 * np.finfo(float).eps, maxiter=500)
    alpha = central(t)
    phi = np.concatenate([[0.0], np.cumsum(alpha[:-1])])
    poly = assemble(phi, t * w)
    if np.abs(poly.gamma - gamma).max() > 1e-9:
        raise DegenerateVertex("prescribed vertex angles were not reproduced")
    return poly


def check_cycle(poly):
    """Integer ``k`` in [1, 64] with ``sum(gamma_i, i < m) = 2 pi / k``."""
    s = float(poly.gamma.sum())
    for k in range(1, MAX_CYCLE_K + 1):
        if abs(s - 2.0 * math.pi / k) < CYCLE_TOL:
            return k
    raise NoIntegerCycle(f"angle sum {s:.12g} is not 2pi/k for any k <= {MAX_CYCLE_K}")


def side_pairings(poly):
    """Translations ``g_i = half-turn(q_i) o half-turn(o)``; ``g_{i+m}`` is the inverse."""
    sigma_o = hyp.rotation_pi(0j)
    g = [hyp.compose(hyp.rotation_pi(complex(q)), sigma_o) for q in poly.midpoints[: poly.m]]
    return g + [x.inverse() for x in g]


def pairing_lengths(poly):
    return np.array([hyp.translation_length(g) for g in side_pairings(poly)])


def sigma(poly):
    """``Sigma(P) = sum over all 2m sides of 1 / (1 + exp(2 l_i))``, l_i the midpoint distances."""
    ell = poly.midpoint_distances
    return float(2.0 * np.sum(1.0 / (1.0 + np.exp(2.0 * ell))))


def random_polygon(rng, m, k, method="angles", max_extent=6.0, max_tries=10000):
    """Random polygon meeting the cycle condition with parameter ``k``.

    Apothem weights are log-uniform in [1/4, 4] in both methods.

    ``method="angles"`` draws the m vertex angles from a flat Dirichlet scaled
    to ``2 pi / k`` and solves for the central angles. ``method="apothem"``
    draws flat-Dirichlet central angles and runs the cycle solve; for most
    (m, k) beyond (4, 1) it almost never succeeds, since some vertex turns
    ideal before the angle sum drops far enough. Degenerate draws are redrawn
    in both cases, as are polygons with a side midpoint farther than
    ``max_extent`` from the centre. Beyond that size, chained isometries lose
    more than 1e-8 to rounding.
    """
    if not 2.0 * math.pi / k < (m - 1) * math.pi:
        raise TargetUnreachable(f"no hyperbolic {2 * m}-gon with angle sum 4pi/{k}")
    for _ in range(max_tries):
        w = np.exp(rng.uniform(math.log(0.25), math.log(4.0), m))
        try:
            if method == "angles":
                gamma = rng.dirichlet(np.ones(m)) * (2.0 * math.pi / k)
                if gamma.max() >= math.pi or gamma.min() <= 0.0:
                    continue
                poly = build_with_angles(gamma, w)
                poly.k = k
            else:
                alpha = rng.dirichlet(np.ones(m)) * math.pi
                alpha[-1] = math.pi - alpha[:-1].sum()
                if alpha.min() <= 0.0:
                    continue
                poly = build(PolygonSpec(m, alpha, w, k))
        except GeometryError:
            continue
        if max_extent is None or poly.midpoint_distances.max() <= max_extent:
            return poly
    raise DegenerateVertex(f"no admissible polygon after {max_tries} draws")


# -- obtuse angles -----------------------------------------------------------

@dataclass
class NeutralizingReport:
    obtuse: list
    pairs: list
    unmatched: list
    disjoint: bool


def _is_obtuse(g):
    return g > HALF_PI + ANGLE_EDGE_TOL


def neutralizing_pairs(poly):
    """Match every obtuse vertex with an adjacent vertex so the two angles sum to <= pi.

    Works on the full cyclic list of 2m angles and only considers centrally
    symmetric matchings. ``pairs`` holds ``(obtuse, partner)`` vertex indices.
    """
    m = poly.m
    n = 2 * m
    g = poly.all_gamma
    obtuse = [i for i in range(n) if _is_obtuse(g[i])]
    if not obtuse:
        return NeutralizingReport([], [], [], True)

    first = [i for i in obtuse if i < m]
    options = []
    for j in first:
        cand = [c % n for c in (j + 1, j - 1) if g[j] + g[c % n] <= math.pi + ANGLE_EDGE_TOL]
        options.append(cand)

    for choice in itertools.product(*options):
        pairs = []
        for j, c in zip(first, choice):
            pairs.append((j, c))
            pairs.append(((j + m) % n, (c + m) % n))
        used = [v for pair in pairs for v in pair]
        if len(set(used)) == len(used):
            return NeutralizingReport(obtuse, pairs, [], True)

    pairs, unmatched = [], []
    for j, cand in zip(first, options):
        if cand:
            c = cand[0]
            pairs += [(j, c), ((j + m) % n, (c + m) % n)]
        else:
            unmatched += [j, j + m]
    return NeutralizingReport(obtuse, pairs, sorted(unmatched), False)


@dataclass
class SurgeryResult:
    F: complex
    G: complex
    delta: float


def pentagon_surgery(A, B, C, D, E):
    """Rotate side CD about its midpoint until it meets BC at a right angle.

    Requires right angles at B and E, an angle of at most pi/2 at C and
    ``C + D <= pi``. Returns the new vertices F (on BC) and G (on ED) and the
    angle ``delta`` at G.
    """
    ang_b = hyp.angle_at(B, A, C)
    ang_e = hyp.angle_at(E, D, A)
    ang_c = hyp.angle_at(C, B, D)
    ang_d = hyp.angle_at(D, C, E)
    if abs(ang_b - HALF_PI) > hyp.GEOMETRY_TOL or abs(ang_e - HALF_PI) > hyp.GEOMETRY_TOL:
        raise PreconditionViolated("angles at B and E must be right angles")
    if ang_c > HALF_PI + ANGLE_EDGE_TOL:
        raise PreconditionViolated(f"angle at C must not be obtuse (got {ang_c:.12g})")
    if ang_c + ang_d > math.pi + ANGLE_EDGE_TOL:
        raise PreconditionViolated("angles at C and D must sum to at most pi")
    P = hyp.midpoint(C, D)
    F = hyp.foot_of_perpendicular(hyp.Geodesic.through(B, C), P)
    try:
        new_side = hyp.Geodesic.through(F, P)
    except GeometryError as exc:
        raise NoIntersection("midpoint of CD lies on BC") from exc
    hit = hyp.intersect_angle(new_side, hyp.Geodesic.through(E, D))
    if hit is None:
        # the angle hypotheses do not force FP and ED to meet; they can be ultraparallel
        raise NoIntersection("line FP does not meet line ED")
    G = hit[0]
    # G sits on ED beyond D; when the two coincide the ray toward E is the same ray
    toward = D if hyp.dist(G, D) > hyp.GEOMETRY_TOL else E
    return SurgeryResult(F, G, hyp.angle_at(G, toward, F))


def sample_admissible_pentagon(rng, max_tries=10000):
    """Random pentagon ABCDE (A at the origin) meeting the surgery preconditions."""
    for _ in range(max_tries):
        b, e = rng.uniform(0.1, 2.0, 2)
        opening = rng.uniform(0.3, 2.8)
        psi = rng.uniform(0.05, 0.95) * opening
        d = rng.uniform(0.1, 3.0)
        side_b = hyp.Geodesic.from_foot(0.0, b)
        side_e = hyp.Geodesic.from_foot(opening, e)
        side_5 = hyp.Geodesic.from_foot(psi, d)
        hc = hyp.intersect_angle(side_b, side_5)
        hd = hyp.intersect_angle(side_5, side_e)
        if hc is None or hd is None or hyp.intersect_angle(side_b, side_e) is not None:
            continue
        A, B, E = 0j, complex(math.tanh(0.5 * b)), math.tanh(0.5 * e) * cmath.exp(1j * opening)
        C, D = hc[0], hd[0]
        # convex, counter-clockwise A B C D E with the fifth side beyond B and E
        args = [cmath.phase(z) for z in (B, C, D, E)]
        if not (0.0 < args[1] < args[2] < opening):
            continue
        if side_5.side(B) != side_5.side(0j) or side_5.side(E) != side_5.side(0j):
            continue
        ang_c = hyp.angle_at(C, B, D)
        ang_d = hyp.angle_at(D, C, E)
        if ang_c < HALF_PI and ang_c + ang_d <= math.pi:
            return A, B, C, D, E
    raise GeometryError("could not sample an admissible pentagon")


def _unwrap_near(angle, reference):
    return reference + math.remainder(angle - reference, 2 * math.pi)


def reduce_to_acute(poly):
    """Replace the side between each neutralizing pair so no angle stays obtuse.

    For each pair, the pentagon cut out by the centre, the obtuse vertex D,
    its partner C and the feet of the two outer sides goes through
    ``pentagon_surgery``. The shared side is replaced by the line FG, which
    passes through the old side's midpoint and meets C's outer side at a
    right angle.

    Raises NoIntersection when that line misses D's outer side; this can
    happen even though the angle hypotheses hold.
    """
    report = neutralizing_pairs(poly)
    if not report.obtuse:
        return poly
    if not report.disjoint:
        raise DualTrickRequired("obtuse angles do not form disjoint neutralizing pairs")
    m, n = poly.m, 2 * poly.m
    lines = poly.sides
    new_lines = list(lines)
    p = poly.vertices
    for j, c in report.pairs:
        shared = (j + 1) % n if c == (j + 1) % n else j
        far_c = c if shared == (c + 1) % n else (c + 1) % n
        far_d = j if shared == (j + 1) % n else (j + 1) % n
        B = lines[far_c].foot_from_origin()
        E = lines[far_d].foot_from_origin()
        cut = pentagon_surgery(0j, B, complex(p[c]), complex(p[j]), E)
        phi_f = float(np.concatenate([poly.feet_angles, poly.feet_angles + math.pi])[far_c])
        along = hyp.dist(B, cut.F)
        if math.remainder(cmath.phase(cut.F) - phi_f, 2 * math.pi) < 0:
            along = -along
        new_lines[shared] = _perpendicular_at(phi_f, float(poly.apothems[far_c % m]), along)

    phi, a = [], []
    for i in range(m):
        line = new_lines[i]
        if isinstance(line, tuple):
            direction, distance = line
        else:
            direction, distance = line.foot_angle_and_distance()
        phi.append(_unwrap_near(direction, poly.feet_angles[i]))
        a.append(distance)
    return assemble(np.array(phi), np.array(a))


def _perpendicular_at(phi, a, s):
    """(foot direction, apothem) of the line perpendicular to side (phi, a) at arc length s.

    ``s`` is measured from the foot, positive counter-clockwise. The new
    line's hyperboloid normal is the side's unit tangent at that point.
    """
    sh, ch = math.sinh(s), math.cosh(s)
    t0 = sh * math.cosh(a)
    t1 = sh * math.sinh(a) * math.cos(phi) - ch * math.sin(phi)
    t2 = sh * math.sinh(a) * math.sin(phi) + ch * math.cos(phi)
    if t0 < 0:
        t0, t1, t2 = -t0, -t1, -t2
    return math.atan2(t2, t1), math.asinh(t0)


def phi_sum(x):
    """``sum 1 / (1 + exp(2 x_i))``."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(1.0 / (1.0 + np.exp(2.0 * x))))


# -- dual polygon -------------------------------------------------------------

@dataclass(eq=False)
class DualPolygon:
    """m-gon with sides ``2 l_i`` and angles ``alpha_hat_i`` plus a marked point.

    Side ``i`` joins ``vertices[i - 1]`` to ``vertices[i]``; ``angles[i]`` is
    the interior angle at ``vertices[i]``. ``vertices[0]`` sits at the origin.
    ``frames[i]`` takes the origin to ``vertices[i]`` and the positive real
    direction onto side ``i + 1``. Distant vertices are only coarsely
    resolved as disk points, so later constructions work from the frames.
    """

    m: int
    side_lengths: np.ndarray
    angles: np.ndarray
    vertices: np.ndarray
    basepoint: complex
    closure_residual: float
    frames: list = field(default=None, repr=False)

    @property
    def side_midpoints(self):
        if self.frames is None:
            w = self.vertices
            return np.array([hyp.midpoint(w[i - 1], w[i]) for i in range(self.m)])
        return np.array([
            self.frames[i - 1](math.tanh(0.25 * self.side_lengths[i])) for i in range(self.m)
        ])

    def to_dict(self):
        return {
            "m": self.m,
            "side_lengths": [float(x) for x in self.side_lengths],
            "angles": [float(x) for x in self.angles],
            "vertices": [[z.real, z.imag] for z in self.vertices],
            "basepoint": [self.basepoint.real, self.basepoint.imag],
            "closure_residual": float(self.closure_residual),
            "start_direction": float(cmath.phase(self.frames[0](0.5))),
        }

    @classmethod
    def from_dict(cls, doc):
        base = complex(*doc.get("basepoint", (0.0, 0.0)))
        return cls.from_sides_and_angles(
            doc["side_lengths"], doc["angles"], base, doc.get("start_direction", 0.0)
        )

    @classmethod
    def from_sides_and_angles(cls, side_lengths, angles, basepoint=0j, start_direction=0.0):
        """Lay out the polygon by walking the sides and turning at each vertex."""
        s = np.asarray(side_lengths, dtype=float)
        ang = np.asarray(angles, dtype=float)
        m = len(s)
        if m < 3 or ang.shape != (m,) or np.any(s <= 0) or np.any(ang <= 0):
            raise GeometryError("need m >= 3 positive side lengths and angles")
        start = hyp.rotation(start_direction)
        frames = [start]
        turtle = start
        for step in range(1, m + 1):
            i = step % m
            turtle = hyp.compose(turtle, hyp._real_translation(s[i]))
            turtle = hyp.compose(turtle, hyp.rotation(math.pi + ang[i]))
            if step < m:
                frames.append(turtle)
        probe = math.tanh(0.5)
        residual = max(hyp.dist(turtle(0j), start(0j)), hyp.dist(turtle(probe), start(probe)))
        vertices = np.array([f(0j) for f in frames])
        return cls(m, s, ang, vertices, complex(basepoint), residual, frames)


def dual_sigma(dual):
    """``Sigma`` read off the dual: ``2 * sum over dual sides of 1 / (1 + exp(s_i))``.

    Each dual side stands for a pair of opposite primal sides, hence the
    factor two; with it the value equals ``sigma`` of the primal polygon.
    """
    return float(2.0 * np.sum(1.0 / (1.0 + np.exp(dual.side_lengths))))


def dual(poly):
    """Dual polygon of a polygon whose 2m interior angles sum to 4 pi.

    The quadrilaterals ``(o, q_i, p_i, q_{i+1})`` are regrouped around a
    single point (the image of every ``p_i``) which becomes the basepoint.
    """
    total = 2.0 * float(poly.gamma.sum())
    if abs(total - 4.0 * math.pi) > CYCLE_TOL:
        raise PreconditionAngleSum(f"interior angles sum to {total:.12g}, not 4 pi")
    m = poly.m
    ell = poly.midpoint_distances
    angles = poly.midpoint_central_angles
    heading = cmath.phase(complex(poly.midpoints[1]))
    return DualPolygon.from_sides_and_angles(2.0 * ell, angles, complex(poly.vertices[0]), heading)


def _reconstruct(d, v):
    m = d.m
    ell = 0.5 * d.side_lengths
    theta = cmath.phase(d.frames[0](0.5) - d.frames[0](0j))
    thetas = [theta - d.angles[0]]
    for i in range(m):
        thetas.append(thetas[-1] + d.angles[i])
    # thetas[i] is the direction of q'_i from the new centre
    q = np.array([math.tanh(0.5 * ell[i]) * cmath.exp(1j * thetas[i]) for i in range(m)])
    p = np.empty(m, dtype=complex)
    for i in range(m):
        back = hyp.compose(hyp.rotation(thetas[i + 1]), d.frames[i].inverse())
        p[i] = back(v)
    p_all = np.concatenate([p, -p])
    q_all = np.concatenate([q, -q])
    for i in range(m):
        mid = hyp.midpoint(p_all[i - 1], p_all[i])
        if hyp.dist(mid, q_all[i]) > 1e-7:
            raise ReconstructionFailed(f"quadrilaterals do not glue along side {i}")
    lines = [hyp.Geodesic.through(p_all[i - 1], p_all[i]) for i in range(m)]
    phi, a = [], []
    ref = None
    for line in lines:
        direction, distance = line.foot_angle_and_distance()
        ref = direction if ref is None else _unwrap_near(direction, ref + 1e-300)
        phi.append(ref)
        a.append(distance)
    phi = np.array(phi)
    phi = phi[0] + np.concatenate([[0.0], np.cumsum(np.mod(np.diff(phi), 2 * math.pi))])
    try:
        poly = assemble(phi, np.array(a))
    except DegenerateVertex as exc:
        raise ReconstructionFailed(str(exc)) from exc
    if np.abs(poly.midpoints[:m] - q).max() > 1e-7:
        raise ReconstructionFailed("rebuilt polygon does not reproduce the side midpoints")
    return poly


def redistribute_basepoint(d, basepoint=None):
    """Primal polygon of ``d`` seen from a new basepoint.

    Without an explicit ``basepoint`` the new point is taken on the segment
    joining the midpoints of two non-adjacent sides (its midpoint first, then
    scanning along it), which leaves at most two obtuse angles at the point
    and hence at most four obtuse angles, in disjoint neutralizing pairs, in
    the rebuilt polygon.
    """
    if not d.closure_residual < 1e-7:
        raise ReconstructionFailed(f"dual polygon does not close (residual {d.closure_residual:.3g})")
    if basepoint is not None:
        return _reconstruct(d, complex(basepoint))
    m = d.m
    if m < 4:
        raise ReconstructionFailed("need at least four sides to pick non-adjacent sides")
    M = d.side_midpoints
    pairs = [(0, m // 2)] + [(a, b) for a in range(m) for b in range(a + 2, m)
                             if (a, b) != (0, m // 2) and not (a == 0 and b == m - 1)]
    last_error = None
    best = None
    for a_idx, b_idx in pairs:
        seg = hyp.dist(M[a_idx], M[b_idx])
        line = hyp.Geodesic.through(M[a_idx], M[b_idx])
        start = hyp.frame(line).inverse()(M[a_idx])
        s0 = 2.0 * math.atanh(start.real)
        for t in (0.5, 0.4, 0.6, 0.3, 0.7, 0.2, 0.8):
            v_point = line.point_at(s0 + t * seg)
            try:
                poly = _reconstruct(d, v_point)
            except GeometryError as exc:
                last_error = exc
                continue
            report = neutralizing_pairs(poly)
            if not (report.disjoint and len(report.obtuse) <= 4):
                last_error = f"{len(report.obtuse)} obtuse angles at t={t} on sides {a_idx},{b_idx}"
                continue
            # a nearly flat vertex makes the rebuilt sides ill-conditioned; keep looking
            if poly.gamma.min() >= WELL_CONDITIONED_ANGLE:
                return poly
            if best is None or poly.gamma.min() > best.gamma.min():
                best = poly
    if best is not None:
        return best
    raise ReconstructionFailed(f"no basepoint on the scanned segments works ({last_error})")
