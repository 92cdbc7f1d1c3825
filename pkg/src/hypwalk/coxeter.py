"""Reflection groups of centrally symmetric polygons with angles pi / k_i.

The side reflections ``r_1 .. r_2m`` generate a hyperbolic Coxeter group.
Walks on it are driven by involutive step distributions, and the
singularity criterion compares ``sum_i 1 / (1 + exp(l(r_i r_{i+m}) / 2))``
with 1/2.

Sides ``i`` and ``i + m`` are swapped by the half-turn about the centre, so
their common perpendicular passes through the centre and
``l(r_i r_{i+m}) = 4 a_i`` exactly. This equals ``2 l(g_i)`` for the side
pairings only when the foot of each side is its midpoint; the criterion
always uses the reflection products themselves.
"""

import math
from dataclasses import dataclass

import numpy as np

from hypwalk import hyperbolic as hyp
from hypwalk import polygon as pg
from hypwalk.exceptions import (
    AngleNotSubmultiple,
    GeometryError,
    NotGeometricallySymmetric,
    SymbolMismatch,
)
from hypwalk.freewalk import PROB_TOL, StepDistribution
from hypwalk.inequality import VERDICT_TOL, CriterionReport

ANGLE_TOL = 1e-9
INVOLUTION_TOL = 1e-12
RELATION_TOL = 1e-9
LENGTH_TOL = 1e-9
MAX_K = 10_000


@dataclass(eq=False)
class CoxeterPolygon:
    """A symmetric polygon whose vertex angles are ``pi / k_i``.

    ``k_values`` lists all 2m integers; central symmetry forces
    ``k_{i+m} = k_i``.
    """

    polygon: pg.SymmetricPolygon
    k_values: list

    @property
    def m(self):
        return self.polygon.m

    @classmethod
    def from_polygon(cls, poly, tol=ANGLE_TOL):
        """Recognize ``gamma_i = pi / k_i`` with integers ``k_i >= 2``."""
        ks = []
        for g in poly.gamma:
            k = int(round(math.pi / g)) if g > math.pi / MAX_K else 0
            if k < 2 or abs(g - math.pi / k) >= tol:
                raise AngleNotSubmultiple(f"vertex angle {g:.17g} is not pi / k for an integer k >= 2")
            ks.append(k)
        ks = ks + ks
        poly.k_values = ks
        return cls(poly, ks)

    @classmethod
    def build(cls, k_values, weights=None):
        """Polygon with angles ``pi / k_i`` and apothems proportional to ``weights``.

        Parameters
        ----------
        k_values : sequence of int
            The m values ``k_1 .. k_m``; the opposite vertices repeat them.
        weights : sequence of float, optional
            Relative apothems; uniform by default.
        """
        ks = [int(k) for k in k_values]
        if any(k < 2 for k in ks):
            raise AngleNotSubmultiple("every k_i must be an integer >= 2")
        m = len(ks)
        w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
        poly = pg.build_with_angles([math.pi / k for k in ks], w)
        return cls.from_polygon(poly)

    def to_dict(self):
        doc = self.polygon.to_dict()
        doc["k_values"] = [int(k) for k in self.k_values]
        return doc

    @classmethod
    def from_dict(cls, doc):
        poly = pg.SymmetricPolygon.from_dict(doc)
        cp = cls.from_polygon(poly)
        if "k_values" in doc and [int(k) for k in doc["k_values"]] != cp.k_values:
            raise AngleNotSubmultiple("k_values do not match the vertex angles")
        return cp


@dataclass(eq=False)
class ReflectionSet:
    reflections: list
    k_values: list

    def __len__(self):
        return len(self.reflections)

    def __getitem__(self, i):
        return self.reflections[i]

    @property
    def m(self):
        return len(self.reflections) // 2

    def involution_defect(self):
        """Max over i of the distance of ``r_i^2`` from the identity."""
        out = 0.0
        for r in self.reflections:
            sq = hyp.compose(r, r)
            out = max(out, min(abs(sq.a - 1), abs(sq.a + 1)), abs(sq.b))
        return out

    def rotation_angles(self):
        """Rotation angle of ``r_i r_{i+1}`` for every vertex, from the trace."""
        n = len(self.reflections)
        out = np.empty(n)
        for i in range(n):
            rot = hyp.compose(self.reflections[i], self.reflections[(i + 1) % n])
            c = min(1.0, abs(rot.a.real))
            out[i] = 2.0 * math.acos(c)
        return out

    def vertex_relation_defect(self):
        """Max over i of ``|k_i theta_i - 2 pi|`` with ``theta_i`` the angle of ``r_i r_{i+1}``.

        This is the distance of ``(r_i r_{i+1})^{k_i}`` from the identity seen
        from the fixed vertex. Measured from the centre instead, it would be
        inflated by ``sinh`` of the vertex distance.
        """
        theta = self.rotation_angles()
        k = np.asarray(self.k_values, dtype=float)
        return float(np.abs(k * theta - 2.0 * math.pi).max())

    def relation_defect_at_origin(self):
        """Max over i of the matrix distance of ``(r_i r_{i+1})^{k_i}`` from the identity."""
        n = len(self.reflections)
        out = 0.0
        for i, k in enumerate(self.k_values):
            rot = hyp.compose(self.reflections[i], self.reflections[(i + 1) % n])
            p = hyp.Isometry.identity()
            for _ in range(k):
                p = hyp.compose(p, rot)
            out = max(out, min(abs(p.a - 1), abs(p.a + 1)), abs(p.b))
        return out

    def opposite_products(self):
        """``r_i r_{i+m}`` for i < m."""
        m = self.m
        return [hyp.compose(self.reflections[i], self.reflections[i + m]) for i in range(m)]

    def opposite_lengths(self):
        return np.array([hyp.translation_length(g) for g in self.opposite_products()])


def reflections(cp):
    """Reflections in the 2m side geodesics, in side order."""
    return ReflectionSet([hyp.reflection(s) for s in cp.polygon.sides], list(cp.k_values))


def length_relation(cp):
    """Per side pair: ``l(r_i r_{i+m})``, ``4 a_i`` and ``2 l(g_i)``."""
    lr = reflections(cp).opposite_lengths()
    lg = pg.pairing_lengths(cp.polygon)[: cp.m]
    return {"reflection": lr, "four_apothems": 4.0 * cp.polygon.apothems, "twice_pairing": 2.0 * lg}


def geometric_symmetry_check(mu):
    """True iff ``mu(r_i) = mu(r_{i+m})`` for every i (within 1e-14)."""
    if not isinstance(mu, StepDistribution) or mu.kind != "involutive":
        raise ValueError("geometric symmetry needs an involutive step distribution")
    m = mu.m
    p = mu.probs
    return bool(np.all(np.abs(p[:m] - p[m:]) <= PROB_TOL))


def coxeter_sum(lengths):
    """``sum_i 1 / (1 + exp(l_i / 2))``."""
    ell = np.asarray(lengths, dtype=float)
    return float(np.sum(1.0 / (1.0 + np.exp(0.5 * ell))))


def coxeter_criterion(cp, mu):
    """Singular verdict when the reflection-product sum stays below 1/2.

    Lengths are read from the matrices ``r_i r_{i+m}`` and must agree with
    ``4 a_i`` within 1e-9.
    """
    if mu.n_symbols != 2 * cp.m:
        raise SymbolMismatch(f"measure has {mu.n_symbols} symbols, polygon has {2 * cp.m} sides")
    if not geometric_symmetry_check(mu):
        raise NotGeometricallySymmetric("need mu(r_i) = mu(r_{i+m}) for every i")
    lengths = reflections(cp).opposite_lengths()
    gap = np.abs(lengths - 4.0 * cp.polygon.apothems).max()
    if gap > LENGTH_TOL:
        raise GeometryError(f"reflection products disagree with 4 * apothem by {gap:.3g}")
    s = coxeter_sum(lengths)
    verdict = "singular" if s < 0.5 - VERDICT_TOL else "inconclusive"
    return CriterionReport(s, 0.5 - s, verdict, [float(x) for x in lengths])


def random_coxeter_polygon(rng, m, choices=(2, 3, 4, 5), max_extent=6.0, max_tries=1000):
    """Random Coxeter polygon with ``k_i`` drawn from ``choices``.

    Apothem weights are log-uniform in [1/4, 4], as for the translation
    polygons. Draws with a vertex farther than ``max_extent`` from the
    centre are redrawn: rotations about such vertices carry rounding errors
    of order ``1e-16 * exp(2 d)`` into the relation checks.
    """
    for _ in range(max_tries):
        ks = [int(k) for k in rng.choice(choices, size=m)]
        w = np.exp(rng.uniform(math.log(0.25), math.log(4.0), m))
        try:
            cp = CoxeterPolygon.build(ks, w)
        except GeometryError:
            continue
        if np.abs(cp.polygon.vertices).max() <= math.tanh(0.5 * max_extent):
            return cp
    raise GeometryError(f"no admissible Coxeter polygon after {max_tries} draws")
