"""Singularity criterion and numerical checks of the supporting inequalities.

The verifiers sample a simplex with a deterministic grid plus seeded
Dirichlet(1) points. Random points are split into a fixed number of
partitions seeded from ``(seed, partition)``, so reports do not depend on how
many worker threads evaluate them.
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import comb, expit

from hypwalk import polygon as pg

VERDICT_TOL = 1e-12
BOUND_TOL = 1e-9
EQUALITY_TOL = 1e-12
INTERIOR_TOL = 1e-10
CLAMP_SLACK = 1e-12
PARTITIONS = 16
MAX_LISTED = 50


@dataclass
class CriterionReport:
    sigma: float
    margin: float
    verdict: str
    lengths: list

    def to_dict(self):
        return asdict(self)


@dataclass
class OptReport:
    minimum_found: float
    argmin: list
    samples_used: int
    violations: list = field(default_factory=list)
    equality_cases_checked: list = field(default_factory=list)
    target: float = 0.0

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return asdict(self)


def sigma_of_lengths(lengths):
    """Sum of ``1 / (1 + exp(l))`` over the lengths."""
    x = np.asarray(lengths, dtype=float)
    if np.any(x < 0):
        raise ValueError("lengths must be non-negative")
    # expit(-l) = 1 / (1 + e^l), stable for large l
    return float(np.sum(expit(-x)))


def criterion(lengths):
    """Singular verdict when the length sum stays below 1.

    Parameters
    ----------
    lengths : sequence of float
        Translation lengths of a symmetric generating set, each element and
        its inverse listed separately.
    """
    s = sigma_of_lengths(lengths)
    verdict = "singular" if s < 1.0 - VERDICT_TOL else "inconclusive"
    return CriterionReport(s, 1.0 - s, verdict, [float(x) for x in lengths])


def polygon_criterion(poly):
    return criterion(pg.pairing_lengths(poly))


def collar_threshold(m):
    if m < 3:
        raise ValueError("need m >= 3")
    return 2.0 * (m - 1) / (m * (m - 2))


def collar_quick_test(apothems, m):
    """True when some apothem is short enough to force singularity outright."""
    t = collar_threshold(m)
    return bool(np.any(np.sinh(np.asarray(apothems, dtype=float)) <= t + VERDICT_TOL))


def arccos_chain(x):
    """``sum_i arccos(x_i x_{i+1})`` with cyclic indices; rows of a 2-D array are separate points."""
    x = np.asarray(x, dtype=float)
    prod = x * np.roll(x, -1, axis=-1)
    return np.sum(np.arccos(np.clip(prod, -1.0, 1.0)), axis=-1)


def acute_chain_quantities(poly):
    """(sum arccos(z_i z_{i+1}), sum z_i) with ``z = tanh(apothem)``."""
    z = poly.z
    return float(arccos_chain(z)), float(z.sum())


# -- sampling ----------------------------------------------------------------

def simplex_grid(m, budget):
    """Points ``c / N`` for all compositions c of N into m parts.

    N is the largest value whose grid fits in ``budget`` points.
    """
    n = 1
    while comb(n + 1 + m - 1, m - 1, exact=True) <= budget:
        n += 1
    bars = np.array(list(itertools.combinations(range(n + m - 1), m - 1)), dtype=np.int64)
    padded = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), n + m - 1)])
    return (np.diff(padded, axis=1).astype(float) - 1.0) / n, n


def _random_chunk(m, count, seed, part):
    rng = np.random.default_rng(np.random.SeedSequence([seed, part]))
    return rng.dirichlet(np.ones(m), size=count)


def simplex_samples(m, budget, seed, workers=1):
    """Grid points plus ``budget`` Dirichlet(1) points on the standard simplex."""
    grid, _ = simplex_grid(m, budget)
    sizes = [budget // PARTITIONS + (1 if p < budget % PARTITIONS else 0) for p in range(PARTITIONS)]
    jobs = [(m, c, seed, p) for p, c in enumerate(sizes) if c > 0]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(lambda j: _random_chunk(*j), jobs))
    else:
        chunks = [_random_chunk(*j) for j in jobs]
    return np.vstack([grid] + chunks)


def _listed(points, values, mask):
    idx = np.flatnonzero(mask)[:MAX_LISTED]
    return [{"point": points[i].tolist(), "value": float(values[i])} for i in idx]


# -- verifiers ---------------------------------------------------------------

def verify_arccos_bound(m, budget=10_000, seed=0, workers=1):
    """Check ``sum arccos(x_i x_{i+1}) >= pi`` on ``{0 <= x_i <= 1, sum x_i = m - 1}``.

    Points come from ``x = 1 - y`` with ``y`` on the standard simplex.
    Equality is checked at the m cyclic placements of (0, 1, ..., 1).
    """
    if m < 3:
        raise ValueError("need m >= 3")
    x = 1.0 - simplex_samples(m, budget, seed, workers)
    prod = x * np.roll(x, -1, axis=1)
    violations = []
    bad_clamp = (prod > 1.0 + CLAMP_SLACK) | (prod < -1.0 - CLAMP_SLACK)
    if bad_clamp.any():
        violations.append({"kind": "clamp", "count": int(bad_clamp.any(axis=1).sum())})
    values = arccos_chain(x)
    low = values < math.pi - BOUND_TOL
    if low.any():
        violations.append({"kind": "bound", "count": int(low.sum()), "points": _listed(x, values, low)})

    cases = []
    for j in range(m):
        pt = np.ones(m)
        pt[j] = 0.0
        v = float(arccos_chain(pt))
        cases.append({"point": pt.tolist(), "value": v, "target": math.pi})
        if abs(v - math.pi) > EQUALITY_TOL:
            violations.append({"kind": "equality", "point": pt.tolist(), "value": v})
    i = int(np.argmin(values))
    return OptReport(float(values[i]), x[i].tolist(), len(x), violations, cases, math.pi)


def sqrt_bound_terms(x):
    """(LHS, RHS) of ``sum sqrt(Delta_i) >= sqrt(4 + 3 sum x_i x_{i+1})``."""
    x = np.asarray(x, dtype=float)
    nxt = np.roll(x, -1, axis=-1)
    delta = x + nxt - x * nxt
    lhs = np.sum(np.sqrt(np.maximum(delta, 0.0)), axis=-1)
    rhs = np.sqrt(4.0 + 3.0 * np.sum(x * nxt, axis=-1))
    return lhs, rhs


def verify_sqrt_bound(m, budget=10_000, seed=0, workers=1):
    """Check the square-root inequality on the standard simplex.

    Also checks pointwise ``Delta_i >= max(x_i, x_{i+1})`` and the
    Cauchy-Schwarz step ``sqrt(Delta_i) sqrt(Delta_{i+2}) >= 2 x_{i+1} x_{i+2}``.
    """
    if m < 3:
        raise ValueError("need m >= 3")
    x = simplex_samples(m, budget, seed, workers)
    lhs, rhs = sqrt_bound_terms(x)
    gap = lhs - rhs
    violations = []
    low = gap < -BOUND_TOL
    if low.any():
        violations.append({"kind": "bound", "count": int(low.sum()), "points": _listed(x, gap, low)})

    nxt = np.roll(x, -1, axis=1)
    delta = x + nxt - x * nxt
    sub = delta < np.maximum(x, nxt) - BOUND_TOL
    if sub.any():
        violations.append({"kind": "delta_max", "count": int(sub.any(axis=1).sum())})
    root = np.sqrt(np.maximum(delta, 0.0))
    cs = root * np.roll(root, -2, axis=1) < 2.0 * nxt * np.roll(x, -2, axis=1) - BOUND_TOL
    if cs.any():
        violations.append({"kind": "cauchy_schwarz", "count": int(cs.any(axis=1).sum())})

    cases = []
    equality_points = [np.eye(m)[j] for j in range(m)]
    if m == 3:
        equality_points.append(np.full(3, 1.0 / 3.0))
    for pt in equality_points:
        l, r = sqrt_bound_terms(pt)
        cases.append({"point": pt.tolist(), "lhs": float(l), "rhs": float(r)})
        if abs(l - r) > EQUALITY_TOL:
            violations.append({"kind": "equality", "point": pt.tolist(), "lhs": float(l), "rhs": float(r)})
    i = int(np.argmin(gap))
    return OptReport(float(gap[i]), x[i].tolist(), len(x), violations, cases, 0.0)


def scalar_bound_gaps(x):
    """Gaps (LHS - RHS) of the two one-variable inequalities on [0, 1]."""
    x = np.asarray(x, dtype=float)
    g1 = (2.0 / math.pi) * np.arccos(1.0 - x) - ((2.0 / 3.0) * np.sqrt(x) + x / 3.0)
    g2 = (2.0 / 3.0) * np.sqrt(4.0 + 3.0 * x) + (2.0 - x) / 3.0 - 2.0
    return g1, g2


def verify_scalar_bounds(budget=10_000):
    """Check both scalar inequalities on a uniform grid of ``budget`` points.

    Equality must hold (within 1e-12) exactly at x in {0, 1} for the first
    and at x = 0 for the second. Elsewhere the gap must exceed 1e-10; a
    smaller gap counts as an unexpected equality.
    """
    x = np.linspace(0.0, 1.0, max(int(budget), 2))
    g1, g2 = scalar_bound_gaps(x)
    violations = []
    cases = []
    for name, g, ends in (("arccos", g1, (0.0, 1.0)), ("sqrt", g2, (0.0,))):
        at_end = np.isin(x, ends)
        for e in ends:
            v = float(g[x == e][0])
            cases.append({"inequality": name, "x": e, "gap": v})
            if abs(v) > EQUALITY_TOL:
                violations.append({"kind": "equality", "inequality": name, "x": e, "gap": v})
        interior = ~at_end & (g <= INTERIOR_TOL)
        if interior.any():
            violations.append({
                "kind": "interior", "inequality": name, "count": int(interior.sum()),
                "x": x[interior][:MAX_LISTED].tolist(),
            })
    both = np.minimum(g1, g2)
    i = int(np.argmin(both))
    return OptReport(float(both[i]), [float(x[i])], len(x), violations, cases, 0.0)
