"""Random walks ``w_n = g_1 g_2 ... g_n`` on polygon groups.

Provides reproducible simulation, drift estimates, entropy upper bounds
``H(mu^n) / n`` from exact convolution powers, empirical boundary histograms
and a dimension report combining them.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from hypwalk import _rng
from hypwalk import hyperbolic as hyp
from hypwalk import inequality
from hypwalk import polygon as pg
from hypwalk.exceptions import InsufficientSample, SupportTooLarge, SymbolMismatch
from hypwalk.freewalk import default_workers

LOG2 = math.log(2.0)
INVERSE_TOL = 1e-9
KEY_DECIMALS = 9
MAX_PRODUCTS = 10_000_000
ENTROPY_PARTITIONS = 16
RADIAL_GATE = 0.99
RADIAL_FRACTION = 0.95
Z_95 = 1.959963984540054
TWO_PI = 2.0 * math.pi


# -- simulation --------------------------------------------------------------

@njit(cache=True, nogil=True)
def _log_cosh(u):
    return u + math.log1p(math.exp(-2.0 * u)) - LOG2


@njit(cache=True, nogil=True)
def _unit(z):
    r = abs(z)
    if r == 0.0:
        return 1.0 + 0.0j
    return z / r


@njit(cache=True, nogil=True)
def _walk_kernel(cum, inv, ga, gb, grev, n, start, stop, seed, out_u, out_ea, out_eb, out_rev):
    """Products ``g_1 ... g_n`` for paths in ``[start, stop)`` in polar form.

    An isometry is stored as ``(u, ea, eb)`` with matrix entries
    ``a = cosh(u) ea`` and ``b = sinh(u) eb``, ``|ea| = |eb| = 1``; ``2u`` is
    the displacement of the origin. Products are formed on entries scaled by
    ``1 / cosh(u)`` and the new ``u`` is read from ``e^u = |a| + |b|``, so the
    result stays unimodular and never overflows.

    The freely reduced word is kept as a stack with the product at every
    depth. A step by the inverse of the top symbol pops back to the stored
    product, so backtracking never multiplies a long product by its inverse
    (which would cancel away all precision).
    """
    su = np.empty(n + 1, dtype=np.float64)
    sea = np.empty(n + 1, dtype=np.complex128)
    seb = np.empty(n + 1, dtype=np.complex128)
    srev = np.empty(n + 1, dtype=np.bool_)
    word = np.empty(n + 1, dtype=np.int64)
    for path in range(start, stop):
        key = _rng.stream_key(seed, path)
        su[0] = 0.0
        sea[0] = 1.0 + 0.0j
        seb[0] = 1.0 + 0.0j
        srev[0] = False
        depth = 0
        for t in range(n):
            s = _rng.pick(cum, _rng.uniform(key, t))
            if depth > 0 and word[depth - 1] == inv[s]:
                depth -= 1
                continue
            u = su[depth]
            ea = sea[depth]
            eb = seb[depth]
            rev = srev[depth]
            a2 = ga[s]
            b2 = gb[s]
            if rev:
                a2 = a2.conjugate()
                b2 = b2.conjugate()
            th = math.tanh(u)
            A = ea * a2 + th * eb * b2.conjugate()
            B = ea * b2 + th * eb * a2.conjugate()
            word[depth] = s
            depth += 1
            su[depth] = max(0.0, _log_cosh(u) + math.log(abs(A) + abs(B)))
            sea[depth] = _unit(A)
            seb[depth] = _unit(B)
            srev[depth] = rev != grev[s]
        out_u[path] = su[depth]
        out_ea[path] = sea[depth]
        out_eb[path] = seb[depth]
        out_rev[path] = srev[depth]


@dataclass(eq=False)
class WalkSample:
    """Terminal positions of ``N`` independent walks of ``n`` steps.

    Each terminal isometry is kept in polar form: half-displacement ``u``
    and unit phases ``ea``, ``eb`` of its matrix entries.
    """

    seed: int
    n: int
    N: int
    u: np.ndarray
    ea: np.ndarray
    eb: np.ndarray
    reverses: np.ndarray

    @property
    def distances(self):
        """``d(o, w_n o) = 2u`` per path."""
        return 2.0 * self.u

    @property
    def radii(self):
        return np.tanh(self.u)

    @property
    def points(self):
        """``w_n o = b / conj(a)``."""
        return self.radii * self.ea * self.eb

    @property
    def angles(self):
        """Boundary angle of ``w_n o`` in [0, 2 pi)."""
        th = np.mod(np.angle(self.ea * self.eb), TWO_PI)
        return np.where(th >= TWO_PI, 0.0, th)

    def terminal(self, i):
        """Terminal isometry of path ``i`` (entries overflow beyond distance ~1400)."""
        u = float(self.u[i])
        return hyp.Isometry(math.cosh(u) * complex(self.ea[i]), math.sinh(u) * complex(self.eb[i]),
                            bool(self.reverses[i]))

    def same_as(self, other):
        """Bit-identical comparison."""
        return (self.seed == other.seed and self.n == other.n and self.N == other.N
                and np.array_equal(self.u, other.u) and np.array_equal(self.ea, other.ea)
                and np.array_equal(self.eb, other.eb)
                and np.array_equal(self.reverses, other.reverses))

    def to_dict(self):
        return {"seed": self.seed, "n": self.n, "N": self.N,
                "distances": self.distances.tolist(), "angles": self.angles.tolist()}


def _check_symbols(generators, mu):
    """Generators must match the symbols of ``mu`` and respect its inverse map."""
    if len(generators) != mu.n_symbols:
        raise SymbolMismatch(f"{len(generators)} generators for {mu.n_symbols} symbols")
    for k, j in enumerate(mu.inverse):
        if not hyp.compose(generators[k], generators[j]).is_identity(INVERSE_TOL):
            raise SymbolMismatch(f"generator {j} is not the inverse of generator {k}")


def simulate(generators, mu, n, N, seed, workers=None):
    """Simulate ``N`` walks ``w_n = g_1 ... g_n`` with i.i.d. ``mu``-steps.

    Steps of path ``j`` come from the counter stream ``(seed, j)``, so the
    output is identical for any worker count. Products are renormalized at
    every step and free reductions are undone exactly (see ``_walk_kernel``).
    """
    _check_symbols(generators, mu)
    if n < 0 or N < 0:
        raise ValueError("need n >= 0 and N >= 0")
    ga = np.array([g.a for g in generators], dtype=np.complex128)
    gb = np.array([g.b for g in generators], dtype=np.complex128)
    grev = np.array([g.reverses for g in generators], dtype=np.bool_)
    out_u = np.empty(N, dtype=np.float64)
    out_ea = np.empty(N, dtype=np.complex128)
    out_eb = np.empty(N, dtype=np.complex128)
    out_rev = np.empty(N, dtype=np.bool_)
    if N > 0:
        cum = _rng.cumulative(mu.probs)
        inv = mu.inverse.astype(np.int64)
        s = np.uint64(seed)
        blocks = _rng.chunks(N, workers or default_workers())

        def run(block):
            _walk_kernel(cum, inv, ga, gb, grev, int(n), block[0], block[1], s, out_u, out_ea, out_eb, out_rev)

        if len(blocks) > 1:
            with ThreadPoolExecutor(len(blocks)) as pool:
                list(pool.map(run, blocks))
        else:
            run(blocks[0])
    return WalkSample(int(seed), int(n), int(N), out_u, out_ea, out_eb, out_rev)


# -- drift -------------------------------------------------------------------

@dataclass
class DriftEstimate:
    ell_hat: float
    ci_low: float
    ci_high: float
    n: int
    N: int

    @property
    def ci_width(self):
        return self.ci_high - self.ci_low

    def to_dict(self):
        return {"ell_hat": self.ell_hat, "ci": [self.ci_low, self.ci_high], "n": self.n, "N": self.N}


def estimate_drift(sample):
    """Mean of ``d(o, w_n o) / n`` with a normal 95% confidence interval."""
    if sample.n < 1 or sample.N < 2:
        raise InsufficientSample("need n >= 1 and at least 2 paths")
    r = sample.distances / sample.n
    mean = float(np.mean(r))
    if np.ptp(r) == 0.0:
        mean, half = float(r[0]), 0.0
    else:
        half = Z_95 * float(np.std(r, ddof=1)) / math.sqrt(sample.N)
    return DriftEstimate(mean, mean - half, mean + half, sample.n, sample.N)


# -- entropy -----------------------------------------------------------------

def _partition_step(items, steps):
    out = {}
    for key, (p, g) in items:
        for q, h in steps:
            prod = hyp.compose(g, h)
            k = prod.key(KEY_DECIMALS)
            if k in out:
                out[k][0] += p * q
            else:
                out[k] = [p * q, prod]
    return out


def convolution_power(mu, generators, n, workers=None):
    """Law of ``w_n`` as ``{key: [probability, isometry]}``.

    Elements are identified by their canonical matrix with entries rounded to
    1e-9. Each level splits the current support into a fixed number of
    partitions and merges them in order, so the result does not depend on
    the worker count.
    """
    _check_symbols(generators, mu)
    steps = [(float(p), g) for p, g in zip(mu.probs, generators) if p > 0]
    law = {hyp.Isometry.identity().key(KEY_DECIMALS): [1.0, hyp.Isometry.identity()]}
    workers = workers or default_workers()
    for _ in range(n):
        if len(law) * len(steps) > MAX_PRODUCTS:
            raise SupportTooLarge(f"{len(law) * len(steps)} products exceed {MAX_PRODUCTS}")
        items = list(law.items())
        parts = [items[i::ENTROPY_PARTITIONS] for i in range(ENTROPY_PARTITIONS)]
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                results = list(pool.map(lambda it: _partition_step(it, steps), parts))
        else:
            results = [_partition_step(it, steps) for it in parts]
        law = {}
        for res in results:
            for k, (p, g) in res.items():
                if k in law:
                    law[k][0] += p
                else:
                    law[k] = [p, g]
    return law


def shannon_entropy(probs):
    p = np.asarray([q for q in probs if q > 0], dtype=float)
    return float(-np.sum(p * np.log(p)))


def entropy_upper_bounds(mu, generators, n_max, workers=None):
    """``[H(mu^n) / n for n = 1 .. n_max]``, each an upper bound on the entropy."""
    _check_symbols(generators, mu)
    out = []
    for n in range(1, n_max + 1):
        law = convolution_power(mu, generators, n, workers)
        out.append(shannon_entropy(p for p, _ in law.values()) / n)
    return out


# -- boundary histogram ------------------------------------------------------

@dataclass(eq=False)
class MeasureHistogram:
    K: int
    counts: np.ndarray
    frequencies: np.ndarray
    radial_fraction: float
    warning: str = ""

    @property
    def edges(self):
        return np.arange(self.K + 1) * (TWO_PI / self.K)

    def rotation_z_scores(self):
        """Per-bin ``(c_k - c_{k+K/2}) / sqrt(c_k + c_{k+K/2})`` for even K."""
        if self.K % 2:
            raise ValueError("rotation by pi needs an even bin count")
        c = self.counts.astype(float)
        d = c - np.roll(c, self.K // 2)
        s = np.sqrt(c + np.roll(c, self.K // 2))
        return np.divide(d, s, out=np.zeros_like(d), where=s > 0)

    def rows(self):
        e = self.edges
        return [(float(e[k]), float(e[k + 1]), int(self.counts[k]), float(self.frequencies[k]))
                for k in range(self.K)]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_start_rad", "bin_end_rad", "count", "frequency"])
            for r in self.rows():
                w.writerow([repr(r[0]), repr(r[1]), r[2], repr(r[3])])

    def plot_data(self):
        """(bin centre, frequency) series."""
        e = self.edges
        return {"x": (0.5 * (e[:-1] + e[1:])).tolist(), "y": self.frequencies.tolist()}


def boundary_histogram(sample, K):
    """Histogram of the boundary angles of ``w_n o`` over ``K`` equal bins.

    A warning is recorded when fewer than 95% of the points lie beyond
    radius 0.99, since the finite-n angles are then a poor proxy for the
    hitting measure.
    """
    if K < 1:
        raise ValueError("need K >= 1")
    if sample.N == 0:
        return MeasureHistogram(K, np.zeros(K, dtype=np.int64), np.zeros(K), 0.0, "empty sample")
    idx = np.minimum((sample.angles / (TWO_PI / K)).astype(np.int64), K - 1)
    counts = np.bincount(idx, minlength=K)
    frac = float(np.mean(sample.radii > RADIAL_GATE))
    warn = "" if frac >= RADIAL_FRACTION else (
        f"only {frac:.3f} of the points lie beyond radius {RADIAL_GATE}")
    return MeasureHistogram(K, counts, counts / sample.N, frac, warn)


# -- dimension report --------------------------------------------------------

@dataclass
class DimensionReport:
    drift: DriftEstimate
    entropy_bounds: list
    dimension_bound: float
    criterion: dict
    volume_growth: float = 1.0

    def to_dict(self):
        doc = dict(self.criterion)
        doc.update({
            "drift": self.drift.to_dict(),
            "entropy_bounds": list(self.entropy_bounds),
            "dimension_bound": self.dimension_bound,
            "volume_growth": self.volume_growth,
        })
        return doc


def dimension_report(poly, mu, n, N, seed, n_max=2, workers=None):
    """Drift, entropy bounds and the bound ``min_n H(mu^n)/n / drift`` for a polygon group.

    The volume growth of a cocompact group is 1, so the fundamental
    inequality reads ``h <= drift`` and the bound lies in [0, 1] up to
    sampling error.
    """
    if mu.kind != "free" or mu.m != poly.m:
        raise SymbolMismatch(f"need a free-kind measure on {2 * poly.m} symbols")
    gens = pg.side_pairings(poly)
    drift = estimate_drift(simulate(gens, mu, n, N, seed, workers))
    bounds = entropy_upper_bounds(mu, gens, n_max, workers)
    h = min(bounds)
    if h == 0.0:
        dim = 0.0
    elif drift.ell_hat > 0.0:
        dim = h / drift.ell_hat
    else:
        dim = math.inf
    crit = inequality.polygon_criterion(poly).to_dict()
    return DimensionReport(drift, bounds, dim, crit)
