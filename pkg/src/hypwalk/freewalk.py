"""Nearest-neighbour walks on free groups and free products of Z/2Z.

Symbols are integer labels ``0 .. 2m - 1`` with an inverse involution.
For the free kind the layout is ``s_1 .. s_m, s_1^-1 .. s_m^-1`` (the same
order as the side pairings of a polygon), so the inverse of ``k`` is
``(k + m) mod 2m``. For the involutive kind every symbol is its own inverse.
Only the tree structure of the Cayley graph is used.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit

from hypwalk import _rng
from hypwalk.exceptions import (
    DegenerateDenominator,
    HypwalkError,
    InfiniteDistance,
    NonConvergence,
    NoWitnessGuarantee,
)

PROB_TOL = 1e-14
STEP_TOL = 1e-15
RESIDUAL_TOL = 1e-12
MAX_ITER = 1_000_000
DENOM_TOL = 1e-14
WITNESS_TOL = 1e-12
SIGMA_TOL = 1e-12
DEFAULT_HORIZON = 10_000

KINDS = ("free", "involutive")


@dataclass(eq=False)
class StepDistribution:
    """Probabilities on generator symbols.

    Parameters
    ----------
    kind : {"free", "involutive"}
    probs : array of length 2m
        Free kind: ``mu(s_1) .. mu(s_m)`` then ``mu(s_1^-1) .. mu(s_m^-1)``.
    """

    kind: str
    probs: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        p = np.asarray(self.probs, dtype=float).ravel()
        if p.size == 0 or p.size % 2:
            raise ValueError("need an even, positive number of symbols")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {p.sum():.17g}, not 1")
        self.probs = p

    @classmethod
    def free(cls, plus, minus):
        return cls("free", np.concatenate([np.asarray(plus, float), np.asarray(minus, float)]))

    @classmethod
    def involutive(cls, probs):
        return cls("involutive", np.asarray(probs, float))

    @classmethod
    def uniform(cls, kind, n_symbols):
        return cls(kind, np.full(n_symbols, 1.0 / n_symbols))

    @property
    def n_symbols(self):
        return self.probs.size

    @property
    def m(self):
        """Number of generator pairs (free) or opposite-side pairs (involutive)."""
        return self.probs.size // 2

    @property
    def inverse(self):
        n = self.n_symbols
        if self.kind == "involutive":
            return np.arange(n)
        return (np.arange(n) + n // 2) % n

    def label(self, k):
        if self.kind == "involutive":
            return f"r{k + 1}"
        m = self.m
        return f"s{k + 1}" if k < m else f"s{k - m + 1}^-1"

    def symbol_index(self, symbol):
        if isinstance(symbol, (int, np.integer)):
            k = int(symbol)
        else:
            labels = [self.label(i) for i in range(self.n_symbols)]
            if symbol not in labels:
                raise ValueError(f"unknown symbol {symbol!r}")
            k = labels.index(symbol)
        if not 0 <= k < self.n_symbols:
            raise ValueError(f"symbol index {k} out of range")
        return k

    def is_symmetric(self):
        return bool(np.all(np.abs(self.probs - self.probs[self.inverse]) <= PROB_TOL))

    def to_dict(self):
        return {"kind": self.kind, "probabilities": [float(p) for p in self.probs]}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["kind"], np.asarray(doc["probabilities"], dtype=float))


@dataclass(eq=False)
class FirstPassage:
    """``x[k] = F(e, s_k)`` for every symbol, with the fixed-point residual."""

    kind: str
    x: np.ndarray
    residual: float
    iterations: int

    @property
    def m(self):
        return self.x.size // 2

    @property
    def x_plus(self):
        return self.x[: self.m]

    @property
    def x_minus(self):
        """``F(e, s_i^-1)``; equals ``x_plus`` ordering shifted by m (free kind)."""
        return self.x[self.m:]

    def inverse_values(self):
        """``x`` evaluated at the inverse of each symbol."""
        if self.kind == "involutive":
            return self.x.copy()
        return np.roll(self.x, self.m)

    def to_dict(self):
        return {"kind": self.kind, "x": [float(v) for v in self.x],
                "residual": self.residual, "iterations": self.iterations}


def first_passage_map(mu, x):
    """One step of ``x_k <- mu_k + x_k * sum_{l != k} mu_l x_{inv l}``."""
    inv = mu.inverse
    w = mu.probs * x[inv]
    return mu.probs + x * (w.sum() - w)


def solve_first_passage(mu, max_iter=MAX_ITER):
    """Least fixed point of the tree first-passage system by iteration from 0.

    Raises
    ------
    NonConvergence
        When the sup-norm change does not fall below 1e-15 within
        ``max_iter`` iterations, or the final residual exceeds 1e-12.
    """
    inv = mu.inverse
    p = mu.probs
    x = np.zeros_like(p)
    for it in range(1, max_iter + 1):
        w = p * x[inv]
        new = np.minimum(p + x * (w.sum() - w), 1.0)
        change = float(np.max(np.abs(new - x)))
        x = new
        if change < STEP_TOL:
            break
    else:
        res = float(np.max(np.abs(first_passage_map(mu, x) - x)))
        raise NonConvergence(f"no convergence after {max_iter} iterations", residual=res)
    res = float(np.max(np.abs(first_passage_map(mu, x) - x)))
    if res >= RESIDUAL_TOL:
        raise NonConvergence(f"fixed-point residual {res:.3g} too large", residual=res)
    return FirstPassage(mu.kind, x, res, it)


@dataclass(eq=False)
class CylinderMeasures:
    kind: str
    values: np.ndarray

    @property
    def total(self):
        return float(self.values.sum())

    def to_dict(self):
        return {"kind": self.kind, "values": [float(v) for v in self.values], "total": self.total}


def cylinder_measures(fp):
    """Hitting measure of the cylinders ``C(s)`` for every symbol ``s``.

    Free kind: ``x (1 - x') / (1 - x x')`` with ``x'`` the value at the
    inverse symbol. Involutive kind: ``x / (1 + x)``.
    """
    x = fp.x
    if fp.kind == "involutive":
        return CylinderMeasures(fp.kind, x / (1.0 + x))
    xi = fp.inverse_values()
    prod = x * xi
    if np.any(prod >= 1.0 - DENOM_TOL):
        k = int(np.argmax(prod))
        raise DegenerateDenominator(f"x * x_inv = {prod[k]:.17g} at symbol {k}")
    return CylinderMeasures(fp.kind, x * (1.0 - xi) / (1.0 - prod))


def green_distance(fp, symbol):
    """Green distance ``-log F(e, s)`` from the identity to a generator."""
    x = float(fp.x[int(symbol)])
    if x <= 0.0:
        raise InfiniteDistance(f"symbol {symbol} is never reached")
    return max(0.0, -math.log(x))


def integer_line_first_passage(p_plus, p_minus):
    """Probability that the +-1 walk on Z ever reaches +1 (gambler's ruin)."""
    if p_plus < 0 or p_minus < 0 or abs(p_plus + p_minus - 1.0) > PROB_TOL:
        raise ValueError("need p_plus + p_minus = 1 with both non-negative")
    if p_minus == 0:
        return 1.0
    return min(1.0, p_plus / p_minus)


# -- criterion witness -------------------------------------------------------

@dataclass
class WitnessReport:
    sigma: float
    witness_index: object
    witnesses: list
    e_pow_length: list
    threshold: list
    green_bound: list

    def to_dict(self):
        return asdict(self)


def witness_threshold(x, xi):
    """``(2 - x - x') / (x + x' - 2 x x')``; infinite when the denominator vanishes."""
    den = x + xi - 2.0 * x * xi
    if den <= 0.0:
        return math.inf
    return (2.0 - x - xi) / den


def criterion_witness(lengths, mu, fp=None):
    """Find generators whose translation length beats their Green distance.

    Parameters
    ----------
    lengths : sequence of float
        One length per generator pair for the free kind (``g_i`` and its
        inverse share it), one per symbol for the involutive kind.
    mu : StepDistribution
        The comparison walk on the free group or free product.

    Returns
    -------
    WitnessReport
        ``witness_index`` is the first index with ``e^l > threshold`` and
        ``l > min(-log x, -log x')``.

    Raises
    ------
    NoWitnessGuarantee
        When the length sum is not below 1. The search is still run and its
        report attached to the exception.
    """
    ell = np.asarray(lengths, dtype=float)
    n = mu.m if mu.kind == "free" else mu.n_symbols
    if ell.size != n:
        raise ValueError(f"expected {n} lengths, got {ell.size}")
    fp = solve_first_passage(mu) if fp is None else fp
    xi_all = fp.inverse_values()
    weight = 2.0 if mu.kind == "free" else 1.0
    sig = float(weight * np.sum(1.0 / (1.0 + np.exp(ell))))

    epl, thr, bound, found = [], [], [], []
    for i in range(n):
        x, xi = float(fp.x[i]), float(xi_all[i])
        t = witness_threshold(x, xi)
        best = max(x, xi)
        g = -math.log(best) if best > 0 else math.inf
        e = math.exp(ell[i])
        epl.append(e)
        thr.append(t)
        bound.append(g)
        if e > t * (1.0 + WITNESS_TOL) and ell[i] > g:
            found.append(i)
    report = WitnessReport(sig, found[0] if found else None, found, epl, thr, bound)
    if sig >= 1.0 - SIGMA_TOL:
        raise NoWitnessGuarantee(f"length sum {sig:.17g} is not below 1", report=report)
    return report


# -- Monte Carlo oracle ------------------------------------------------------

@njit(cache=True, nogil=True)
def _passage_kernel(cum, inv, target, start, stop, horizon, seed):
    """Count paths in ``[start, stop)`` that reach the reduced word ``target``.

    The reduced word of the walk is kept as a stack together with the length
    of its common prefix with the target. A path stops once the target is
    out of reach within the remaining steps.
    """
    L = target.shape[0]
    stack = np.empty(horizon + 1, dtype=np.int64)
    hits = 0
    for path in range(start, stop):
        key = _rng.stream_key(seed, path)
        depth = 0
        agree = 0
        for t in range(horizon):
            s = _rng.pick(cum, _rng.uniform(key, t))
            if depth > 0 and stack[depth - 1] == inv[s]:
                depth -= 1
                if agree > depth:
                    agree = depth
            else:
                if agree == depth and depth < L and target[depth] == s:
                    agree += 1
                stack[depth] = s
                depth += 1
            if depth == L and agree == L:
                hits += 1
                break
            if (depth - agree) + (L - agree) > horizon - t - 1:
                break
    return hits


@dataclass
class MCEstimate:
    estimate: float
    stderr: float
    hits: int
    paths: int
    horizon: int
    seed: int
    note: str = "truncation at the horizon biases the estimate downward"

    def to_dict(self):
        return asdict(self)


def default_workers():
    env = os.environ.get("HYPWALK_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def mc_first_passage(mu, symbol, paths=100_000, horizon=DEFAULT_HORIZON, seed=0,
                     workers=None, word=None):
    """Monte Carlo estimate of ``F(e, w)`` for a symbol or a reduced word.

    Path ``j`` draws its steps from the stream ``(seed, j)``, so the result
    depends only on ``(seed, paths, horizon)``.
    """
    if paths < 1 or horizon < 1:
        raise ValueError("need paths >= 1 and horizon >= 1")
    inv = mu.inverse.astype(np.int64)
    target = np.array([mu.symbol_index(symbol)] if word is None
                      else [mu.symbol_index(s) for s in word], dtype=np.int64)
    if target.size == 0:
        raise ValueError("target word is empty")
    if np.any(target[1:] == inv[target[:-1]]):
        raise ValueError("target word is not reduced")
    cum = _rng.cumulative(mu.probs)
    seed = np.uint64(seed)
    blocks = _rng.chunks(paths, workers or default_workers())

    def run(block):
        return _passage_kernel(cum, inv, target, block[0], block[1], int(horizon), seed)

    if len(blocks) > 1:
        with ThreadPoolExecutor(len(blocks)) as pool:
            hits = sum(pool.map(run, blocks))
    else:
        hits = run(blocks[0])
    p = hits / paths
    return MCEstimate(p, math.sqrt(p * (1.0 - p) / paths), int(hits), int(paths), int(horizon), int(seed))
