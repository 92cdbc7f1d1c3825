"""Counter-based uniform variates for reproducible parallel Monte Carlo.

Each draw is a pure function of ``(seed, stream, counter)``: the stream is
the path index and the counter the step number. Results therefore do not
depend on how paths are split across threads.
"""

import numpy as np
from numba import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def mix64(z):
    """SplitMix64 finalizer."""
    z = (z ^ (z >> S30)) * MIX1
    z = (z ^ (z >> S27)) * MIX2
    return z ^ (z >> S31)


@njit(cache=True, nogil=True)
def stream_key(seed, stream):
    return mix64(mix64(np.uint64(seed) + GAMMA) ^ (np.uint64(stream) * GAMMA))


@njit(cache=True, nogil=True)
def uniform(key, counter):
    """Uniform double in [0, 1) for draw ``counter`` of the stream ``key``."""
    z = mix64(np.uint64(key) + (np.uint64(counter) + np.uint64(1)) * GAMMA)
    return float(z >> S11) * INV_2_53


@njit(cache=True, nogil=True)
def pick(cumulative, u):
    """Index of the first cumulative weight exceeding ``u`` (linear scan)."""
    n = cumulative.shape[0]
    for i in range(n - 1):
        if u < cumulative[i]:
            return i
    return n - 1


def cumulative(probs):
    """Cumulative weights with the last entry forced to 1."""
    c = np.cumsum(np.asarray(probs, dtype=np.float64))
    c[-1] = 1.0
    return c


def chunks(n, parts):
    """Split ``range(n)`` into at most ``parts`` contiguous ``(start, stop)`` blocks."""
    parts = max(1, min(int(parts), n)) if n > 0 else 1
    edges = np.linspace(0, n, parts + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


@njit(cache=True, nogil=True)
def path_uniforms(seed, stream, count):
    """The first ``count`` uniforms of a stream, for reference computations."""
    key = stream_key(np.uint64(seed), stream)
    out = np.empty(count, dtype=np.float64)
    for i in range(count):
        out[i] = uniform(key, i)
    return out
