"""Deterministic per-run random streams and the exact samplers used by the policies.

A stream is a plain :class:`numpy.random.Generator` (PCG64) whose seed is derived
from a ``(master_seed, run_index, purpose_tag)`` triple through
:class:`numpy.random.SeedSequence`. Generators are passed straight into the
numba kernels below, which advance the same underlying state, so Python-level
draws and kernel draws interleave reproducibly.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numba as nb
import numpy as np

RandomStream = np.random.Generator

# shapes at or below this use a product of uniforms (a sum of exponentials),
# above it Marsaglia-Tsang
SMALL_SHAPE = 32

_U64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    run_index: int
    purpose_tag: str

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= _U64_MAX:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.run_index < 0:
            raise ValueError(f"run_index must be nonnegative, got {self.run_index}")


def _tag_word(tag: str) -> int:
    return int.from_bytes(hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest(), "little")


def derive_stream(key: StreamKey) -> RandomStream:
    """Return a fresh generator that is a pure function of ``key``."""
    seq = np.random.SeedSequence(
        entropy=key.master_seed, spawn_key=(key.run_index, _tag_word(key.purpose_tag))
    )
    return np.random.Generator(np.random.PCG64(seq))


def stream(master_seed: int, run_index: int, purpose_tag: str) -> RandomStream:
    return derive_stream(StreamKey(master_seed, run_index, purpose_tag))


# ---------------------------------------------------------------------------
# numba samplers (take a Generator, advance it in place)
# ---------------------------------------------------------------------------


@nb.njit(cache=True, nogil=True)
def gamma_int(g, k):
    """Gamma(k, 1) deviate for integer ``k >= 1``."""
    if k <= SMALL_SHAPE:
        # -log of a product of k uniforms on (0, 1]; rescaled to dodge underflow
        acc = 0.0
        prod = 1.0
        for _ in range(k):
            prod *= 1.0 - g.random()
            if prod < 1e-280:
                acc += math.log(prod)
                prod = 1.0
        return -(acc + math.log(prod))
    d = k - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = g.standard_normal()
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = g.random()
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return d * v
        if u > 0.0 and math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return d * v


@nb.njit(cache=True, nogil=True)
def beta_int(g, a, b):
    """Beta(a, b) deviate for integers ``a, b >= 1`` via two Gamma deviates."""
    x = gamma_int(g, a)
    y = gamma_int(g, b)
    return x / (x + y)


@nb.njit(cache=True, nogil=True)
def beta_int_many(g, a, b, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = beta_int(g, a, b)
    return out


@nb.njit(cache=True, nogil=True)
def argmax_random_ties(g, values):
    """Index of the maximum; ties broken uniformly at random (reservoir style).

    Randomness is consumed only when a tie actually occurs.
    """
    best = 0
    best_val = values[0]
    n_ties = 1
    for i in range(1, values.shape[0]):
        v = values[i]
        if v > best_val:
            best = i
            best_val = v
            n_ties = 1
        elif v == best_val:
            n_ties += 1
            if g.random() * n_ties < 1.0:
                best = i
    return best


# ---------------------------------------------------------------------------
# Python-facing samplers with argument checking
# ---------------------------------------------------------------------------


def sample_uniform(s: RandomStream) -> float:
    """53-bit uniform on [0, 1)."""
    return float(s.random())


def sample_bernoulli(s: RandomStream, p: float) -> int:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Bernoulli probability must lie in [0, 1], got {p}")
    return int(s.random() < p)


def _check_shape(name: str, value) -> int:
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return int(value)


def sample_beta(s: RandomStream, alpha: int, beta: int) -> float:
    return float(beta_int(s, _check_shape("alpha", alpha), _check_shape("beta", beta)))


def sample_beta_array(s: RandomStream, alpha: int, beta: int, size: int) -> np.ndarray:
    return beta_int_many(s, _check_shape("alpha", alpha), _check_shape("beta", beta), int(size))
