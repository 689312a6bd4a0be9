"""Stochastic bandit environments with rewards supported on [0, 1]."""

from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass, field
from typing import Sequence, Union

import numba as nb
import numpy as np

from .rng import RandomStream

KIND_BERNOULLI = 0
KIND_DISCRETE = 1


@dataclass(frozen=True)
class Bernoulli:
    mean: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError(f"Bernoulli mean must lie in [0, 1], got {self.mean}")


@dataclass(frozen=True)
class Discrete:
    """Finite distribution on [0, 1]: ``support[k]`` has probability ``probs[k]``."""

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(float(v) for v in self.support))
        object.__setattr__(self, "probs", tuple(float(v) for v in self.probs))
        if len(self.support) == 0 or len(self.support) != len(self.probs):
            raise ValueError("support and probs must be nonempty and of equal length")
        if any(not 0.0 <= v <= 1.0 for v in self.support):
            raise ValueError(f"support points must lie in [0, 1], got {self.support}")
        if any(p < 0 for p in self.probs):
            raise ValueError(f"probabilities must be nonnegative, got {self.probs}")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {math.fsum(self.probs)}")

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.support, self.probs))


ArmSpec = Union[Bernoulli, Discrete]


@dataclass(frozen=True)
class BanditInstance:
    arms: tuple[ArmSpec, ...]
    means: np.ndarray = field(repr=False)
    gaps: np.ndarray = field(repr=False)
    optimal_index: int
    unique_optimum: bool

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def best_mean(self) -> float:
        return float(self.means[self.optimal_index])

    @property
    def is_bernoulli(self) -> bool:
        return all(isinstance(a, Bernoulli) for a in self.arms)

    def suboptimal(self) -> list[int]:
        return [i for i in range(self.n_arms) if i != self.optimal_index]

    def require_unique_optimum(self) -> None:
        if not self.unique_optimum:
            raise ValueError(
                "bound requires a unique optimal arm; instance has tied maxima "
                f"(means={self.means.tolist()})"
            )

    @cached_property
    def kernel_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(kinds, means, support, cumulative probs) padded for the numba kernels."""
        width = max(len(a.support) if isinstance(a, Discrete) else 1 for a in self.arms)
        kinds = np.empty(self.n_arms, dtype=np.int64)
        support = np.zeros((self.n_arms, width))
        cum = np.ones((self.n_arms, width))
        for i, arm in enumerate(self.arms):
            if isinstance(arm, Bernoulli):
                kinds[i] = KIND_BERNOULLI
            else:
                kinds[i] = KIND_DISCRETE
                m = len(arm.support)
                support[i, :m] = arm.support
                support[i, m:] = arm.support[-1]
                cum[i, :m] = np.cumsum(arm.probs)
                cum[i, m - 1:] = 1.0
        return kinds, self.means.copy(), support, cum


def make_instance(specs: Sequence[ArmSpec | float], allow_single: bool = False) -> BanditInstance:
    """Build an instance; plain floats are read as Bernoulli means.

    The designated optimum is the lowest index among the maximizers.
    """
    arms = tuple(Bernoulli(float(s)) if not isinstance(s, (Bernoulli, Discrete)) else s for s in specs)
    if len(arms) < (1 if allow_single else 2):
        raise ValueError(f"a bandit instance needs at least 2 arms, got {len(arms)}")
    means = np.array([a.mean for a in arms], dtype=float)
    best = float(means.max())
    optimal = int(np.flatnonzero(means == best)[0])
    gaps = best - means
    gaps[optimal] = 0.0
    unique = int(np.count_nonzero(means == best)) == 1
    means.setflags(write=False)
    gaps.setflags(write=False)
    return BanditInstance(arms, means, gaps, optimal, unique)


@nb.njit(cache=True, nogil=True)
def draw_reward(g, kind, mean, support_row, cum_row):
    u = g.random()
    if kind == KIND_BERNOULLI:
        return 1.0 if u < mean else 0.0
    k = 0
    while k < cum_row.shape[0] - 1 and u >= cum_row[k]:
        k += 1
    return support_row[k]


def pull(instance: BanditInstance, arm: int, s: RandomStream) -> float:
    if not 0 <= arm < instance.n_arms:
        raise ValueError(f"arm index {arm} out of range for {instance.n_arms} arms")
    kinds, means, support, cum = instance.kernel_arrays
    return float(draw_reward(s, kinds[arm], means[arm], support[arm], cum[arm]))
