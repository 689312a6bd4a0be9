"""Arm-selection policies: Beta-Bernoulli Thompson Sampling (with the
Bernoulli-trial extension for [0, 1] rewards) and UCB1 as a baseline.

States are small mutable objects owned by a single run. The update functions
mutate in place and hand the same state back so calls can be chained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import numerics
from .rng import RandomStream, argmax_random_ties, beta_int


@dataclass(frozen=True)
class ArmPosterior:
    """Beta(S + 1, F + 1) belief about one arm."""

    S: int = 0
    F: int = 0

    def __post_init__(self) -> None:
        if self.S < 0 or self.F < 0:
            raise ValueError(f"success/failure counts must be nonnegative, got S={self.S}, F={self.F}")

    @property
    def k(self) -> int:
        return self.S + self.F

    @property
    def mean_hat(self) -> float:
        # empirical mean is taken to be 1 before the first play
        return self.S / self.k if self.k else 1.0


@dataclass
class TSState:
    S: np.ndarray
    F: np.ndarray
    step: int = 1

    @property
    def n_arms(self) -> int:
        return self.S.shape[0]

    @property
    def posteriors(self) -> list[ArmPosterior]:
        return [ArmPosterior(int(s), int(f)) for s, f in zip(self.S, self.F)]

    @property
    def pulls(self) -> np.ndarray:
        return self.S + self.F


def ts_init(num_arms: int) -> TSState:
    if num_arms < 1:
        raise ValueError(f"need at least one arm, got {num_arms}")
    return TSState(np.zeros(num_arms, dtype=np.int64), np.zeros(num_arms, dtype=np.int64), 1)


@nb.njit(cache=True, nogil=True)
def draw_thetas(g, S, F, out):
    for i in range(S.shape[0]):
        out[i] = beta_int(g, S[i] + 1, F[i] + 1)


def ts_select(state: TSState, s: RandomStream) -> tuple[int, np.ndarray]:
    """Sample theta_i ~ Beta(S_i + 1, F_i + 1) per arm and play the argmax."""
    theta = np.empty(state.n_arms)
    draw_thetas(s, state.S, state.F, theta)
    return int(argmax_random_ties(s, theta)), theta


def _check_arm(state, arm: int) -> None:
    if not 0 <= arm < state.n_arms:
        raise ValueError(f"arm index {arm} out of range for {state.n_arms} arms")


def ts_update(state: TSState, arm: int, reward: int) -> TSState:
    _check_arm(state, arm)
    if reward == 1:
        state.S[arm] += 1
    elif reward == 0:
        state.F[arm] += 1
    else:
        raise ValueError(f"binary update needs reward in {{0, 1}}, got {reward}; use ts_update_general")
    state.step += 1
    return state


def ts_update_general(state: TSState, arm: int, reward: float, s: RandomStream) -> TSState:
    """Update from a [0, 1] reward through a Bernoulli(reward) trial.

    Binary rewards skip the trial, so they leave ``s`` untouched and match
    :func:`ts_update` exactly.
    """
    if not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward must lie in [0, 1], got {reward}")
    if reward == 0.0 or reward == 1.0:
        return ts_update(state, arm, int(reward))
    return ts_update(state, arm, int(s.random() < reward))


@dataclass
class UCBState:
    counts: np.ndarray
    sums: np.ndarray
    step: int = 1

    @property
    def n_arms(self) -> int:
        return self.counts.shape[0]


def ucb1_init(num_arms: int) -> UCBState:
    if num_arms < 1:
        raise ValueError(f"need at least one arm, got {num_arms}")
    return UCBState(np.zeros(num_arms, dtype=np.int64), np.zeros(num_arms), 1)


@nb.njit(cache=True, nogil=True)
def ucb1_index_argmax(counts, sums, t):
    n = counts.shape[0]
    for i in range(n):
        if counts[i] == 0:
            return i
    log_t = math.log(t)
    best = 0
    best_val = -math.inf
    for i in range(n):
        v = sums[i] / counts[i] + math.sqrt(2.0 * log_t / counts[i])
        if v > best_val:
            best = i
            best_val = v
    return best


def ucb1_select(state: UCBState) -> int:
    """Round-robin until every arm is played once, then mean + sqrt(2 ln t / k)."""
    return int(ucb1_index_argmax(state.counts, state.sums, state.step))


def ucb1_update(state: UCBState, arm: int, reward: float) -> UCBState:
    _check_arm(state, arm)
    state.counts[arm] += 1
    state.sums[arm] += reward
    state.step += 1
    return state


def exact_p(arm1: ArmPosterior, y: float) -> float:
    """P(theta > y) for theta ~ Beta(S + 1, F + 1), i.e. F_Binomial(k+1, y)(S)."""
    return numerics.binomial_cdf(arm1.k + 1, y, arm1.S)
