"""Monte Carlo engine: run policies against instances and record pseudo-regret,
pull counts, the analysis events, and the optimal arm's p-series.

Every run draws from its own ``(seed, run, "env")`` and ``(seed, run, "policy")``
streams, so a run's trajectory depends only on the config and its run index.
Runs are mapped over a thread pool (the kernels release the GIL) and reduced
in run-index order, which keeps aggregates bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba as nb
import numpy as np
from scipy import special

from . import bounds, numerics
from .env import BanditInstance, draw_reward
from .numerics import ThresholdPair
from .rng import argmax_random_ties, beta_int, stream

POLICIES = ("ts", "ucb1")


def default_checkpoints(T: int) -> tuple[int, ...]:
    """{ceil(T / 2^m) : m >= 0}, ascending."""
    pts = set()
    m = 0
    while True:
        c = -(-T // (1 << m))
        pts.add(c)
        if c == 1:
            break
        m += 1
    return tuple(sorted(pts))


@dataclass(frozen=True)
class EventTracking:
    """Where the per-arm thresholds come from: ``"thm1"`` (needs eps) or ``"thm2"``."""

    source: str
    eps: float = 0.2

    def __post_init__(self) -> None:
        if self.source not in ("thm1", "thm2"):
            raise ValueError(f"event tracking source must be 'thm1' or 'thm2', got {self.source!r}")
        if self.source == "thm1" and not 0 < self.eps <= 1:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")


@dataclass(frozen=True)
class ExperimentConfig:
    instance: BanditInstance
    policy: str = "ts"
    T: int = 1000
    num_runs: int = 1
    master_seed: int = 0
    checkpoints: Optional[tuple[int, ...]] = None
    event_tracking: Optional[EventTracking] = None
    track_p: bool = False

    def __post_init__(self) -> None:
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; expected one of {POLICIES}")
        if self.T < 1:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.num_runs < 1:
            raise ValueError(f"num_runs must be positive, got {self.num_runs}")
        if self.checkpoints is None:
            object.__setattr__(self, "checkpoints", default_checkpoints(self.T))
        cps = tuple(int(c) for c in self.checkpoints)
        object.__setattr__(self, "checkpoints", cps)
        if not cps or cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])) or cps[-1] > self.T:
            raise ValueError(f"checkpoints must be strictly increasing within [1, T], got {cps}")
        if (self.event_tracking is not None or self.track_p) and self.policy != "ts":
            raise ValueError("event and p-series tracking are defined for Thompson Sampling only")
        if (self.event_tracking is not None or self.track_p) and not self.instance.unique_optimum:
            raise ValueError("event tracking needs a unique optimal arm")

    def thresholds(self) -> dict[int, ThresholdPair]:
        """Per-suboptimal-arm thresholds from the true means (empty when tracking is off)."""
        inst = self.instance
        if self.event_tracking is None and not self.track_p:
            return {}
        source = self.event_tracking or EventTracking("thm2")
        mu_1 = inst.best_mean
        out = {}
        for i in inst.suboptimal():
            mu_i = float(inst.means[i])
            if source.source == "thm1":
                out[i] = numerics.thm1_thresholds(mu_i, mu_1, source.eps)
            else:
                out[i] = bounds.thm2_thresholds(mu_i, mu_1)
        return out


@dataclass
class RegretTrajectory:
    checkpoints: np.ndarray
    regret: np.ndarray
    pulls: np.ndarray  # (checkpoint, arm)
    events_not_mu: Optional[np.ndarray] = None
    events_mu_not_theta: Optional[np.ndarray] = None
    optimal_successes: Optional[np.ndarray] = None  # S_1 after j plays of the optimum, j = 0, 1, ...
    p_series: Optional[dict[int, np.ndarray]] = None

    @property
    def final_pulls(self) -> np.ndarray:
        return self.pulls[-1]


@nb.njit(cache=True, nogil=True)
def _ts_episode(g_env, g_pol, kinds, means, support, cum, T, ckpts, track, xs, ys, opt, log_opt):
    n = kinds.shape[0]
    S = np.zeros(n, np.int64)
    F = np.zeros(n, np.int64)
    theta = np.empty(n)
    pulls = np.zeros((ckpts.shape[0], n), np.int64)
    not_mu = np.zeros(n, np.int64)
    not_theta = np.zeros(n, np.int64)
    opt_s = np.zeros(T + 1 if log_opt else 1, np.int64)
    n_opt = 1
    c = 0
    for t in range(1, T + 1):
        for i in range(n):
            theta[i] = beta_int(g_pol, S[i] + 1, F[i] + 1)
        arm = argmax_random_ties(g_pol, theta)
        if track and arm != opt:
            k = S[arm] + F[arm]
            mu_hat = S[arm] / k if k > 0 else 1.0
            if mu_hat > xs[arm]:
                not_mu[arm] += 1
            elif theta[arm] > ys[arm]:
                not_theta[arm] += 1
        r = draw_reward(g_env, kinds[arm], means[arm], support[arm], cum[arm])
        if r == 1.0:
            S[arm] += 1
        elif r == 0.0:
            F[arm] += 1
        elif g_pol.random() < r:
            S[arm] += 1
        else:
            F[arm] += 1
        if log_opt and arm == opt:
            opt_s[n_opt] = S[opt]
            n_opt += 1
        while c < ckpts.shape[0] and ckpts[c] == t:
            for i in range(n):
                pulls[c, i] = S[i] + F[i]
            c += 1
    return pulls, not_mu, not_theta, opt_s[:n_opt]


@nb.njit(cache=True, nogil=True)
def _ucb1_episode(g_env, kinds, means, support, cum, T, ckpts):
    n = kinds.shape[0]
    counts = np.zeros(n, np.int64)
    sums = np.zeros(n)
    pulls = np.zeros((ckpts.shape[0], n), np.int64)
    c = 0
    for t in range(1, T + 1):
        arm = -1
        for i in range(n):
            if counts[i] == 0:
                arm = i
                break
        if arm < 0:
            log_t = math.log(t)
            best = -math.inf
            for i in range(n):
                v = sums[i] / counts[i] + math.sqrt(2.0 * log_t / counts[i])
                if v > best:
                    best = v
                    arm = i
        r = draw_reward(g_env, kinds[arm], means[arm], support[arm], cum[arm])
        counts[arm] += 1
        sums[arm] += r
        while c < ckpts.shape[0] and ckpts[c] == t:
            for i in range(n):
                pulls[c, i] = counts[i]
            c += 1
    return pulls


def pseudo_regret(pulls: np.ndarray, gaps: np.ndarray) -> np.ndarray:
    """sum_i Delta_i k_i for each row of ``pulls``."""
    return np.array([math.fsum((row * gaps).tolist()) for row in np.atleast_2d(pulls)])


def p_series_from(opt_successes: np.ndarray, y: float) -> np.ndarray:
    """p after j plays of the optimal arm: F_Binomial(j+1, y)(S_1), j = 0, 1, ..."""
    s = np.asarray(opt_successes)
    return special.bdtr(s, np.arange(1, s.size + 1), y)


def run_episode(config: ExperimentConfig, run_index: int) -> RegretTrajectory:
    inst = config.instance
    kinds, means, support, cum = inst.kernel_arrays
    ckpts = np.asarray(config.checkpoints, dtype=np.int64)
    g_env = stream(config.master_seed, run_index, "env")
    if config.policy == "ucb1":
        pulls = _ucb1_episode(g_env, kinds, means, support, cum, config.T, ckpts)
        return RegretTrajectory(ckpts, pseudo_regret(pulls, inst.gaps), pulls)
    g_pol = stream(config.master_seed, run_index, "policy")
    thresholds = config.thresholds()
    xs = np.zeros(inst.n_arms)
    ys = np.zeros(inst.n_arms)
    for i, tp in thresholds.items():
        xs[i] = tp.x
        ys[i] = tp.y
    track = config.event_tracking is not None
    pulls, not_mu, not_theta, opt_s = _ts_episode(
        g_env, g_pol, kinds, means, support, cum, config.T, ckpts,
        track, xs, ys, inst.optimal_index, config.track_p,
    )
    traj = RegretTrajectory(ckpts, pseudo_regret(pulls, inst.gaps), pulls)
    if track:
        traj.events_not_mu = not_mu
        traj.events_mu_not_theta = not_theta
    if config.track_p:
        traj.optimal_successes = opt_s
        traj.p_series = {i: p_series_from(opt_s, tp.y) for i, tp in thresholds.items()}
    return traj


def _mean_se(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=float)
    mean = values.mean(axis=0)
    if values.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])


@dataclass
class AggregateResult:
    config: ExperimentConfig
    checkpoints: np.ndarray
    mean_regret: np.ndarray
    se_regret: np.ndarray
    mean_pulls: np.ndarray  # (checkpoint, arm)
    run_regret: np.ndarray  # (run, checkpoint)
    mean_not_mu: Optional[np.ndarray] = None
    se_not_mu: Optional[np.ndarray] = None
    mean_mu_not_theta: Optional[np.ndarray] = None
    se_mu_not_theta: Optional[np.ndarray] = None
    trajectories: list[RegretTrajectory] = field(default_factory=list, repr=False)

    @property
    def num_runs(self) -> int:
        return self.run_regret.shape[0]


def aggregate(config: ExperimentConfig, trajs: Sequence[RegretTrajectory], keep: bool = False) -> AggregateResult:
    """Reduce trajectories in the order given (callers pass run-index order)."""
    run_regret = np.stack([t.regret for t in trajs])
    mean, se = _mean_se(run_regret)
    res = AggregateResult(
        config, trajs[0].checkpoints, mean, se,
        np.stack([t.pulls for t in trajs]).mean(axis=0), run_regret,
        trajectories=list(trajs) if keep else [],
    )
    if trajs[0].events_not_mu is not None:
        res.mean_not_mu, res.se_not_mu = _mean_se(np.stack([t.events_not_mu for t in trajs]))
        res.mean_mu_not_theta, res.se_mu_not_theta = _mean_se(np.stack([t.events_mu_not_theta for t in trajs]))
    return res


def run_experiment(config: ExperimentConfig, workers: int = 1, keep_trajectories: bool = False) -> AggregateResult:
    runs = range(config.num_runs)
    if workers <= 1:
        trajs = [run_episode(config, r) for r in runs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            trajs = list(ex.map(lambda r: run_episode(config, r), runs))
    return aggregate(config, trajs, keep=keep_trajectories)


@dataclass
class ComparisonTable:
    labels: list[str]
    results: list[AggregateResult]
    bound_columns: dict[str, np.ndarray]

    @property
    def checkpoints(self) -> np.ndarray:
        return self.results[0].checkpoints


def _same_instance(a: BanditInstance, b: BanditInstance) -> bool:
    return a.arms == b.arms


def compare_policies(configs: Sequence[ExperimentConfig], workers: int = 1, eps: float = 0.2) -> ComparisonTable:
    """Run several policies on one instance/horizon/seed and line them up with the bounds."""
    if not configs:
        raise ValueError("need at least one config")
    first = configs[0]
    for c in configs[1:]:
        if not _same_instance(c.instance, first.instance) or c.T != first.T or c.master_seed != first.master_seed:
            raise ValueError("compared configs must share instance, horizon and seed")
        if c.checkpoints != first.checkpoints:
            raise ValueError("compared configs must share checkpoints")
    results = [run_experiment(c, workers) for c in configs]
    inst = first.instance
    cols: dict[str, np.ndarray] = {}
    if inst.unique_optimum:
        cps = first.checkpoints
        nan = float("nan")
        cols["lai_robbins"] = np.array([bounds.lai_robbins_lower(inst, t) if t >= 2 else nan for t in cps])
        cols["ucb1_upper"] = np.array([bounds.ucb1_upper(inst, t) if t >= 2 else nan for t in cps])
        cols["thm1_leading"] = np.array(
            [bounds.thm1_bound(inst, eps, t).leading_total if t >= 2 else nan for t in cps]
        )
    return ComparisonTable([c.policy for c in configs], results, cols)


@dataclass
class WorstCaseStudy:
    horizons: tuple[int, ...]
    means: np.ndarray  # (instance, arm)
    ratios: np.ndarray  # (instance, horizon): mean regret / sqrt(N T ln T)

    @property
    def max_ratio(self) -> np.ndarray:
        return self.ratios.max(axis=0)


def uniform_instances(n_instances: int, n_arms: int, seed: int) -> list[BanditInstance]:
    """Instances with i.i.d. Uniform(0, 1) Bernoulli means, one stream per instance."""
    from .env import make_instance

    return [make_instance(stream(seed, k, "instance").random(n_arms).tolist()) for k in range(n_instances)]


def worst_case_study(
    n_instances: int = 20, n_arms: int = 10, num_runs: int = 200,
    horizons: Sequence[int] = (1_000, 10_000, 100_000), seed: int = 0, workers: int = 1,
) -> WorstCaseStudy:
    """Max-over-instances of TS regret normalized by sqrt(N T ln T), one simulation per instance."""
    horizons = tuple(sorted(int(h) for h in horizons))
    insts = uniform_instances(n_instances, n_arms, seed)
    ratios = np.empty((n_instances, len(horizons)))
    for k, inst in enumerate(insts):
        cfg = ExperimentConfig(inst, "ts", horizons[-1], num_runs, seed + k, horizons)
        res = run_experiment(cfg, workers)
        ratios[k] = res.mean_regret / [bounds.thm2_bound(n_arms, T) for T in horizons]
    return WorstCaseStudy(horizons, np.stack([i.means for i in insts]), ratios)
