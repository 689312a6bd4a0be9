from __future__ import annotations

import math

import numpy as np
import pytest

from tsbandit import bounds, numerics, sim
from tsbandit.env import Discrete, make_instance
from tsbandit.sim import EventTracking, ExperimentConfig, run_episode, run_experiment

TWO_ARM = make_instance([0.5, 0.45])


class TestConfig:
    def test_default_checkpoints(self):
        assert sim.default_checkpoints(100) == (1, 2, 4, 7, 13, 25, 50, 100)
        assert sim.default_checkpoints(1) == (1,)

    @pytest.mark.parametrize("kwargs", [
        {"policy": "greedy"}, {"T": 0}, {"num_runs": 0}, {"checkpoints": (5, 3)}, {"checkpoints": (1, 2000)},
        {"policy": "ucb1", "track_p": True},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentConfig(TWO_ARM, **({"T": 1000} | kwargs))

    def test_tracking_needs_unique_optimum(self):
        with pytest.raises(ValueError):
            ExperimentConfig(make_instance([0.5, 0.5]), T=10, event_tracking=EventTracking("thm2"))

    def test_tracking_source(self):
        with pytest.raises(ValueError):
            EventTracking("thm3")

    def test_thresholds_follow_source(self):
        cfg = ExperimentConfig(make_instance([0.6, 0.3]), T=10, event_tracking=EventTracking("thm2"))
        tp = cfg.thresholds()[1]
        assert (tp.x, tp.y) == pytest.approx((0.4, 0.5))
        cfg = ExperimentConfig(make_instance([0.6, 0.3]), T=10, event_tracking=EventTracking("thm1", 0.5))
        assert cfg.thresholds()[1].x != pytest.approx(0.4)


class TestEpisode:
    @pytest.mark.parametrize("policy", sim.POLICIES)
    def test_pulls_and_regret_consistent(self, policy):
        inst = make_instance([0.7, 0.5, Discrete((0.0, 1.0), (0.6, 0.4))])
        cfg = ExperimentConfig(inst, policy, 500, 1, 3)
        tr = run_episode(cfg, 0)
        np.testing.assert_array_equal(tr.pulls.sum(axis=1), tr.checkpoints)
        np.testing.assert_allclose(tr.regret, tr.pulls @ inst.gaps)
        assert np.all(np.diff(tr.regret) >= 0)

    def test_pseudo_regret(self):
        pulls = np.array([[3, 1, 0], [5, 3, 2]])
        np.testing.assert_allclose(sim.pseudo_regret(pulls, np.array([0.0, 0.1, 0.3])), [0.1, 0.9])

    def test_episode_reproducible(self):
        cfg = ExperimentConfig(TWO_ARM, "ts", 300, 1, 11)
        a, b = run_episode(cfg, 4), run_episode(cfg, 4)
        np.testing.assert_array_equal(a.pulls, b.pulls)
        assert not np.array_equal(a.pulls, run_episode(cfg, 5).pulls)

    def test_first_step_uniform(self):
        # both posteriors are uniform at t = 1, so each arm is played with probability 1/2
        cfg = ExperimentConfig(TWO_ARM, "ts", 1, 20_000, 0)
        res = run_experiment(cfg)
        assert abs(res.mean_pulls[0, 1] - 0.5) < 5 * math.sqrt(0.25 / 20_000)

    def test_deterministic_arms(self):
        cfg = ExperimentConfig(make_instance([1.0, 0.0]), "ts", 2000, 20, 0)
        res = run_experiment(cfg)
        # a handful of early mistakes, then the optimum is all but certain
        assert res.mean_regret[-1] < 5.0

    def test_event_tallies_bounded_by_pulls(self):
        inst = make_instance([0.6, 0.5, 0.3])
        cfg = ExperimentConfig(inst, "ts", 3000, 1, 1, event_tracking=EventTracking("thm2"), track_p=True)
        tr = run_episode(cfg, 0)
        assert tr.events_not_mu[0] == 0 and tr.events_mu_not_theta[0] == 0
        assert np.all(tr.events_not_mu + tr.events_mu_not_theta <= tr.final_pulls)
        y = cfg.thresholds()[1].y
        assert tr.p_series[1][0] == pytest.approx(1 - y)
        exact = [numerics.binomial_cdf(j + 1, y, int(s)) for j, s in enumerate(tr.optimal_successes)]
        np.testing.assert_allclose(tr.p_series[1], exact, rtol=1e-10, atol=1e-300)
        assert len(tr.optimal_successes) == tr.final_pulls[0] + 1
        assert np.all(np.diff(tr.optimal_successes) >= 0) and np.all(np.diff(tr.optimal_successes) <= 1)


class TestExperiment:
    @pytest.mark.parametrize("policy", sim.POLICIES)
    def test_workers_do_not_change_results(self, policy):
        cfg = ExperimentConfig(TWO_ARM, policy, 500, 12, 9)
        a, b = run_experiment(cfg, 1), run_experiment(cfg, 5)
        np.testing.assert_array_equal(a.run_regret, b.run_regret)
        np.testing.assert_array_equal(a.mean_regret, b.mean_regret)

    def test_single_run_se_zero(self):
        res = run_experiment(ExperimentConfig(TWO_ARM, "ts", 100, 1, 0))
        assert np.all(res.se_regret == 0)

    def test_ucb1_within_its_bound(self):
        inst = make_instance([0.7, 0.4])
        res = run_experiment(ExperimentConfig(inst, "ucb1", 20_000, 20, 0))
        assert res.mean_regret[-1] <= bounds.ucb1_upper(inst, 20_000)

    def test_ts_beats_ucb1_on_easy_instance(self):
        inst = make_instance([0.7, 0.4])
        cfgs = [ExperimentConfig(inst, p, 10_000, 30, 2) for p in ("ts", "ucb1")]
        table = sim.compare_policies(cfgs)
        ts, ucb = table.results
        assert ts.mean_regret[-1] < ucb.mean_regret[-1]
        assert set(table.bound_columns) == {"lai_robbins", "ucb1_upper", "thm1_leading"}
        assert math.isnan(table.bound_columns["lai_robbins"][0])

    def test_compare_rejects_mismatch(self):
        with pytest.raises(ValueError):
            sim.compare_policies([ExperimentConfig(TWO_ARM, "ts", 100), ExperimentConfig(TWO_ARM, "ucb1", 200)])
        with pytest.raises(ValueError):
            sim.compare_policies([])

    def test_worst_case_study_shapes(self):
        study = sim.worst_case_study(n_instances=2, n_arms=3, num_runs=3, horizons=(100, 1000), seed=1)
        assert study.ratios.shape == (2, 2)
        assert study.means.shape == (2, 3)
        assert np.all(study.ratios >= 0)
