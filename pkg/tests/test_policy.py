from __future__ import annotations

import math

import numpy as np
import pytest

from tsbandit import policy
from tsbandit.numerics import binomial_cdf
from tsbandit.policy import ArmPosterior, exact_p, ts_init, ts_select, ts_update, ts_update_general
from tsbandit.rng import stream


class TestArmPosterior:
    def test_counts(self):
        post = ArmPosterior(3, 2)
        assert post.k == 5
        assert post.mean_hat == pytest.approx(0.6)

    def test_unplayed_mean_is_one(self):
        assert ArmPosterior().mean_hat == 1.0

    def test_negative(self):
        with pytest.raises(ValueError):
            ArmPosterior(-1, 0)


class TestThompson:
    def test_update_counts(self):
        st = ts_init(3)
        ts_update(st, 1, 1)
        ts_update(st, 1, 0)
        ts_update(st, 2, 1)
        assert st.S.tolist() == [0, 1, 1]
        assert st.F.tolist() == [0, 1, 0]
        assert st.pulls.tolist() == [0, 2, 1]
        assert st.step == 4
        assert st.posteriors[1] == ArmPosterior(1, 1)

    def test_update_rejects_fractional(self):
        with pytest.raises(ValueError):
            ts_update(ts_init(2), 0, 0.5)
        with pytest.raises(ValueError):
            ts_update(ts_init(2), 2, 1)

    def test_general_binary_consumes_no_randomness(self):
        g, h = stream(0, 0, "p"), stream(0, 0, "p")
        ts_update_general(ts_init(2), 0, 1.0, g)
        assert g.random() == h.random()

    def test_general_bernoulli_trial(self):
        g = stream(1, 0, "p")
        st = ts_init(1)
        n = 20_000
        for _ in range(n):
            ts_update_general(st, 0, 0.3, g)
        assert abs(st.S[0] / n - 0.3) < 5.0 * math.sqrt(0.21 / n)

    def test_general_domain(self):
        with pytest.raises(ValueError):
            ts_update_general(ts_init(2), 0, 1.5, stream(0, 0, "p"))

    def test_select_uniform_from_prior(self):
        g = stream(2, 0, "p")
        st = ts_init(4)
        counts = np.bincount([ts_select(st, g)[0] for _ in range(20_000)], minlength=4)
        assert np.all(np.abs(counts - 5_000) < 5.0 * math.sqrt(20_000 * 0.25 * 0.75))

    def test_select_returns_argmax_of_thetas(self):
        g = stream(3, 0, "p")
        st = ts_init(3)
        st.S[:] = [5, 1, 9]
        st.F[:] = [2, 7, 1]
        for _ in range(100):
            arm, theta = ts_select(st, g)
            assert arm == int(np.argmax(theta))

    def test_probability_of_selection(self):
        # P(Beta(2,1) > Beta(1,2)) = 5/6
        g = stream(4, 0, "p")
        st = ts_init(2)
        st.S[:] = [1, 0]
        st.F[:] = [0, 1]
        n = 30_000
        wins = sum(ts_select(st, g)[0] == 0 for _ in range(n))
        assert abs(wins / n - 5 / 6) < 5.0 * math.sqrt(5 / 36 / n)


class TestUCB1:
    def test_round_robin_then_index(self):
        st = policy.ucb1_init(3)
        for arm in range(3):
            assert policy.ucb1_select(st) == arm
            policy.ucb1_update(st, arm, [1.0, 0.0, 0.5][arm])
        # index mean + sqrt(2 ln 4 / 1): arm 0 leads
        assert policy.ucb1_select(st) == 0

    def test_index_value_tie_goes_low(self):
        st = policy.ucb1_init(2)
        policy.ucb1_update(st, 0, 1.0)
        policy.ucb1_update(st, 1, 1.0)
        assert policy.ucb1_select(st) == 0

    def test_exploration_term(self):
        st = policy.ucb1_init(2)
        st.counts[:] = [100, 1]
        st.sums[:] = [90.0, 0.0]
        st.step = 102
        # 0.9 + sqrt(2 ln 102 / 100) = 1.204 < 0 + sqrt(2 ln 102) = 3.04
        assert policy.ucb1_select(st) == 1


class TestExactP:
    def test_matches_binomial_cdf(self):
        assert exact_p(ArmPosterior(3, 4), 0.4) == pytest.approx(binomial_cdf(8, 0.4, 3))

    def test_prior(self):
        assert exact_p(ArmPosterior(0, 0), 0.3) == pytest.approx(0.7)

    def test_monte_carlo(self):
        x = np.array([ts_select(policy.TSState(np.array([6]), np.array([3])), stream(5, i, "p"))[1][0]
                      for i in range(20_000)])
        p = exact_p(ArmPosterior(6, 3), 0.55)
        assert abs(np.mean(x > 0.55) - p) < 5.0 * math.sqrt(p * (1 - p) / x.size)
