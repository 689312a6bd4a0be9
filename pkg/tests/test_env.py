from __future__ import annotations

import math

import numpy as np
import pytest

from tsbandit.env import Bernoulli, Discrete, make_instance, pull
from tsbandit.rng import stream


class TestInstance:
    def test_gaps_and_optimum(self):
        inst = make_instance([0.5, 0.45, 0.2])
        assert inst.optimal_index == 0
        np.testing.assert_allclose(inst.gaps, [0.0, 0.05, 0.3])
        assert inst.unique_optimum
        assert inst.suboptimal() == [1, 2]
        assert inst.is_bernoulli

    def test_tied_optimum_picks_lowest_index(self):
        inst = make_instance([0.3, 0.6, 0.6])
        assert inst.optimal_index == 1
        assert not inst.unique_optimum
        with pytest.raises(ValueError):
            inst.require_unique_optimum()

    def test_discrete_mean(self):
        arm = Discrete((0.0, 0.5, 1.0), (0.2, 0.3, 0.5))
        assert arm.mean == pytest.approx(0.65)
        inst = make_instance([arm, 0.6])
        assert inst.optimal_index == 0
        assert not inst.is_bernoulli

    def test_arrays_read_only(self):
        inst = make_instance([0.5, 0.4])
        with pytest.raises(ValueError):
            inst.means[0] = 0.1

    @pytest.mark.parametrize("specs", [[0.5], [1.5, 0.3], [-0.1, 0.3]])
    def test_invalid(self, specs):
        with pytest.raises(ValueError):
            make_instance(specs)

    @pytest.mark.parametrize("support, probs", [
        ((0.0, 1.0), (0.5, 0.6)), ((0.0, 1.2), (0.5, 0.5)), ((0.0,), (0.5, 0.5)), ((0.5,), (-1.0,)),
    ])
    def test_invalid_discrete(self, support, probs):
        with pytest.raises(ValueError):
            Discrete(support, probs)

    def test_single_arm_allowed_on_request(self):
        assert make_instance([0.3], allow_single=True).n_arms == 1


class TestPull:
    def test_bernoulli_rewards_binary_and_lln(self):
        inst = make_instance([0.3, 0.7])
        g = stream(0, 0, "env")
        r = np.array([pull(inst, 1, g) for _ in range(40_000)])
        assert set(np.unique(r)) <= {0.0, 1.0}
        assert abs(r.mean() - 0.7) < 5.0 * math.sqrt(0.21 / r.size)

    def test_discrete_frequencies(self):
        inst = make_instance([Discrete((0.0, 0.25, 1.0), (0.1, 0.6, 0.3)), Bernoulli(0.2)])
        g = stream(1, 0, "env")
        r = np.array([pull(inst, 0, g) for _ in range(30_000)])
        for v, p in zip((0.0, 0.25, 1.0), (0.1, 0.6, 0.3)):
            assert abs(np.mean(r == v) - p) < 5.0 * math.sqrt(p * (1 - p) / r.size)
        assert abs(r.mean() - inst.means[0]) < 0.01

    def test_degenerate_means(self):
        inst = make_instance([0.0, 1.0])
        g = stream(2, 0, "env")
        assert all(pull(inst, 0, g) == 0.0 for _ in range(100))
        assert all(pull(inst, 1, g) == 1.0 for _ in range(100))

    def test_reproducible(self):
        inst = make_instance([0.5, 0.4])
        a = [pull(inst, 0, stream(3, 1, "env")) for _ in range(1)]
        b = [pull(inst, 0, stream(3, 1, "env")) for _ in range(1)]
        assert a == b

    @pytest.mark.parametrize("arm", [-1, 2])
    def test_bad_arm(self, arm):
        with pytest.raises(ValueError):
            pull(make_instance([0.5, 0.4]), arm, stream(0, 0, "env"))
