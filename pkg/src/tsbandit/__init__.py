"""Thompson Sampling for Bernoulli and [0, 1]-reward bandits, with its regret
bounds, reference baselines and numerical checks of the analysis."""

from .env import BanditInstance, Bernoulli, Discrete, make_instance, pull
from .numerics import ThresholdPair, beta_cdf, binomial_cdf, kl_bernoulli, thm1_thresholds
from .rng import StreamKey, derive_stream, sample_beta, stream
from .sim import ExperimentConfig, EventTracking, compare_policies, run_experiment

__all__ = [
    "BanditInstance", "Bernoulli", "Discrete", "EventTracking", "ExperimentConfig", "StreamKey",
    "ThresholdPair", "beta_cdf", "binomial_cdf", "compare_policies", "derive_stream", "kl_bernoulli",
    "make_instance", "pull", "run_experiment", "sample_beta", "stream", "thm1_thresholds",
]
__version__ = "0.1.0"
