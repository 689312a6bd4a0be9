"""Special functions and tail inequalities: Bernoulli KL divergence, binomial
pmf/cdf, the Beta-Binomial CDF identity, Chernoff-Hoeffding values, the
Jerabek low-tail binomial estimate, and the KL threshold root finders.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

LARGE_N = 100_000
BISECT_MAX_ITER = 200
RESIDUAL_RTOL = 1e-12


def _check_prob(name: str, v: float) -> None:
    if not 0.0 <= v <= 1.0 or math.isnan(v):
        raise ValueError(f"{name} must lie in [0, 1], got {v}")


def _log1p_minus_x(u: float) -> float:
    """log(1 + u) - u without cancellation for small |u|."""
    if u == 0.0:
        return 0.0
    if abs(u) > 0.1:
        return math.log1p(u) - u
    # alternating series -u^2/2 + u^3/3 - ...
    total = 0.0
    power = u * u
    k = 2
    while True:
        term = power / k
        total += -term if k % 2 == 0 else term
        if abs(term) < 1e-18 * abs(total):
            return total
        power *= u
        k += 1


def _h(u: float) -> float:
    """(1+u) log(1+u) - u, i.e. t log t - t + 1 at t = 1 + u."""
    if u == -1.0:
        return 1.0
    return u * math.log1p(u) + _log1p_minus_x(u)


def kl_bernoulli(a: float, b: float) -> float:
    """Bernoulli relative entropy d(a, b) in nats.

    Uses the split ``b*h(a/b) + (1-b)*h((1-a)/(1-b))`` with ``h(t) = t ln t - t + 1``
    so that the first-order terms cancel analytically; relative accuracy holds
    even when ``a`` and ``b`` are close. ``0 ln 0 = 0``; infinity when the support
    condition fails.
    """
    _check_prob("a", a)
    _check_prob("b", b)
    if a == b:
        return 0.0
    if b == 0.0 or b == 1.0:
        return math.inf
    diff = a - b
    if abs(diff) > 0.5 * min(b, 1.0 - b):
        # far apart: no cancellation to protect, and a/b may overflow
        first = a * (math.log(a) - math.log(b)) if a > 0.0 else 0.0
        second = (1.0 - a) * (math.log1p(-a) - math.log1p(-b)) if a < 1.0 else 0.0
        return first + second
    return b * _h(diff / b) + (1.0 - b) * _h(-diff / (1.0 - b))


def log_binomial_pmf(n: int, p: float, s: int) -> float:
    if s < 0 or s > n:
        raise ValueError(f"need 0 <= s <= n, got s={s}, n={n}")
    _check_prob("p", p)
    if p == 0.0:
        return 0.0 if s == 0 else -math.inf
    if p == 1.0:
        return 0.0 if s == n else -math.inf
    log_choose = math.lgamma(n + 1) - math.lgamma(s + 1) - math.lgamma(n - s + 1)
    return log_choose + s * math.log(p) + (n - s) * math.log1p(-p)


def log_binomial_pmf_array(n: int, p: float, s: np.ndarray) -> np.ndarray:
    """Vectorised :func:`log_binomial_pmf` for ``0 < p < 1``."""
    s = np.asarray(s, dtype=float)
    return (
        gammaln(n + 1.0) - gammaln(s + 1.0) - gammaln(n - s + 1.0)
        + s * math.log(p) + (n - s) * math.log1p(-p)
    )


def _scaled_sum(logs: np.ndarray) -> tuple[float, float]:
    """Return (m, t) with sum(exp(logs)) == exp(m) * t, t computed by fsum."""
    m = float(np.max(logs))
    return m, math.fsum(np.exp(logs - m).tolist())


def _rescaled_running_sum(logs: np.ndarray) -> tuple[float, float]:
    """Chunked variant of :func:`_scaled_sum` that rescales on a running maximum."""
    m = -math.inf
    total = 0.0
    for chunk in np.array_split(logs, max(1, logs.size // 4096)):
        cm = float(np.max(chunk))
        if cm > m:
            total *= math.exp(m - cm) if m > -math.inf else 0.0
            m = cm
        total += math.fsum(np.exp(chunk - m).tolist())
    return m, total


def binomial_cdf(n: int, p: float, s: int) -> float:
    """P(X <= s) for X ~ Binomial(n, p), summed from the nearer tail."""
    if s < 0:
        return 0.0
    if s >= n:
        return 1.0
    _check_prob("p", p)
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    summer = _rescaled_running_sum if n > LARGE_N else _scaled_sum
    if s <= n * p:
        m, t = summer(log_binomial_pmf_array(n, p, np.arange(0, s + 1)))
        return min(1.0, math.exp(m) * t)
    m, t = summer(log_binomial_pmf_array(n, p, np.arange(s + 1, n + 1)))
    return max(0.0, 1.0 - math.exp(m) * t)


def log_binomial_cdf_table(n: int, p: float) -> np.ndarray:
    """log P(X <= s) for every s in 0..n, X ~ Binomial(n, p), 0 < p < 1.

    Lower-tail log-sum-exp accumulation, so tiny left-tail values keep their
    relative precision.
    """
    return np.logaddexp.accumulate(log_binomial_pmf_array(n, p, np.arange(n + 1)))


def beta_cdf(alpha: int, beta: int, y):
    """CDF of Beta(alpha, beta) at ``y`` for integer parameters.

    Evaluated through ``F_beta(y) = 1 - F_Binomial(alpha+beta-1, y)(alpha-1)``.
    Accepts a scalar or an array of ``y``.
    """
    if int(alpha) != alpha or int(beta) != beta or alpha < 1 or beta < 1:
        raise ValueError(f"alpha, beta must be positive integers, got {alpha}, {beta}")
    alpha, beta = int(alpha), int(beta)
    n = alpha + beta - 1
    if np.ndim(y) == 0:
        _check_prob("y", float(y))
        return 1.0 - binomial_cdf(n, float(y), alpha - 1)
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > 1)):
        raise ValueError("y must lie in [0, 1]")
    out = np.empty_like(y)
    inner = (y > 0) & (y < 1)
    out[y <= 0] = 0.0
    out[y >= 1] = 1.0
    yi = y[inner][:, None]
    u = np.arange(alpha)[None, :]
    logs = gammaln(n + 1.0) - gammaln(u + 1.0) - gammaln(n - u + 1.0) + u * np.log(yi) + (n - u) * np.log1p(-yi)
    lower = np.exp(logs).sum(axis=1)
    out[inner] = np.clip(1.0 - lower, 0.0, 1.0)
    return out


def log_beta_pdf(alpha: int, beta: int, v):
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = (
            gammaln(alpha + beta) - gammaln(alpha) - gammaln(beta)
            + (alpha - 1) * np.log(v) + (beta - 1) * np.log1p(-v)
        )
    # 0 * log 0 at the endpoints for unit shape parameters
    if alpha == 1:
        lp = np.where(v == 0, gammaln(alpha + beta) - gammaln(beta), lp)
    if beta == 1:
        lp = np.where(v == 1, gammaln(alpha + beta) - gammaln(alpha), lp)
    return lp


def beta_pdf(alpha: int, beta: int, v):
    return np.exp(log_beta_pdf(alpha, beta, v))


# ---------------------------------------------------------------------------
# tail inequalities
# ---------------------------------------------------------------------------


def chernoff_kl_bound(n: int, mu: float, lam: float, direction: str = "upper") -> float:
    """exp(-n d(mu +/- lam, mu)): Chernoff bound on the empirical-mean tail."""
    if direction == "upper":
        if not 0.0 < lam < 1.0 - mu:
            raise ValueError(f"need 0 < lambda < 1 - mu, got lambda={lam}, mu={mu}")
        return math.exp(-n * kl_bernoulli(mu + lam, mu))
    if direction == "lower":
        if not 0.0 < lam < mu:
            raise ValueError(f"need 0 < lambda < mu, got lambda={lam}, mu={mu}")
        return math.exp(-n * kl_bernoulli(mu - lam, mu))
    raise ValueError(f"direction must be 'upper' or 'lower', got {direction!r}")


def hoeffding_bound(n: int, a: float) -> float:
    return math.exp(-2.0 * a * a / n)


def jerabek_low_regime(n: int, y: float, s) -> np.ndarray | bool:
    """True where ``s <= y n - sqrt(n y (1-y))`` (ties go to the low tail)."""
    return s <= y * n - math.sqrt(n * y * (1.0 - y))


def log_jerabek_estimate(n: int, y: float, s):
    """Log of the low-tail estimate y(n-s)/(yn-s) C(n,s) y^s (1-y)^(n-s).

    Only meaningful in the low regime; no regime selection here.
    """
    s = np.asarray(s, dtype=float)
    return np.log(y * (n - s) / (y * n - s)) + log_binomial_pmf_array(n, y, s)


def jerabek_cdf_estimate(n: int, y: float, s: int) -> float:
    """Order-of-magnitude estimate of the binomial CDF F_{n,y}(s).

    Low tail: the closed form above; otherwise the constant 1.
    """
    if not jerabek_low_regime(n, y, s):
        return 1.0
    return float(np.exp(log_jerabek_estimate(n, y, s)))


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------


def _bisect(g, lo: float, hi: float, increasing: bool) -> float:
    """Root of monotone ``g`` on [lo, hi]; returns the endpoint with the smaller |g|."""
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if (g(mid) > 0.0) == increasing:
            hi = mid
        else:
            lo = mid
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def solve_x_threshold(mu_i: float, mu_1: float, eps: float) -> float:
    """x in (mu_i, mu_1) with d(x, mu_1) = d(mu_i, mu_1) / (1 + eps)."""
    _check_prob("mu_i", mu_i)
    _check_prob("mu_1", mu_1)
    if mu_i >= mu_1:
        raise ValueError(f"need mu_i < mu_1, got {mu_i} >= {mu_1}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    target = kl_bernoulli(mu_i, mu_1)
    x = _bisect(lambda v: kl_bernoulli(v, mu_1) * (1.0 + eps) - target, mu_i, mu_1, increasing=False)
    # keep the strict ordering even when the root sits one ulp from an endpoint
    return min(max(x, math.nextafter(mu_i, 1.0)), math.nextafter(mu_1, 0.0))


def solve_y_threshold(x: float, mu_1: float, eps: float) -> float:
    """y in (x, mu_1) with d(x, y) = d(x, mu_1) / (1 + eps)."""
    _check_prob("x", x)
    _check_prob("mu_1", mu_1)
    if x >= mu_1:
        raise ValueError(f"need x < mu_1, got {x} >= {mu_1}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    target = kl_bernoulli(x, mu_1)
    y = _bisect(lambda v: kl_bernoulli(x, v) * (1.0 + eps) - target, x, mu_1, increasing=True)
    return min(max(y, math.nextafter(x, 1.0)), math.nextafter(mu_1, 0.0))


@dataclass(frozen=True)
class ThresholdPair:
    """Analysis thresholds mu_i < x < y < mu_1 for one suboptimal arm."""

    mu_i: float
    mu_1: float
    x: float
    y: float

    def __post_init__(self) -> None:
        if not self.mu_i < self.x < self.y < self.mu_1:
            raise ValueError(
                f"thresholds must satisfy mu_i < x < y < mu_1, got "
                f"{self.mu_i}, {self.x}, {self.y}, {self.mu_1}"
            )

    @property
    def delta_prime(self) -> float:
        return self.mu_1 - self.y

    @property
    def D(self) -> float:
        return kl_bernoulli(self.y, self.mu_1)

    def L(self, T: int) -> float:
        """ln T / d(x, y): the play count past which the sample rarely exceeds y."""
        return math.log(T) / kl_bernoulli(self.x, self.y)


def thm1_thresholds(mu_i: float, mu_1: float, eps: float) -> ThresholdPair:
    x = solve_x_threshold(mu_i, mu_1, eps)
    return ThresholdPair(mu_i, mu_1, x, solve_y_threshold(x, mu_1, eps))
