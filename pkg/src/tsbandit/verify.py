"""Numerical checks of the regret analysis.

* the conditional play-probability inequality by adaptive quadrature over
  Beta posteriors,
* E[1/p] after j plays of the optimal arm by exact finite sums, its small-j
  bound, the large-j envelope constant and the four-way partial-sum split,
* the Jerabek low-tail estimate against exact binomial CDFs,
* event tallies from simulation logs against the per-arm lemma bounds,
* the Beta-Binomial CDF identity against Gauss-Legendre quadrature.

Each check returns :class:`VerificationReport` rows (or a small summary
dataclass for grid studies).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numba as nb
import numpy as np
from scipy import integrate
from scipy.special import gammaln

from . import bounds, numerics
from .numerics import ThresholdPair, kl_bernoulli
from .policy import ArmPosterior, exact_p
from .sim import AggregateResult

LEMMA1_TOL = 1e-8
QUAD_ABS_TOL = 1e-10

ENVELOPE_MU1 = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
ENVELOPE_DELTA_PRIME = (0.05, 0.1, 0.2)


@dataclass
class VerificationReport:
    check: str
    inputs: dict
    lhs: float
    rhs: float
    tolerance: float = 0.0
    method: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance


# ---------------------------------------------------------------------------
# conditional play-probability inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PosteriorProfile:
    """Posterior counts for every arm (arm 0 is the optimum), a threshold y and an arm i."""

    counts: tuple[tuple[int, int], ...]
    y: float
    arm: int

    def __post_init__(self) -> None:
        if len(self.counts) < 2:
            raise ValueError("a profile needs at least two arms")
        if any(s < 0 or f < 0 for s, f in self.counts):
            raise ValueError("counts must be nonnegative")
        if not 0.0 < self.y < 1.0:
            raise ValueError(f"y must lie in (0, 1), got {self.y}")
        if not 1 <= self.arm < len(self.counts):
            raise ValueError(f"arm must be a suboptimal index in 1..{len(self.counts) - 1}, got {self.arm}")


def _pdf(s: int, f: int):
    a, b = s + 1, f + 1
    return lambda v: float(numerics.beta_pdf(a, b, v))


def _cdf(s: int, f: int):
    a, b = s + 1, f + 1
    return lambda v: numerics.beta_cdf(a, b, min(max(v, 0.0), 1.0))


def _quad(fn, lo: float, hi: float, limit: int) -> tuple[float, int]:
    if hi <= lo:
        return 0.0, 0
    val, _err, info = integrate.quad(fn, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=1e-12, limit=limit, full_output=1)
    return val, info["neval"]


def verify_lemma1(profile: PosteriorProfile, quad_nodes: int = 200) -> VerificationReport:
    """P(play i, theta_i <= y | history) <= (1-p)/p * P(play optimum, theta_i <= y | history).

    Both sides are one-dimensional integrals over independent Beta posteriors;
    ``quad_nodes`` caps the number of adaptive subintervals.
    """
    y, i = profile.y, profile.arm
    counts = profile.counts
    p = exact_p(ArmPosterior(*counts[0]), y)
    if p <= 0.0:
        raise ValueError("p = P(theta_1 > y) is zero")
    pdfs = [_pdf(s, f) for s, f in counts]
    cdfs = [_cdf(s, f) for s, f in counts]
    others_i = [j for j in range(len(counts)) if j != i]
    others_1i = [j for j in range(len(counts)) if j not in (0, i)]

    def lhs_integrand(v):
        return pdfs[i](v) * math.prod(cdfs[j](v) for j in others_i)

    def rhs_below(v):
        return pdfs[0](v) * cdfs[i](v) * math.prod(cdfs[j](v) for j in others_1i)

    def rhs_above(v):
        return pdfs[0](v) * math.prod(cdfs[j](v) for j in others_1i)

    lhs, n1 = _quad(lhs_integrand, 0.0, y, quad_nodes)
    below, n2 = _quad(rhs_below, 0.0, y, quad_nodes)
    above, n3 = _quad(rhs_above, y, 1.0, quad_nodes)
    play_opt = below + cdfs[i](y) * above
    rhs = (1.0 - p) / p * play_opt
    return VerificationReport(
        "lemma1",
        {"counts": [list(c) for c in counts], "y": y, "arm": i, "p": p},
        lhs, rhs, LEMMA1_TOL,
        {"quadrature": "QUADPACK adaptive Gauss-Kronrod", "abs_tol": QUAD_ABS_TOL,
         "max_subintervals": quad_nodes, "evaluations": n1 + n2 + n3},
    )


def random_profiles(n: int, seed: int = 0, arm_choices=(2, 3, 5), max_count: int = 50) -> list[PosteriorProfile]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        N = int(rng.choice(arm_choices))
        counts = tuple((int(rng.integers(0, max_count + 1)), int(rng.integers(0, max_count + 1))) for _ in range(N))
        y = float(rng.uniform(0.01, 0.99))
        out.append(PosteriorProfile(counts, y, int(rng.integers(1, N))))
    return out


# ---------------------------------------------------------------------------
# E[1/p] after j plays of the optimal arm
# ---------------------------------------------------------------------------


@nb.njit(cache=True, nogil=True)
def _inverse_p_kernel(j, mu1, y):
    """Per-s terms f_{j,mu1}(s) / F_{j+1,y}(s) and the excess terms times 1 - F_{j+1,y}(s).

    F is carried as F/f (forward, below the median) or (1-F)/f (backward, above
    it); both ratios stay O(sqrt(j)) in their region so nothing over/underflows
    and tiny tail CDFs keep their relative precision.
    """
    n = j + 1
    odds = y / (1.0 - y)
    log_y = math.log(y)
    log_1my = math.log1p(-y)
    log_R = math.log(mu1 / y) + math.log((1.0 - y) / (1.0 - mu1))
    log_c = j * math.log1p(-mu1) - n * log_1my
    lg_n = math.lgamma(n + 1.0)
    log_fy = np.empty(j + 1)
    for s in range(j + 1):
        log_fy[s] = lg_n - math.lgamma(s + 1.0) - math.lgamma(n - s + 1.0) + s * log_y + (n - s) * log_1my
    log_F = np.empty(j + 1)
    tail = np.empty(j + 1)
    g = 0.0
    split = j + 1
    for s in range(j + 1):
        g = 1.0 + g * s / ((n - s + 1) * odds)
        lf = log_fy[s] + math.log(g)
        if lf >= -math.log(2.0):
            split = s
            break
        log_F[s] = lf
        tail[s] = -math.expm1(lf)
    h = 0.0
    for s in range(j, split - 1, -1):
        h = (n - s) / (s + 1.0) * odds * (1.0 + h)
        tail[s] = h * math.exp(log_fy[s])
        log_F[s] = math.log1p(-tail[s])
    terms = np.empty(j + 1)
    excess = np.empty(j + 1)
    for s in range(j + 1):
        # log f_{j,mu1}(s) - log f_{n,y}(s) in closed form
        log_ratio = math.log1p(-s / n) + s * log_R + log_c
        t = math.exp(log_fy[s] + log_ratio - log_F[s])
        terms[s] = t
        excess[s] = t * tail[s]
    return terms, excess


@nb.njit(cache=True, nogil=True)
def _neumaier(x):
    total = 0.0
    comp = 0.0
    for v in x:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def _check_jy(j: int, mu1: float, y: float) -> None:
    if not (0.0 < y < 1.0 and 0.0 < mu1 < 1.0) or j < 0:
        raise ValueError(f"need 0 < y, mu1 < 1 and j >= 0, got j={j}, mu1={mu1}, y={y}")


def inverse_p_terms(j: int, mu1: float, y: float) -> np.ndarray:
    """f_{j,mu1}(s) / F_{j+1,y}(s) for s = 0..j."""
    _check_jy(j, mu1, y)
    return _inverse_p_kernel(int(j), float(mu1), float(y))[0]


def exact_inverse_p_expectation(j: int, mu1: float, y: float) -> float:
    """E[1/p] with k_1 = j: sum_s f_{j,mu1}(s) / F_{j+1,y}(s)."""
    _check_jy(j, mu1, y)
    return float(_neumaier(_inverse_p_kernel(int(j), float(mu1), float(y))[0]))


def inverse_p_excess(j: int, mu1: float, y: float) -> float:
    """E[1/p] - 1, summed as sum_s f(s) (1 - F(s)) / F(s) so it keeps relative precision when tiny."""
    _check_jy(j, mu1, y)
    return float(_neumaier(_inverse_p_kernel(int(j), float(mu1), float(y))[1]))


def _large_j(j: int, dp: float) -> bool:
    return j >= bounds.small_j_count(dp)


def lemma4_check(j: int, mu1: float, y: float, theta_constant: Optional[float] = None) -> VerificationReport:
    """Compare the exact E[1/p] with the small-j (1 + 3/Delta') or large-j bound.

    The large-j bound is ``1 + C * three_term(j)`` with ``C = theta_constant``
    (defaults to the shipped measured constant).
    """
    if y >= mu1:
        raise ValueError(f"need y < mu1, got y={y}, mu1={mu1}")
    dp = mu1 - y
    lhs = exact_inverse_p_expectation(j, mu1, y)
    if not _large_j(j, dp):
        return VerificationReport("lemma4_small_j", {"j": j, "mu1": mu1, "y": y}, lhs, 1.0 + 3.0 / dp, 0.0,
                                  {"regime": "j < 8/Delta'"})
    C = bounds.MEASURED_THETA_CONSTANT if theta_constant is None else theta_constant
    D = kl_bernoulli(y, mu1)
    rhs = 1.0 + C * float(bounds.three_term(j, dp, D))
    return VerificationReport(
        "lemma4_large_j", {"j": j, "mu1": mu1, "y": y, "theta_constant": C}, lhs, rhs, 0.0,
        {"regime": "j >= 8/Delta'",
         "note": "state after j plays of the optimal arm (k_1 = j); tau_{j+1} and tau_j + 1 are read as the same state"},
    )


@dataclass
class EnvelopeResult:
    constant: float
    argmax: dict
    per_pair: dict  # (mu1, delta_prime) -> max ratio
    constant_by_jmax: dict  # j_max -> max ratio over j <= j_max


def _envelope_pair(mu1: float, dp: float, j_max: int, j_caps: Sequence[int]) -> tuple[float, int, dict]:
    y = mu1 - dp
    D = kl_bernoulli(y, mu1)
    js = np.arange(bounds.small_j_count(dp), j_max + 1)
    excess = np.array([inverse_p_excess(int(j), mu1, y) for j in js])
    ratio = excess / bounds.three_term(js, dp, D)
    k = int(np.argmax(ratio))
    caps = {c: float(ratio[js <= c].max()) for c in j_caps}
    return float(ratio[k]), int(js[k]), caps


def lemma4_envelope(
    mu1_grid: Sequence[float] = ENVELOPE_MU1,
    dp_grid: Sequence[float] = ENVELOPE_DELTA_PRIME,
    j_max: int = 10_000,
    j_caps: Sequence[int] = (1_000, 10_000),
    workers: int = 8,
) -> EnvelopeResult:
    """max over the grid of (E[1/p] - 1) / three_term(j) for 8/Delta' <= j <= j_max."""
    caps = [c for c in j_caps if c <= j_max]
    pairs = [(mu1, dp) for mu1 in mu1_grid for dp in dp_grid]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda p: _envelope_pair(p[0], p[1], j_max, caps), pairs))
    per_pair = {p: r[0] for p, r in zip(pairs, results)}
    k = max(range(len(pairs)), key=lambda i: results[i][0])
    where = {"mu1": pairs[k][0], "delta_prime": pairs[k][1], "j": results[k][1]}
    by_cap = {c: max(r[2][c] for r in results) for c in caps}
    return EnvelopeResult(results[k][0], where, per_pair, by_cap)


def _floor_snap(v: float) -> int:
    r = round(v)
    return int(r) if abs(v - r) < 1e-9 else math.floor(v)


def _ceil_snap(v: float) -> int:
    r = round(v)
    return int(r) if abs(v - r) < 1e-9 else math.ceil(v)


@dataclass
class PartialSums:
    j: int
    mu1: float
    y: float
    low: float  # s in [0, floor(yj) - 1]
    single: float  # s = floor(yj)
    middle: float  # s in [floor(yj) + 1, ceil(m) - 1], m = mu1 j - Delta' j / 2
    high: float  # s in [ceil(m), j]
    total: float
    ranges: dict

    @property
    def parts_sum(self) -> float:
        return math.fsum([self.low, self.single, self.middle, self.high])

    @property
    def delta_prime(self) -> float:
        return self.mu1 - self.y

    @property
    def D(self) -> float:
        return kl_bernoulli(self.y, self.mu1)

    def single_bound(self) -> float:
        return 3.0 * math.exp(-self.D * self.j)

    def high_bound(self) -> float:
        return 1.0 + 1.0 / math.expm1(self.delta_prime ** 2 * self.j / 4.0)

    def low_shape(self) -> float:
        """e^{-Dj} / ((j+1) Delta'^2) + e^{-2 Delta'^2 j}: the Theta-form for ``low``."""
        dp2 = self.delta_prime ** 2
        return math.exp(-self.D * self.j) / ((self.j + 1) * dp2) + math.exp(-2.0 * dp2 * self.j)

    def middle_shape(self) -> float:
        return math.exp(-self.delta_prime ** 2 * self.j / 2.0)


def partial_sums(j: int, mu1: float, y: float) -> PartialSums:
    """Split E[1/p] into the four index blocks used for the large-j estimate.

    When y*j is an integer the singleton s = yj belongs to ``single`` only, and
    when m = (mu1 + y) j / 2 is an integer s = m belongs to ``high``. Empty
    blocks sum to zero.
    """
    dp = mu1 - y
    if dp <= 0:
        raise ValueError(f"need y < mu1, got y={y}, mu1={mu1}")
    if not _large_j(j, dp):
        raise ValueError(f"partial sums are defined for j >= 8/Delta' = {8 / dp:g}, got j={j}")
    _check_jy(j, mu1, y)
    terms, excess = _inverse_p_kernel(int(j), float(mu1), float(y))
    fy = _floor_snap(y * j)
    m_ceil = _ceil_snap((mu1 + y) * j / 2.0)

    def block(lo: int, hi: int) -> float:
        lo, hi = max(lo, 0), min(hi, j)
        return math.fsum(terms[lo: hi + 1].tolist()) if hi >= lo else 0.0

    # The high block sits within rounding of 1; carry it as P(S >= m) plus the
    # excess terms f (1 - F) / F so the comparison with its bound stays exact.
    lo = max(m_ceil, 0)
    high = (1.0 - numerics.binomial_cdf(j, mu1, lo - 1)) + math.fsum(excess[lo:].tolist()) if lo <= j else 0.0
    ranges = {"low": (0, fy - 1), "single": (fy, fy), "middle": (fy + 1, m_ceil - 1), "high": (m_ceil, j)}
    return PartialSums(
        j, mu1, y,
        block(*ranges["low"]), block(*ranges["single"]), block(*ranges["middle"]), high,
        1.0 + math.fsum(excess.tolist()), ranges,
    )


def inverse_p_sum_ratio(mu1: float, mu_i: float, T: int) -> float:
    """sum_{j<T} (E[1/p] - 1) divided by ln T / Delta'^2, using the Delta/3 thresholds."""
    tp = bounds.thm2_thresholds(mu_i, mu1)
    total = math.fsum(inverse_p_excess(j, mu1, tp.y) for j in range(T))
    return total / (math.log(T) / tp.delta_prime ** 2)


# ---------------------------------------------------------------------------
# Jerabek estimate
# ---------------------------------------------------------------------------


@dataclass
class JerabekSummary:
    min_ratio: float
    max_ratio: float
    worst_low: dict
    worst_high: dict
    n_points: int
    s0_max_deviation: float
    trend: dict  # y -> (min, max) of the ratio at s = floor(n*y/2) over n


def jerabek_ratio_study(ns: Iterable[int] = range(10, 1001), ys: Iterable[float] = tuple(np.round(np.arange(0.1, 0.91, 0.1), 10))) -> JerabekSummary:
    """exact F_{n,y}(s) / estimate over every low-regime s of the grid."""
    lo, hi = math.inf, -math.inf
    worst_lo: dict = {}
    worst_hi: dict = {}
    count = 0
    s0_dev = 0.0
    ys = list(ys)
    trend = {y: [math.inf, -math.inf] for y in ys}
    for n in ns:
        for y in ys:
            s_max = math.floor(y * n - math.sqrt(n * y * (1.0 - y)))
            if s_max < 0:
                continue
            s = np.arange(s_max + 1)
            log_exact = numerics.log_binomial_cdf_table(n, y)[: s_max + 1]
            ratio = np.exp(log_exact - numerics.log_jerabek_estimate(n, y, s))
            count += ratio.size
            k_lo, k_hi = int(np.argmin(ratio)), int(np.argmax(ratio))
            if ratio[k_lo] < lo:
                lo = float(ratio[k_lo])
                worst_lo = {"n": n, "y": float(y), "s": k_lo}
            if ratio[k_hi] > hi:
                hi = float(ratio[k_hi])
                worst_hi = {"n": n, "y": float(y), "s": k_hi}
            s0_dev = max(s0_dev, abs(float(ratio[0]) - 1.0))
            s_half = math.floor(n * y / 2.0)
            if s_half <= s_max:
                r = float(ratio[s_half])
                trend[y][0] = min(trend[y][0], r)
                trend[y][1] = max(trend[y][1], r)
    return JerabekSummary(lo, hi, worst_lo, worst_hi, count, s0_dev, {y: tuple(v) for y, v in trend.items()})


# ---------------------------------------------------------------------------
# simulation logs
# ---------------------------------------------------------------------------


def verify_lemma23_from_logs(
    agg: AggregateResult, thresholds: dict[int, ThresholdPair], T: int, n_se: float = 3.0
) -> list[VerificationReport]:
    """Mean event tallies against 1/d(x, mu_i) + 1 and L_i(T) + 1, with ``n_se`` standard errors of slack."""
    if agg.mean_not_mu is None:
        raise ValueError("event tracking was not enabled for this experiment")
    out = []
    for i, tp in sorted(thresholds.items()):
        d = kl_bernoulli(tp.x, tp.mu_i)
        rhs2 = (1.0 / d if d > 0 else math.inf) + 1.0
        out.append(VerificationReport(
            "lemma2", {"arm": i, "x": tp.x, "mu_i": tp.mu_i, "T": T, "runs": agg.num_runs},
            float(agg.mean_not_mu[i]), rhs2 + n_se * float(agg.se_not_mu[i]), 0.0,
            {"se": float(agg.se_not_mu[i]), "bound": rhs2},
        ))
        rhs3 = tp.L(T) + 1.0
        out.append(VerificationReport(
            "lemma3", {"arm": i, "x": tp.x, "y": tp.y, "T": T, "runs": agg.num_runs},
            float(agg.mean_mu_not_theta[i]), rhs3 + n_se * float(agg.se_mu_not_theta[i]), 0.0,
            {"se": float(agg.se_mu_not_theta[i]), "bound": rhs3},
        ))
    return out


# ---------------------------------------------------------------------------
# Beta-Binomial identity, Pinsker
# ---------------------------------------------------------------------------


def beta_cdf_by_quadrature(alphas: np.ndarray, betas: np.ndarray, y: float, nodes: int = 128) -> np.ndarray:
    """Gauss-Legendre quadrature of the Beta pdf over [0, y] for every (alpha, beta) pair.

    With ``nodes`` points the rule is exact for polynomials of degree
    ``2*nodes - 1``; integer-parameter pdfs are polynomials of degree alpha+beta-2.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    v = 0.5 * y * (x + 1.0)
    w = 0.5 * y * w
    a = np.asarray(alphas, dtype=float)[..., None]
    b = np.asarray(betas, dtype=float)[..., None]
    logpdf = gammaln(a + b) - gammaln(a) - gammaln(b) + (a - 1.0) * np.log(v) + (b - 1.0) * np.log1p(-v)
    return np.sum(w * np.exp(logpdf), axis=-1)


def verify_fact3(max_param: int = 100, ys: Sequence[float] = tuple(np.round(np.arange(0.05, 0.951, 0.05), 10)),
                 tol: float = 1e-10) -> VerificationReport:
    """max |beta_cdf - quadrature| over alpha, beta in 1..max_param and the y grid."""
    params = np.arange(1, max_param + 1)
    A, B = np.meshgrid(params, params, indexing="ij")
    worst = 0.0
    where: dict = {}
    for y in ys:
        quad = beta_cdf_by_quadrature(A, B, float(y))
        for a in params:
            for b in params:
                err = abs(numerics.beta_cdf(int(a), int(b), float(y)) - quad[a - 1, b - 1])
                if err > worst:
                    worst = err
                    where = {"alpha": int(a), "beta": int(b), "y": float(y)}
    return VerificationReport("fact3", {"max_param": max_param, "n_y": len(ys), "worst_at": where},
                              worst, tol, 0.0, {"oracle": "Gauss-Legendre, 128 nodes"})


def pinsker_check(n_grid: int = 199) -> dict:
    """Minimum of d(a,b) - c (a-b)^2 over a grid for c = 1/2 and c = 2."""
    pts = np.linspace(0.0, 1.0, n_grid + 2)[1:-1]
    min_half = math.inf
    min_two = math.inf
    for a in pts:
        for b in pts:
            d = kl_bernoulli(float(a), float(b))
            min_half = min(min_half, d - 0.5 * (a - b) ** 2)
            min_two = min(min_two, d - 2.0 * (a - b) ** 2)
    return {"min_margin_half": min_half, "min_margin_two": min_two,
            "holds_half": min_half >= -1e-15, "holds_two": min_two >= -1e-15}


# ---------------------------------------------------------------------------
# threshold solvers
# ---------------------------------------------------------------------------


def random_threshold_triples(n: int, seed: int = 0) -> list[tuple[float, float, float]]:
    """(mu_i, mu_1, eps) with 0.01 <= mu_i < mu_1 <= 0.99 and eps in (0, 1]."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, b = np.sort(rng.uniform(0.01, 0.99, size=2))
        if b - a < 1e-3:
            continue
        out.append((float(a), float(b), float(rng.uniform(0.01, 1.0))))
    return out


def threshold_residuals(mu_i: float, mu_1: float, eps: float) -> VerificationReport:
    """Relative residuals of the two defining equations plus the strict ordering."""
    tp = numerics.thm1_thresholds(mu_i, mu_1, eps)
    d_target = kl_bernoulli(mu_i, mu_1)
    r1 = abs(kl_bernoulli(tp.x, mu_1) * (1.0 + eps) - d_target) / d_target
    d_x1 = kl_bernoulli(tp.x, mu_1)
    r2 = abs(kl_bernoulli(tp.x, tp.y) * (1.0 + eps) - d_x1) / d_x1
    ordered = mu_i < tp.x < tp.y < mu_1
    return VerificationReport(
        "thresholds", {"mu_i": mu_i, "mu_1": mu_1, "eps": eps, "x": tp.x, "y": tp.y, "ordered": ordered},
        max(r1, r2) if ordered else math.inf, numerics.RESIDUAL_RTOL, 0.0, {"solver": "bisection"},
    )


# ---------------------------------------------------------------------------
# full battery
# ---------------------------------------------------------------------------


@dataclass
class CheckBattery:
    reports: dict  # check name -> list[VerificationReport]
    measured: dict

    @property
    def failures(self) -> int:
        return sum(not r.passed for rs in self.reports.values() for r in rs)


def _partial_sum_reports(mu1: float, dp: float, j: int) -> list[VerificationReport]:
    y = mu1 - dp
    ps = partial_sums(j, mu1, y)
    inputs = {"j": j, "mu1": mu1, "y": y}
    rel = abs(ps.parts_sum - ps.total) / ps.total
    return [
        VerificationReport("partition", inputs, rel, 1e-10, 0.0, {"ranges": ps.ranges}),
        VerificationReport("single_block", inputs, ps.single, ps.single_bound(), 0.0, {"bound": "3 exp(-D j)"}),
        VerificationReport("high_block", inputs, ps.high, ps.high_bound(), 0.0,
                           {"bound": "1 + 1/(exp(Delta'^2 j / 4) - 1)"}),
    ]


def run_all_checks(
    seed: int = 0, j_max: Optional[int] = None, theta_constant: float = bounds.MEASURED_THETA_CONSTANT,
    workers: int = 1, quick: bool = False,
) -> CheckBattery:
    """Every grid check with its default grid (``quick`` shrinks the grids)."""
    if j_max is None:
        j_max = 1_000 if quick else 10_000
    reports: dict = {}
    measured: dict = {}
    reports["fact3"] = [verify_fact3(max_param=30 if quick else 100)]
    reports["thresholds"] = [threshold_residuals(*t) for t in random_threshold_triples(100 if quick else 1000, seed)]
    reports["lemma1"] = [verify_lemma1(p) for p in random_profiles(10 if quick else 50, seed)]

    small = []
    for mu1 in ENVELOPE_MU1:
        for dp in ENVELOPE_DELTA_PRIME:
            for j in range(bounds.small_j_count(dp)):
                small.append(lemma4_check(j, mu1, mu1 - dp))
    reports["lemma4_small_j"] = small

    env = lemma4_envelope(j_max=j_max, j_caps=(min(1_000, j_max), j_max), workers=workers)
    large = [
        VerificationReport("lemma4_large_j", {"mu1": mu1, "delta_prime": dp, "j_max": j_max}, ratio,
                           theta_constant, 0.0, {"quantity": "max_j (E[1/p] - 1) / three_term(j)"})
        for (mu1, dp), ratio in env.per_pair.items()
    ]
    caps = sorted(env.constant_by_jmax.items())
    stability = max(caps[-1][1] / caps[0][1], caps[0][1] / caps[-1][1])
    large.append(VerificationReport("envelope_stability", {"caps": [c for c, _ in caps]}, stability, 2.0, 0.0,
                                    {"quantity": "ratio of envelope maxima between the j caps"}))
    reports["lemma4_large_j"] = large
    measured["envelope_constant"] = env.constant
    measured["envelope_argmax"] = env.argmax
    measured["envelope_by_jmax"] = {str(c): v for c, v in caps}

    parts = []
    for mu1 in ENVELOPE_MU1:
        for dp in ENVELOPE_DELTA_PRIME:
            j0 = bounds.small_j_count(dp)
            for j in sorted({j0, 2 * j0, min(1_000, j_max), j_max}):
                if j >= j0:
                    parts.extend(_partial_sum_reports(mu1, dp, j))
    reports["partial_sums"] = parts

    jer = jerabek_ratio_study(ns=range(10, 301 if quick else 1001))
    reports["jerabek"] = [
        VerificationReport("jerabek_min", {"worst": jer.worst_low}, 0.1, jer.min_ratio, 0.0,
                           {"points": jer.n_points}),
        VerificationReport("jerabek_max", {"worst": jer.worst_high}, jer.max_ratio, 10.0, 0.0,
                           {"points": jer.n_points}),
    ]
    measured["jerabek_ratio_range"] = [jer.min_ratio, jer.max_ratio]

    pin = pinsker_check(49 if quick else 199)
    reports["pinsker"] = [
        VerificationReport("pinsker_two", {"c": 2.0}, 0.0, pin["min_margin_two"], 1e-15, {}),
        VerificationReport("pinsker_half", {"c": 0.5}, 0.0, pin["min_margin_half"], 1e-15, {}),
    ]
    return CheckBattery(reports, measured)
