"""Approximations and bounds for the Poisson binomial upper tail.

Each approximation returns an :class:`ApproxResult`.  The Chernoff bound and
the refined normal approximation have domains narrower than ``0..N+1``; off
their domain the result is flagged ``applicable=False`` with a NaN value
instead of an extrapolated number.

Total-variation diagnostics compare the exact PMF against the binomial and
Poisson surrogates and pair each distance with its analytic bound (Ehm for
the binomial, Le Cam for the Poisson).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammainc

from .pbd_core import as_outage_vector, check_threshold, moments, pmf_fft

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

#: Exact integer binomial coefficients up to this N, log-space above.
EXACT_BINOMIAL_MAX_N = 50

#: Cumulative mass at which the Poisson PMF is truncated for TV distances.
POISSON_TRUNCATION = 1.0 - 1e-15


class ApproxMethod(str, enum.Enum):
    BA = "BA"
    PA = "PA"
    NA = "NA"
    RNA = "RNA"
    CB = "CB"


class BoundKind(str, enum.Enum):
    EHM = "Ehm"
    LE_CAM = "LeCam"


@dataclass(frozen=True)
class ApproxResult:
    value: float
    method: ApproxMethod
    applicable: bool = True


@dataclass(frozen=True)
class TvDiagnostics:
    tv_distance: float
    bound: float
    bound_kind: BoundKind


def normal_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def normal_cdf(x: float) -> float:
    # erfc keeps full relative accuracy in the far lower tail
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_sf(x: float) -> float:
    """Standard normal upper tail Q(x) = 1 - Phi(x)."""
    return 0.5 * math.erfc(x / _SQRT2)


def _clamp(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def binomial_pmf(n: int, prob: float) -> np.ndarray:
    """Bin(n, prob) masses for m = 0..n."""
    if prob == 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if prob == 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    m = np.arange(n + 1)
    if n <= EXACT_BINOMIAL_MAX_N:
        coeffs = np.array([math.comb(n, k) for k in range(n + 1)], dtype=np.float64)
        return coeffs * prob**m * (1.0 - prob) ** (n - m)
    log_coeffs = np.array([math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) for k in range(n + 1)])
    return np.exp(log_coeffs + m * math.log(prob) + (n - m) * math.log1p(-prob))


def poisson_pmf(mu: float, upto: int) -> np.ndarray:
    """Pois(mu) masses for m = 0..upto."""
    out = np.zeros(upto + 1)
    if mu == 0.0:
        out[0] = 1.0
        return out
    m = np.arange(upto + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in range(upto + 1)])
    return np.exp(m * math.log(mu) - mu - log_fact)


def poisson_sf(mu: float, threshold: int) -> float:
    """P(Z >= threshold) for Z ~ Pois(mu)."""
    if threshold <= 0:
        return 1.0
    if mu == 0.0:
        return 0.0
    # regularized lower incomplete gamma: P(Z >= k) = P(k, mu)
    return float(gammainc(threshold, mu))


def approx_binomial(p: Sequence[float], threshold: int) -> ApproxResult:
    """Tail of Bin(N, p_bar) with p_bar the average outage probability."""
    p = as_outage_vector(p)
    n = p.size
    threshold = check_threshold(threshold, n)
    p_bar = min(math.fsum(p) / n, 1.0)
    mass = binomial_pmf(n, p_bar)
    # the upper sum equals 1 - lower sum exactly, with less cancellation
    return ApproxResult(_clamp(math.fsum(mass[threshold:])), ApproxMethod.BA)


def approx_poisson(p: Sequence[float], threshold: int) -> ApproxResult:
    """Tail of Pois(mu) with mu = sum(p)."""
    p = as_outage_vector(p)
    threshold = check_threshold(threshold, p.size)
    return ApproxResult(_clamp(poisson_sf(math.fsum(p), threshold)), ApproxMethod.PA)


def _zeta(threshold: int, mean: float, std: float) -> float:
    return (threshold - mean - 0.5) / std


def approx_normal(p: Sequence[float], threshold: int) -> ApproxResult:
    """Continuity-corrected normal tail Q((L - mu - 1/2) / sigma).

    With zero variance S_N is a point mass at mu and the tail is 1 exactly
    when ``L <= mu + 0.5``.
    """
    p = as_outage_vector(p)
    threshold = check_threshold(threshold, p.size)
    mom = moments(p)
    if mom.std_dev == 0.0:
        return ApproxResult(1.0 if threshold <= mom.mean + 0.5 else 0.0, ApproxMethod.NA)
    return ApproxResult(normal_sf(_zeta(threshold, mom.mean, mom.std_dev)), ApproxMethod.NA)


def approx_refined_normal(p: Sequence[float], threshold: int) -> ApproxResult:
    """Normal tail with a one-term skewness correction, clipped to [0, 1].

    ``G(x) = Phi(x) + nu / (6 sigma^3) (1 - x^2) phi(x)`` and the estimate is
    ``1 - G(zeta)``.  Undefined when sigma = 0.
    """
    p = as_outage_vector(p)
    threshold = check_threshold(threshold, p.size)
    mom = moments(p)
    if mom.std_dev == 0.0:
        return ApproxResult(math.nan, ApproxMethod.RNA, applicable=False)
    x = _zeta(threshold, mom.mean, mom.std_dev)
    density = normal_pdf(x)
    correction = 0.0
    if density > 0.0:
        # staged division: sigma**3 underflows for sigma below ~1e-103
        sd = mom.std_dev
        skew = mom.third_central / sd / sd / sd / 6.0
        correction = skew * (1.0 - x * x) * density
    # Q(x) - correction; same as 1 - G(x) without the 1 - Phi cancellation
    estimate = normal_sf(x) - correction
    return ApproxResult(_clamp(estimate), ApproxMethod.RNA)


def chernoff_range(p: Sequence[float]) -> range:
    """Thresholds on which the Chernoff bound is defined: floor(mu)+1 .. N."""
    p = as_outage_vector(p)
    mu = math.fsum(p)
    if mu == 0.0:
        return range(0)
    return range(math.floor(mu) + 1, p.size + 1)


def chernoff_bound(p: Sequence[float], threshold: int) -> ApproxResult:
    """Upper bound ``(mu / L)^L e^(L - mu)`` on the tail, valid for L > mu."""
    p = as_outage_vector(p)
    threshold = check_threshold(threshold, p.size)
    mu = math.fsum(p)
    if threshold not in chernoff_range(p):
        return ApproxResult(math.nan, ApproxMethod.CB, applicable=False)
    log_value = threshold * math.log(mu / threshold) + threshold - mu
    return ApproxResult(_clamp(math.exp(log_value)), ApproxMethod.CB)


APPROXIMATIONS = {
    ApproxMethod.BA: approx_binomial,
    ApproxMethod.PA: approx_poisson,
    ApproxMethod.NA: approx_normal,
    ApproxMethod.RNA: approx_refined_normal,
    ApproxMethod.CB: chernoff_bound,
}


def approximate(method: ApproxMethod | str, p: Sequence[float], threshold: int) -> ApproxResult:
    return APPROXIMATIONS[ApproxMethod(method)](p, threshold)


def _half_l1(a: np.ndarray, b: np.ndarray) -> float:
    size = max(a.size, b.size)
    a = np.pad(a, (0, size - a.size))
    b = np.pad(b, (0, size - b.size))
    return 0.5 * math.fsum(np.abs(a - b))


def tv_binomial(p: Sequence[float]) -> TvDiagnostics | None:
    """d_TV(S_N, Bin(N, p_bar)) with Ehm's bound; None when p_bar is 0 or 1."""
    p = as_outage_vector(p)
    n = p.size
    p_bar = math.fsum(p) / n
    if not 0.0 < p_bar < 1.0:
        return None
    q_bar = 1.0 - p_bar
    mom = moments(p)
    delta = max(0.0, 1.0 - mom.variance / (n * p_bar * q_bar))
    bound = n / (n + 1) * (1.0 - p_bar ** (n + 1) - q_bar ** (n + 1)) * delta
    tv = _half_l1(pmf_fft(p), binomial_pmf(n, p_bar))
    return TvDiagnostics(tv_distance=tv, bound=bound, bound_kind=BoundKind.EHM)


def tv_poisson(p: Sequence[float]) -> TvDiagnostics:
    """d_TV(S_N, Pois(mu)) with Le Cam's bound ``sum p_n^2``.

    The Poisson PMF is truncated at the first M whose cumulative mass reaches
    ``1 - 1e-15`` (and never below N); the mass beyond M is added to the l1
    sum since S_N has none there.
    """
    p = as_outage_vector(p)
    n = p.size
    mu = math.fsum(p)
    bound = math.fsum(p * p)
    exact = pmf_fft(p)
    if mu == 0.0:
        return TvDiagnostics(tv_distance=_half_l1(exact, poisson_pmf(0.0, n)), bound=bound, bound_kind=BoundKind.LE_CAM)
    upto = n
    while 1.0 - poisson_sf(mu, upto + 1) < POISSON_TRUNCATION:
        upto = max(2 * upto, upto + 16)
    pois = poisson_pmf(mu, upto)
    cdf = np.cumsum(pois)
    cut = max(n, int(np.searchsorted(cdf, POISSON_TRUNCATION)))
    cut = min(cut, upto)
    remainder = poisson_sf(mu, cut + 1)
    tv = _half_l1(exact, pois[: cut + 1]) + 0.5 * remainder
    return TvDiagnostics(tv_distance=tv, bound=bound, bound_kind=BoundKind.LE_CAM)


def tv_distance_and_bounds(p: Sequence[float]) -> tuple[TvDiagnostics | None, TvDiagnostics]:
    """Binomial (Ehm) and Poisson (Le Cam) diagnostics for ``p``."""
    return tv_binomial(p), tv_poisson(p)
