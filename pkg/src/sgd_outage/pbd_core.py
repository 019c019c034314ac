"""Exact Poisson binomial computations.

S_N is the number of successes (gateways in outage) among N independent
Bernoulli trials with probabilities ``p[0..N-1]``.  Every tail function here
returns ``P(S_N >= L)`` for a threshold ``0 <= L <= N + 1``; the four tail
routes are interchangeable and cross-checked against each other in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InternalConsistencyError, SizeLimitError

#: Largest N accepted by the subset-enumeration routines.
MAX_ENUMERATION_N = 25

#: Operand length at or below which ``pmf_fft`` convolves directly.
FFT_CUTOFF = 64

#: Tolerated imaginary residue of the closed-form DFT expression.
CFE_IMAG_TOL = 1e-9

#: Negative PMF entries above this are treated as round-off.
NEGATIVE_MASS_TOL = 1e-12

OutageVector = np.ndarray
PbdPmf = np.ndarray


@dataclass(frozen=True)
class PbdMoments:
    mean: float
    variance: float
    std_dev: float
    third_central: float


def as_outage_vector(p: Sequence[float] | np.ndarray) -> OutageVector:
    """Validate ``p`` and return it as a read-only float64 array."""
    arr = np.array(p, dtype=np.float64, ndmin=1)
    if arr.ndim != 1:
        raise ValueError(f"outage probabilities must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("at least one gateway is required")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("outage probabilities must lie in [0, 1]")
    arr.setflags(write=False)
    return arr


def check_threshold(threshold: int, n: int) -> int:
    if isinstance(threshold, (bool, np.bool_)) or not isinstance(threshold, (int, np.integer)):
        raise TypeError(f"threshold must be an integer, got {threshold!r}")
    threshold = int(threshold)
    if not 0 <= threshold <= n + 1:
        raise ValueError(f"threshold L={threshold} outside [0, {n + 1}]")
    return threshold


def check_pmf(mass: Sequence[float] | np.ndarray, atol: float = 1e-12) -> PbdPmf:
    """Validate a probability mass sequence indexed ``m = 0..N``."""
    arr = np.asarray(mass, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("a PMF needs N + 1 >= 2 entries")
    if np.any(arr < 0.0):
        raise ValueError("PMF has negative mass")
    total = math.fsum(arr)
    if abs(total - 1.0) > atol:
        raise ValueError(f"PMF sums to {total!r}, not 1")
    return arr


def moments(p: Sequence[float]) -> PbdMoments:
    """Mean, variance, standard deviation and third central moment of S_N."""
    p = as_outage_vector(p)
    q = 1.0 - p
    mean = math.fsum(p)
    variance = math.fsum(p * q)
    third = math.fsum(p * q * (1.0 - 2.0 * p))
    return PbdMoments(mean=mean, variance=variance, std_dev=math.sqrt(variance), third_central=third)


def tail_direct(p: Sequence[float], threshold: int) -> float:
    """Sum the probability of every outage pattern with at least ``threshold`` outages.

    Cost is O(2^N N), so N is capped at ``MAX_ENUMERATION_N``.
    """
    p = as_outage_vector(p)
    n = p.size
    if n > MAX_ENUMERATION_N:
        raise SizeLimitError(f"direct enumeration supports N <= {MAX_ENUMERATION_N}, got {n}")
    threshold = check_threshold(threshold, n)
    if threshold == 0:
        return 1.0
    if threshold == n + 1:
        return 0.0

    q = 1.0 - p
    shifts = np.arange(n, dtype=np.int64)
    chunk = 1 << min(n, 16)
    partial = []
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, start + chunk, dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        keep = bits.sum(axis=1) >= threshold
        if not keep.any():
            continue
        probs = np.where(bits[keep], p, q).prod(axis=1)
        partial.append(float(probs.sum()))
    return min(max(math.fsum(partial), 0.0), 1.0)


def tail_cfe(p: Sequence[float], threshold: int) -> float:
    """Closed-form DFT expression for the tail, Theta(N^2).

    With ``c = exp(2 pi j / (N + 1))``::

        P(S >= L) = 1 - (L + sum_n (1 - c^{-nL}) / (1 - c^{-n}) prod_m (1 + (c^n - 1) p_m)) / (N + 1)

    The complex sum is real up to round-off; a residue above ``CFE_IMAG_TOL``
    raises ``InternalConsistencyError``.
    """
    p = as_outage_vector(p)
    n = p.size
    threshold = check_threshold(threshold, n)
    if threshold == 0:
        return 1.0
    if threshold == n + 1:
        return 0.0

    size = n + 1
    k = np.arange(1, n + 1, dtype=np.int64)
    step = 2.0 * np.pi / size
    c_k = np.exp(1j * step * k)
    # reduce n*L mod (N+1) so the phase stays exact for large N
    numer = 1.0 - np.exp(-1j * step * ((k * threshold) % size))
    denom = 1.0 - np.exp(-1j * step * k)
    ratio = numer / denom

    rows = max(1, (1 << 20) // n)
    total = complex(threshold)
    for lo in range(0, n, rows):
        hi = min(n, lo + rows)
        factors = 1.0 + np.multiply.outer(c_k[lo:hi] - 1.0, p)
        total += np.dot(ratio[lo:hi], factors.prod(axis=1))

    value = total / size
    if abs(value.imag) > CFE_IMAG_TOL:
        raise InternalConsistencyError(f"closed-form tail has imaginary residue {value.imag:.3e}")
    return min(max(1.0 - float(value.real), 0.0), 1.0)


def _recursive_tail(p: np.ndarray, threshold: int) -> tuple[float, int]:
    # Rolling accumulator over P(S_i >= j); alpha[j] holds the 1-based alpha_{j+1}.
    n = len(p)
    span = n - threshold
    size = threshold + 1
    alpha = [0.0] * size
    alpha[0] = 1.0
    low = 1
    updates = 0
    for i in range(1, n + 1):
        pi = p[i - 1]
        qi = 1.0 - pi
        high = i
        if i > span + 1:
            low = i - span
        if i > threshold:
            high = threshold
        # descending j so alpha[j - 1] still holds the previous row
        for j in range(high, low - 1, -1):
            alpha[j] = qi * alpha[j] + pi * alpha[j - 1]
        if high >= low:
            updates += high - low + 1
    return alpha[size - 1], updates


def tail_recursive(p: Sequence[float], threshold: int) -> float:
    """Two-term recursion in (L, N), Theta(L (N - L + 1)) updates.

    ``P(L, N) = (1 - p_N) P(L, N-1) + p_N P(L-1, N-1)`` with ``P(0, N) = 1`` and
    ``P(N+1, N) = 0``, evaluated in place over a length ``L + 1`` buffer.
    """
    arr = as_outage_vector(p)
    threshold = check_threshold(threshold, arr.size)
    value, _ = _recursive_tail(arr.tolist(), threshold)
    return min(max(value, 0.0), 1.0)


def recursive_update_count(p: Sequence[float], threshold: int) -> int:
    """Number of inner-loop updates ``tail_recursive`` performs for this query."""
    arr = as_outage_vector(p)
    threshold = check_threshold(threshold, arr.size)
    return _recursive_tail(arr.tolist(), threshold)[1]


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if max(a.size, b.size) <= FFT_CUTOFF:
        return np.convolve(a, b)
    out_len = a.size + b.size - 1
    nfft = 1 << (out_len - 1).bit_length()
    return np.fft.irfft(np.fft.rfft(a, nfft) * np.fft.rfft(b, nfft), nfft)[:out_len]


def _product_tree(p: np.ndarray, lo: int, hi: int) -> np.ndarray:
    if hi - lo == 1:
        return np.array([1.0 - p[lo], p[lo]])
    mid = (lo + hi) // 2
    return _convolve(_product_tree(p, lo, mid), _product_tree(p, mid, hi))


def pmf_fft(p: Sequence[float]) -> PbdPmf:
    """Full PMF of S_N as the convolution of the pairs ``[1 - p_n, p_n]``.

    The pairs are multiplied along a balanced binary tree; products whose
    operands are longer than ``FFT_CUTOFF`` go through a zero-padded real FFT,
    giving O(N (log N)^2) work overall.
    """
    p = as_outage_vector(p)
    mass = _product_tree(p, 0, p.size)
    worst = mass.min()
    if worst <= -NEGATIVE_MASS_TOL:
        raise InternalConsistencyError(f"PMF entry {worst:.3e} is negative beyond round-off")
    mass = np.where(mass < 0.0, 0.0, mass)
    return mass / math.fsum(mass)


def tail_from_pmf(pmf: Sequence[float] | np.ndarray, threshold: int) -> float:
    """Suffix sum ``sum_{m >= L} pmf[m]``."""
    mass = check_pmf(pmf, atol=1e-9)
    n = mass.size - 1
    threshold = check_threshold(threshold, n)
    if threshold == 0:
        return 1.0
    if threshold == n + 1:
        return 0.0
    return min(max(math.fsum(mass[threshold:]), 0.0), 1.0)


def tail_fft(p: Sequence[float], threshold: int) -> float:
    return tail_from_pmf(pmf_fft(p), threshold)


TAIL_METHODS = {
    "direct": tail_direct,
    "cfe": tail_cfe,
    "recursive": tail_recursive,
    "fft": tail_fft,
}
