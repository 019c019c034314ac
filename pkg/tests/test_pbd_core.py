from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgd_outage.errors import SizeLimitError
from sgd_outage.pbd_core import (
    MAX_ENUMERATION_N,
    as_outage_vector,
    moments,
    pmf_fft,
    recursive_update_count,
    tail_cfe,
    tail_direct,
    tail_from_pmf,
    tail_recursive,
)

ALL_TAILS = [tail_direct, tail_cfe, tail_recursive, lambda p, L: tail_from_pmf(pmf_fft(p), L)]

probs = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=12)


def binomial_ccdf(n: int, prob: float, threshold: int) -> float:
    # closed form, independent of every routine under test
    return math.fsum(math.comb(n, m) * prob**m * (1 - prob) ** (n - m) for m in range(threshold, n + 1))


def brute_pmf(p):
    out = [0.0] * (len(p) + 1)
    for bits in itertools.product((0, 1), repeat=len(p)):
        w = 1.0
        for b, x in zip(bits, p):
            w *= x if b else 1 - x
        out[sum(bits)] += w
    return out


class TestValidation:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            as_outage_vector([0.5, 1.5])
        with pytest.raises(ValueError):
            as_outage_vector([-0.1])
        with pytest.raises(ValueError):
            as_outage_vector([float("nan")])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            as_outage_vector([])

    @pytest.mark.parametrize("L", [-1, 4])
    def test_rejects_bad_threshold(self, L):
        for tail in ALL_TAILS:
            with pytest.raises(ValueError):
                tail([0.1, 0.2], L)

    def test_rejects_non_integer_threshold(self):
        with pytest.raises(TypeError):
            tail_recursive([0.1, 0.2], 1.0)


class TestMoments:
    def test_symmetric(self):
        m = moments([0.5, 0.5])
        assert m.mean == 1.0
        assert m.variance == 0.5
        assert m.third_central == 0.0

    def test_all_zero(self):
        m = moments([0, 0, 0])
        assert (m.mean, m.variance, m.std_dev, m.third_central) == (0, 0, 0, 0)

    def test_two_gateways(self):
        m = moments([0.1, 0.2])
        assert m.mean == pytest.approx(0.3, abs=1e-15)
        assert m.variance == pytest.approx(0.25, abs=1e-15)
        assert m.std_dev == pytest.approx(0.5, abs=1e-15)
        assert m.third_central == pytest.approx(0.168, abs=1e-15)

    @given(probs)
    def test_ranges(self, p):
        n = len(p)
        m = moments(p)
        assert m.mean >= m.variance - 1e-12
        assert -1e-12 <= m.mean <= n + 1e-12
        assert -1e-12 <= m.variance <= n / 4 + 1e-12
        bound = n / (6 * math.sqrt(3))
        assert -bound - 1e-12 <= m.third_central <= bound + 1e-12

    @given(probs)
    def test_match_pmf(self, p):
        mass = pmf_fft(p)
        k = np.arange(mass.size)
        mean = float(k @ mass)
        var = float(((k - mean) ** 2) @ mass)
        third = float(((k - mean) ** 3) @ mass)
        m = moments(p)
        assert mean == pytest.approx(m.mean, abs=1e-9)
        assert var == pytest.approx(m.variance, abs=1e-9)
        assert third == pytest.approx(m.third_central, abs=1e-9)


class TestTailExamples:
    @pytest.mark.parametrize("tail", ALL_TAILS)
    def test_two_gateways(self, tail):
        assert tail([0.1, 0.2], 1) == pytest.approx(0.28, abs=1e-12)
        assert tail([0.1, 0.2], 2) == pytest.approx(0.02, abs=1e-12)

    @pytest.mark.parametrize("tail", ALL_TAILS)
    @pytest.mark.parametrize("p", [[0.3], [0.1, 0.9, 0.4], [0.0, 1.0, 0.5, 0.25]])
    def test_boundaries_exact(self, tail, p):
        assert tail(p, 0) == 1.0
        assert tail(p, len(p) + 1) == 0.0

    def test_cfe_binomial_case(self):
        assert tail_cfe([0.01] * 8, 3) == pytest.approx(binomial_ccdf(8, 0.01, 3), abs=1e-12)
        assert binomial_ccdf(8, 0.01, 3) == pytest.approx(5.39333211979e-5, rel=1e-10)

    def test_recursive_binomial_case(self):
        assert tail_recursive([0.3] * 10, 5) == pytest.approx(0.1502683326, abs=1e-12)

    def test_recursive_zero_threshold_does_no_work(self):
        assert recursive_update_count([0.2] * 7, 0) == 0

    @pytest.mark.parametrize("n", [1, 2, 5, 9, 16])
    def test_recursive_update_count(self, n):
        p = [0.3] * n
        for L in range(n + 2):
            expected = L * (n - L + 1) if L <= n else 0
            assert recursive_update_count(p, L) == expected

    def test_recursive_reproducible(self):
        rng = np.random.default_rng(5)
        p = rng.random(200)
        assert tail_recursive(p, 77) == tail_recursive(p.copy(), 77)

    def test_direct_size_guard(self):
        with pytest.raises(SizeLimitError):
            tail_direct([0.1] * (MAX_ENUMERATION_N + 1), 3)


class TestPmf:
    def test_binomial_three(self):
        np.testing.assert_allclose(pmf_fft([0.3, 0.3, 0.3]), [0.343, 0.441, 0.189, 0.027], atol=1e-15)

    def test_point_mass(self):
        np.testing.assert_array_equal(pmf_fft([1.0, 1.0]), [0.0, 0.0, 1.0])

    def test_two_gateways(self):
        np.testing.assert_allclose(pmf_fft([0.1, 0.2]), [0.72, 0.26, 0.02], atol=1e-15)

    @pytest.mark.parametrize("n", [1, 7, 63, 64, 65, 200, 513])
    def test_normalized_nonnegative(self, n):
        rng = np.random.default_rng(n)
        mass = pmf_fft(rng.random(n))
        assert mass.size == n + 1
        assert np.all(mass >= 0)
        assert math.fsum(mass) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [3, 10, 14])
    def test_matches_enumeration(self, n):
        rng = np.random.default_rng(100 + n)
        p = rng.random(n)
        np.testing.assert_allclose(pmf_fft(p), brute_pmf(p), atol=1e-12)

    def test_fft_path_matches_sequential(self):
        # N=300 exercises FFT convolutions above the direct-convolution cutoff
        rng = np.random.default_rng(9)
        p = rng.random(300)
        seq = np.array([1.0])
        for x in p:
            seq = np.convolve(seq, [1 - x, x])
        np.testing.assert_allclose(pmf_fft(p), seq, atol=1e-12)

    def test_tail_from_pmf(self):
        assert tail_from_pmf([0.72, 0.26, 0.02], 1) == pytest.approx(0.28, abs=1e-15)
        assert tail_from_pmf([0.343, 0.441, 0.189, 0.027], 4) == 0.0
        assert tail_from_pmf([0.343, 0.441, 0.189, 0.027], 0) == 1.0

    def test_tail_from_pmf_rejects_bad_pmf(self):
        with pytest.raises(ValueError):
            tail_from_pmf([0.5, 0.6], 1)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(probs, st.data())
    def test_cross_method_agreement(self, p, data):
        L = data.draw(st.integers(0, len(p) + 1))
        ref = tail_direct(p, L)
        assert abs(tail_recursive(p, L) - ref) <= 1e-12
        assert abs(tail_cfe(p, L) - ref) <= 1e-9
        assert abs(tail_from_pmf(pmf_fft(p), L) - ref) <= 1e-9

    @given(probs, st.data())
    def test_recursion_identity(self, p, data):
        n = len(p)
        if n < 2:
            return
        L = data.draw(st.integers(1, n))
        head, last = p[:-1], p[-1]
        rhs = (1 - last) * tail_recursive(head, L) + last * tail_recursive(head, L - 1)
        assert tail_recursive(p, L) == pytest.approx(rhs, abs=1e-12)

    @given(probs, st.randoms(use_true_random=False))
    def test_permutation_invariance(self, p, rnd):
        shuffled = list(p)
        rnd.shuffle(shuffled)
        for L in range(len(p) + 2):
            assert tail_recursive(shuffled, L) == pytest.approx(tail_recursive(p, L), abs=1e-12)

    @given(probs)
    def test_monotone_in_threshold(self, p):
        tails = [tail_recursive(p, L) for L in range(len(p) + 2)]
        assert all(a >= b - 1e-15 for a, b in zip(tails, tails[1:]))

    @given(st.integers(1, 40), st.floats(0.0, 1.0), st.data())
    def test_binomial_reduction(self, n, prob, data):
        L = data.draw(st.integers(0, n + 1))
        expected = binomial_ccdf(n, prob, L) if L <= n else 0.0
        assert tail_recursive([prob] * n, L) == pytest.approx(expected, abs=1e-10)
        assert tail_cfe([prob] * n, L) == pytest.approx(expected, abs=1e-10)
