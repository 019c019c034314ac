from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgd_outage.pbd_approx import (
    ApproxMethod,
    BoundKind,
    approx_binomial,
    approx_normal,
    approx_poisson,
    approx_refined_normal,
    approximate,
    binomial_pmf,
    chernoff_bound,
    chernoff_range,
    normal_cdf,
    normal_sf,
    poisson_sf,
    tv_binomial,
    tv_distance_and_bounds,
    tv_poisson,
)
from sgd_outage.pbd_core import tail_recursive

probs = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=12)


class TestNormalPrimitives:
    @pytest.mark.parametrize("x", [-8.0, -3.3, -1.0, -0.1, 0.0, 0.1, 0.7, 2.5, 6.0])
    def test_against_mpmath(self, x):
        assert normal_cdf(x) == pytest.approx(float(mpmath.ncdf(x)), abs=1e-15)
        assert normal_sf(x) == pytest.approx(float(mpmath.ncdf(-x)), abs=1e-15)

    def test_half_at_zero(self):
        assert normal_sf(0.0) == 0.5


class TestBinomial:
    def test_symmetric_median(self):
        assert approx_binomial([0.5, 0.5, 0.5], 2).value == pytest.approx(0.5, abs=1e-15)

    def test_two_gateways(self):
        assert approx_binomial([0.02, 0.02], 1).value == pytest.approx(0.0396, abs=1e-15)

    def test_degenerate(self):
        assert approx_binomial([0, 0, 0], 1).value == 0.0
        assert approx_binomial([0, 0, 0], 0).value == 1.0
        assert approx_binomial([1, 1], 2).value == 1.0
        assert approx_binomial([1, 1], 3).value == 0.0

    def test_log_space_matches_exact_coefficients(self):
        mass = binomial_pmf(80, 0.3)
        exact = [float(mpmath.binomial(80, k) * mpmath.mpf(0.3) ** k * mpmath.mpf(0.7) ** (80 - k)) for k in range(81)]
        np.testing.assert_allclose(mass, exact, rtol=1e-11, atol=1e-300)

    @given(st.integers(1, 70), st.floats(0.0, 1.0), st.data())
    def test_exact_on_homogeneous(self, n, prob, data):
        L = data.draw(st.integers(0, n + 1))
        assert abs(approx_binomial([prob] * n, L).value - tail_recursive([prob] * n, L)) <= 1e-10


class TestPoisson:
    def test_zero_mean(self):
        assert approx_poisson([0, 0], 1).value == 0.0

    def test_two_gateways(self):
        assert approx_poisson([0.01, 0.02], 1).value == pytest.approx(0.029554466451491823, abs=1e-15)

    def test_empty_sum(self):
        assert approx_poisson([0.3, 0.9], 0).value == 1.0

    @pytest.mark.parametrize("mu,L", [(0.3, 1), (0.3, 2), (2.5, 4), (12.0, 20)])
    def test_matches_series(self, mu, L):
        m = mpmath.mpf(mu)
        expected = 1 - mpmath.exp(-m) * mpmath.fsum(m**k / mpmath.factorial(k) for k in range(L))
        assert poisson_sf(mu, L) == pytest.approx(float(expected), rel=1e-12)


class TestNormal:
    def test_zeta_zero(self):
        # mu = 1.5, L = 2 gives zeta = 0
        assert approx_normal([0.5, 0.5, 0.5], 2).value == pytest.approx(0.5, abs=1e-15)

    def test_hundred_fair(self):
        assert approx_normal([0.5] * 100, 51).value == pytest.approx(0.460172162722971, abs=1e-14)

    def test_degenerate(self):
        assert approx_normal([1, 1], 3).value == 0.0
        assert approx_normal([1, 1], 2).value == 1.0
        assert approx_normal([0, 0], 1).value == 0.0


class TestRefinedNormal:
    @pytest.mark.parametrize("L", range(0, 8))
    def test_equals_normal_without_skew(self, L):
        p = [0.5] * 6
        assert approx_refined_normal(p, L).value == approx_normal(p, L).value

    def test_correction_vanishes_at_unit_zeta(self):
        # p = [x, 0.1, 0.1, 0.1] with L = 1: zeta = -1 when x - 0.2 = sigma,
        # i.e. 2x^2 - 1.4x - 0.23 = 0; the third moment is non-zero there
        x = (1.4 + math.sqrt(1.4**2 + 8 * 0.23)) / 4
        p = [x, 0.1, 0.1, 0.1]
        res = approx_refined_normal(p, 1)
        assert abs(sum(q * (1 - q) * (1 - 2 * q) for q in p)) > 0.1
        assert res.value == pytest.approx(normal_sf(-1.0), abs=1e-12)

    def test_four_gateways(self):
        p = [0.1, 0.2, 0.3, 0.4]
        res = approx_refined_normal(p, 2)
        assert res.applicable
        assert res.value == pytest.approx(0.25673416573129092, abs=1e-14)
        # exact tail by enumeration is 0.2572
        assert tail_recursive(p, 2) == pytest.approx(0.2572, abs=1e-14)
        assert abs(res.value - 0.2572) < 1e-3

    def test_inapplicable_without_variance(self):
        res = approx_refined_normal([1.0, 0.0], 1)
        assert not res.applicable
        assert math.isnan(res.value)

    @given(probs, st.data())
    def test_clamped(self, p, data):
        L = data.draw(st.integers(0, len(p) + 1))
        res = approx_refined_normal(p, L)
        if res.applicable:
            assert 0.0 <= res.value <= 1.0


class TestChernoff:
    def test_lower_edge(self):
        # mu = 0.03 from p = [0.01, 0.02]; valid L starts at floor(mu) + 1 = 1
        res = chernoff_bound([0.01, 0.02], 1)
        assert res.value == pytest.approx(0.079138333780624576, abs=1e-15)
        assert res.value >= tail_recursive([0.01, 0.02], 1)

    def test_second_threshold(self):
        res = chernoff_bound([0.01, 0.02], 2)
        assert res.value == pytest.approx(0.001613402209877988, abs=1e-15)
        assert res.value >= 0.0002

    def test_inapplicable(self):
        p = [0.9, 0.8, 0.7]  # mu = 2.4
        assert list(chernoff_range(p)) == [3]
        for L in (0, 1, 2):
            assert not chernoff_bound(p, L).applicable
        assert chernoff_bound(p, 3).applicable
        assert not chernoff_bound([0.0, 0.0], 1).applicable

    @settings(max_examples=200)
    @given(probs)
    def test_dominates_exact(self, p):
        for L in chernoff_range(p):
            assert tail_recursive(p, L) <= chernoff_bound(p, L).value + 1e-12


class TestDispatch:
    @pytest.mark.parametrize("method", list(ApproxMethod))
    def test_all_methods_in_unit_interval(self, method):
        rng = np.random.default_rng(3)
        p = rng.random(9)
        for L in range(11):
            res = approximate(method, p, L)
            assert res.method is method
            if res.applicable:
                assert 0.0 <= res.value <= 1.0

    def test_accepts_strings(self):
        assert approximate("PA", [0.1], 1).method is ApproxMethod.PA


class TestTotalVariation:
    def test_equal_probs_have_zero_ehm_distance(self):
        diag = tv_binomial([0.3] * 6)
        assert diag.bound == 0.0
        assert diag.tv_distance <= 1e-12

    def test_zero_probs(self):
        ehm, le_cam = tv_distance_and_bounds([0.0, 0.0])
        assert ehm is None
        assert le_cam.tv_distance == 0.0
        assert le_cam.bound == 0.0
        assert le_cam.bound_kind is BoundKind.LE_CAM

    def test_two_gateways(self):
        le_cam = tv_poisson([0.1, 0.2])
        assert le_cam.bound == pytest.approx(0.05, abs=1e-15)
        assert le_cam.tv_distance == pytest.approx(0.037754533795484640, abs=1e-14)
        ehm = tv_binomial([0.1, 0.2])
        assert ehm.bound_kind is BoundKind.EHM
        assert ehm.tv_distance == pytest.approx(0.005, abs=1e-14)
        assert ehm.bound == pytest.approx(0.005, abs=1e-14)

    @settings(max_examples=150, deadline=None)
    @given(probs)
    def test_bounds_certified(self, p):
        ehm, le_cam = tv_distance_and_bounds(p)
        assert le_cam.tv_distance <= le_cam.bound + 1e-12
        if ehm is not None:
            assert ehm.tv_distance <= ehm.bound + 1e-12

    @settings(max_examples=150, deadline=None)
    @given(probs)
    def test_tail_errors_within_tv(self, p):
        ehm, le_cam = tv_distance_and_bounds(p)
        for L in range(len(p) + 2):
            exact = tail_recursive(p, L)
            assert abs(exact - approx_poisson(p, L).value) <= le_cam.tv_distance + 1e-12
            if ehm is not None:
                assert abs(exact - approx_binomial(p, L).value) <= ehm.tv_distance + 1e-12
