import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from wafassoc.errors import DomainError
from wafassoc.stat_math import (
    RngStream,
    neg_log_two_sided_p,
    normal_sf_log,
    sample_ar1_matrix,
    sample_ar1_vector,
)

# 50-digit mpmath values of log(erfc(z / sqrt 2) / 2), frozen
MP_LOG_SF = {
    1.959964: -3.6888794902562407839,
    3.0: -6.6077262215103495433,
    8.0: -35.013437159914549896,
    8.0001: -35.014249301654149638,
    12.0: -75.410673001568795939,
    40.0: -804.60844201375378817,
}


class TestNormalSfLog:
    def test_zero(self):
        assert normal_sf_log(0.0) == pytest.approx(math.log(0.5), abs=1e-15)

    @pytest.mark.parametrize("z", [1.959964, 3.0, 8.0])
    def test_matches_high_precision_below_cutoff(self, z):
        assert abs(normal_sf_log(z) - MP_LOG_SF[z]) <= 1e-12

    @pytest.mark.parametrize("z", [8.0001, 12.0, 40.0])
    def test_asymptotic_branch_relative_error(self, z):
        got = normal_sf_log(z)
        assert abs(got - MP_LOG_SF[z]) <= 1e-10 * abs(MP_LOG_SF[z])

    def test_vectorised_shape(self):
        z = np.array([[0.0, 1.0], [9.0, 50.0]])
        out = normal_sf_log(z)
        assert out.shape == (2, 2)
        assert np.all(np.isfinite(out))

    def test_complement_identity(self):
        z = np.linspace(0, 8, 801)
        assert np.max(np.abs(np.exp(normal_sf_log(z)) + ndtr(z) - 1.0)) <= 1e-12

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -1.0])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            normal_sf_log(bad)


class TestNegLogTwoSidedP:
    def test_zero(self):
        assert neg_log_two_sided_p(0.0) == 0.0

    def test_five_percent(self):
        assert neg_log_two_sided_p(1.959964) == pytest.approx(2.9957323096962954745, abs=1e-12)
        assert neg_log_two_sided_p(-1.959964) == neg_log_two_sided_p(1.959964)

    def test_small_z_keeps_relative_precision(self):
        # mpmath: -log(erfc(1e-3 / sqrt 2)) = 7.9820290701986935553e-4
        assert neg_log_two_sided_p(1e-3) == pytest.approx(7.9820290701986935553e-4, rel=1e-13)

    def test_monotone_on_grid(self):
        z = np.linspace(0, 50, 20001)
        r = neg_log_two_sided_p(z)
        assert np.all(np.diff(r) > 0)
        assert np.all(np.isfinite(neg_log_two_sided_p(np.linspace(-50, 50, 2001))))

    def test_even(self):
        z = np.linspace(-50, 50, 1001)
        assert np.array_equal(neg_log_two_sided_p(z), neg_log_two_sided_p(-z))

    def test_nonfinite(self):
        with pytest.raises(DomainError):
            neg_log_two_sided_p(math.inf)


class TestRngStream:
    def test_same_stream_same_numbers(self):
        a = RngStream(7, 3).generator().random(100)
        b = RngStream(7, 3).generator().random(100)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(7, 3).generator().random(100)
        b = RngStream(7, 4).generator().random(100)
        c = RngStream(8, 3).generator().random(100)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_spawn_is_order_independent(self):
        root = RngStream(1)
        later = [root.spawn(i).generator().random() for i in reversed(range(5))][::-1]
        direct = [root.spawn(i).generator().random() for i in range(5)]
        assert later == direct

    def test_vectorised_keys_match_scalar(self):
        s = RngStream(99).spawn(4, 2)
        keys = s.child_counter_keys(np.arange(50))
        assert keys.tolist() == [s.spawn(i).counter_key for i in range(50)]

    def test_streams_uncorrelated(self):
        a = RngStream(5, 1).generator().standard_normal(20000)
        b = RngStream(5, 2).generator().standard_normal(20000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.03

    @given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
    @settings(max_examples=25)
    def test_any_64bit_seed_accepted(self, seed, sid):
        RngStream(seed, sid).generator().random()


class TestAR1:
    def test_single_locus_is_standard_normal(self):
        z = sample_ar1_matrix(100_000, 1, 0.9, RngStream(1))
        assert 0.97 <= z.var() <= 1.03

    def test_independent_when_c_zero(self):
        z = sample_ar1_matrix(100_000, 2, 0.0, RngStream(2))
        assert abs(np.corrcoef(z[:, 0], z[:, 1])[0, 1]) <= 0.02

    def test_lag_one_correlation(self):
        z = sample_ar1_matrix(100_000, 2, 0.9, RngStream(3))
        assert 0.88 <= np.corrcoef(z[:, 0], z[:, 1])[0, 1] <= 0.92

    def test_covariance_matches_ar1(self):
        z = sample_ar1_matrix(100_000, 5, 0.9, RngStream(4))
        k = np.arange(5)
        target = 0.9 ** np.abs(k[:, None] - k[None, :])
        assert np.max(np.abs(np.cov(z, rowvar=False) - target)) <= 0.02

    def test_recursion_explicit(self):
        gen = RngStream(5).generator()
        eps = gen.standard_normal((1, 4))[0]
        z = sample_ar1_vector(4, 0.5, RngStream(5))
        expect = [eps[0]]
        for k in range(1, 4):
            expect.append(0.5 * expect[-1] + math.sqrt(0.75) * eps[k])
        np.testing.assert_allclose(z, expect, rtol=1e-13)

    @pytest.mark.parametrize("c", [-0.1, 1.0, 1.5])
    def test_bad_coefficient(self, c):
        with pytest.raises(DomainError):
            sample_ar1_vector(3, c, RngStream(0))

    def test_deterministic(self):
        a = sample_ar1_vector(10, 0.9, RngStream(11, 2))
        b = sample_ar1_vector(10, 0.9, RngStream(11, 2))
        assert np.array_equal(a, b)
