import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wafassoc.af import (
    WeightScheme,
    WeightVector,
    af_statistic,
    partial_sums,
    r_values,
    read_weight_file,
)
from wafassoc.errors import DomainError, ParseError, ValidationError
from tests.oracles import brute_partial_sums


class TestRValues:
    def test_zero(self):
        assert r_values([0.0, 0.0]).tolist() == [0.0, 0.0]

    def test_five_percent(self):
        assert r_values([1.959964])[0] == pytest.approx(2.9957323096962954745, rel=1e-13)

    def test_sign_invariant(self):
        # mpmath: -log erfc(3 / sqrt 2)
        assert r_values([-3.0])[0] == pytest.approx(5.91457904095040423, rel=1e-13)
        assert r_values([-3.0])[0] == r_values([3.0])[0]

    def test_nonfinite(self):
        with pytest.raises(DomainError):
            r_values([np.nan])


class TestPartialSums:
    def test_flat(self):
        p = partial_sums([1.0, 3.0, 2.0], WeightVector.flat(3))
        assert p.S_star.tolist() == [3.0, 5.0, 6.0]
        assert p.sort_order.tolist() == [1, 2, 0]

    def test_weighted(self):
        p = partial_sums([1.0, 3.0, 2.0], WeightVector([2.0, 1.0, 1.0]))
        assert p.S_star.tolist() == [3.0, 5.0, 7.0]

    def test_single(self):
        assert partial_sums([5.0], [1.0]).S_star.tolist() == [5.0]

    def test_tie_order_is_by_index(self):
        p = partial_sums([2.0, 2.0, 1.0, 2.0], np.ones(4))
        assert p.sort_order.tolist() == [0, 1, 3, 2]

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            partial_sums([1.0, 2.0], np.ones(3))

    @given(arrays(np.float64, st.integers(1, 30), elements=st.floats(0, 50)),
           st.integers(0, 2**31))
    @settings(max_examples=60, deadline=None)
    def test_path_properties(self, R, seed):
        w = np.random.default_rng(seed).uniform(0, 1, R.shape[0])
        S = partial_sums(R, w).S_star
        assert np.all(np.diff(S) >= -1e-12)  # non-negative increments
        increments = np.diff(np.concatenate([[0.0], S]))
        assert np.all(np.diff(increments) <= 1e-12)  # concave
        assert S[-1] == pytest.approx((R * w).sum(), rel=1e-12, abs=1e-12)
        np.testing.assert_allclose(S, brute_partial_sums(R, w), rtol=1e-12, atol=1e-12)


class TestAfStatistic:
    def test_minimum(self):
        assert af_statistic([0.5, 0.2, 0.9]) == 0.2

    def test_all_ones(self):
        assert af_statistic([1.0, 1.0]) == 1.0

    def test_empty(self):
        with pytest.raises(DomainError):
            af_statistic([])

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            af_statistic([0.0, 0.5])


class TestWeights:
    def test_from_maf(self):
        w = WeightVector.from_maf([0.5, 0.1])
        np.testing.assert_allclose(w.w, [0.5, 0.3])
        assert w.scheme is WeightScheme.MAF_SD

    def test_normalized_scale_free(self):
        w = WeightVector([0.2, 0.4, 0.1])
        assert np.array_equal(w.normalized().w, WeightVector(2 * w.w).normalized().w)
        assert w.normalized().w.max() == 1.0

    @pytest.mark.parametrize("bad", [[], [-1.0, 1.0], [0.0, 0.0], [np.inf]])
    def test_invalid(self, bad):
        with pytest.raises(ValidationError):
            WeightVector(bad)

    def test_read_file(self, tmp_path):
        f = tmp_path / "w.txt"
        f.write_text("# weights\n0.5\n\n1.5  # second\n")
        assert read_weight_file(f, 2).w.tolist() == [0.5, 1.5]

    def test_read_file_wrong_count(self, tmp_path):
        f = tmp_path / "w.txt"
        f.write_text("1\n")
        with pytest.raises(ParseError):
            read_weight_file(f, 2)

    def test_read_file_bad_token(self, tmp_path):
        f = tmp_path / "w.txt"
        f.write_text("1\nabc\n")
        with pytest.raises(ParseError) as exc:
            read_weight_file(f)
        assert exc.value.line == 2
