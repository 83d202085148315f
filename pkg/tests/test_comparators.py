import math

import numpy as np
import pytest

from wafassoc.comparators import (
    METHOD_TOKENS,
    SPU_POWERS,
    aspu_combine,
    minp_statistic,
    parse_method,
    spu_all,
    spu_power,
    spu_significance,
    spu_statistic,
    ssu_statistic,
)
from wafassoc.errors import ValidationError
from wafassoc.null_model import fit_null
from wafassoc.perm import PermutationPlan, column_rank_pvalues, run_permutations, step6_pvalue
from wafassoc.score import GenotypeMatrix, precompute_kernel
from tests.conftest import random_dataset


class TestTokens:
    def test_case_insensitive(self):
        assert parse_method("SPUINF") == "spuInf"
        assert parse_method(" WAF ") == "waf"

    def test_unknown(self):
        with pytest.raises(ValidationError):
            parse_method("skat")

    def test_powers(self):
        assert spu_power("spu3") == 3
        assert math.isinf(spu_power("spuinf"))
        assert len(METHOD_TOKENS) == 14


class TestStatistics:
    def test_minp(self):
        assert minp_statistic([1.0, -3.0, 2.0]) == 3.0
        assert minp_statistic(np.zeros(4)) == 0.0

    def test_minp_rows(self):
        assert minp_statistic([[1.0, -2.0], [0.5, 0.0]]).tolist() == [2.0, 0.5]

    def test_ssu(self):
        assert ssu_statistic([3.0, 4.0]) == 25.0
        assert ssu_statistic(np.zeros(3)) == 0.0
        assert ssu_statistic(np.ones(50)) == 50.0

    def test_spu2_is_ssu(self):
        assert spu_statistic([3.0, 4.0], np.ones(2), 2) == 25.0

    def test_spu1_cancels(self):
        assert spu_statistic([1.0, -1.0], np.ones(2), 1) == 0.0

    def test_spu_inf_is_minp(self):
        assert spu_statistic([1.0, -3.0, 2.0], np.ones(3), math.inf) == 3.0

    def test_spu_weighted(self):
        assert spu_statistic([1.0, 2.0], [2.0, 0.5], 3) == pytest.approx(9.0)

    def test_spu_all_matches_single(self, rng):
        U = rng.standard_normal((5, 7))
        sd = rng.uniform(0.1, 1, 7)
        allp = spu_all(U, sd)
        assert set(allp) == set(SPU_POWERS)
        for c in SPU_POWERS:
            np.testing.assert_array_equal(allp[c], spu_statistic(U, sd, c))
            if not math.isinf(c):
                np.testing.assert_allclose(allp[c], ((U * sd) ** c).sum(axis=1), rtol=1e-12)

    def test_spu_power_range(self):
        with pytest.raises(ValidationError):
            spu_all(np.ones(3), np.ones(3), (9,))

    def test_significance_orientation(self):
        assert spu_significance(np.array([-4.0]), 3).tolist() == [4.0]
        assert spu_significance(np.array([-4.0]), 2).tolist() == [-4.0]
        assert spu_significance(np.array([4.0]), math.inf).tolist() == [4.0]


class TestAspu:
    def test_single_power_reduces_to_that_spu(self, rng):
        T = rng.standard_normal(101)
        P = column_rank_pvalues(T[:, None])
        assert aspu_combine(P)[1] == step6_pvalue(T, False)

    def test_identical_columns(self, rng):
        T = rng.standard_normal(51)
        P = column_rank_pvalues(np.column_stack([T, T, T]))
        assert aspu_combine(P)[1] == step6_pvalue(T, False)

    def test_bad_shape(self):
        with pytest.raises(ValidationError):
            aspu_combine(np.ones(5))

    def test_k1_equals_minp(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            G, Y, _ = random_dataset(rng, 30, 1, False, False)
            nm = fit_null(Y)
            k = precompute_kernel(GenotypeMatrix(G), nm)
            out = run_permutations(k, nm.residuals, None, ["aspu", "minp"], PermutationPlan.fixed(99),
                                   aspu_powers=(2, math.inf))
            assert out["aspu"].p_value == out["minp"].p_value


def test_ssu_uses_unstandardised_scores(rng):
    G, Y, _ = random_dataset(rng, 40, 4, True, False)
    nm = fit_null(Y)
    k = precompute_kernel(GenotypeMatrix(G), nm)
    out = run_permutations(k, nm.residuals, None, ["ssu"], PermutationPlan.fixed(30))
    U = k.D.T @ nm.residuals
    assert out["ssu"].statistic == pytest.approx(float(U @ U), rel=1e-8)
