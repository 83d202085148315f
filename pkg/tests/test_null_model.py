import numpy as np
import pytest

from wafassoc.errors import RankDeficiencyError, SeparationError, ValidationError
from wafassoc.null_model import (
    CovariateMatrix,
    ModelCase,
    PhenotypeVector,
    fit_null,
    project_genotypes,
)
from tests.conftest import random_dataset
from tests.oracles import glm_null_fit


class TestPhenotype:
    def test_binary_requires_both_classes(self):
        with pytest.raises(ValidationError):
            PhenotypeVector([1, 1, 1], "binary")

    def test_binary_values(self):
        with pytest.raises(ValidationError):
            PhenotypeVector([0, 1, 2], "binary")

    def test_continuous_variance(self):
        with pytest.raises(ValidationError):
            PhenotypeVector([3.0, 3.0], "continuous")

    def test_nonfinite(self):
        with pytest.raises(ValidationError):
            PhenotypeVector([0.0, np.nan], "continuous")


class TestCovariates:
    def test_constant_column_rejected(self):
        with pytest.raises(RankDeficiencyError):
            CovariateMatrix(np.column_stack([np.arange(5.0), np.ones(5)]))

    def test_collinear_rejected_at_fit(self):
        x = np.arange(6.0)
        C = CovariateMatrix(np.column_stack([x, 2 * x + 1]))
        with pytest.raises(RankDeficiencyError):
            fit_null(PhenotypeVector([0, 1, 0, 1, 1, 0], "binary"), C)

    def test_too_many_columns(self):
        with pytest.raises(ValidationError):
            CovariateMatrix(np.random.default_rng(0).standard_normal((3, 3)))


class TestFitNull:
    def test_binary_no_cov(self):
        nm = fit_null(PhenotypeVector([0, 1, 0, 1], "binary"))
        assert nm.case is ModelCase.BINARY_NO_COV
        np.testing.assert_array_equal(nm.residuals, [-0.5, 0.5, -0.5, 0.5])
        np.testing.assert_array_equal(nm.fitted_means, [0.5] * 4)
        assert nm.sigma2 == 0.25

    def test_continuous_no_cov(self):
        nm = fit_null(PhenotypeVector([1.0, 2.0, 3.0], "continuous"))
        assert nm.case is ModelCase.CONTINUOUS_NO_COV
        np.testing.assert_array_equal(nm.residuals, [-1.0, 0.0, 1.0])
        assert nm.sigma2 == 1.0

    def test_perfect_separation(self):
        y = np.array([0, 0, 0, 1, 1, 1], dtype=float)
        jitter = np.array([0.01, -0.02, 0.03, -0.01, 0.02, 0.0])
        with pytest.raises(SeparationError, match="separation"):
            fit_null(PhenotypeVector(y, "binary"), CovariateMatrix(y + jitter))

    @pytest.mark.parametrize("binary", [True, False])
    @pytest.mark.parametrize("with_cov", [True, False])
    def test_residuals_centred(self, rng, binary, with_cov):
        for _ in range(10):
            G, Y, C = random_dataset(rng, 60, 2, binary, with_cov)
            nm = fit_null(Y, C)
            assert abs(nm.residuals.sum()) <= 1e-8
            if C is not None:
                assert np.all(np.abs(C.values.T @ nm.residuals) <= 1e-6)

    def test_logistic_matches_statsmodels(self, rng):
        for _ in range(10):
            _, Y, C = random_dataset(rng, 80, 1, True, True)
            nm = fit_null(Y, C)
            _, params = glm_null_fit(Y.values, C.values, True)
            np.testing.assert_allclose(nm.coefficients, params, rtol=1e-8, atol=1e-10)
            assert np.all((nm.fitted_means > 0) & (nm.fitted_means < 1))
            assert nm.sigma2 == pytest.approx(np.mean(nm.fitted_means * (1 - nm.fitted_means)))

    def test_continuous_cov_sigma(self, rng):
        _, Y, C = random_dataset(rng, 50, 1, False, True)
        nm = fit_null(Y, C)
        X = np.column_stack([np.ones(50), C.values])
        beta = np.linalg.solve(X.T @ X, X.T @ Y.values)
        r = Y.values - X @ beta
        np.testing.assert_allclose(nm.residuals, r, atol=1e-12)
        assert nm.sigma2 == pytest.approx(r @ r / 49, rel=1e-12)


class TestProjectGenotypes:
    def test_no_covariates_is_column_mean(self):
        G = np.array([[0, 1], [1, 1], [2, 0]])
        Gh = project_genotypes(G)
        np.testing.assert_array_equal(Gh[:, 0], [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(Gh, np.broadcast_to(G.mean(axis=0), G.shape))

    def test_single_covariate_hand_ols(self):
        # slope = sum dx dy / sum dx^2 = 2 / 5, intercept = 0.5 - 0.4 * 2.5
        Gh = project_genotypes(np.array([[0], [0], [1], [1]]), CovariateMatrix([1.0, 2.0, 3.0, 4.0]))
        np.testing.assert_allclose(Gh[:, 0], [-0.1, 0.3, 0.7, 1.1], atol=1e-12)

    def test_collinear_genotype_fits_exactly(self):
        g = np.array([0, 1, 2, 1, 0, 2])
        Gh = project_genotypes(g[:, None], CovariateMatrix(g.astype(float)))
        assert np.max(np.abs(g - Gh[:, 0])) <= 1e-12
