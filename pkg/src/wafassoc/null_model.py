"""Null-model fitting: intercept-only or covariate-adjusted GLM without genotypes.

Four cases are distinguished by trait kind and the presence of covariates.
Each yields residuals ``e = Y - mu_hat`` and the scalar variance factor that
scales the genotype cross-product in the score covariance:

================  ============================================
case              sigma2
================  ============================================
BinaryNoCov       Ybar (1 - Ybar)
ContinuousNoCov   sum (Y - Ybar)^2 / (n - 1)
BinaryCov         sum mu_hat (1 - mu_hat) / n
ContinuousCov     sum (Y - mu_hat)^2 / (n - 1)
================  ============================================
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import DimensionError, FitError, RankDeficiencyError, SeparationError, ValidationError

__all__ = [
    "TraitKind",
    "ModelCase",
    "PhenotypeVector",
    "CovariateMatrix",
    "NullModel",
    "fit_null",
    "project_genotypes",
]

IRLS_GRAD_TOL = 1e-8
IRLS_MAX_ITER = 50
_SEPARATION_ETA = 30.0
# a converged fit with |eta| this large has fitted probabilities within ~1e-8 of 0 or 1
_CONVERGED_ETA = 18.0
_RANK_TOL = 1e-10


class TraitKind(str, enum.Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"


class ModelCase(str, enum.Enum):
    BINARY_NO_COV = "BinaryNoCov"
    CONTINUOUS_NO_COV = "ContinuousNoCov"
    BINARY_COV = "BinaryCov"
    CONTINUOUS_COV = "ContinuousCov"


@dataclass(frozen=True)
class PhenotypeVector:
    values: np.ndarray
    kind: TraitKind

    def __post_init__(self):
        kind = TraitKind(self.kind)
        object.__setattr__(self, "kind", kind)
        y = np.asarray(self.values, dtype=np.float64).ravel()
        if y.size < 2:
            raise ValidationError("phenotype needs at least two subjects")
        if not np.all(np.isfinite(y)):
            raise ValidationError("phenotype contains non-finite values")
        if kind is TraitKind.BINARY:
            if not np.all((y == 0.0) | (y == 1.0)):
                raise ValidationError("binary phenotype values must be 0 or 1")
            if y.min() == y.max():
                raise ValidationError("binary phenotype has a single class")
        elif np.var(y) <= 0.0:
            raise ValidationError("continuous phenotype has zero variance")
        y.setflags(write=False)
        object.__setattr__(self, "values", y)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CovariateMatrix:
    values: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        c = np.asarray(self.values, dtype=np.float64)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.shape[1] < 1:
            raise ValidationError("covariates must be an n x J matrix with J >= 1")
        if not np.all(np.isfinite(c)):
            raise ValidationError("covariates contain non-finite values")
        if c.shape[1] >= c.shape[0]:
            raise ValidationError("need fewer covariates than subjects")
        const = np.all(c == c[0], axis=0)
        if np.any(const):
            raise RankDeficiencyError(f"constant covariate column(s) {np.flatnonzero(const).tolist()}")
        labels = tuple(self.labels) or tuple(f"cov{j + 1}" for j in range(c.shape[1]))
        if len(labels) != c.shape[1]:
            raise ValidationError("covariate label count does not match columns")
        c = np.ascontiguousarray(c)
        c.setflags(write=False)
        object.__setattr__(self, "values", c)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class NullModel:
    residuals: np.ndarray
    fitted_means: np.ndarray
    sigma2: float
    case: ModelCase
    coefficients: np.ndarray = field(default=None)
    iterations: int = 0
    # orthonormal basis of span(1, C); used to project genotypes
    basis: np.ndarray = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.residuals.shape[0]

    @property
    def has_covariates(self) -> bool:
        return self.case in (ModelCase.BINARY_COV, ModelCase.CONTINUOUS_COV)


def _design(C: CovariateMatrix | None, n: int) -> np.ndarray:
    if C is None:
        return np.ones((n, 1))
    if C.n != n:
        raise DimensionError(f"covariates have {C.n} rows, expected {n}")
    return np.column_stack([np.ones(n), C.values])


def _orthonormal_basis(X: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(X)
    d = np.abs(np.diag(r))
    if d.min() <= _RANK_TOL * max(d.max(), 1.0) * np.sqrt(X.shape[0]):
        raise RankDeficiencyError("covariate design (with intercept) is rank deficient")
    return q


def _irls_logistic(y: np.ndarray, X: np.ndarray):
    ybar = y.mean()
    beta = np.zeros(X.shape[1])
    beta[0] = np.log(ybar / (1.0 - ybar))
    polished = False
    for it in range(1, IRLS_MAX_ITER + 1):
        eta = X @ beta
        mu = expit(eta)
        grad = X.T @ (y - mu)
        if np.linalg.norm(grad) <= IRLS_GRAD_TOL:
            if np.max(np.abs(eta)) > _CONVERGED_ETA:
                raise SeparationError("perfect separation: fitted probabilities reached 0 or 1")
            if polished:
                return beta, it - 1
            # quadratic convergence: one more step lands at machine precision
            polished = True
        wts = mu * (1.0 - mu)
        if np.max(np.abs(eta)) > _SEPARATION_ETA or np.min(wts) <= 1e-14:
            raise SeparationError("perfect separation: fitted probabilities reached 0 or 1")
        info = X.T @ (X * wts[:, None])
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError as exc:
            raise SeparationError("singular information matrix during IRLS") from exc
        beta = beta + step
        if not np.all(np.isfinite(beta)):
            raise FitError("IRLS diverged")
    eta = X @ beta
    if np.max(np.abs(eta)) > _SEPARATION_ETA:
        raise SeparationError("perfect separation: IRLS coefficients diverge")
    if polished:
        return beta, IRLS_MAX_ITER
    raise FitError(f"IRLS did not converge in {IRLS_MAX_ITER} iterations")


def fit_null(Y: PhenotypeVector, C: CovariateMatrix | None = None) -> NullModel:
    """Fit the null model and return residuals, fitted means and sigma2."""
    y = Y.values
    n = Y.n
    X = _design(C, n)
    basis = _orthonormal_basis(X)
    binary = Y.kind is TraitKind.BINARY

    if C is None:
        ybar = y.mean()
        mu = np.full(n, ybar)
        resid = y - ybar
        coef = np.array([ybar])
        if binary:
            sigma2 = ybar * (1.0 - ybar)
            case = ModelCase.BINARY_NO_COV
            coef = np.array([np.log(ybar / (1.0 - ybar))])
        else:
            sigma2 = float(resid @ resid) / (n - 1)
            case = ModelCase.CONTINUOUS_NO_COV
        iters = 0
    elif binary:
        coef, iters = _irls_logistic(y, X)
        mu = expit(X @ coef)
        resid = y - mu
        sigma2 = float(np.mean(mu * (1.0 - mu)))
        case = ModelCase.BINARY_COV
    else:
        # OLS through the orthonormal basis of span(1, C)
        mu = basis @ (basis.T @ y)
        resid = y - mu
        coef = np.linalg.lstsq(X, y, rcond=None)[0]
        sigma2 = float(resid @ resid) / (n - 1)
        case = ModelCase.CONTINUOUS_COV
        iters = 0

    if not sigma2 > 0.0:
        raise FitError("null-model variance estimate is zero")
    for arr in (resid, mu, coef, basis):
        arr.setflags(write=False)
    return NullModel(
        residuals=resid,
        fitted_means=mu,
        sigma2=float(sigma2),
        case=case,
        coefficients=coef,
        iterations=iters,
        basis=basis,
    )


def project_genotypes(G, C: CovariateMatrix | None = None) -> np.ndarray:
    """OLS fitted values of each genotype column on ``(1, C)``.

    Without covariates this is the column mean, so ``G - Ghat`` is
    column-centred exactly.
    """
    counts = getattr(G, "counts", G)
    g = np.asarray(counts, dtype=np.float64)
    if g.ndim == 1:
        g = g[:, None]
    n = g.shape[0]
    if C is None:
        return np.broadcast_to(g.mean(axis=0), g.shape).copy()
    basis = _orthonormal_basis(_design(C, n))
    return basis @ (basis.T @ g)
