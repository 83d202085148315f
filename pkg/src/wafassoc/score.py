"""Score vector, its null variance diagonal and standardised scores.

The kernel stores the genotype residual matrix ``D = G - Ghat`` once per
dataset.  Every score evaluation, observed or permuted, is then a set of
``K`` dot products against a residual vector, and the variance diagonal is
frozen from the observed data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError
from .null_model import CovariateMatrix, NullModel, project_genotypes

__all__ = [
    "GenotypeMatrix",
    "ScoreKernel",
    "ScoreResult",
    "precompute_kernel",
    "score",
    "standardized_scores",
    "snap",
]

# Standardised scores are rounded to a 2**-32 grid.  Permutations that give
# mathematically equal scores then compare equal, instead of being ordered
# by floating-point summation noise.
SNAP_BITS = 32
_DEGENERATE_RTOL = 1e-12


def snap(x: np.ndarray) -> np.ndarray:
    return np.ldexp(np.rint(np.ldexp(x, SNAP_BITS)), -SNAP_BITS) + 0.0


@dataclass(frozen=True)
class GenotypeMatrix:
    """Minor-allele counts, subjects in rows and SNVs in columns.

    Orientation is not checked: a column whose count of "minor" alleles
    exceeds ``n`` simply gets a sample MAF above 0.5.
    """

    counts: np.ndarray
    snv_labels: tuple = ()

    def __post_init__(self):
        g = np.asarray(self.counts)
        if g.ndim == 1:
            g = g[:, None]
        if g.ndim != 2:
            raise ValidationError("genotypes must be a 2-D matrix")
        if g.shape[0] < 2 or g.shape[1] < 1:
            raise ValidationError("need n >= 2 subjects and K >= 1 SNVs")
        if not np.all((g == 0) | (g == 1) | (g == 2)):
            raise ValidationError("genotype entries must be 0, 1 or 2")
        g = np.ascontiguousarray(g, dtype=np.int8)
        g.setflags(write=False)
        labels = tuple(self.snv_labels) or tuple(f"snv{k + 1}" for k in range(g.shape[1]))
        if len(labels) != g.shape[1]:
            raise ValidationError("SNV label count does not match columns")
        object.__setattr__(self, "counts", g)
        object.__setattr__(self, "snv_labels", labels)

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def K(self) -> int:
        return self.counts.shape[1]

    @property
    def allele_counts(self) -> np.ndarray:
        return self.counts.sum(axis=0, dtype=np.int64)

    @property
    def maf(self) -> np.ndarray:
        return self.allele_counts / (2.0 * self.n)


@dataclass(frozen=True)
class ScoreKernel:
    D: np.ndarray  # n x K, Fortran order: one contiguous column per SNV
    V_diag: np.ndarray
    sigma2: float
    excluded: tuple
    active: np.ndarray
    sd: np.ndarray  # sample sd of each residual genotype column
    maf: np.ndarray
    snv_labels: tuple = field(default=())

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @property
    def K(self) -> int:
        return self.D.shape[1]

    @property
    def D_active(self) -> np.ndarray:
        return self.D[:, self.active]

    @property
    def sqrt_V_active(self) -> np.ndarray:
        return np.sqrt(self.V_diag[self.active])


@dataclass(frozen=True)
class ScoreResult:
    U: np.ndarray
    V_diag: np.ndarray
    U_std: np.ndarray  # NaN at excluded columns
    excluded: tuple

    @property
    def U_std_active(self) -> np.ndarray:
        mask = np.ones(self.U.shape[0], dtype=bool)
        mask[list(self.excluded)] = False
        return self.U_std[mask]


def precompute_kernel(G: GenotypeMatrix, nm: NullModel, C: CovariateMatrix | None = None) -> ScoreKernel:
    """Build ``D = G - Ghat`` and ``V_kk = sigma2 * sum_i D_ik^2``.

    ``C`` must be the covariate matrix the null model was fitted with.
    Columns whose residual sum of squares vanishes are excluded.
    """
    if G.n != nm.n:
        raise DimensionError(f"genotypes have {G.n} subjects, null model has {nm.n}")
    if nm.has_covariates and C is None:
        raise DimensionError("null model was fitted with covariates; pass them here too")
    g = G.counts.astype(np.float64)
    D = g - project_genotypes(g, C if nm.has_covariates else None)
    ss = np.einsum("ik,ik->k", D, D)
    scale = np.maximum(np.einsum("ik,ik->k", g, g), 1.0)
    degenerate = ss <= _DEGENERATE_RTOL * scale
    D[:, degenerate] = 0.0
    ss[degenerate] = 0.0
    D = np.asfortranarray(D)
    V = nm.sigma2 * ss
    sd = np.sqrt(ss / (G.n - 1))
    for arr in (D, V, sd):
        arr.setflags(write=False)
    return ScoreKernel(
        D=D,
        V_diag=V,
        sigma2=nm.sigma2,
        excluded=tuple(int(k) for k in np.flatnonzero(degenerate)),
        active=np.flatnonzero(~degenerate),
        sd=sd,
        maf=G.maf,
        snv_labels=G.snv_labels,
    )


def score(kernel: ScoreKernel, e) -> ScoreResult:
    """Score vector ``U = D' e`` and standardised scores for one residual vector."""
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 1 or e.shape[0] != kernel.n:
        raise DimensionError(f"residual vector must have length {kernel.n}")
    U = kernel.D.T @ e
    U_std = np.full(kernel.K, np.nan)
    act = kernel.active
    U_std[act] = snap(U[act] / np.sqrt(kernel.V_diag[act]))
    return ScoreResult(U=U, V_diag=kernel.V_diag, U_std=U_std, excluded=kernel.excluded)


def standardized_scores(kernel: ScoreKernel, E: np.ndarray) -> np.ndarray:
    """Snapped standardised scores of the active columns for each row of ``E``.

    ``E`` is ``(m, n)``, one residual vector per row; returns ``(m, K_active)``.
    """
    U = E @ kernel.D_active
    U /= kernel.sqrt_V_active
    return snap(U)
