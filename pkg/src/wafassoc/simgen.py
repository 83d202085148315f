"""Synthetic SNV-set data: AR(1)-correlated genotypes, sparse effects, GLM traits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit, ndtr

from .errors import ValidationError
from .null_model import CovariateMatrix, PhenotypeVector, TraitKind
from .score import GenotypeMatrix
from .stat_math import RngStream, as_generator, sample_ar1_matrix

__all__ = [
    "ScenarioConfig",
    "SimulatedData",
    "n_effects",
    "sample_mafs",
    "sample_genotypes",
    "sample_effects",
    "sample_trait",
    "simulate",
]

MAF_RANGE = (0.001, 0.05)


@dataclass(frozen=True)
class ScenarioConfig:
    K: int = 50
    n: int = 1000
    c: float = 0.9
    maf_log_range: tuple = MAF_RANGE
    pi: float = 0.0
    delta: float = 0.0
    trait: TraitKind = TraitKind.BINARY
    seed: int = 0
    # optional N(0, 1) covariates entering the trait with a fixed coefficient
    n_covariates: int = 0
    covariate_effect: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "trait", TraitKind(self.trait))
        object.__setattr__(self, "maf_log_range", tuple(float(x) for x in self.maf_log_range))
        if self.K < 1 or self.n < 2:
            raise ValidationError("need K >= 1 and n >= 2")
        if not 0.0 <= self.pi <= 1.0:
            raise ValidationError("pi must lie in [0, 1]")
        if self.delta < 0:
            raise ValidationError("delta must be non-negative")
        if not 0.0 <= self.c < 1.0:
            raise ValidationError("c must lie in [0, 1)")
        lo, hi = self.maf_log_range
        if not 0.0 < lo <= hi < 1.0:
            raise ValidationError("MAF range must satisfy 0 < lo <= hi < 1")
        if self.n_covariates < 0:
            raise ValidationError("n_covariates must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trait"] = self.trait.value
        d["maf_log_range"] = list(self.maf_log_range)
        return d

    def with_(self, **changes) -> "ScenarioConfig":
        d = asdict(self)
        d.update(changes)
        return ScenarioConfig(**d)


@dataclass(frozen=True)
class SimulatedData:
    config: ScenarioConfig
    mafs: np.ndarray
    genotypes: GenotypeMatrix
    beta: np.ndarray
    phenotype: PhenotypeVector
    covariates: CovariateMatrix | None


def n_effects(pi: float, K: int) -> int:
    """``round(pi * K)`` with halves rounded up (guarding against 0.02 * 50 = 1.0000000000000002)."""
    return int(math.floor(pi * K + 0.5 + 1e-9))


def sample_mafs(K: int, rng, log_range=MAF_RANGE) -> np.ndarray:
    """MAFs whose logarithms are uniform on ``log(lo)..log(hi)``."""
    if K < 1:
        raise ValidationError("K must be at least 1")
    lo, hi = log_range
    gen = as_generator(rng)
    return np.exp(gen.uniform(math.log(lo), math.log(hi), size=K))


def sample_genotypes(config: ScenarioConfig, mafs, rng) -> GenotypeMatrix:
    """Two independent AR(1) latent vectors per subject, each thresholded at the MAF."""
    mafs = np.asarray(mafs, dtype=np.float64)
    gen = as_generator(rng)
    z1 = sample_ar1_matrix(config.n, config.K, config.c, gen)
    z2 = sample_ar1_matrix(config.n, config.K, config.c, gen)
    g = (ndtr(z1) <= mafs).astype(np.int8) + (ndtr(z2) <= mafs).astype(np.int8)
    return GenotypeMatrix(g)


def sample_effects(config: ScenarioConfig, rng) -> np.ndarray:
    gen = as_generator(rng)
    beta = np.zeros(config.K)
    m = n_effects(config.pi, config.K)
    if m:
        pos = gen.choice(config.K, size=m, replace=False)
        beta[pos] = gen.uniform(-config.delta, config.delta, size=m)
    return beta


def sample_trait(G: GenotypeMatrix, beta, trait, rng, offset=None) -> PhenotypeVector:
    """Trait from the GLM with zero intercept: logistic for binary, N(0, 1) errors otherwise.

    ``offset`` adds a per-subject term to the linear predictor (covariate effects).
    """
    gen = as_generator(rng)
    trait = TraitKind(trait)
    eta = G.counts.astype(np.float64) @ np.asarray(beta, dtype=np.float64)
    if offset is not None:
        eta = eta + offset
    if trait is TraitKind.BINARY:
        y = (gen.random(G.n) < expit(eta)).astype(np.float64)
    else:
        y = eta + gen.standard_normal(G.n)
    return PhenotypeVector(y, trait)


def simulate(config: ScenarioConfig, stream: RngStream | None = None) -> SimulatedData:
    """One full dataset.  Each stage draws from its own child stream of ``stream``."""
    stream = RngStream(config.seed) if stream is None else stream
    mafs = sample_mafs(config.K, stream.spawn(0), config.maf_log_range)
    G = sample_genotypes(config, mafs, stream.spawn(1))
    beta = sample_effects(config, stream.spawn(2))
    C = None
    offset = None
    if config.n_covariates:
        cov = stream.spawn(3).generator().standard_normal((config.n, config.n_covariates))
        C = CovariateMatrix(cov)
        offset = config.covariate_effect * cov.sum(axis=1)
    Y = sample_trait(G, beta, config.trait, stream.spawn(4), offset)
    return SimulatedData(config, mafs, G, beta, Y, C)
