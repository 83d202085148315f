"""Weighted Adaptive Fisher (wAF) association tests for SNV sets.

Typical use::

    from wafassoc import fit_null, precompute_kernel, run_permutations, PermutationPlan

    nm = fit_null(phenotype, covariates)
    kernel = precompute_kernel(genotypes, nm, covariates)
    out = run_permutations(kernel, nm.residuals, None, ["waf", "minp"], PermutationPlan())
"""

__version__ = "0.1.0"

from .af import PartialSumPath, WeightScheme, WeightVector, af_statistic, partial_sums, r_values
from .comparators import aspu_combine, minp_statistic, spu_statistic, ssu_statistic
from .errors import (
    DegenerateInputError,
    DomainError,
    FitError,
    ParseError,
    RankDeficiencyError,
    SeparationError,
    ValidationError,
    WafError,
)
from .kernels import BACKEND
from .null_model import CovariateMatrix, ModelCase, NullModel, PhenotypeVector, TraitKind, fit_null, project_genotypes
from .perm import (
    PermutationPlan,
    PermutationTable,
    TestOutcome,
    build_table,
    column_rank_pvalues,
    min_over_k,
    run_permutations,
    step6_pvalue,
)
from .power import PowerResult, run_scenario, sweep_k
from .score import GenotypeMatrix, ScoreKernel, ScoreResult, precompute_kernel, score
from .simgen import ScenarioConfig, simulate
from .stat_math import RngStream, neg_log_two_sided_p, normal_sf_log, sample_ar1_vector
