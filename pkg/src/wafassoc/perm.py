"""Permutation engine shared by wAF, AF and the comparator statistics.

Residuals are permuted ``B`` times; every requested method is evaluated on
the same ``(B+1) x K`` matrix of standardised scores (row 0 observed).
For the adaptive Fisher paths each column of partial sums is converted to
rank p-values, each row is reduced to its minimum, and the observed minimum
is ranked against the permuted ones.  P-values use the ``(1 + count) /
(B + 1)`` form so they are never zero.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .af import WeightScheme, WeightVector, partial_sums, r_values
from .comparators import (
    SPU_POWERS,
    minp_statistic,
    parse_method,
    spu_power,
    spu_all,
    spu_significance,
    ssu_statistic,
)
from .errors import DegenerateInputError, DimensionError, ValidationError
from .score import ScoreKernel, score, standardized_scores
from .stat_math import RngStream

__all__ = [
    "PermutationPlan",
    "PermutationTable",
    "TestOutcome",
    "build_table",
    "run_permutations",
    "column_rank_pvalues",
    "min_over_k",
    "step6_pvalue",
    "default_threads",
    "weights_for",
]

log = logging.getLogger(__name__)

# rows per block of permuted residuals; fixed so results never depend on threads
CHUNK_ROWS = 1024
THREADS_ENV = "WAFASSOC_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class PermutationPlan:
    """Permutation budget.

    Starts with ``B_initial`` permutations; a method whose p-value is at most
    ``escalation_count / (B + 1)`` is rerun with ``escalation_factor`` times
    more permutations (fresh streams) until ``B_max`` is reached.
    """

    B_initial: int = 100
    B_max: int = 10_000
    escalation_count: float = 5.0
    escalation_factor: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.B_initial < 19:
            raise ValidationError("B_initial must be at least 19")
        if self.B_max < self.B_initial:
            raise ValidationError("B_max must be >= B_initial")
        if self.escalation_factor < 2:
            raise ValidationError("escalation_factor must be >= 2")

    @classmethod
    def fixed(cls, B: int, seed: int = 0) -> "PermutationPlan":
        return cls(B_initial=B, B_max=B, seed=seed)

    def stages(self):
        B = self.B_initial
        while True:
            yield B
            if B >= self.B_max:
                return
            B = min(self.B_max, B * self.escalation_factor)


@dataclass
class TestOutcome:
    method: str
    statistic: float
    p_value: float
    B: int
    escalated: bool = False
    diagnostics: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class


@dataclass
class PermutationTable:
    U_std: np.ndarray  # (B+1) x K_active, row 0 observed
    weights: WeightVector  # normalised, active columns
    S_star: dict  # path name -> (B+1) x K_active partial sums
    path_pvalues: dict  # path name -> (B+1) x K_active step-4 p-values
    T: dict  # method -> (B+1) statistic column
    smaller_is_extreme: dict  # method -> bool
    statistic: dict  # method -> reported observed statistic

    @property
    def B(self) -> int:
        return self.U_std.shape[0] - 1


def column_rank_pvalues(S) -> np.ndarray:
    """``P[b, k] = #{b': S[b', k] >= S[b, k]} / (B + 1)``, column by column."""
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] < 2:
        raise ValidationError("need a (B+1) x K matrix with B >= 1")
    return kernels.column_rank_pvalues(S)


def min_over_k(P) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] < 1:
        raise ValidationError("need a (B+1) x K matrix with K >= 1")
    return P.min(axis=1)


def step6_pvalue(T, smaller_is_extreme: bool) -> float:
    """``(1 + #{b >= 1 : T[b] at least as extreme as T[0]}) / (B + 1)``."""
    T = np.asarray(T, dtype=np.float64)
    t0, rest = T[0], T[1:]
    hits = np.count_nonzero(rest <= t0) if smaller_is_extreme else np.count_nonzero(rest >= t0)
    return (1.0 + hits) / T.shape[0]


def _permuted_scores(kernel, e, keys, threads):
    n = kernel.n
    m = keys.shape[0]
    out = np.empty((m, kernel.active.shape[0]))

    def work(lo):
        hi = min(lo + CHUNK_ROWS, m)
        perms = kernels.fisher_yates_permutations(keys[lo:hi], n)
        out[lo:hi] = standardized_scores(kernel, e[perms])

    starts = range(0, m, CHUNK_ROWS)
    if threads > 1 and m > CHUNK_ROWS:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    else:
        for lo in starts:
            work(lo)
    return out


def _method_list(methods):
    out = []
    for m in methods:
        tok = parse_method(m)
        if tok not in out:
            out.append(tok)
    if not out:
        raise ValidationError("at least one method is required")
    return out


def _path(R, w, name, table):
    S = kernels.weighted_partial_sums(R, w.w)
    P = column_rank_pvalues(S)
    table.S_star[name] = S
    table.path_pvalues[name] = P
    T = P.min(axis=1)
    table.T[name] = T
    table.smaller_is_extreme[name] = True
    table.statistic[name] = float(T[0])


def build_table(
    kernel: ScoreKernel,
    e,
    w: WeightVector | None,
    methods,
    B: int,
    stream: RngStream,
    threads: int | None = None,
    aspu_powers=SPU_POWERS,
) -> PermutationTable:
    """Evaluate ``methods`` on ``B`` permutations drawn from ``stream``.

    Permutation ``b`` (1-based) uses ``stream.spawn(b)``.
    """
    e = np.asarray(e, dtype=np.float64)
    if e.shape != (kernel.n,):
        raise DimensionError(f"residual vector must have length {kernel.n}")
    if np.ptp(e) == 0.0:
        raise DegenerateInputError("all residuals are identical; nothing to permute")
    if kernel.active.shape[0] == 0:
        raise DegenerateInputError("every SNV column is monomorphic after adjustment")
    if B < 1:
        raise ValidationError("B must be at least 1")
    methods = _method_list(methods)
    threads = default_threads() if threads is None else max(1, int(threads))

    act = kernel.active
    if w is None:
        w = WeightVector.from_maf(kernel.maf)
    if len(w) != kernel.K:
        raise DimensionError(f"{len(w)} weights for {kernel.K} SNV columns")
    w_act = w.subset(act)
    if not np.any(w_act.w > 0):
        raise ValidationError("all weights of the testable SNVs are zero")
    w_act = w_act.normalized()

    obs = score(kernel, e).U_std[act]
    keys = stream.child_counter_keys(np.arange(1, B + 1))
    Ustd = np.empty((B + 1, act.shape[0]))
    Ustd[0] = obs
    Ustd[1:] = _permuted_scores(kernel, e, keys, threads)

    table = PermutationTable(Ustd, w_act, {}, {}, {}, {}, {})
    need_R = any(m in ("waf", "af") for m in methods)
    R = r_values(Ustd) if need_R else None
    if "waf" in methods:
        _path(R, w_act, "waf", table)
    if "af" in methods:
        _path(R, WeightVector.flat(act.shape[0]), "af", table)

    sd = kernel.sd[act]
    if "minp" in methods:
        table.T["minp"] = minp_statistic(Ustd)
    if "ssu" in methods:
        table.T["ssu"] = ssu_statistic(Ustd * kernel.sqrt_V_active)
    spu_needed = {m for m in methods if m.startswith("spu")}
    powers = list(aspu_powers) if "aspu" in methods else []
    wanted = {spu_power(m) for m in spu_needed} | set(powers)
    spu_cols = {c: (raw, spu_significance(raw, c)) for c, raw in spu_all(Ustd, sd, wanted).items()} if wanted else {}
    for m in spu_needed:
        raw, sig = spu_cols[spu_power(m)]
        table.T[m] = sig
        table.statistic[m] = float(raw[0])
    if "aspu" in methods:
        Pc = column_rank_pvalues(np.column_stack([spu_cols[c][1] for c in powers]))
        T = min_over_k(Pc)
        table.T["aspu"] = T
        table.smaller_is_extreme["aspu"] = True
        table.statistic["aspu"] = float(T[0])

    for m in methods:
        table.smaller_is_extreme.setdefault(m, False)
        table.statistic.setdefault(m, float(table.T[m][0]))
    return table


def _diagnostics(table: PermutationTable, kernel: ScoreKernel, name: str, w_orig: WeightVector) -> dict:
    act = kernel.active
    R0 = r_values(table.U_std[0])
    w = table.weights if name == "waf" else WeightVector.flat(act.shape[0])
    path = partial_sums(R0, w)
    P0 = table.path_pvalues[name][0]
    return {
        "R": R0,
        "weights": w_orig.w[act] if name == "waf" else w.w,
        "S_star": table.S_star[name][0],
        "sort_order": act[path.sort_order],
        "path_pvalues": P0,
        "k_star": int(np.argmin(P0)) + 1,
    }


def run_permutations(
    kernel: ScoreKernel,
    e_observed,
    w: WeightVector | None,
    methods,
    plan: PermutationPlan,
    threads: int | None = None,
    stream: RngStream | None = None,
    aspu_powers=SPU_POWERS,
) -> dict:
    """Permutation p-values for every requested method on a shared stream.

    Returns ``{method: TestOutcome}``.  Stage ``s`` of the adaptive budget
    uses ``stream.spawn(s)``; the root stream defaults to ``RngStream(plan.seed)``.
    """
    methods = _method_list(methods)
    if kernel.active.shape[0] == 0:
        raise DegenerateInputError("every SNV column is monomorphic after adjustment")
    root = RngStream(plan.seed) if stream is None else stream
    if w is None:
        w = WeightVector.from_maf(kernel.maf)
    pending = list(methods)
    outcomes = {}
    for stage, B in enumerate(plan.stages()):
        table = build_table(kernel, e_observed, w, pending, B, root.spawn(stage), threads, aspu_powers)
        still = []
        for m in pending:
            p = step6_pvalue(table.T[m], table.smaller_is_extreme[m])
            diag = {"excluded": list(kernel.excluded)}
            if m in ("waf", "af"):
                diag.update(_diagnostics(table, kernel, m, w))
            outcomes[m] = TestOutcome(m, table.statistic[m], p, B, stage > 0, diag)
            if B < plan.B_max and p <= plan.escalation_count / (B + 1):
                still.append(m)
        if not still:
            break
        log.debug("escalating %s beyond B=%d", still, B)
        pending = still
    return {m: outcomes[m] for m in methods}


def weights_for(kernel: ScoreKernel, scheme, file_weights: WeightVector | None = None) -> WeightVector:
    """Weight vector over all ``K`` columns for a scheme name."""
    scheme = WeightScheme(scheme)
    if scheme is WeightScheme.FLAT:
        return WeightVector.flat(kernel.K)
    if scheme is WeightScheme.MAF_SD:
        return WeightVector.from_maf(kernel.maf)
    if file_weights is None:
        raise ValidationError("file weight scheme needs a weight vector")
    return file_weights

