"""Monte Carlo power and type-I-error studies over simulated scenarios."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import WafError
from .null_model import fit_null
from .perm import PermutationPlan, default_threads, run_permutations
from .score import precompute_kernel
from .simgen import ScenarioConfig, simulate
from .stat_math import RngStream

__all__ = [
    "PowerResult",
    "ReplicateRecord",
    "run_replicate",
    "run_scenario",
    "sweep_k",
    "results_to_csv",
    "results_to_json",
    "plot_series",
    "MAX_SKIP_FRACTION",
    "SkippedReplicatesError",
]

log = logging.getLogger(__name__)

MAX_SKIP_FRACTION = 0.01
CSV_FIELDS = ("scenario", "method", "K", "power", "halfwidth", "replicates", "B", "seed",
              "rejections", "skipped", "alpha", "trait", "pi", "delta", "n")


class SkippedReplicatesError(WafError):
    """Too many replicates were degenerate for the power estimate to be trusted."""


@dataclass(frozen=True)
class PowerResult:
    scenario: dict
    method: str
    replicates: int
    B: int
    alpha: float
    rejections: int
    skipped: int = 0
    label: str = ""

    @property
    def power(self) -> float:
        return self.rejections / self.replicates if self.replicates else float("nan")

    @property
    def mc_halfwidth(self) -> float:
        p = self.power
        return 1.96 * math.sqrt(p * (1.0 - p) / self.replicates) if self.replicates else float("nan")

    def row(self) -> dict:
        sc = self.scenario
        return {
            "scenario": self.label,
            "method": self.method,
            "K": sc["K"],
            "power": f"{self.power:.6f}",
            "halfwidth": f"{self.mc_halfwidth:.6f}",
            "replicates": self.replicates,
            "B": self.B,
            "seed": sc["seed"],
            "rejections": self.rejections,
            "skipped": self.skipped,
            "alpha": self.alpha,
            "trait": sc["trait"],
            "pi": sc["pi"],
            "delta": sc["delta"],
            "n": sc["n"],
        }


@dataclass(frozen=True)
class ReplicateRecord:
    index: int
    pvalues: dict | None  # None when the replicate was degenerate
    error: str = ""


def run_replicate(config: ScenarioConfig, methods, plan: PermutationPlan, index: int) -> ReplicateRecord:
    """Simulate replicate ``index`` and test it with every method on one stream."""
    stream = RngStream(config.seed).spawn(index)
    try:
        data = simulate(config, stream.spawn(0))
        nm = fit_null(data.phenotype, data.covariates)
        kernel = precompute_kernel(data.genotypes, nm, data.covariates)
        out = run_permutations(kernel, nm.residuals, None, methods, plan, threads=1, stream=stream.spawn(1))
    except WafError as exc:
        return ReplicateRecord(index, None, f"{type(exc).__name__}: {exc}")
    return ReplicateRecord(index, {m: o.p_value for m, o in out.items()})


def _replicate_args(args):
    return run_replicate(*args)


def run_scenario(
    config: ScenarioConfig,
    methods,
    replicates: int,
    plan: PermutationPlan,
    alpha: float = 0.05,
    workers: int | None = None,
    label: str = "",
    max_skip_fraction: float = MAX_SKIP_FRACTION,
) -> dict:
    """Empirical rejection rate at ``alpha`` for each method.

    Replicate ``r`` depends only on ``(config.seed, r)``, so results do not
    depend on ``workers`` and a run with more replicates extends a shorter one.
    """
    methods = list(methods)
    workers = default_threads() if workers is None else max(1, int(workers))
    jobs = [(config, methods, plan, r) for r in range(replicates)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_replicate_args, jobs, chunksize=max(1, replicates // (4 * workers))))
    else:
        records = [_replicate_args(j) for j in jobs]

    skipped = [r for r in records if r.pvalues is None]
    if len(skipped) > max_skip_fraction * replicates:
        raise SkippedReplicatesError(
            f"{len(skipped)} of {replicates} replicates were degenerate (cap {max_skip_fraction:.0%}); "
            f"first error: {skipped[0].error}"
        )
    if skipped:
        log.warning("skipped %d degenerate replicates", len(skipped))
    done = [r for r in records if r.pvalues is not None]
    sc = config.to_dict()
    results = {}
    for m in methods:
        rej = sum(1 for r in done if r.pvalues[m] <= alpha)
        results[m] = PowerResult(sc, m, len(done), plan.B_initial, alpha, rej, len(skipped), label)
    return results


def sweep_k(base_config: ScenarioConfig, k_values, methods, replicates: int, plan: PermutationPlan,
            alpha: float = 0.05, workers: int | None = None, label: str = "") -> list:
    """One :func:`run_scenario` per K (same seed for every K); long-format list of results."""
    k_values = list(k_values)
    if not k_values:
        raise ValueError("k_values must be non-empty")
    rows = []
    for K in k_values:
        res = run_scenario(base_config.with_(K=int(K)), methods, replicates, plan, alpha, workers, label)
        rows.extend(res[m] for m in methods)
    return rows


def results_to_csv(results) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(r.row())
    return buf.getvalue()


def results_to_json(results, extra: dict | None = None) -> str:
    doc = {
        "results": [
            {**{k: v for k, v in asdict(r).items() if k != "scenario"}, "scenario": r.scenario,
             "power": r.power, "mc_halfwidth": r.mc_halfwidth}
            for r in results
        ]
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True)


def plot_series(results) -> dict:
    """Power-versus-K series per (scenario label, method), ready for plotting."""
    series = {}
    for r in results:
        key = r.label or "scenario"
        s = series.setdefault(key, {}).setdefault(r.method, {"K": [], "power": [], "halfwidth": []})
        s["K"].append(r.scenario["K"])
        s["power"].append(r.power)
        s["halfwidth"].append(r.mc_halfwidth)
    for methods in series.values():
        for s in methods.values():
            order = np.argsort(s["K"], kind="stable")
            for k in s:
                s[k] = [s[k][i] for i in order]
    return series
