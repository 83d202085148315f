"""Compare the compiled and pure-numpy permutation kernels.

Each kernel is timed on both backends over the same inputs, and the outputs
are checked to be bit-identical.  Also times one end-to-end ``build_table``
call per backend (run in a subprocess so the backend is chosen at import).

    python benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from wafassoc import kernels
from wafassoc.stat_math import RngStream

END_TO_END = """
import time, json
from wafassoc import kernels
from wafassoc.null_model import fit_null
from wafassoc.perm import build_table
from wafassoc.score import precompute_kernel
from wafassoc.simgen import ScenarioConfig, simulate
from wafassoc.stat_math import RngStream
d = simulate(ScenarioConfig(K={K}, n={n}, seed=1))
nm = fit_null(d.phenotype)
k = precompute_kernel(d.genotypes, nm)
methods = ["waf", "af", "minp", "ssu", "aspu"]
build_table(k, nm.residuals, None, methods, 50, RngStream(0), threads=1)
best = float("inf")
for _ in range({repeat}):
    t = time.perf_counter()
    build_table(k, nm.residuals, None, methods, {B}, RngStream(0), threads=1)
    best = min(best, time.perf_counter() - t)
print(json.dumps({{"backend": kernels.BACKEND, "seconds": best}}))
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(repeat):
    py = kernels.get_backend("python")
    cy = kernels.get_backend("cython")
    rng = np.random.default_rng(0)
    B, K, n = 200, 50, 500
    R = np.abs(rng.standard_normal((B + 1, K))) * 3
    w = rng.uniform(0.05, 1, K)
    S = py.weighted_partial_sums(R, w)
    keys = RngStream(0).child_counter_keys(np.arange(1, B + 1))
    cases = {
        f"weighted_partial_sums ({B + 1}x{K})": lambda m: m.weighted_partial_sums(R, w),
        f"column_rank_pvalues ({B + 1}x{K})": lambda m: m.column_rank_pvalues(S),
        f"fisher_yates_permutations ({B}x{n})": lambda m: m.fisher_yates_permutations(keys, n),
    }
    rows = []
    for name, call in cases.items():
        same = np.array_equal(call(py), call(cy))
        tp = best_of(lambda: call(py), repeat)
        tc = best_of(lambda: call(cy), repeat)
        rows.append((name, tp * 1e3, tc * 1e3, tp / tc, same))
    return rows


def bench_end_to_end(repeat, K=50, n=1000, B=1000):
    out = {}
    for pure in ("1", "0"):
        env = {**os.environ, "WAFASSOC_PURE_PYTHON": pure}
        code = END_TO_END.format(K=K, n=n, B=B, repeat=repeat)
        res = json.loads(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                        text=True, check=True).stdout)
        out[res["backend"]] = res["seconds"]
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    try:
        kernels.get_backend("cython")
    except ImportError:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    print(f"{'kernel':<40}{'python ms':>12}{'cython ms':>12}{'speedup':>10}  identical")
    for name, tp, tc, sp, same in bench_kernels(args.repeat):
        print(f"{name:<40}{tp:>12.3f}{tc:>12.3f}{sp:>10.2f}  {same}")
    e2e = bench_end_to_end(max(3, args.repeat // 4))
    print(f"\nbuild_table, K=50 n=1000 B=1000, 5 methods: "
          f"python {e2e['python'] * 1e3:.1f} ms, cython {e2e['cython'] * 1e3:.1f} ms, "
          f"speedup {e2e['python'] / e2e['cython']:.2f}x")


if __name__ == "__main__":
    main()
