"""Command-line interface: ``wafassoc test | simulate | power``.

Every flag can also be given in a ``key = value`` config file passed with
``--config``; flags on the command line win.  ``WAFASSOC_THREADS`` sets the
number of worker threads/processes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .af import WeightScheme, WeightVector, read_weight_file
from .comparators import METHOD_TOKENS, parse_method
from .errors import ParseError, ValidationError, WafError
from .io import (
    ensure_dir,
    parse_covariates,
    parse_genotypes,
    parse_phenotype,
    write_covariates,
    write_genotypes,
    write_phenotype,
)
from .null_model import TraitKind, fit_null
from .perm import PermutationPlan, run_permutations
from .power import plot_series, results_to_csv, results_to_json, sweep_k
from .score import precompute_kernel
from .simgen import ScenarioConfig, simulate

DEFAULT_METHODS = ("waf", "af", "minp", "ssu", "aspu")
DEFAULT_PERMS = 100
DEFAULT_PERMS_MAX = 10_000

# named desk-scale scenarios: (pi, delta) per trait
SCENARIOS = {
    ("dense", "binary"): (0.20, 0.25),
    ("sparse", "binary"): (0.02, 1.0),
    ("dense", "continuous"): (0.20, 0.15),
    ("sparse", "continuous"): (0.02, 0.5),
    ("null", "binary"): (0.0, 0.0),
    ("null", "continuous"): (0.0, 0.0),
}


def _float_repr(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _float_repr(float(obj))
    return _float_repr(obj)


# --------------------------------------------------------------------------- parsers


def _add_plan_flags(p, perms_default):
    p.add_argument("--perms", type=int, default=None, help=f"initial permutations B (default {perms_default})")
    p.add_argument("--perms-max", type=int, default=None,
                   help="largest B for adaptive escalation (default: --perms if given, else "
                        f"{DEFAULT_PERMS_MAX})")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", action="append", default=None,
                   help=f"repeatable; one of {', '.join(METHOD_TOKENS)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wafassoc", description="Weighted Adaptive Fisher SNV-set tests")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test one SNV set")
    t.add_argument("genotypes", type=Path)
    t.add_argument("phenotype", type=Path)
    t.add_argument("--covariates", type=Path, default=None)
    t.add_argument("--weights", default="maf", help="maf | flat | file:PATH")
    t.add_argument("--trait", choices=[k.value for k in TraitKind], default=None,
                   help="default: binary when all values are 0/1")
    _add_plan_flags(t, DEFAULT_PERMS)
    t.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    t.add_argument("--format", choices=["json", "csv"], default="json")
    t.add_argument("--config", type=Path, default=None)

    s = sub.add_parser("simulate", help="write one simulated dataset")
    s.add_argument("--K", type=int, default=50)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--c", type=float, default=0.9)
    s.add_argument("--pi", type=float, default=0.0)
    s.add_argument("--delta", type=float, default=0.0)
    s.add_argument("--trait", choices=[k.value for k in TraitKind], default="binary")
    s.add_argument("--covariates", type=int, default=0, help="number of N(0,1) covariates")
    s.add_argument("--covariate-effect", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path, required=False, default=Path("simulated"))
    s.add_argument("--config", type=Path, default=None)

    w = sub.add_parser("power", help="Monte Carlo power / type I error study")
    w.add_argument("--scenario", choices=["dense", "sparse", "null"], default=None)
    w.add_argument("--trait", choices=[k.value for k in TraitKind], default="binary")
    w.add_argument("--pi", type=float, default=None)
    w.add_argument("--delta", type=float, default=None)
    w.add_argument("--k-values", default="50", help="comma-separated K grid")
    w.add_argument("--n", type=int, default=1000)
    w.add_argument("--c", type=float, default=0.9)
    w.add_argument("--covariates", type=int, default=0)
    w.add_argument("--covariate-effect", type=float, default=0.5)
    w.add_argument("--replicates", type=int, default=500)
    _add_plan_flags(w, 200)
    w.add_argument("--workers", type=int, default=None, help="parallel workers (default WAFASSOC_THREADS or 1)")
    w.add_argument("--out", type=Path, default=None, help="long-format CSV (default stdout)")
    w.add_argument("--json", type=Path, default=None, help="JSON summary path")
    w.add_argument("--plot-data", type=Path, default=None, help="per-figure power-vs-K series (JSON)")
    w.add_argument("--label", default=None)
    w.add_argument("--config", type=Path, default=None)
    return parser


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names without dashes."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ParseError("expected key = value", path, lineno)
            key, value = (x.strip() for x in text.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(parser, sub_name, argv):
    """Re-parse with config values installed as subparser defaults."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is None:
        return args
    cfg = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[sub_name]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in cfg.items():
        if key not in actions or key in ("config", "help"):
            raise ValidationError(f"unknown config key {key!r} for '{sub_name}'")
        act = actions[key]
        if isinstance(act, argparse._AppendAction):
            defaults[key] = [t.strip() for t in raw.split(",") if t.strip()]
        elif act.type is not None:
            defaults[key] = act.type(raw)
        else:
            defaults[key] = raw
        if act.choices is not None and key in defaults and not isinstance(defaults[key], list):
            if defaults[key] not in act.choices:
                raise ValidationError(f"config {key}={raw!r} not in {list(act.choices)}")
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _plan(args, perms_default) -> PermutationPlan:
    perms = args.perms if args.perms is not None else perms_default
    if args.perms_max is not None:
        perms_max = args.perms_max
    elif args.perms is not None:
        perms_max = perms
    else:
        perms_max = max(perms, DEFAULT_PERMS_MAX)
    return PermutationPlan(B_initial=perms, B_max=perms_max, seed=args.seed)


def _methods(args, default):
    return [parse_method(m) for m in (args.method or default)]


# --------------------------------------------------------------------------- commands


def run_test_command(args) -> dict:
    t0 = time.perf_counter()
    G = parse_genotypes(args.genotypes)
    Y = parse_phenotype(args.phenotype, args.trait)
    C = parse_covariates(args.covariates) if args.covariates else None
    if Y.n != G.n:
        raise ValidationError(f"phenotype has {Y.n} subjects, genotypes have {G.n}")
    if C is not None and C.n != G.n:
        raise ValidationError(f"covariates have {C.n} subjects, genotypes have {G.n}")
    methods = _methods(args, DEFAULT_METHODS)
    plan = _plan(args, DEFAULT_PERMS)

    scheme = args.weights
    if scheme.startswith("file:"):
        w = read_weight_file(scheme[5:], G.K)
        scheme_name = WeightScheme.FILE.value
    elif scheme in (WeightScheme.FLAT.value, WeightScheme.MAF_SD.value):
        # maf weights are derived from the kernel once monomorphic columns are known
        w = WeightVector.flat(G.K) if scheme == "flat" else None
        scheme_name = scheme
    else:
        raise ValidationError(f"--weights must be maf, flat or file:PATH, got {scheme!r}")

    nm = fit_null(Y, C)
    kernel = precompute_kernel(G, nm, C)
    outcomes = run_permutations(kernel, nm.residuals, w, methods, plan)
    doc = {
        "methods": {
            m: {
                "statistic": o.statistic,
                "p_value": o.p_value,
                "B_used": o.B,
                "escalated": o.escalated,
                "significant": o.p_value <= args.alpha,
            }
            for m, o in outcomes.items()
        },
        "metadata": {
            "n": G.n,
            "K": G.K,
            "K_tested": int(kernel.active.shape[0]),
            "excluded_snvs": [G.snv_labels[k] for k in kernel.excluded],
            "trait": Y.kind.value,
            "model_case": nm.case.value,
            "covariates": list(C.labels) if C is not None else [],
            "weight_scheme": scheme_name,
            "seed": plan.seed,
            "perms": plan.B_initial,
            "perms_max": plan.B_max,
            "alpha": args.alpha,
            "version": __version__,
            "wall_time": round(time.perf_counter() - t0, 6),
        },
    }
    for m in ("waf", "af"):
        if m in outcomes:
            d = outcomes[m].diagnostics
            doc["methods"][m]["k_star"] = d["k_star"]
            doc["methods"][m]["top_snvs"] = [G.snv_labels[k] for k in d["sort_order"][: d["k_star"]]]
    return _jsonable(doc)


def _test_csv(doc) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["method", "statistic", "p_value", "B_used", "escalated", "seed"])
    for m, r in doc["methods"].items():
        wr.writerow([m, repr(r["statistic"]), repr(r["p_value"]), r["B_used"], r["escalated"], doc["metadata"]["seed"]])
    return buf.getvalue()


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_test(args):
    doc = run_test_command(args)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n" if args.format == "json" else _test_csv(doc)
    _emit(text, args.out)


def cmd_simulate(args):
    config = ScenarioConfig(K=args.K, n=args.n, c=args.c, pi=args.pi, delta=args.delta, trait=args.trait,
                            seed=args.seed, n_covariates=args.covariates, covariate_effect=args.covariate_effect)
    data = simulate(config)
    out = ensure_dir(args.out)
    write_genotypes(out / "genotypes.csv", data.genotypes)
    write_phenotype(out / "phenotype.csv", data.phenotype)
    if data.covariates is not None:
        write_covariates(out / "covariates.csv", data.covariates)
    truth = {
        "config": config.to_dict(),
        "mafs": data.mafs,
        "beta": data.beta,
        "causal_snvs": [data.genotypes.snv_labels[k] for k in np.flatnonzero(data.beta)],
        "version": __version__,
    }
    (out / "truth.json").write_text(json.dumps(_jsonable(truth), indent=2, sort_keys=True) + "\n")
    sys.stdout.write(f"wrote {out}\n")


def cmd_power(args):
    pi, delta = args.pi, args.delta
    label = args.label
    if args.scenario is not None:
        spi, sdelta = SCENARIOS[(args.scenario, args.trait)]
        pi = spi if pi is None else pi
        delta = sdelta if delta is None else delta
        label = label or f"{args.scenario}-{args.trait}"
    if pi is None or delta is None:
        raise ValidationError("give --scenario or both --pi and --delta")
    label = label or f"pi{pi}-delta{delta}-{args.trait}"
    k_values = [int(k) for k in str(args.k_values).split(",") if k.strip()]
    base = ScenarioConfig(K=k_values[0], n=args.n, c=args.c, pi=pi, delta=delta, trait=args.trait,
                          seed=args.seed, n_covariates=args.covariates, covariate_effect=args.covariate_effect)
    methods = _methods(args, DEFAULT_METHODS)
    plan = _plan(args, 200)
    results = sweep_k(base, k_values, methods, args.replicates, plan, args.alpha, args.workers, label)
    _emit(results_to_csv(results), args.out)
    if args.json is not None:
        extra = {"config": base.to_dict(), "k_values": k_values, "methods": methods,
                 "plan": {"B_initial": plan.B_initial, "B_max": plan.B_max, "seed": plan.seed},
                 "version": __version__}
        args.json.write_text(results_to_json(results, extra) + "\n")
    if args.plot_data is not None:
        args.plot_data.write_text(json.dumps(plot_series(results), indent=2, sort_keys=True) + "\n")


COMMANDS = {"test": cmd_test, "simulate": cmd_simulate, "power": cmd_power}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
        args = _apply_config(parser, args.command, argv)
        COMMANDS[args.command](args)
    except WafError as exc:
        record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        if isinstance(exc, ParseError):
            record["error"].update({"path": str(exc.path) if exc.path else None, "line": exc.line})
        sys.stderr.write(json.dumps(record) + "\n")
        return 2 if isinstance(exc, ValidationError) else 1
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": {"type": "OSError", "message": str(exc)}}) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
