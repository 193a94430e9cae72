"""Command-line interface: gen | verify | bench | inspect.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .bench import CSV_HEADER, BenchConfig, run_bench, run_equivalence
from .engine import ALL_BACKENDS, BackendKind
from .generate import (
    GeneratorConfig,
    InfeasibleSparsityError,
    PRESET_NAMES,
    UnknownPresetError,
    generate_model,
    preset,
)
from .model import (
    load_model,
    original_param_count,
    save_model,
    sparsity_stats,
    validate_model,
)
from .unify import unify

_BACKEND_ALIASES = {
    "baseline-ragged": BackendKind.BASELINE_RAGGED,
    "ragged": BackendKind.BASELINE_RAGGED,
    "unified-dense": BackendKind.UNIFIED_DENSE,
    "dense": BackendKind.UNIFIED_DENSE,
    "unified-sparse": BackendKind.UNIFIED_SPARSE,
    "sparse": BackendKind.UNIFIED_SPARSE,
}


def _parse_backends(text: str) -> tuple[BackendKind, ...]:
    out = []
    for token in text.split(","):
        token = token.strip().lower()
        if token not in _BACKEND_ALIASES:
            raise argparse.ArgumentTypeError(
                f"unknown backend {token!r} (choose from {', '.join(sorted(set(_BACKEND_ALIASES)))})"
            )
        out.append(_BACKEND_ALIASES[token])
    return tuple(dict.fromkeys(out))


def _load_spec(args) -> tuple:
    """Resolve --preset/--model into (name, ModelSpec)."""
    if getattr(args, "preset", None):
        p, spec = preset(args.preset)
        return p.name, spec
    if getattr(args, "model", None):
        return args.model, load_model(args.model)
    raise ValueError("one of --preset or --model is required")


def _cmd_gen(args) -> int:
    if args.preset:
        _, spec = preset(args.preset)
    else:
        missing = [
            flag
            for flag, val in (
                ("--factors", args.factors),
                ("--modalities", args.modalities),
            )
            if val is None
        ]
        if missing:
            print(f"gen: {' and '.join(missing)} required without --preset", file=sys.stderr)
            return 2
        cfg = GeneratorConfig(
            seed=args.seed,
            num_factors=args.factors,
            factor_cardinality_range=tuple(args.k_range),
            num_modalities=args.modalities,
            outcome_cardinality_range=tuple(args.l_range),
            deps_per_modality_range=tuple(args.deps_range),
            functional_sparsity_target=args.sparsity,
            total_hidden_states=args.hidden_states,
        )
        spec = generate_model(cfg)
    save_model(spec, args.out)
    print(f"wrote {args.out}: {spec.num_modalities} modalities, "
          f"{spec.num_factors} factors, {spec.total_hidden_states} hidden states")
    return 0


def _cmd_verify(args) -> int:
    name, spec = _load_spec(args)
    violations = validate_model(spec)
    if violations:
        print(f"{name}: INVALID ({len(violations)} violation(s))")
        for v in violations:
            print(f"  {v}")
        return 1
    report = run_equivalence(spec, trials=args.trials, seed=args.seed, impl=args.impl)
    ref = "enumeration oracle" if report.oracle_used else "baseline backend"
    print(f"{name}: {report.trials} trial(s) against {ref}, "
          f"max relative deviation {report.max_deviation:.3e}")
    if not report.passed:
        print("FAIL: backends disagree; first failing case follows", file=sys.stderr)
        json.dump(report.failure, sys.stderr, indent=2)
        print(file=sys.stderr)
        return 1
    print("OK: all backends agree within 1e-10")
    return 0


def _cmd_bench(args) -> int:
    name, spec = _load_spec(args)
    config = BenchConfig(
        backends=args.backends,
        warmup_runs=args.warmup,
        timed_runs=args.runs,
        value_bytes=4 if args.precision == "f32" else 8,
        op=args.op,
        seed=args.seed,
        impl=args.impl,
    )
    report = run_bench(spec, config, name=name)

    for r in report.results:
        lm = r.latency_ms
        print(f"{r.backend:16s} median {lm['median']:9.4f} ms   "
              f"(min {lm['min']:.4f}, p95 {lm['p95']:.4f}, max {lm['max']:.4f}; "
              f"setup {r.setup_ms:.1f} ms, {r.bytes} bytes)")
    have = {BackendKind(r.backend) for r in report.results}
    if {BackendKind.BASELINE_RAGGED, BackendKind.UNIFIED_SPARSE} <= have:
        ratio = report.median_ratio(BackendKind.BASELINE_RAGGED, BackendKind.UNIFIED_SPARSE)
        print(f"unified-sparse speedup over baseline-ragged: {ratio:.2f}x "
              f"(reference result: >2x on embedded-GPU hardware)")
        mem = report.model["sparse_coo_bytes"] / max(report.model["ragged_bytes"], 1)
        print(f"sparse/ragged representation bytes: {mem:.2f} "
              f"(reference result: down to 0.65)")

    if args.out:
        wrote = []
        if args.format in ("json", "both"):
            path = args.out if args.out.endswith(".json") else args.out + ".json"
            with open(path, "w") as fh:
                fh.write(report.to_json())
            wrote.append(path)
        if args.format in ("csv", "both"):
            path = args.out[: -len(".json")] if args.out.endswith(".json") else args.out
            path = path if path.endswith(".csv") else path + ".csv"
            with open(path, "w") as fh:
                fh.write("\n".join(report.csv_rows()) + "\n")
            wrote.append(path)
        print("wrote " + ", ".join(wrote))
    return 0


def _cmd_inspect(args) -> int:
    name, spec = _load_spec(args)
    u = unify(spec)
    orig = original_param_count(spec)
    padded = int(u.array.size)
    stats = sparsity_stats(spec)
    summary = {
        "name": name,
        "num_modalities": spec.num_modalities,
        "num_factors": spec.num_factors,
        "total_hidden_states": spec.total_hidden_states,
        "l_max": spec.l_max,
        "k_max": spec.k_max,
        "d_max": spec.d_max,
        "original_param_count": orig,
        "padded_param_count": padded,
        "nnz": stats.nonzero,
        "sparsity_percent_original": stats.sparsity_percent,
        "sparsity_percent_unified": 100.0 * (1.0 - stats.nonzero / padded),
    }
    if args.json:
        json.dump(summary, sys.stdout, indent=2)
        print()
    else:
        for key, val in summary.items():
            if isinstance(val, float):
                print(f"{key:28s} {val:.2f}")
            else:
                print(f"{key:28s} {val}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faclik",
        description="Factored categorical likelihood backends and benchmark harness",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_source(p):
        p.add_argument("--preset", choices=PRESET_NAMES, help="registered model size")
        p.add_argument("--model", help="path to a model JSON file")

    g = sub.add_parser("gen", help="generate a model file")
    g.add_argument("--preset", choices=PRESET_NAMES)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--factors", type=int)
    g.add_argument("--k-range", type=int, nargs=2, default=[2, 6], metavar=("LO", "HI"))
    g.add_argument("--modalities", type=int)
    g.add_argument("--l-range", type=int, nargs=2, default=[2, 6], metavar=("LO", "HI"))
    g.add_argument("--deps-range", type=int, nargs=2, default=[1, 2], metavar=("LO", "HI"))
    g.add_argument("--sparsity", type=float, default=0.0, help="target zero fraction")
    g.add_argument("--hidden-states", type=int, default=None,
                   help="exact total of factor cardinalities")
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    v = sub.add_parser("verify", help="check validity and backend equivalence")
    add_model_source(v)
    v.add_argument("--trials", type=int, default=50)
    v.add_argument("--seed", type=int, default=20240)
    v.add_argument("--impl", choices=["auto", "python", "compiled"], default="auto")
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="run the latency/memory benchmark")
    add_model_source(b)
    b.add_argument("--backends", type=_parse_backends, default=ALL_BACKENDS,
                   help="comma list: ragged,dense,sparse (default all)")
    b.add_argument("--runs", type=int, default=100)
    b.add_argument("--warmup", type=int, default=1)
    b.add_argument("--precision", choices=["f32", "f64"], default="f32")
    b.add_argument("--op", choices=["per-modality", "expected"], default="per-modality")
    b.add_argument("--impl", choices=["auto", "python", "compiled"], default="auto")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", help="report path (extension added per --format)")
    b.add_argument("--format", choices=["json", "csv", "both"], default="both")
    b.set_defaults(func=_cmd_bench)

    i = sub.add_parser("inspect", help="print size and sparsity accounting")
    add_model_source(i)
    i.add_argument("--json", action="store_true")
    i.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"faclik: I/O error: {exc}", file=sys.stderr)
        return 3
    except (UnknownPresetError, InfeasibleSparsityError, ValueError) as exc:
        print(f"faclik: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
