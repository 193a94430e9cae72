#!/usr/bin/env python3
"""Compare the compiled kernel extension against the pure-numpy fallback.

Runs the standard protocol once per (implementation, backend) pair on the
same model and prints a median-latency table plus the compiled-vs-python
ratio. The packaged benchmark CLI pins one implementation per invocation;
this script exists to look at both side by side.

Usage:
    python3 benchmarks/compare_impls.py [--preset M] [--runs 100] [--op per-modality]
"""

import argparse

import faclik as fl
from faclik.bench import BenchConfig, run_bench


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--preset", default="M", choices=fl.PRESET_NAMES)
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--warmup", type=int, default=1)
    parser.add_argument("--op", default="per-modality", choices=["per-modality", "expected"])
    parser.add_argument("--precision", default="f32", choices=["f32", "f64"])
    args = parser.parse_args()

    if not fl.HAVE_COMPILED:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")
        return 1

    print(f"model: preset {args.preset}, op {args.op}, {args.runs} runs, {args.precision}")
    _, spec = fl.preset(args.preset)

    medians: dict[tuple[str, str], float] = {}
    for impl in ("python", "compiled"):
        config = BenchConfig(
            timed_runs=args.runs,
            warmup_runs=args.warmup,
            value_bytes=4 if args.precision == "f32" else 8,
            op=args.op,
            impl=impl,
        )
        report = run_bench(spec, config, name=args.preset)
        for result in report.results:
            medians[(impl, result.backend)] = result.latency_ms["median"]

    print(f"\n{'backend':18s} {'python (ms)':>12s} {'compiled (ms)':>14s} {'ratio':>7s}")
    for backend in fl.ALL_BACKENDS:
        py = medians[("python", str(backend))]
        cy = medians[("compiled", str(backend))]
        print(f"{str(backend):18s} {py:12.4f} {cy:14.4f} {py / cy:6.2f}x")

    for impl in ("python", "compiled"):
        ragged = medians[(impl, str(fl.BackendKind.BASELINE_RAGGED))]
        sparse = medians[(impl, str(fl.BackendKind.UNIFIED_SPARSE))]
        print(f"{impl}: unified-sparse speedup over baseline-ragged {ragged / sparse:.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
