"""Benchmark protocol and backend-equivalence verification.

The latency protocol: per backend, one identical seeded stream of fresh
observations (and beliefs, for the contraction op), `warmup_runs` untimed
evaluations, then `timed_runs` evaluations timed with a monotonic clock.
Setup work (packing, sparsifying) is excluded from per-run latency and
reported separately. Memory is accounted analytically from representation
sizes, which isolates the layout effect from allocator noise.
"""

from __future__ import annotations

import json
import math
import platform
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coo import coo_bytes
from .engine import ALL_BACKENDS, BackendKind, LikelihoodEngine
from .model import ModelSpec, original_param_count, sparsity_stats
from .oracle import brute_force_oracle
from .unify import padded_param_count

CSV_HEADER = "model,backend,op,runs,min_ms,median_ms,mean_ms,p95_ms,max_ms,bytes"

OPS = ("per-modality", "expected")


@dataclass(frozen=True)
class BenchConfig:
    backends: tuple[BackendKind, ...] = ALL_BACKENDS
    warmup_runs: int = 1
    timed_runs: int = 100
    value_bytes: int = 4
    op: str = "per-modality"
    seed: int = 0
    impl: str | None = None

    def check(self) -> None:
        if self.timed_runs < 1:
            raise ValueError("timed_runs must be >= 1")
        if self.warmup_runs < 0:
            raise ValueError("warmup_runs must be >= 0")
        if self.value_bytes not in (4, 8):
            raise ValueError("value_bytes must be 4 or 8")
        if self.op not in OPS:
            raise ValueError(f"op must be one of {OPS}")


@dataclass
class BackendResult:
    backend: str
    op: str
    runs: int
    warmup: int
    latency_ms: dict[str, float]
    setup_ms: float
    bytes: int


@dataclass
class BenchReport:
    model: dict
    environment: dict
    results: list[BackendResult]

    def result_for(self, backend: BackendKind) -> BackendResult:
        for r in self.results:
            if r.backend == str(backend):
                return r
        raise KeyError(str(backend))

    def median_ratio(self, slow: BackendKind, fast: BackendKind) -> float:
        """How many times faster `fast` ran than `slow` (by median)."""
        return self.result_for(slow).latency_ms["median"] / self.result_for(fast).latency_ms["median"]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "environment": self.environment,
            "results": [
                {
                    "backend": r.backend,
                    "op": r.op,
                    "runs": r.runs,
                    "warmup": r.warmup,
                    "latency_ms": r.latency_ms,
                    "setup_ms": r.setup_ms,
                    "bytes": r.bytes,
                }
                for r in self.results
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def csv_rows(self) -> list[str]:
        rows = [CSV_HEADER]
        name = self.model["name"]
        for r in self.results:
            lm = r.latency_ms
            rows.append(
                f"{name},{r.backend},{r.op},{r.runs},"
                f"{lm['min']:.6f},{lm['median']:.6f},{lm['mean']:.6f},"
                f"{lm['p95']:.6f},{lm['max']:.6f},{r.bytes}"
            )
        return rows


def model_accounting(spec: ModelSpec, engine: LikelihoodEngine, name: str, value_bytes: int) -> dict:
    orig = original_param_count(spec)
    padded = padded_param_count(engine.unified)
    nnz = engine.packed.nnz
    return {
        "name": name,
        "num_modalities": spec.num_modalities,
        "num_factors": spec.num_factors,
        "total_hidden_states": spec.total_hidden_states,
        "l_max": spec.l_max,
        "k_max": spec.k_max,
        "d_max": spec.d_max,
        "original_param_count": orig,
        "padded_param_count": padded,
        "nnz": nnz,
        "sparsity_percent_original": sparsity_stats(spec).sparsity_percent,
        "sparsity_percent_unified": 100.0 * (1.0 - nnz / padded),
        "value_bytes": value_bytes,
        "ragged_bytes": orig * value_bytes,
        "dense_padded_bytes": padded * value_bytes,
        "sparse_coo_bytes": coo_bytes(engine.packed, value_bytes),
    }


def _environment(engine: LikelihoodEngine) -> dict:
    return {
        "clock_source": "time.perf_counter_ns",
        "build_mode": engine.impl,
        "host": f"{platform.node()} / {platform.platform()}",
        "python": platform.python_version(),
        "numpy": np.__version__,
        "value_dtype": str(engine.dtype),
    }


def _latency_stats(samples_ms: Sequence[float]) -> dict[str, float]:
    arr = np.asarray(samples_ms, dtype=np.float64)
    return {
        "min": float(arr.min()),
        "median": float(np.median(arr)),
        "mean": float(arr.mean()),
        "p95": float(np.percentile(arr, 95)),
        "max": float(arr.max()),
    }


def _draw_streams(spec: ModelSpec, config: BenchConfig):
    """One observation (and belief) stream shared by every backend."""
    rng = np.random.default_rng(config.seed)
    n_total = config.warmup_runs + config.timed_runs
    l_cards = np.asarray([m.cardinality for m in spec.modalities], dtype=np.int64)
    obs = rng.integers(0, l_cards[None, :], size=(n_total, len(l_cards)), dtype=np.int64)
    beliefs = None
    if config.op == "expected":
        beliefs = [
            [rng.dirichlet(np.ones(f.cardinality)) for f in spec.factors]
            for _ in range(n_total)
        ]
    return obs, beliefs


def run_bench(spec: ModelSpec, config: BenchConfig, name: str = "model") -> BenchReport:
    """Execute the full protocol for every requested backend."""
    config.check()
    dtype = np.float32 if config.value_bytes == 4 else np.float64
    engine = LikelihoodEngine(spec, dtype=dtype, impl=config.impl)
    obs, beliefs = _draw_streams(spec, config)

    acct = model_accounting(spec, engine, name, config.value_bytes)
    rep_bytes = {
        BackendKind.BASELINE_RAGGED: acct["ragged_bytes"],
        BackendKind.UNIFIED_DENSE: acct["dense_padded_bytes"],
        BackendKind.UNIFIED_SPARSE: acct["sparse_coo_bytes"],
    }

    results = []
    for backend in config.backends:
        if config.op == "per-modality":
            def evaluate(i, _b=backend):
                engine.per_modality_loglik(obs[i], _b)
        else:
            def evaluate(i, _b=backend):
                engine.expected_loglik(obs[i], beliefs[i], _b)

        for i in range(config.warmup_runs):
            evaluate(i)
        samples = []
        for i in range(config.timed_runs):
            t0 = time.perf_counter_ns()
            evaluate(config.warmup_runs + i)
            samples.append((time.perf_counter_ns() - t0) / 1e6)

        results.append(
            BackendResult(
                backend=str(backend),
                op=config.op,
                runs=config.timed_runs,
                warmup=config.warmup_runs,
                latency_ms=_latency_stats(samples),
                setup_ms=engine.setup_seconds[backend] * 1e3,
                bytes=rep_bytes[backend],
            )
        )

    return BenchReport(model=acct, environment=_environment(engine), results=results)


# ---------------------------------------------------------------------------
# Backend equivalence verification
# ---------------------------------------------------------------------------


def relative_deviation(a: float, b: float) -> float:
    """0 when both are -inf; inf when only one is; scaled difference else."""
    a, b = float(a), float(b)
    if math.isinf(a) or math.isinf(b):
        return 0.0 if a == b else float("inf")
    return abs(a - b) / max(abs(a), abs(b), 1e-12)


def _sparsify_beliefs(marginals, rng) -> list[np.ndarray]:
    """Zero a random subset of belief entries to exercise the -inf paths."""
    out = []
    for q in marginals:
        q = np.array(q, dtype=np.float64)
        kill = rng.random(q.shape[0]) < 0.4
        if not np.all(kill):
            q[kill] = 0.0
        q /= q.sum()
        out.append(q)
    return out


@dataclass
class EquivalenceReport:
    trials: int
    max_deviation: float
    oracle_used: bool
    failure: dict | None = None

    @property
    def passed(self) -> bool:
        return self.failure is None and self.max_deviation < 1e-10


def run_equivalence(
    spec: ModelSpec, trials: int = 50, seed: int = 20240, impl: str | None = None
) -> EquivalenceReport:
    """Cross-check all backends (and the enumeration oracle, when the joint
    state space permits) on random observation/belief pairs at float64."""
    engine = LikelihoodEngine(spec, dtype=np.float64, impl=impl)
    rng = np.random.default_rng(seed)
    oracle_ok = math.prod(spec.cardinalities) <= 10**6

    max_dev = 0.0
    for t in range(trials):
        obs = np.asarray(
            [rng.integers(m.cardinality) for m in spec.modalities], dtype=np.int64
        )
        marginals = [rng.dirichlet(np.ones(f.cardinality)) for f in spec.factors]
        if t % 4 == 3:
            marginals = _sparsify_beliefs(marginals, rng)

        values = {b: engine.expected_loglik(obs, marginals, b) for b in ALL_BACKENDS}
        if oracle_ok:
            values["oracle"] = brute_force_oracle(spec, obs, marginals)
        ref_name, ref = ("oracle", values["oracle"]) if oracle_ok else (
            str(BackendKind.BASELINE_RAGGED), values[BackendKind.BASELINE_RAGGED]
        )
        for key, val in values.items():
            dev = relative_deviation(val, ref)
            max_dev = max(max_dev, dev)
            if not dev < 1e-10:
                return EquivalenceReport(
                    trials=t + 1,
                    max_deviation=dev,
                    oracle_used=oracle_ok,
                    failure={
                        "trial": t,
                        "observation": obs.tolist(),
                        "beliefs": [q.tolist() for q in marginals],
                        "values": {str(k): repr(v) for k, v in values.items()},
                        "reference": ref_name,
                    },
                )

        outs = {b: engine.per_modality_loglik(obs, b) for b in ALL_BACKENDS}
        for m in range(spec.num_modalities):
            blocks = {b: engine.modality_block(outs[b], m) for b in ALL_BACKENDS}
            base = blocks[BackendKind.BASELINE_RAGGED]
            for b in (BackendKind.UNIFIED_DENSE, BackendKind.UNIFIED_SPARSE):
                other = blocks[b]
                inf_match = np.array_equal(np.isneginf(base), np.isneginf(other))
                finite = np.isfinite(base)
                close = np.allclose(base[finite], other[finite], rtol=1e-10, atol=0)
                if not (inf_match and close):
                    return EquivalenceReport(
                        trials=t + 1,
                        max_deviation=float("inf"),
                        oracle_used=oracle_ok,
                        failure={
                            "trial": t,
                            "observation": obs.tolist(),
                            "modality": m,
                            "backend": str(b),
                            "mismatch": "per-modality block",
                        },
                    )
    return EquivalenceReport(trials=trials, max_deviation=max_dev, oracle_used=oracle_ok)
