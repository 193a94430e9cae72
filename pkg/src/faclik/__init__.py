"""Factored categorical likelihood computation with interchangeable
backends (ragged baseline, unified padded dense, unified sparse) and a
reproducible latency/memory benchmark harness."""

from ._kernels import DEFAULT_IMPL, HAVE_COMPILED
from .bench import BenchConfig, BenchReport, run_bench, run_equivalence
from .coo import CooTensor, contract_factorized, coo_bytes, gather_axis0, to_coo, to_dense
from .engine import ALL_BACKENDS, BackendKind, LikelihoodEngine, PerModalityLogLik
from .generate import (
    GeneratorConfig,
    InfeasibleSparsityError,
    ModelPreset,
    PRESET_NAMES,
    UnknownPresetError,
    generate_model,
    preset,
)
from .model import (
    BeliefState,
    FactorSpec,
    LikelihoodTensor,
    ModalitySpec,
    ModelSpec,
    Observation,
    Violation,
    load_model,
    original_param_count,
    random_beliefs,
    random_observation,
    save_model,
    sparsity_stats,
    validate_model,
)
from .oracle import StateSpaceTooLargeError, brute_force_oracle, joint_loglik_tensor
from .unify import (
    BROADCAST,
    SlotMap,
    UnifiedLikelihood,
    deunify,
    padded_param_count,
    unify,
    virtual_beliefs,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_BACKENDS",
    "BROADCAST",
    "BackendKind",
    "BeliefState",
    "BenchConfig",
    "BenchReport",
    "CooTensor",
    "DEFAULT_IMPL",
    "FactorSpec",
    "GeneratorConfig",
    "HAVE_COMPILED",
    "InfeasibleSparsityError",
    "LikelihoodEngine",
    "LikelihoodTensor",
    "ModalitySpec",
    "ModelPreset",
    "ModelSpec",
    "Observation",
    "PRESET_NAMES",
    "PerModalityLogLik",
    "SlotMap",
    "StateSpaceTooLargeError",
    "UnifiedLikelihood",
    "UnknownPresetError",
    "Violation",
    "brute_force_oracle",
    "contract_factorized",
    "coo_bytes",
    "deunify",
    "gather_axis0",
    "generate_model",
    "joint_loglik_tensor",
    "load_model",
    "original_param_count",
    "padded_param_count",
    "preset",
    "random_beliefs",
    "random_observation",
    "run_bench",
    "run_equivalence",
    "save_model",
    "sparsity_stats",
    "to_coo",
    "to_dense",
    "unify",
    "validate_model",
    "virtual_beliefs",
]
