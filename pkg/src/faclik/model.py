"""Factored categorical observation models.

A model is a set of hidden-state factors (factor n has ``K_n`` discrete
states) and observation modalities (modality m has ``L_m`` discrete
outcomes). Each modality conditions only on a subset of factors (its
``deps``), and stores a dense conditional table whose outcome axis is
normalized for every combination of dependent states.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Column-normalization tolerance for likelihood tables.
NORMALIZATION_ATOL = 1e-12

# Tolerance for belief-marginal normalization.
BELIEF_ATOL = 1e-12


@dataclass(frozen=True)
class FactorSpec:
    """One hidden-state factor with `cardinality` discrete states."""

    id: int
    cardinality: int


@dataclass(frozen=True)
class ModalitySpec:
    """One observation channel.

    `deps` lists the factor ids this modality's likelihood conditions on;
    factors absent from `deps` never influence its outcomes.
    """

    id: int
    cardinality: int
    deps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "deps", tuple(int(d) for d in self.deps))


@dataclass(frozen=True)
class LikelihoodTensor:
    """Dense conditional table p(outcome | dependent states) for one modality.

    Axis 0 is the outcome axis (length L_m); axis 1+j corresponds to the
    j-th entry of the owning modality's `deps`.
    """

    modality: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.values.shape)


@dataclass(frozen=True)
class ModelSpec:
    """Full observation model: factors, modalities, one table per modality."""

    factors: tuple[FactorSpec, ...]
    modalities: tuple[ModalitySpec, ...]
    likelihoods: tuple[LikelihoodTensor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "modalities", tuple(self.modalities))
        object.__setattr__(self, "likelihoods", tuple(self.likelihoods))

    @property
    def num_factors(self) -> int:
        return len(self.factors)

    @property
    def num_modalities(self) -> int:
        return len(self.modalities)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        """K_n for every factor, in factor order."""
        return tuple(f.cardinality for f in self.factors)

    @property
    def total_hidden_states(self) -> int:
        return sum(self.cardinalities)

    @property
    def l_max(self) -> int:
        return max(m.cardinality for m in self.modalities)

    @property
    def k_max(self) -> int:
        return max(f.cardinality for f in self.factors)

    @property
    def d_max(self) -> int:
        return max(len(m.deps) for m in self.modalities)


@dataclass(frozen=True)
class BeliefState:
    """Factorized categorical beliefs: one marginal per hidden-state factor."""

    marginals: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "marginals",
            tuple(np.asarray(q, dtype=np.float64) for q in self.marginals),
        )


@dataclass(frozen=True)
class Observation:
    """One realized outcome index per modality."""

    outcomes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(int(o) for o in self.outcomes))


@dataclass(frozen=True)
class Violation:
    """A single validation finding. `code` is machine-readable."""

    code: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code} @ {self.where}] {self.message}"


def validate_model(spec: ModelSpec) -> list[Violation]:
    """Check every structural invariant; returns all findings (empty = valid)."""
    out: list[Violation] = []
    n = len(spec.factors)
    m = len(spec.modalities)

    if n < 1:
        out.append(Violation("no-factors", "model", "model needs at least one factor"))
    if m < 1:
        out.append(Violation("no-modalities", "model", "model needs at least one modality"))
    if len(spec.likelihoods) != m:
        out.append(
            Violation(
                "count-mismatch",
                "model",
                f"{len(spec.likelihoods)} likelihood tables for {m} modalities",
            )
        )

    for i, f in enumerate(spec.factors):
        if f.id != i:
            out.append(Violation("bad-factor-id", f"factor {i}", f"id {f.id} != position {i}"))
        if f.cardinality < 1:
            out.append(
                Violation("bad-cardinality", f"factor {i}", f"cardinality {f.cardinality} < 1")
            )

    cards = [f.cardinality for f in spec.factors]

    for i, mod in enumerate(spec.modalities):
        where = f"modality {i}"
        if mod.id != i:
            out.append(Violation("bad-modality-id", where, f"id {mod.id} != position {i}"))
        if mod.cardinality < 1:
            out.append(Violation("bad-cardinality", where, f"cardinality {mod.cardinality} < 1"))
        if len(mod.deps) == 0:
            out.append(Violation("empty-deps", where, "deps must be non-empty"))
        if len(set(mod.deps)) != len(mod.deps):
            out.append(Violation("duplicate-dep", where, f"deps {mod.deps} repeat a factor"))
        for d in mod.deps:
            if not 0 <= d < n:
                out.append(
                    Violation("dep-out-of-range", where, f"dep {d} outside [0, {n})")
                )

    for i, lik in enumerate(spec.likelihoods):
        if i >= m:
            break
        mod = spec.modalities[i]
        where = f"modality {i}"
        if lik.modality != mod.id:
            out.append(
                Violation("modality-mismatch", where, f"table tagged {lik.modality}, expected {mod.id}")
            )
        if any(not 0 <= d < n for d in mod.deps):
            continue  # shape is unverifiable against out-of-range deps
        expect = (mod.cardinality,) + tuple(cards[d] for d in mod.deps)
        if lik.shape != expect:
            out.append(
                Violation("shape-mismatch", where, f"shape {lik.shape}, expected {expect}")
            )
            continue
        v = lik.values
        if np.any(v < 0) or np.any(v > 1):
            out.append(Violation("value-out-of-range", where, "entries outside [0, 1]"))
        colsums = v.sum(axis=0)
        bad = np.abs(colsums - 1.0) > NORMALIZATION_ATOL
        if np.any(bad):
            j = int(np.argmax(bad.reshape(-1)))
            out.append(
                Violation(
                    "non-normalized-column",
                    where,
                    f"{int(bad.sum())} column(s) off by > {NORMALIZATION_ATOL:g} "
                    f"(first at flat column {j}, sum={colsums.reshape(-1)[j]!r})",
                )
            )
    return out


def original_param_count(spec: ModelSpec) -> int:
    """Stored-value count of the per-modality ragged representation.

    Sum over modalities of L_m * prod(K_d for d in deps).
    """
    total = 0
    cards = spec.cardinalities
    for mod in spec.modalities:
        total += mod.cardinality * math.prod(cards[d] for d in mod.deps)
    return total


@dataclass(frozen=True)
class SparsityStats:
    total: int
    nonzero: int
    sparsity_percent: float


def sparsity_stats(spec: ModelSpec, threshold: float = 0.0) -> SparsityStats:
    """Count entries with |v| > threshold across all likelihood tables.

    threshold 0 counts exact zeros only; a positive threshold also treats
    near-zero values as absent.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    total = 0
    nonzero = 0
    for lik in spec.likelihoods:
        total += lik.values.size
        nonzero += int(np.count_nonzero(np.abs(lik.values) > threshold))
    pct = 100.0 * (1.0 - nonzero / total) if total else 0.0
    return SparsityStats(total=total, nonzero=nonzero, sparsity_percent=pct)


def validate_observation(spec: ModelSpec, obs: Observation | Sequence[int]) -> np.ndarray:
    """Normalize an observation to an int64 vector, checking per-modality bounds."""
    outcomes = obs.outcomes if isinstance(obs, Observation) else obs
    arr = np.asarray(outcomes, dtype=np.int64)
    if arr.shape != (spec.num_modalities,):
        raise InvalidObservationError(
            f"expected {spec.num_modalities} outcomes, got shape {arr.shape}"
        )
    for i, mod in enumerate(spec.modalities):
        if not 0 <= arr[i] < mod.cardinality:
            raise InvalidObservationError(
                f"outcome {arr[i]} out of range [0, {mod.cardinality}) for modality {i}"
            )
    return arr


def validate_beliefs(spec: ModelSpec, beliefs: BeliefState | Sequence) -> list[np.ndarray]:
    """Normalize beliefs to a list of float64 marginals, checking invariants."""
    marginals = beliefs.marginals if isinstance(beliefs, BeliefState) else beliefs
    if len(marginals) != spec.num_factors:
        raise BeliefShapeError(
            f"expected {spec.num_factors} marginals, got {len(marginals)}"
        )
    out = []
    for n, q in enumerate(marginals):
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (spec.factors[n].cardinality,):
            raise BeliefShapeError(
                f"marginal {n} has shape {q.shape}, expected ({spec.factors[n].cardinality},)"
            )
        if np.any(q < 0) or abs(float(q.sum()) - 1.0) > BELIEF_ATOL:
            raise BeliefShapeError(f"marginal {n} is not a distribution (sum={q.sum()!r})")
        out.append(q)
    return out


class InvalidObservationError(ValueError):
    pass


class BeliefShapeError(ValueError):
    pass


def random_observation(spec: ModelSpec, rng: np.random.Generator) -> Observation:
    return Observation(tuple(int(rng.integers(m.cardinality)) for m in spec.modalities))


def random_beliefs(spec: ModelSpec, rng: np.random.Generator) -> BeliefState:
    """Dirichlet(1) marginals: strictly positive and normalized."""
    return BeliefState(tuple(rng.dirichlet(np.ones(f.cardinality)) for f in spec.factors))


# ---------------------------------------------------------------------------
# Model file format (JSON). Floats are emitted with shortest-round-trip repr,
# so 64-bit values survive a save/load cycle bit-exactly.
# ---------------------------------------------------------------------------


def model_to_dict(spec: ModelSpec) -> dict:
    return {
        "factors": [{"id": f.id, "cardinality": f.cardinality} for f in spec.factors],
        "modalities": [
            {"id": m.id, "cardinality": m.cardinality, "deps": list(m.deps)}
            for m in spec.modalities
        ],
        "likelihoods": [
            {
                "modality": lik.modality,
                "shape": list(lik.shape),
                "values": lik.values.reshape(-1).tolist(),
            }
            for lik in spec.likelihoods
        ],
    }


def model_from_dict(doc: dict) -> ModelSpec:
    factors = tuple(
        FactorSpec(id=int(f["id"]), cardinality=int(f["cardinality"]))
        for f in doc["factors"]
    )
    modalities = tuple(
        ModalitySpec(
            id=int(m["id"]),
            cardinality=int(m["cardinality"]),
            deps=tuple(int(d) for d in m["deps"]),
        )
        for m in doc["modalities"]
    )
    likelihoods = []
    for entry in doc["likelihoods"]:
        shape = tuple(int(s) for s in entry["shape"])
        values = np.asarray(entry["values"], dtype=np.float64).reshape(shape)
        values.flags.writeable = False
        likelihoods.append(LikelihoodTensor(modality=int(entry["modality"]), values=values))
    return ModelSpec(factors=factors, modalities=modalities, likelihoods=tuple(likelihoods))


def save_model(spec: ModelSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(spec), fh)


def load_model(path) -> ModelSpec:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
