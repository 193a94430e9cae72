"""Seeded model generation and the size-preset registry.

Generation is a pure function of the config: the same seed always yields a
byte-identical model. Functional sparsity is injected by zeroing the
globally smallest entries (never a column's largest) until the requested
zero fraction is reached, then renormalizing each column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import FactorSpec, LikelihoodTensor, ModalitySpec, ModelSpec


class InfeasibleSparsityError(ValueError):
    """Target zero fraction cannot be met while keeping every column alive."""


class UnknownPresetError(KeyError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    num_factors: int
    factor_cardinality_range: tuple[int, int]
    num_modalities: int
    outcome_cardinality_range: tuple[int, int]
    deps_per_modality_range: tuple[int, int]
    functional_sparsity_target: float = 0.0
    # When set, sampled factor cardinalities are nudged (within range) so
    # they sum to exactly this value. Used by the preset registry.
    total_hidden_states: Optional[int] = None

    def check(self) -> None:
        for name in ("factor_cardinality_range", "outcome_cardinality_range", "deps_per_modality_range"):
            lo, hi = getattr(self, name)
            if not (1 <= lo <= hi):
                raise ValueError(f"{name} = ({lo}, {hi}) is not a valid range")
        if self.num_factors < 1 or self.num_modalities < 1:
            raise ValueError("need at least one factor and one modality")
        if self.deps_per_modality_range[1] > self.num_factors:
            raise ValueError("deps_per_modality_range exceeds the number of factors")
        if not 0.0 <= self.functional_sparsity_target < 1.0:
            raise ValueError("functional_sparsity_target must be in [0, 1)")
        if self.total_hidden_states is not None:
            lo, hi = self.factor_cardinality_range
            if not lo * self.num_factors <= self.total_hidden_states <= hi * self.num_factors:
                raise ValueError("total_hidden_states unreachable for this cardinality range")


def _sample_cardinalities(rng: np.random.Generator, cfg: GeneratorConfig) -> np.ndarray:
    lo, hi = cfg.factor_cardinality_range
    cards = rng.integers(lo, hi + 1, size=cfg.num_factors)
    if cfg.total_hidden_states is not None:
        diff = cfg.total_hidden_states - int(cards.sum())
        i = 0
        while diff != 0:
            step = 1 if diff > 0 else -1
            c = int(cards[i % cfg.num_factors])
            if lo <= c + step <= hi:
                cards[i % cfg.num_factors] = c + step
                diff -= step
            i += 1
    return cards


def _inject_sparsity(tables: list[np.ndarray], rho: float) -> None:
    """Zero the globally smallest entries until the zero fraction hits rho.

    Each column's largest entry is always retained, and surviving columns
    are renormalized in place. Deterministic: ties resolve by position.
    """
    total = sum(t.size for t in tables)
    want = round(rho * total)
    if want == 0:
        return

    cand_vals = []
    cand_pos = []  # (table index, flat offset)
    budget = 0
    for ti, t in enumerate(tables):
        l_m = t.shape[0]
        flat = t.reshape(l_m, -1)
        keep = np.argmax(flat, axis=0)  # one survivor per column
        mask = np.ones_like(flat, dtype=bool)
        mask[keep, np.arange(flat.shape[1])] = False
        budget += int(mask.sum())
        offs = np.flatnonzero(mask.reshape(-1))
        cand_pos.append(np.stack([np.full(offs.size, ti, dtype=np.int64), offs], axis=1))
        cand_vals.append(t.reshape(-1)[offs])

    n_zero = min(want, budget)
    if (want - n_zero) / total > 0.03:
        raise InfeasibleSparsityError(
            f"target zero fraction {rho:.3f} needs {want} zeros but only "
            f"{budget} entries may be cleared without emptying a column"
        )

    vals = np.concatenate(cand_vals)
    pos = np.concatenate(cand_pos)
    chosen = pos[np.argsort(vals, kind="stable")[:n_zero]]
    for ti in np.unique(chosen[:, 0]):
        flat = tables[int(ti)].reshape(-1)
        flat[chosen[chosen[:, 0] == ti, 1]] = 0.0

    for t in tables:
        l_m = t.shape[0]
        flat = t.reshape(l_m, -1)
        flat /= flat.sum(axis=0, keepdims=True)


def generate_model(config: GeneratorConfig) -> ModelSpec:
    """Draw a model from the config; deterministic for a fixed seed."""
    config.check()
    rng = np.random.default_rng(config.seed)

    cards = _sample_cardinalities(rng, config)
    factors = tuple(FactorSpec(id=n, cardinality=int(k)) for n, k in enumerate(cards))

    l_lo, l_hi = config.outcome_cardinality_range
    d_lo, d_hi = config.deps_per_modality_range
    modalities = []
    for m in range(config.num_modalities):
        l_m = int(rng.integers(l_lo, l_hi + 1))
        d_m = int(rng.integers(d_lo, d_hi + 1))
        deps = np.sort(rng.choice(config.num_factors, size=d_m, replace=False))
        modalities.append(ModalitySpec(id=m, cardinality=l_m, deps=tuple(int(d) for d in deps)))

    tables = []
    for mod in modalities:
        shape = (mod.cardinality,) + tuple(int(cards[d]) for d in mod.deps)
        t = rng.standard_exponential(shape)
        t /= t.reshape(shape[0], -1).sum(axis=0).reshape((1,) + shape[1:])
        tables.append(t)

    if config.functional_sparsity_target > 0.0:
        _inject_sparsity(tables, config.functional_sparsity_target)

    likelihoods = []
    for mod, t in zip(modalities, tables):
        t.flags.writeable = False
        likelihoods.append(LikelihoodTensor(modality=mod.id, values=t))

    return ModelSpec(factors=factors, modalities=tuple(modalities), likelihoods=tuple(likelihoods))


@dataclass(frozen=True)
class ModelPreset:
    name: str
    num_modalities: int
    total_hidden_states: int
    generator_params: GeneratorConfig


# Registry of benchmark model sizes. Modality and hidden-state counts are
# fixed; the remaining shape parameters (factor split, outcome alphabet,
# dependency fan-in, zero fraction) are registry constants.
_PRESET_ROWS = {
    #       M   sumK   N    K rng     L rng     D rng   rho    seed
    "XXS": (16, 60, 12, (2, 8), (3, 8), (1, 2), 0.610, 101),
    "XS": (46, 180, 30, (3, 9), (3, 9), (1, 3), 0.597, 102),
    "S": (92, 364, 52, (4, 10), (3, 10), (1, 3), 0.576, 103),
    "M": (154, 612, 68, (6, 12), (3, 10), (1, 3), 0.564, 104),
    "L": (232, 924, 84, (8, 14), (3, 11), (1, 3), 0.557, 105),
    "XL": (326, 1300, 100, (10, 16), (3, 12), (1, 3), 0.552, 106),
}

PRESET_NAMES = tuple(_PRESET_ROWS)


def preset_config(name: str) -> ModelPreset:
    try:
        m, sum_k, n, k_rng, l_rng, d_rng, rho, seed = _PRESET_ROWS[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r} (choose from {', '.join(_PRESET_ROWS)})"
        ) from None
    cfg = GeneratorConfig(
        seed=seed,
        num_factors=n,
        factor_cardinality_range=k_rng,
        num_modalities=m,
        outcome_cardinality_range=l_rng,
        deps_per_modality_range=d_rng,
        functional_sparsity_target=rho,
        total_hidden_states=sum_k,
    )
    return ModelPreset(name=name, num_modalities=m, total_hidden_states=sum_k, generator_params=cfg)


def preset(name: str) -> tuple[ModelPreset, ModelSpec]:
    """Instantiate a registered preset; counts are exact by construction."""
    p = preset_config(name)
    spec = generate_model(p.generator_params)
    assert spec.num_modalities == p.num_modalities
    assert spec.total_hidden_states == p.total_hidden_states
    return p, spec
