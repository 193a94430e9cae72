"""Shape-aligned packing of per-modality likelihood tables.

All modality tables are placed into one padded array indexed
``[modality, outcome, slot_1 ... slot_Dmax]``. Each slot either carries one
of the modality's dependency factors (axes sorted by factor id) or is a
BROADCAST slot, which keeps its values at index 0 only. Padding is exact
zero everywhere, so packing never adds stored information and the array
sparsifies to exactly the original nonzeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import LikelihoodTensor, ModelSpec

# Slot marker for an axis a modality does not condition on.
BROADCAST = -1


@dataclass(frozen=True)
class SlotMap:
    """Axis assignment of the packed array's dependency slots."""

    d_max: int
    k_max: int
    slots: tuple[tuple[int, ...], ...]  # per modality: factor id or BROADCAST


@dataclass(frozen=True)
class UnifiedLikelihood:
    array: np.ndarray  # [M, L_max, K_max, ..., K_max] with d_max trailing axes
    slot_map: SlotMap
    l_max: int
    k_max: int

    @property
    def num_modalities(self) -> int:
        return int(self.array.shape[0])

    @property
    def d_max(self) -> int:
        return self.slot_map.d_max


def _sorted_deps(deps: tuple[int, ...]) -> tuple[np.ndarray, tuple[int, ...]]:
    """Permutation into ascending-factor slot order, and the sorted deps."""
    perm = np.argsort(np.asarray(deps, dtype=np.int64), kind="stable")
    return perm, tuple(deps[int(p)] for p in perm)


def build_slot_map(spec: ModelSpec) -> SlotMap:
    d_max = spec.d_max
    slots = []
    for mod in spec.modalities:
        _, ordered = _sorted_deps(mod.deps)
        slots.append(ordered + (BROADCAST,) * (d_max - len(ordered)))
    return SlotMap(d_max=d_max, k_max=spec.k_max, slots=tuple(slots))


def unify(spec: ModelSpec) -> UnifiedLikelihood:
    """Pack every modality table into one padded, shape-aligned array."""
    slot_map = build_slot_map(spec)
    m = spec.num_modalities
    l_max, k_max, d_max = spec.l_max, spec.k_max, spec.d_max
    cards = spec.cardinalities

    arr = np.zeros((m, l_max) + (k_max,) * d_max, dtype=np.float64)
    for i, (mod, lik) in enumerate(zip(spec.modalities, spec.likelihoods)):
        perm, ordered = _sorted_deps(mod.deps)
        block = np.transpose(lik.values, axes=(0,) + tuple(1 + int(p) for p in perm))
        index = (i, slice(0, mod.cardinality))
        index += tuple(slice(0, cards[d]) for d in ordered)
        index += (0,) * (d_max - len(ordered))
        arr[index] = block
    arr.flags.writeable = False
    return UnifiedLikelihood(array=arr, slot_map=slot_map, l_max=l_max, k_max=k_max)


def deunify(u: UnifiedLikelihood, spec: ModelSpec) -> list[LikelihoodTensor]:
    """Recover the original per-modality tables, bit for bit."""
    if u.num_modalities != spec.num_modalities:
        raise ValueError(
            f"packed array holds {u.num_modalities} modalities, spec has {spec.num_modalities}"
        )
    if u.slot_map != build_slot_map(spec):
        raise ValueError("slot map does not match the given model's shapes")
    cards = spec.cardinalities
    out = []
    for i, mod in enumerate(spec.modalities):
        perm, ordered = _sorted_deps(mod.deps)
        index = (i, slice(0, mod.cardinality))
        index += tuple(slice(0, cards[d]) for d in ordered)
        index += (0,) * (u.d_max - len(ordered))
        block = u.array[index]
        inv = np.argsort(perm, kind="stable")
        values = np.ascontiguousarray(
            np.transpose(block, axes=(0,) + tuple(1 + int(p) for p in inv))
        )
        values.flags.writeable = False
        out.append(LikelihoodTensor(modality=mod.id, values=values))
    return out


def padded_param_count(u: UnifiedLikelihood) -> int:
    """M * L_max * K_max^D_max: every stored entry, padding included."""
    return int(u.array.size)


def virtual_beliefs(slot_map: SlotMap, beliefs, modality: int) -> list[np.ndarray]:
    """Per-slot weight vectors making the padded contraction exact.

    Factor slots get the factor's marginal zero-padded to K_max; BROADCAST
    slots get a point mass at index 0, matching where their values live.
    """
    marginals = beliefs.marginals if hasattr(beliefs, "marginals") else beliefs
    k_max = slot_map.k_max
    out = []
    for slot in slot_map.slots[modality]:
        v = np.zeros(k_max, dtype=np.float64)
        if slot == BROADCAST:
            v[0] = 1.0
        else:
            q = np.asarray(marginals[slot], dtype=np.float64)
            v[: q.shape[0]] = q
        out.append(v)
    return out
