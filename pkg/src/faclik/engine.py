"""The benchmarked computation: observation log-likelihoods under three
interchangeable backends.

* BASELINE_RAGGED  - per-modality tables in a Python list, one gather+log
  (or contraction) per modality. This is the irregular-loop structure the
  unified layouts exist to remove.
* UNIFIED_DENSE    - all tables packed into one padded array; a single
  batched pass over modalities.
* UNIFIED_SPARSE   - the packed array in coordinate format; work scales
  with stored nonzeros instead of padded volume.

All backends implement identical semantics: log of a zero likelihood is
-inf, contraction terms with zero belief weight are skipped (0*log0 := 0),
and per-modality partial sums are combined in modality order with 64-bit
accumulation regardless of the value dtype.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import _kernels
from .coo import CooTensor, to_coo
from .model import (
    BeliefShapeError,
    BeliefState,
    InvalidObservationError,
    ModelSpec,
    Observation,
)
from .unify import BROADCAST, UnifiedLikelihood, unify

NEG_INF = float("-inf")


class BackendKind(str, Enum):
    BASELINE_RAGGED = "baseline-ragged"
    UNIFIED_DENSE = "unified-dense"
    UNIFIED_SPARSE = "unified-sparse"

    def __str__(self) -> str:
        return self.value


ALL_BACKENDS = (
    BackendKind.BASELINE_RAGGED,
    BackendKind.UNIFIED_DENSE,
    BackendKind.UNIFIED_SPARSE,
)


@dataclass(frozen=True)
class PerModalityLogLik:
    """Log-likelihood slices per modality.

    For the ragged backend `data` is a list of per-modality arrays in
    declared-dependency axis order. For the unified backends it is one
    padded array [M, K_max, ..., K_max]; out-of-range and broadcast-slot
    positions hold -inf.
    """

    backend: BackendKind
    data: list[np.ndarray] | np.ndarray


class LikelihoodEngine:
    """Prepared views of one model, evaluable under any backend.

    Construction performs all one-time layout work (casting, packing,
    sparsifying, run indexing); evaluation methods are pure and touch no
    shared mutable state, so one engine may serve concurrent readers.
    """

    def __init__(self, spec: ModelSpec, dtype=np.float64, impl: str | None = None):
        self.spec = spec
        self.dtype = np.dtype(dtype)
        if self.dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
            raise ValueError("dtype must be float32 or float64")
        self.impl = _kernels.resolve_impl(impl)
        self._k = _kernels.kernel_module(self.impl)

        m_count = spec.num_modalities
        self.l_max = spec.l_max
        self.k_max = spec.k_max
        self.d_max = spec.d_max
        self.r = self.k_max**self.d_max
        self._cards = np.asarray(spec.cardinalities, dtype=np.int64)
        self._l_cards = np.asarray([mod.cardinality for mod in spec.modalities], dtype=np.int64)
        self._belief_bounds = np.concatenate(([0], np.cumsum(self._cards)))

        t0 = time.perf_counter()
        self.tables = [
            np.ascontiguousarray(lik.values, dtype=self.dtype) for lik in spec.likelihoods
        ]
        t1 = time.perf_counter()
        self.unified: UnifiedLikelihood = unify(spec)
        self._a3 = np.ascontiguousarray(
            self.unified.array.reshape(m_count, self.l_max, self.r), dtype=self.dtype
        )
        t2 = time.perf_counter()
        self.packed: CooTensor = to_coo(self.unified.array, 0.0)
        self._packed_values = np.ascontiguousarray(self.packed.values, dtype=self.dtype)
        coords = self.packed.coords
        self._dep_coords = np.ascontiguousarray(coords[:, 2:])
        self._mod_ids = np.ascontiguousarray(coords[:, 0].astype(np.int64))
        strides = self.k_max ** np.arange(self.d_max - 1, -1, -1, dtype=np.int64)
        dep_off = self._dep_coords.astype(np.int64) @ strides
        self._flatpos = np.ascontiguousarray(self._mod_ids * self.r + dep_off)
        key = self._mod_ids * self.l_max + coords[:, 1].astype(np.int64)
        self._ptr = np.searchsorted(key, np.arange(m_count * self.l_max + 1)).astype(np.int64)
        t3 = time.perf_counter()

        self.setup_seconds = {
            BackendKind.BASELINE_RAGGED: t1 - t0,
            BackendKind.UNIFIED_DENSE: t2 - t1,
            BackendKind.UNIFIED_SPARSE: (t2 - t1) + (t3 - t2),
        }

        # Slot bookkeeping for virtual beliefs and result extraction.
        slots = np.asarray(self.unified.slot_map.slots, dtype=np.int64)
        self._broadcast_mask = slots == BROADCAST
        self._slot_factor = np.where(self._broadcast_mask, 0, slots)
        self._e0 = np.zeros(self.k_max, dtype=np.float64)
        self._e0[0] = 1.0
        self._deps_dims = [
            np.asarray([spec.factors[d].cardinality for d in mod.deps], dtype=np.int64)
            for mod in spec.modalities
        ]

    # -- input checks (vectorized: these run inside every evaluation) -------

    def _check_obs(self, obs) -> np.ndarray:
        outcomes = obs.outcomes if isinstance(obs, Observation) else obs
        arr = np.asarray(outcomes, dtype=np.int64)
        if arr.shape != self._l_cards.shape or np.any(arr < 0) or np.any(arr >= self._l_cards):
            raise InvalidObservationError(f"observation {arr!r} out of range for this model")
        return arr

    def _check_beliefs(self, beliefs) -> list[np.ndarray]:
        marginals = beliefs.marginals if isinstance(beliefs, BeliefState) else beliefs
        if len(marginals) != self.spec.num_factors:
            raise BeliefShapeError(
                f"expected {self.spec.num_factors} marginals, got {len(marginals)}"
            )
        flat = np.concatenate([np.asarray(q, dtype=np.float64).reshape(-1) for q in marginals])
        if flat.shape[0] != self._belief_bounds[-1]:
            raise BeliefShapeError("marginal lengths do not match factor cardinalities")
        if np.any(flat < 0):
            raise BeliefShapeError("negative belief mass")
        sums = np.add.reduceat(flat, self._belief_bounds[:-1])
        if np.any(np.abs(sums - 1.0) > 1e-12):
            raise BeliefShapeError("marginals must each sum to 1")
        return [np.asarray(q, dtype=np.float64) for q in marginals]

    # -- virtual beliefs ------------------------------------------------------

    def _virtual_q(self, marginals: list[np.ndarray]) -> np.ndarray:
        """[M, D_max, K_max] slot weights: padded marginals / point masses."""
        padded = np.zeros((self.spec.num_factors, self.k_max), dtype=np.float64)
        for n, q in enumerate(marginals):
            padded[n, : q.shape[0]] = q
        vq = padded[self._slot_factor]
        vq[self._broadcast_mask] = self._e0
        return np.ascontiguousarray(vq)

    # -- evaluation -----------------------------------------------------------

    def per_modality_loglik(self, obs, backend: BackendKind) -> PerModalityLogLik:
        """Log p(o_m | dependent states) per modality; zeros map to -inf."""
        o = self._check_obs(obs)
        backend = BackendKind(backend)
        if backend is BackendKind.BASELINE_RAGGED:
            if self.impl == "compiled":
                outs = []
                for m in range(len(self.tables)):
                    v = self.tables[m][int(o[m])]
                    out = np.empty(v.shape, dtype=self.dtype)
                    self._k.slice_loglik(v.reshape(-1), out.reshape(-1))
                    outs.append(out)
            else:
                outs = self._k.ragged_loglik(self.tables, o)
            return PerModalityLogLik(backend, outs)

        m_count = self.spec.num_modalities
        if backend is BackendKind.UNIFIED_DENSE:
            if self.impl == "compiled":
                out = np.empty((m_count, self.r), dtype=self.dtype)
                self._k.dense_loglik(self._a3, o, out)
            else:
                out = self._k.dense_loglik(self._a3, o)
        else:
            if self.impl == "compiled":
                out = np.empty(m_count * self.r, dtype=self.dtype)
                self._k.sparse_loglik(
                    self._packed_values, self._flatpos, self._ptr, o, self.l_max, out
                )
                out = out.reshape(m_count, self.r)
            else:
                out = self._k.sparse_loglik(
                    self._packed_values, self._flatpos, self._ptr, o,
                    self.l_max, m_count, self.r,
                )
        return PerModalityLogLik(backend, out.reshape((m_count,) + (self.k_max,) * self.d_max))

    def expected_loglik(self, obs, beliefs, backend: BackendKind) -> float:
        """Belief-weighted sum of log-likelihoods across modalities."""
        o = self._check_obs(obs)
        marginals = self._check_beliefs(beliefs)
        backend = BackendKind(backend)

        if backend is BackendKind.BASELINE_RAGGED:
            if self.impl == "compiled":
                partials = np.empty(len(self.tables), dtype=np.float64)
                for m, mod in enumerate(self.spec.modalities):
                    v = self.tables[m][int(o[m])]
                    dims = self._deps_dims[m]
                    q2d = np.zeros((dims.shape[0], int(dims.max())), dtype=np.float64)
                    for j, d in enumerate(mod.deps):
                        q2d[j, : marginals[d].shape[0]] = marginals[d]
                    partials[m], _ = self._k.slice_expected(v.reshape(-1), q2d, dims)
            else:
                q_sets = [[marginals[d] for d in mod.deps] for mod in self.spec.modalities]
                partials = self._k.ragged_expected(self.tables, o, q_sets)
            return _combine(partials)

        vq = self._virtual_q(marginals)
        if backend is BackendKind.UNIFIED_DENSE:
            if self.impl == "compiled":
                partials = np.empty(self.spec.num_modalities, dtype=np.float64)
                self._k.dense_expected(self._a3, o, vq, partials)
            else:
                partials = self._k.dense_expected(self._a3, o, vq)
            return _combine(partials)

        support = np.count_nonzero(vq > 0, axis=2).prod(axis=1, dtype=np.int64)
        if self.impl == "compiled":
            partials = np.empty(self.spec.num_modalities, dtype=np.float64)
            self._k.sparse_expected(
                self._packed_values, self._dep_coords, self._ptr, o,
                self.l_max, vq, support, partials,
            )
        else:
            partials = self._k.sparse_expected(
                self._packed_values, self._dep_coords, self._mod_ids, self._ptr, o,
                self.l_max, vq, support,
            )
        return _combine(partials)

    # -- result access ----------------------------------------------------------

    def modality_block(self, result: PerModalityLogLik, m: int) -> np.ndarray:
        """In-range block of modality m in declared-dependency axis order."""
        mod = self.spec.modalities[m]
        if result.backend is BackendKind.BASELINE_RAGGED:
            return result.data[m]
        perm = np.argsort(np.asarray(mod.deps), kind="stable")
        ordered = [mod.deps[int(p)] for p in perm]
        index = (m,)
        index += tuple(slice(0, int(self._cards[d])) for d in ordered)
        index += (0,) * (self.d_max - len(ordered))
        block = result.data[index]
        inv = np.argsort(perm, kind="stable")
        return np.transpose(block, tuple(int(i) for i in inv))


def _combine(partials: np.ndarray) -> float:
    """Sequential modality-order accumulation, identical for all backends."""
    total = 0.0
    for p in partials:
        total += float(p)
    return total


def per_modality_loglik(engine: LikelihoodEngine, obs, backend: BackendKind) -> PerModalityLogLik:
    return engine.per_modality_loglik(obs, backend)


def expected_loglik(engine: LikelihoodEngine, obs, beliefs, backend: BackendKind) -> float:
    return engine.expected_loglik(obs, beliefs, backend)
