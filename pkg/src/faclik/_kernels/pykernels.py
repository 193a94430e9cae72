"""Pure-numpy implementations of the backend inner loops.

Import-time fallback for builds without the compiled extension. Function
signatures mirror `_ckernels`; the ragged functions keep the per-modality
Python loop that defines the baseline's cost structure, the unified ones
are single vectorized passes.

Convention shared by every kernel: a zero likelihood maps to -inf in
log space, and contraction terms are dropped when the belief weight is
zero (0 * log 0 := 0). Belief-weight products are compared against exact
zero; exactness assumes the per-slot product does not underflow.
"""

from __future__ import annotations

import numpy as np

NEG_INF = np.float64(-np.inf)

_LETTERS = "abcdefgh"


def _masked_log(values: np.ndarray) -> np.ndarray:
    out = np.full(values.shape, -np.inf, dtype=values.dtype)
    np.log(values, out=out, where=values > 0)
    return out


def _run_select(ptr: np.ndarray, obs: np.ndarray, l_max: int) -> np.ndarray:
    """Indices of stored entries matching each modality's observed outcome.

    `ptr` holds run offsets per (modality, outcome) pair of the sorted
    packed tensor; the result concatenates the per-modality runs.
    """
    keys = np.arange(obs.shape[0], dtype=np.int64) * l_max + obs
    starts = ptr[keys]
    lens = ptr[keys + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    shift = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
    return np.arange(total, dtype=np.int64) + shift


# -- baseline ragged ---------------------------------------------------------


def ragged_loglik(tables: list[np.ndarray], obs: np.ndarray) -> list[np.ndarray]:
    return [_masked_log(tables[m][int(obs[m])]) for m in range(len(tables))]


def ragged_expected(
    tables: list[np.ndarray], obs: np.ndarray, q_sets: list[list[np.ndarray]]
) -> np.ndarray:
    """Per-modality partial sums; -inf marks zero likelihood under support."""
    m_count = len(tables)
    partials = np.empty(m_count, dtype=np.float64)
    for m in range(m_count):
        v = tables[m][int(obs[m])]
        if v.dtype != np.float64:
            v = v.astype(np.float64)
        qs = q_sets[m]
        sub = ",".join(_LETTERS[: len(qs)])
        qprod = np.einsum(f"{sub}->{sub.replace(',', '')}", *qs) if len(qs) > 1 else qs[0]
        if np.any((qprod > 0) & (v == 0)):
            partials[m] = NEG_INF
            continue
        lv = np.zeros(v.shape, dtype=np.float64)
        np.log(v, out=lv, where=v > 0)
        terms = np.where(qprod > 0, qprod * lv, 0.0)
        partials[m] = terms.sum(dtype=np.float64)
    return partials


# -- unified dense -----------------------------------------------------------


def dense_loglik(a3: np.ndarray, obs: np.ndarray) -> np.ndarray:
    gathered = a3[np.arange(a3.shape[0]), obs]
    return _masked_log(gathered)


def dense_expected(a3: np.ndarray, obs: np.ndarray, vq: np.ndarray) -> np.ndarray:
    m_count, _, r = a3.shape
    d = vq.shape[1]
    gathered = a3[np.arange(m_count), obs]
    if gathered.dtype != np.float64:
        gathered = gathered.astype(np.float64)
    sub = ",".join("m" + _LETTERS[j] for j in range(d))
    qprod = np.einsum(f"{sub}->m{_LETTERS[:d]}", *(vq[:, j] for j in range(d)))
    qprod = qprod.reshape(m_count, r)
    lv = np.zeros((m_count, r), dtype=np.float64)
    np.log(gathered, out=lv, where=gathered > 0)
    terms = np.where(qprod > 0, qprod * lv, 0.0)
    partials = terms.sum(axis=1, dtype=np.float64)
    partials[np.any((qprod > 0) & (gathered == 0), axis=1)] = NEG_INF
    return partials


# -- unified sparse ----------------------------------------------------------


def sparse_loglik(
    values: np.ndarray,
    flatpos: np.ndarray,
    ptr: np.ndarray,
    obs: np.ndarray,
    l_max: int,
    m_count: int,
    r: int,
) -> np.ndarray:
    sel = _run_select(ptr, obs, l_max)
    out = np.full(m_count * r, -np.inf, dtype=values.dtype)
    out[flatpos[sel]] = np.log(values[sel])
    return out.reshape(m_count, r)


def sparse_expected(
    values: np.ndarray,
    dep_coords: np.ndarray,
    mod_ids: np.ndarray,
    ptr: np.ndarray,
    obs: np.ndarray,
    l_max: int,
    vq: np.ndarray,
    support_sizes: np.ndarray,
) -> np.ndarray:
    """Stored-entry contraction; support counting detects hidden zeros.

    A modality goes to -inf exactly when fewer stored entries carry positive
    belief weight than the belief support admits, i.e. some supported state
    combination has zero likelihood.
    """
    m_count = obs.shape[0]
    sel = _run_select(ptr, obs, l_max)
    m_e = mod_ids[sel].astype(np.int64)
    d = vq.shape[1]
    q = vq[m_e, 0, dep_coords[sel, 0]].copy()
    for j in range(1, d):
        q *= vq[m_e, j, dep_coords[sel, j]]
    pos = q > 0
    terms = np.where(pos, q * np.log(values[sel].astype(np.float64)), 0.0)
    partials = np.bincount(m_e, weights=terms, minlength=m_count)
    covered = np.bincount(m_e, weights=pos.astype(np.float64), minlength=m_count)
    partials[covered < support_sizes] = NEG_INF
    return partials
