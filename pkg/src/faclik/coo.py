"""Coordinate-format sparse tensors.

Storage is (coords, values) with coordinates kept lexicographically sorted
and duplicate-free; exact zeros are never stored. Coordinates are 32-bit,
which the byte accounting makes explicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

INDEX_DTYPE = np.int32
INDEX_BYTES = 4
_MAX_EXTENT = 2**31


@dataclass(frozen=True)
class CooTensor:
    shape: tuple[int, ...]
    coords: np.ndarray  # [nnz, ndim] int32, lexicographically sorted, unique
    values: np.ndarray  # [nnz] float

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    @property
    def index_width(self) -> int:
        return 32


def to_coo(dense: np.ndarray, threshold: float = 0.0) -> CooTensor:
    """Keep exactly the entries with |v| > threshold, in row-major order."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    a = np.asarray(dense)
    if a.dtype.kind != "f":
        a = a.astype(np.float64)
    if any(s >= _MAX_EXTENT for s in a.shape):
        raise ValueError("extent too large for 32-bit coordinates")
    if a.ndim == 0:
        keep = abs(float(a)) > threshold
        coords = np.empty((1 if keep else 0, 0), dtype=INDEX_DTYPE)
        values = a.reshape(1).copy() if keep else np.empty(0, dtype=a.dtype)
        return CooTensor(shape=(), coords=coords, values=values)
    idx = np.nonzero(np.abs(a) > threshold)
    if idx[0].size:
        coords = np.ascontiguousarray(np.stack(idx, axis=1), dtype=INDEX_DTYPE)
        values = np.ascontiguousarray(a[idx])
    else:
        coords = np.empty((0, a.ndim), dtype=INDEX_DTYPE)
        values = np.empty(0, dtype=a.dtype)
    coords.flags.writeable = False
    values.flags.writeable = False
    return CooTensor(shape=a.shape, coords=coords, values=values)


def to_dense(t: CooTensor) -> np.ndarray:
    """Exact inverse of `to_coo` at threshold 0."""
    out = np.zeros(t.shape, dtype=t.values.dtype if t.values.size else np.float64)
    if t.nnz:
        out[tuple(t.coords.T)] = t.values
    return out


def gather_axis0(t: CooTensor, index: int) -> CooTensor:
    """Slice at axis-0 position `index`, dropping that axis."""
    if t.ndim == 0:
        raise IndexError("cannot slice a 0-d tensor")
    if not 0 <= index < t.shape[0]:
        raise IndexError(f"index {index} out of range [0, {t.shape[0]})")
    lo, hi = np.searchsorted(t.coords[:, 0], [index, index + 1])
    return CooTensor(shape=t.shape[1:], coords=t.coords[lo:hi, 1:], values=t.values[lo:hi])


def contract_factorized(t: CooTensor, weights: Sequence[np.ndarray]) -> float:
    """Sum of value * prod_i weights[i][coord_i] over stored entries.

    Entries absent from storage contribute exactly zero.
    """
    if len(weights) != t.ndim:
        raise ValueError(f"need {t.ndim} weight vectors, got {len(weights)}")
    ws = []
    for i, w in enumerate(weights):
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (t.shape[i],):
            raise ValueError(f"weight {i} has shape {w.shape}, expected ({t.shape[i]},)")
        ws.append(w)
    if t.nnz == 0:
        return 0.0
    acc = t.values.astype(np.float64).copy()
    for i, w in enumerate(ws):
        acc *= w[t.coords[:, i]]
    return float(acc.sum())


def coo_bytes(t: CooTensor, value_bytes: int = 8) -> int:
    """Representation size: one value plus one 32-bit coordinate per axis."""
    if value_bytes not in (4, 8):
        raise ValueError("value_bytes must be 4 or 8")
    return t.nnz * (value_bytes + INDEX_BYTES * t.ndim)
