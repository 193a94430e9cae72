# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the likelihood backends.

Same contracts as `pykernels`: zero likelihood -> -inf, zero belief weight
skips a term, per-modality partials are accumulated in 64-bit no matter the
value dtype. The ragged kernels process one modality slice per call; the
unified kernels cover the whole packed model in one call.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, log

ctypedef fused floating:
    float
    double

DEF MAX_SLOTS = 16


def slice_loglik(const floating[::1] v, floating[::1] out):
    """Elementwise log with -inf at zeros, over one flattened slice."""
    cdef Py_ssize_t i, n = v.shape[0]
    for i in range(n):
        if v[i] > 0:
            out[i] = <floating>log(<double>v[i])
        else:
            out[i] = -INFINITY


def slice_expected(const floating[::1] v, const double[:, ::1] q2d,
                   const cnp.int64_t[::1] dims):
    """(partial, dead) for one modality slice in declared-dep axis order.

    `q2d` row j is the belief marginal on the j-th dependency (padded row
    width); `dims` gives the true extents. Walks the slice in row-major
    order with an odometer, maintaining prefix products of the weights.
    """
    cdef Py_ssize_t d = dims.shape[0]
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t idx[MAX_SLOTS]
    cdef double pref[MAX_SLOTS + 1]
    cdef Py_ssize_t cell, j, k
    cdef double q, acc = 0.0
    cdef bint dead = False

    if d > MAX_SLOTS:
        raise ValueError("too many dependency axes for the compiled kernel")
    pref[0] = 1.0
    for j in range(d):
        idx[j] = 0
        pref[j + 1] = pref[j] * q2d[j, 0]

    for cell in range(n):
        q = pref[d]
        if q > 0:
            if v[cell] > 0:
                acc += q * log(<double>v[cell])
            else:
                dead = True
        if cell + 1 == n:
            break
        j = d - 1
        while True:
            idx[j] += 1
            if idx[j] < dims[j]:
                break
            idx[j] = 0
            j -= 1
        for k in range(j, d):
            pref[k + 1] = pref[k] * q2d[k, idx[k]]

    return (-INFINITY if dead else acc), dead


def dense_loglik(const floating[:, :, ::1] a3, const cnp.int64_t[::1] obs,
                 floating[:, ::1] out):
    """Gather each modality's observed row of the packed array, log it."""
    cdef Py_ssize_t m, i, M = a3.shape[0], r = a3.shape[2]
    cdef Py_ssize_t o
    cdef floating val
    for m in range(M):
        o = <Py_ssize_t>obs[m]
        for i in range(r):
            val = a3[m, o, i]
            if val > 0:
                out[m, i] = <floating>log(<double>val)
            else:
                out[m, i] = -INFINITY


def dense_expected(const floating[:, :, ::1] a3, const cnp.int64_t[::1] obs,
                   const double[:, :, ::1] vq, double[::1] partials):
    """Padded-grid contraction per modality; padding weights are zero."""
    cdef Py_ssize_t M = a3.shape[0], r = a3.shape[2]
    cdef Py_ssize_t d = vq.shape[1], k_max = vq.shape[2]
    cdef Py_ssize_t idx[MAX_SLOTS]
    cdef double pref[MAX_SLOTS + 1]
    cdef Py_ssize_t m, o, cell, j, k
    cdef double q, acc
    cdef bint dead
    cdef floating val

    if d > MAX_SLOTS:
        raise ValueError("too many dependency axes for the compiled kernel")
    pref[0] = 1.0
    for m in range(M):
        o = <Py_ssize_t>obs[m]
        acc = 0.0
        dead = False
        for j in range(d):
            idx[j] = 0
            pref[j + 1] = pref[j] * vq[m, j, 0]
        for cell in range(r):
            q = pref[d]
            if q > 0:
                val = a3[m, o, cell]
                if val > 0:
                    acc += q * log(<double>val)
                else:
                    dead = True
            if cell + 1 == r:
                break
            j = d - 1
            while True:
                idx[j] += 1
                if idx[j] < k_max:
                    break
                idx[j] = 0
                j -= 1
            for k in range(j, d):
                pref[k + 1] = pref[k] * vq[m, k, idx[k]]
        partials[m] = -INFINITY if dead else acc


def sparse_loglik(const floating[::1] values, const cnp.int64_t[::1] flatpos,
                  const cnp.int64_t[::1] ptr, const cnp.int64_t[::1] obs,
                  Py_ssize_t l_max, floating[::1] out):
    """Scatter logs of the observed runs into a -inf-filled padded buffer."""
    cdef Py_ssize_t i, n = out.shape[0]
    cdef Py_ssize_t m, e, lo, hi, M = obs.shape[0]
    for i in range(n):
        out[i] = -INFINITY
    for m in range(M):
        lo = <Py_ssize_t>ptr[m * l_max + obs[m]]
        hi = <Py_ssize_t>ptr[m * l_max + obs[m] + 1]
        for e in range(lo, hi):
            out[flatpos[e]] = <floating>log(<double>values[e])


def sparse_expected(const floating[::1] values, const cnp.int32_t[:, ::1] dep_coords,
                    const cnp.int64_t[::1] ptr, const cnp.int64_t[::1] obs,
                    Py_ssize_t l_max, const double[:, :, ::1] vq,
                    const cnp.int64_t[::1] support_sizes, double[::1] partials):
    """Stored-entry contraction per modality with support counting.

    A modality is -inf exactly when the number of stored entries carrying
    positive weight falls short of the belief support size, i.e. some
    supported state combination has zero likelihood.
    """
    cdef Py_ssize_t M = obs.shape[0], d = vq.shape[1]
    cdef Py_ssize_t m, e, j, lo, hi
    cdef double q, acc
    cdef cnp.int64_t covered
    for m in range(M):
        lo = <Py_ssize_t>ptr[m * l_max + obs[m]]
        hi = <Py_ssize_t>ptr[m * l_max + obs[m] + 1]
        acc = 0.0
        covered = 0
        for e in range(lo, hi):
            q = 1.0
            for j in range(d):
                q *= vq[m, j, dep_coords[e, j]]
            if q > 0:
                acc += q * log(<double>values[e])
                covered += 1
        partials[m] = acc if covered >= support_sizes[m] else -INFINITY
