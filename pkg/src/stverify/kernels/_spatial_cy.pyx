# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementation of the spatial fixpoint kernels.

Mirrors the NumPy fallback in ``_spatial_np``: same signatures, same
max-min semantics, columns of the (I, S) inputs are independent problems.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double NEG_INF = -np.inf


def reach_fixpoint(via, target, nbr_matrix, int d):
    """Best max-min route value within d hops (see the NumPy twin)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] via_c = \
        np.ascontiguousarray(via, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = \
        np.ascontiguousarray(target, dtype=np.float64).copy()
    cdef cnp.ndarray[cnp.int64_t, ndim=2] nbr = \
        np.ascontiguousarray(nbr_matrix, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] new = np.empty_like(out)
    cdef Py_ssize_t n = out.shape[0], s = out.shape[1]
    cdef Py_ssize_t deg = nbr.shape[1]
    cdef Py_ssize_t i, j, t, k, step
    cdef double best, cand
    cdef bint changed

    for step in range(d):
        changed = False
        for i in range(n):
            for t in range(s):
                best = NEG_INF
                for k in range(deg):
                    j = nbr[i, k]
                    if j >= n:
                        break
                    if out[j, t] > best:
                        best = out[j, t]
                cand = via_c[i, t] if via_c[i, t] < best else best
                if cand > out[i, t]:
                    new[i, t] = cand
                    changed = True
                else:
                    new[i, t] = out[i, t]
        if not changed:
            break
        out, new = new, out
    return np.asarray(out)


def escape_fixpoint(values, nbr_matrix, hop_matrix, int d_lo, int d_hi):
    """Best max-min route value into a hop-distance window (see NumPy twin)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vals = \
        np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] nbr = \
        np.ascontiguousarray(nbr_matrix, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] hop = \
        np.ascontiguousarray(hop_matrix, dtype=np.int64)
    cdef Py_ssize_t n = vals.shape[0], s = vals.shape[1]
    cdef Py_ssize_t deg = nbr.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] e = \
        np.full((n, n, s), NEG_INF)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] new = np.empty((n, n, s))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = \
        np.full((n, s), NEG_INF)
    cdef Py_ssize_t i, j, t, k, dest, step
    cdef double best, cand, vi
    cdef bint changed

    for i in range(n):
        for t in range(s):
            e[i, i, t] = vals[i, t]

    for step in range(n - 1):
        changed = False
        for i in range(n):
            for dest in range(n):
                for t in range(s):
                    best = NEG_INF
                    for k in range(deg):
                        j = nbr[i, k]
                        if j >= n:
                            break
                        if e[j, dest, t] > best:
                            best = e[j, dest, t]
                    vi = vals[i, t]
                    cand = vi if vi < best else best
                    if cand > e[i, dest, t]:
                        new[i, dest, t] = cand
                        changed = True
                    else:
                        new[i, dest, t] = e[i, dest, t]
        if not changed:
            break
        e, new = new, e

    for i in range(n):
        for dest in range(n):
            if hop[i, dest] < 0 or hop[i, dest] < d_lo or hop[i, dest] > d_hi:
                continue
            for t in range(s):
                if e[i, dest, t] > out[i, t]:
                    out[i, t] = e[i, dest, t]
    return np.asarray(out)
