# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled permutation hot loops; mirror ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libcpp.algorithm cimport sort, lower_bound

cnp.import_array()


def weighted_partial_sums(R, w):
    cdef const double[:, ::1] r = np.ascontiguousarray(R, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t m = r.shape[0], K = r.shape[1], i, k
    if wv.shape[0] != K:
        raise ValueError("weight length does not match columns")
    out = np.empty((m, K), dtype=np.float64)
    cdef double[:, ::1] s = out
    cdef double[::1] buf = np.empty(K, dtype=np.float64)
    cdef double acc
    with nogil:
        for i in range(m):
            for k in range(K):
                buf[k] = r[i, k] * wv[k]
            sort(&buf[0], &buf[0] + K)
            acc = buf[K - 1]
            s[i, 0] = acc
            for k in range(1, K):
                acc = acc + buf[K - 1 - k]
                s[i, k] = acc
    return out


def column_rank_pvalues(S):
    cdef const double[:, :] src = np.asarray(S, dtype=np.float64)
    cdef Py_ssize_t m = src.shape[0], K = src.shape[1], i, k
    out = np.empty((m, K), dtype=np.float64)
    cdef double[:, ::1] p = out
    cdef double[::1] col = np.empty(m, dtype=np.float64)
    cdef double* pos
    cdef double dm = <double>m
    with nogil:
        for k in range(K):
            for i in range(m):
                col[i] = src[i, k]
            sort(&col[0], &col[0] + m)
            for i in range(m):
                pos = lower_bound(&col[0], &col[0] + m, src[i, k])
                p[i, k] = <double>(m - (pos - &col[0])) / dm
    return out


from libc.stdint cimport uint64_t


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def fisher_yates_permutations(keys, Py_ssize_t n):
    cdef const uint64_t[::1] kv = np.ascontiguousarray(keys, dtype=np.uint64)
    cdef Py_ssize_t m = kv.shape[0], b, i, j, tmp
    out = np.empty((m, n), dtype=np.intp)
    cdef Py_ssize_t[:, ::1] p = out
    cdef uint64_t state, x
    with nogil:
        for b in range(m):
            for i in range(n):
                p[b, i] = i
            state = kv[b]
            for i in range(n - 1, 0, -1):
                state = state + 0x9E3779B97F4A7C15ULL
                x = _mix(state)
                j = <Py_ssize_t>(((x >> 32) * <uint64_t>(i + 1)) >> 32)
                tmp = p[b, j]
                p[b, j] = p[b, i]
                p[b, i] = tmp
    return out
