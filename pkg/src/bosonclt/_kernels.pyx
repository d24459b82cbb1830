# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled occupation-basis kernels. Same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def composition_table(int M, int N):
    """``table[m, r]`` = number of occupations of ``m`` modes with ``r`` bosons."""
    cdef cnp.int64_t[:, :] t = np.zeros((M + 1, N + 1), dtype=np.int64)
    cdef int m, r
    for r in range(N + 1):
        t[1, r] = 1
    for m in range(2, M + 1):
        t[m, 0] = 1
        for r in range(1, N + 1):
            t[m, r] = t[m, r - 1] + t[m - 1, r]
    return np.asarray(t)


def enumerate_sector(int M, int N):
    table = composition_table(M, N)
    cdef Py_ssize_t dim = table[M, N]
    cdef cnp.int64_t[:, :] out = np.zeros((dim, M), dtype=np.int64)
    cdef cnp.int64_t[:] cur = np.zeros(M, dtype=np.int64)
    cdef Py_ssize_t row, p, q
    cdef long rest
    if M == 0:
        return np.asarray(out)
    cur[0] = N
    for row in range(dim):
        for q in range(M):
            out[row, q] = cur[q]
        if row == dim - 1:
            break
        # next state in descending lexicographic order
        p = M - 2
        while cur[p] == 0:
            p -= 1
        cur[p] -= 1
        rest = cur[M - 1] + 1
        cur[M - 1] = 0
        for q in range(p + 1, M - 1):
            rest += cur[q]
            cur[q] = 0
        cur[p + 1] = rest
    return np.asarray(out)


cdef inline Py_ssize_t _rank(const cnp.int64_t[:] occ, int M, long N, cnp.int64_t[:, :] t) nogil:
    cdef Py_ssize_t idx = 0
    cdef long r = N
    cdef int p
    cdef long v
    for p in range(M - 1):
        for v in range(occ[p] + 1, r + 1):
            idx += t[M - p - 1, r - v]
        r -= occ[p]
    return idx


def rank_states(const cnp.int64_t[:, :] occ, int N):
    cdef Py_ssize_t k = occ.shape[0], s
    cdef int M = occ.shape[1]
    cdef cnp.int64_t[:, :] t = composition_table(M, N)
    out = np.empty(k, dtype=np.int64)
    cdef cnp.int64_t[:] o = out
    for s in range(k):
        o[s] = _rank(occ[s], M, N, t)
    return out


def hop_structure(const cnp.int64_t[:, :] occ, int N):
    """Nonzero elements of ``b*_i b_j`` on a sector.

    Returns ``rows, cols, pair, amp`` with ``pair = i*M + j``.
    """
    cdef Py_ssize_t dim = occ.shape[0], s, n = 0
    cdef int M = occ.shape[1], i, j, q
    cdef cnp.int64_t[:, :] t = composition_table(M, N)
    cdef Py_ssize_t cap = dim * M * M
    rows_a = np.empty(cap, dtype=np.int64)
    cols_a = np.empty(cap, dtype=np.int64)
    pair_a = np.empty(cap, dtype=np.int64)
    amp_a = np.empty(cap, dtype=np.float64)
    cdef cnp.int64_t[:] rows = rows_a, cols = cols_a, pair = pair_a
    cdef double[:] amp = amp_a
    cdef cnp.int64_t[:] work = np.empty(M, dtype=np.int64)
    cdef double a
    for s in range(dim):
        for j in range(M):
            if occ[s, j] == 0:
                continue
            for i in range(M):
                for q in range(M):
                    work[q] = occ[s, q]
                a = sqrt(<double>work[j])
                work[j] -= 1
                a *= sqrt(<double>(work[i] + 1))
                work[i] += 1
                rows[n] = _rank(work, M, N, t)
                cols[n] = s
                pair[n] = i * M + j
                amp[n] = a
                n += 1
    return rows_a[:n], cols_a[:n], pair_a[:n], amp_a[:n]


def raise_structure(const cnp.int64_t[:, :] occ, int N):
    """Nonzero elements of ``b*_i`` from sector ``N`` into sector ``N + 1``.

    Returns ``rows, cols, mode, amp``.
    """
    cdef Py_ssize_t dim = occ.shape[0], s, n = 0
    cdef int M = occ.shape[1], i, q
    cdef cnp.int64_t[:, :] t = composition_table(M, N + 1)
    rows_a = np.empty(dim * M, dtype=np.int64)
    cols_a = np.empty(dim * M, dtype=np.int64)
    mode_a = np.empty(dim * M, dtype=np.int64)
    amp_a = np.empty(dim * M, dtype=np.float64)
    cdef cnp.int64_t[:] rows = rows_a, cols = cols_a, mode = mode_a
    cdef double[:] amp = amp_a
    cdef cnp.int64_t[:] work = np.empty(M, dtype=np.int64)
    for s in range(dim):
        for i in range(M):
            for q in range(M):
                work[q] = occ[s, q]
            amp[n] = sqrt(<double>(work[i] + 1))
            work[i] += 1
            rows[n] = _rank(work, M, N + 1, t)
            cols[n] = s
            mode[n] = i
            n += 1
    return rows_a, cols_a, mode_a, amp_a
