# cython: language_level=3
"""Compiled O(n^2) sweep and Fenwick count kernels.

Mirror of ``_kernels_py``; both modules expose the same functions and must
return identical integers.
"""
from libc.stdlib cimport calloc, free

import numpy as np


def sweep_block(const long long[::1] rows, const long long[::1] cols,
                Py_ssize_t n, Py_ssize_t i0, Py_ssize_t i1,
                long long[::1] counts):
    """Signed and absolute sums of ``n*c_ij - i*j`` for rows ``i0 <= i < i1``.

    ``counts[j]`` must hold, on entry, the number of points with row rank
    below ``i0`` and column rank ``j`` (1-based, ``counts`` has length n+1).
    It is updated in place.
    """
    cdef Py_ssize_t npts = rows.shape[0]
    cdef Py_ssize_t ptr, i, j
    cdef long long running, d, s = 0, a = 0
    cdef long long nn = n
    # skip points already folded into counts
    lo, hi = 0, npts
    while lo < hi:
        mid = (lo + hi) // 2
        if rows[mid] < i0:
            lo = mid + 1
        else:
            hi = mid
    ptr = lo
    with nogil:
        for i in range(i0, i1):
            while ptr < npts and rows[ptr] <= i:
                counts[cols[ptr]] += 1
                ptr += 1
            running = 0
            for j in range(1, n + 1):
                running += counts[j]
                d = nn * running - <long long>i * <long long>j
                s += d
                a += d if d >= 0 else -d
    return s, a


def count_queries(const long long[::1] rows, const long long[::1] cols,
                  Py_ssize_t n, const long long[::1] qi, const long long[::1] qj):
    """Count points with ``row <= qi[k]`` and ``col <= qj[k]`` for every query.

    Offline sweep: queries sorted by row, points inserted into a Fenwick tree
    keyed by column.
    """
    cdef Py_ssize_t nq = qi.shape[0]
    cdef Py_ssize_t npts = rows.shape[0]
    out = np.zeros(nq, dtype=np.int64)
    cdef long long[::1] res = out
    order_arr = np.argsort(np.asarray(qi), kind="stable").astype(np.int64)
    cdef long long[::1] order = order_arr
    cdef long long *tree = <long long *> calloc(n + 1, sizeof(long long))
    if tree == NULL:
        raise MemoryError()
    cdef Py_ssize_t ptr = 0, k, q, idx
    cdef long long total
    try:
        with nogil:
            for k in range(nq):
                q = order[k]
                while ptr < npts and rows[ptr] <= qi[q]:
                    idx = cols[ptr]
                    while idx <= n:
                        tree[idx] += 1
                        idx += idx & (-idx)
                    ptr += 1
                idx = qj[q]
                if idx > n:
                    idx = n
                total = 0
                while idx > 0:
                    total += tree[idx]
                    idx -= idx & (-idx)
                res[q] = total
    finally:
        free(tree)
    return out
