"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``."""
import numpy as np


class FenwickTree:
    """Binary indexed tree over positions 1..n holding integer counts."""

    def __init__(self, n):
        self.n = n
        self._tree = [0] * (n + 1)

    def add(self, idx, delta=1):
        tree = self._tree
        while idx <= self.n:
            tree[idx] += delta
            idx += idx & -idx

    def prefix_sum(self, idx):
        """Sum of positions 1..idx (inclusive)."""
        idx = min(idx, self.n)
        total = 0
        tree = self._tree
        while idx > 0:
            total += tree[idx]
            idx &= idx - 1
        return total


def sweep_block(rows, cols, n, i0, i1, counts):
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    # work on the running prefix directly: inserting column c bumps prefix[c:]
    prefix = np.cumsum(counts, dtype=np.int64)
    ptr = int(np.searchsorted(rows, i0, side="left"))
    npts = rows.shape[0]
    jv = np.arange(n + 1, dtype=np.int64)
    s = 0
    a = 0
    for i in range(i0, i1):
        while ptr < npts and rows[ptr] <= i:
            c = cols[ptr]
            counts[c] += 1
            prefix[c:] += 1
            ptr += 1
        d = n * prefix[1:] - i * jv[1:]
        s += int(d.sum())
        a += int(np.abs(d).sum())
    return s, a


def count_queries(rows, cols, n, qi, qj):
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    qi = np.asarray(qi, dtype=np.int64)
    qj = np.asarray(qj, dtype=np.int64)
    out = np.zeros(qi.shape[0], dtype=np.int64)
    tree = FenwickTree(n)
    ptr = 0
    npts = rows.shape[0]
    for q in np.argsort(qi, kind="stable"):
        limit = qi[q]
        while ptr < npts and rows[ptr] <= limit:
            tree.add(int(cols[ptr]))
            ptr += 1
        out[q] = tree.prefix_sum(int(qj[q]))
    return out
