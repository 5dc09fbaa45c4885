"""Backend selection for the quadratic empirical-copula kernels.

The compiled Cython module is used when importable. Setting the environment
variable ``RANKDEP_BACKEND=python`` forces the numpy fallback, which returns
bit-identical results.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from rankdep import _kernels_py

try:
    from rankdep import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

#: Largest sample for which ``n**4`` fits in a signed 64-bit accumulator.
MAX_KERNEL_N = 50_000

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled


def available_backends():
    return sorted(_BACKENDS)


def _select():
    wanted = os.environ.get("RANKDEP_BACKEND", "").strip().lower()
    if wanted:
        if wanted not in _BACKENDS:
            raise ImportError(
                f"RANKDEP_BACKEND={wanted!r} unavailable; have {available_backends()}"
            )
        return wanted
    return "cython" if _compiled is not None else "python"


BACKEND = _select()


def get_backend(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    try:
        return _BACKENDS[name or BACKEND]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}") from None


def deviation_sums(rows, cols, n, *, threads=1, backend=None):
    """Exact integer sums over the empirical copula grid.

    Returns ``(S, A)`` with ``S = sum_ij (n*c_ij - i*j)`` and
    ``A = sum_ij |n*c_ij - i*j|``, where ``c_ij`` counts points with row rank
    ``<= i`` and column rank ``<= j``. ``rows`` must be sorted ascending and
    ``cols`` aligned with it, both 1-based.

    Rows are split into ``threads`` contiguous blocks; partial sums are
    reduced in block order, so the result does not depend on ``threads``.
    """
    if n > MAX_KERNEL_N:
        raise ValueError(f"n={n} exceeds the exact-accumulation limit {MAX_KERNEL_N}")
    impl = get_backend(backend)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    cols = np.ascontiguousarray(cols, dtype=np.int64)
    threads = max(1, min(int(threads), n))
    bounds = np.linspace(1, n + 1, threads + 1).astype(np.int64)

    def run(b):
        i0, i1 = int(bounds[b]), int(bounds[b + 1])
        before = rows < i0
        counts = np.bincount(cols[before], minlength=n + 1).astype(np.int64)
        return impl.sweep_block(rows, cols, n, i0, i1, counts)

    if threads == 1:
        parts = [run(0)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(threads)))
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def grid_counts(rows, cols, n, qi, qj, *, backend=None):
    """``#{k : rows_k <= qi, cols_k <= qj}`` for each query pair."""
    impl = get_backend(backend)
    return impl.count_queries(
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
        int(n),
        np.ascontiguousarray(qi, dtype=np.int64),
        np.ascontiguousarray(qj, dtype=np.int64),
    )
