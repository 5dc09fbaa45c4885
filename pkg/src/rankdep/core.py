"""Empirical copula, Spearman and Schweizer-Wolff estimators, diagonal sections.

All grid quantities are handled as integers: ``c_ij`` is the number of points
with x-rank ``<= i`` and y-rank ``<= j``, so ``C_n(i/n, j/n) = c_ij / n``.
Both estimators reduce to the integer sums

    S = sum_ij (n*c_ij - i*j)        A = sum_ij |n*c_ij - i*j|

and ``rho_n = 12 S / (n^2 (n^2 - 1))``, ``sigma_n = 12 A / (n^2 (n^2 - 1))``.
The final division is a correctly rounded int/int division, so results are
bit-identical across platforms, backends and thread counts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from rankdep import kernels
from rankdep.errors import DataError
from rankdep.ingest import BivariateSample, subsample
from rankdep.ranks import PseudoObservations
from rankdep.rng import make_rng

#: Samples above this size must be subsampled explicitly before analysis.
DEFAULT_MAX_N = 20_000


@dataclass(frozen=True)
class EmpiricalCopula:
    """Implicit representation of the empirical copula on the grid ``{i/n}``.

    ``rows`` holds the x-ranks sorted ascending and ``perm`` the y-rank of the
    matching point. Without ties ``rows == 1..n`` and ``perm`` is a
    permutation. With ties both are min-ranks, which reproduces the
    order-statistic definition ``#{x_k <= x_(i), y_k <= y_(j)}`` exactly.
    """

    n: int
    perm: np.ndarray
    rows: np.ndarray
    tie_adjusted: bool = False

    def counts(self, i, j) -> np.ndarray:
        """Integer counts ``c_ij`` for aligned index arrays ``i``, ``j``."""
        i = np.atleast_1d(np.asarray(i, dtype=np.int64))
        j = np.atleast_1d(np.asarray(j, dtype=np.int64))
        return kernels.grid_counts(self.rows, self.perm, self.n, i, j)

    def transpose(self) -> "EmpiricalCopula":
        order = np.lexsort((self.rows, self.perm))
        return EmpiricalCopula(self.n, self.rows[order], self.perm[order], self.tie_adjusted)


def _copula_from_ranks(xr: np.ndarray, yr: np.ndarray) -> EmpiricalCopula:
    n = xr.shape[0]
    order = np.lexsort((yr, xr))
    rows = np.ascontiguousarray(xr[order], dtype=np.int64)
    perm = np.ascontiguousarray(yr[order], dtype=np.int64)
    tied = not (np.array_equal(rows, np.arange(1, n + 1))
                and np.array_equal(np.sort(perm), np.arange(1, n + 1)))
    rows.setflags(write=False)
    perm.setflags(write=False)
    return EmpiricalCopula(n, perm, rows, tied)


def empirical_copula(p: PseudoObservations) -> EmpiricalCopula:
    """Build the empirical copula of a set of pseudo-observations."""
    if p.n < 2:
        raise DataError("empirical copula needs at least 2 points")
    if np.all(p.u == p.u[0]) or np.all(p.v == p.v[0]):
        raise DataError("an axis is constant; the empirical copula is degenerate")
    xr = rankdata(p.u, method="min").astype(np.int64)
    yr = rankdata(p.v, method="min").astype(np.int64)
    return _copula_from_ranks(xr, yr)


def copula_from_permutation(perm) -> EmpiricalCopula:
    """Empirical copula of tie-free data given y-ranks in x-rank order (1-based)."""
    perm = np.asarray(perm, dtype=np.int64)
    n = perm.shape[0]
    if not np.array_equal(np.sort(perm), np.arange(1, n + 1)):
        raise ValueError("perm must be a permutation of 1..n")
    return _copula_from_ranks(np.arange(1, n + 1, dtype=np.int64), perm)


def copula_value(C: EmpiricalCopula, i: int, j: int) -> float:
    """``C_n(i/n, j/n)`` for grid indices ``0 <= i, j <= n``."""
    if not (0 <= i <= C.n and 0 <= j <= C.n):
        raise IndexError(f"grid index ({i}, {j}) outside 0..{C.n}")
    if i == 0 or j == 0:
        return 0.0
    return int(C.counts(i, j)[0]) / C.n


def _normalize(total: int, n: int) -> float:
    return 12 * total / (n * n * (n * n - 1))


def deviation_sums(C: EmpiricalCopula, threads: int = 1) -> tuple[int, int]:
    return kernels.deviation_sums(C.rows, C.perm, C.n, threads=threads)


def spearman_rho(C: EmpiricalCopula, threads: int = 1) -> float:
    """Empirical Spearman concordance: signed grid sum of ``C_n - Pi``."""
    s, _ = deviation_sums(C, threads)
    return _normalize(s, C.n)


def schweizer_wolff(C: EmpiricalCopula, threads: int = 1) -> float:
    """Empirical Schweizer-Wolff dependence: absolute grid sum of ``C_n - Pi``.

    Row-streaming sweep, O(n^2) time and O(n) memory.
    """
    _, a = deviation_sums(C, threads)
    return _normalize(a, C.n)


def pearson_r(s: BivariateSample) -> Optional[float]:
    """Sample Pearson correlation, ``None`` when an axis has zero variance."""
    x = s.x - s.x.mean()
    y = s.y - s.y.mean()
    sxx = float(np.dot(x, x))
    syy = float(np.dot(y, y))
    if sxx == 0.0 or syy == 0.0:
        return None
    return float(np.clip(np.dot(x, y) / np.sqrt(sxx * syy), -1.0, 1.0))


@dataclass(frozen=True)
class MeasurePair:
    rho_n: float
    sigma_n: float
    pearson_r: Optional[float] = None
    tie_adjusted: bool = False


def measures(C: EmpiricalCopula, sample: Optional[BivariateSample] = None,
             threads: int = 1) -> MeasurePair:
    """Both estimators from a single sweep, plus Pearson's r when raw data is given."""
    s, a = deviation_sums(C, threads)
    r = pearson_r(sample) if sample is not None else None
    return MeasurePair(_normalize(s, C.n), _normalize(a, C.n), r, C.tie_adjusted)


@dataclass(frozen=True)
class DiagonalCurves:
    """Main and secondary diagonal sections of ``C_n`` with reference curves."""

    n: int
    t: np.ndarray
    delta: np.ndarray
    lam: np.ndarray

    @property
    def delta_pi(self) -> np.ndarray:
        return self.t * self.t

    @property
    def lambda_pi(self) -> np.ndarray:
        return self.t * (1.0 - self.t)

    @property
    def delta_lower(self) -> np.ndarray:
        return np.maximum(2.0 * self.t - 1.0, 0.0)

    @property
    def delta_upper(self) -> np.ndarray:
        return self.t.copy()

    @property
    def lambda_lower(self) -> np.ndarray:
        return np.zeros_like(self.t)

    @property
    def lambda_upper(self) -> np.ndarray:
        return np.minimum(self.t, 1.0 - self.t)


def default_grid_size(n: int) -> int:
    return min(n, 512)


def diagonal_sections(C: EmpiricalCopula, m: Optional[int] = None) -> DiagonalCurves:
    """Sample ``delta_n(t) = C_n(t, t)`` and ``lambda_n(t) = C_n(t, 1 - t)``.

    The grid is ``t = k/m`` for ``k = 0..m``; ``C_n`` is read at the grid
    point ``floor(t n) / n`` below each argument.
    """
    m = default_grid_size(C.n) if m is None else int(m)
    if m < 2:
        raise ValueError("diagonal grid needs m >= 2")
    n = C.n
    k = np.arange(m + 1, dtype=np.int64)
    i = (k * n) // m
    j = ((m - k) * n) // m
    counts = C.counts(np.concatenate([i, i]), np.concatenate([i, j]))
    delta = counts[: m + 1] / n
    lam = counts[m + 1:] / n
    return DiagonalCurves(n, k / m, delta, lam)


def permutation_null(C: EmpiricalCopula, B: int, seed: int = 0) -> tuple[int, np.ndarray]:
    """Observed absolute sum and ``B`` sums under random re-pairing of y-ranks."""
    rng = make_rng(seed)
    _, observed = deviation_sums(C)
    null = np.empty(B, dtype=np.int64)
    for b in range(B):
        shuffled = rng.permutation(C.perm)
        null[b] = kernels.deviation_sums(C.rows, shuffled, C.n)[1]
    return observed, null


def independence_permutation_test(p: PseudoObservations, B: int = 199, seed: int = 0) -> float:
    """Permutation p-value for independence using ``sigma_n`` as statistic.

    ``p = (1 + #{b : sigma_b >= sigma_obs}) / (B + 1)``. Comparisons use the
    exact integer sums, so the result is deterministic given ``seed``.
    """
    if B < 19:
        raise ValueError("need at least B=19 permutations")
    observed, null = permutation_null(empirical_copula(p), B, seed)
    return (1 + int(np.count_nonzero(null >= observed))) / (B + 1)


def reduced_for_permutation(p: PseudoObservations, max_n: int, seed: int) -> PseudoObservations:
    """Seeded subsample used to keep the permutation test near-linear in B."""
    if p.n <= max_n:
        return p
    return p.take(_subsample_index(p.n, max_n, seed))


def _subsample_index(n: int, k: int, seed: int) -> np.ndarray:
    proxy = BivariateSample(np.arange(n, dtype=np.float64), np.zeros(n))
    return subsample(proxy, k, seed).x.astype(np.int64)
