"""Rank transforms, empirical distribution and quantile functions."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from rankdep.errors import TieError
from rankdep.ingest import BivariateSample
from rankdep.rng import make_rng

#: Fraction of tied observations above which results carry a warning.
TIE_WARN_FRACTION = 0.05


@dataclass(frozen=True)
class TiePolicy:
    """How tied values are ranked: ``average``, ``min``, ``random`` or ``error``."""

    kind: str = "average"
    seed: int = 0

    _ALIASES = {"avg": "average", "average": "average", "min": "min",
                "random": "random", "error": "error"}

    def __post_init__(self):
        kind = self._ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown tie policy {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "TiePolicy":
        return cls(text.strip().lower(), seed)

    def describe(self) -> str:
        return f"random({self.seed})" if self.kind == "random" else self.kind


@dataclass(frozen=True)
class TieReport:
    x_groups: int = 0
    x_tied: int = 0
    y_groups: int = 0
    y_tied: int = 0
    n: int = 0
    either_tied: int = 0

    @property
    def fraction(self) -> float:
        """Share of observations tied on at least one axis."""
        return self.either_tied / self.n if self.n else 0.0

    @property
    def has_ties(self) -> bool:
        return self.x_groups > 0 or self.y_groups > 0

    def as_dict(self):
        return {"x_groups": self.x_groups, "x_tied": self.x_tied,
                "y_groups": self.y_groups, "y_tied": self.y_tied}


@dataclass(frozen=True)
class PseudoObservations:
    """Rank-scaled pairs ``(u_k, v_k)``: the data of a rank plot.

    For tie-free data produced by :func:`rank_transform`, ``sorted(u)`` is
    exactly ``(1/n, 2/n, ..., 1)``. Samples drawn directly from a copula model
    are also stored in this type; they are uniform on (0, 1) but not on the
    rank grid.
    """

    u: np.ndarray
    v: np.ndarray
    ties: TieReport = field(default_factory=TieReport)
    policy: TiePolicy = field(default_factory=TiePolicy)

    def __post_init__(self):
        u = np.array(self.u, dtype=np.float64)
        v = np.array(self.v, dtype=np.float64)
        if u.shape != v.shape or u.ndim != 1:
            raise ValueError("u and v must be 1-d arrays of equal length")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return int(self.u.shape[0])

    def take(self, index) -> "PseudoObservations":
        """Subset of the pairs, re-ranked within the subset."""
        return pseudo_from_arrays(self.u[index], self.v[index], self.policy)

    def swapped(self) -> "PseudoObservations":
        t = self.ties
        return PseudoObservations(
            self.v, self.u,
            TieReport(t.y_groups, t.y_tied, t.x_groups, t.x_tied, t.n, t.either_tied),
            self.policy,
        )


def _tie_counts(values: np.ndarray) -> tuple[int, int, np.ndarray]:
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    tied = counts[counts > 1]
    return int(tied.shape[0]), int(tied.sum()), counts[inverse] > 1


def _ranks(values: np.ndarray, policy: TiePolicy, salt: int) -> np.ndarray:
    if policy.kind == "average":
        return rankdata(values, method="average")
    if policy.kind == "min":
        return rankdata(values, method="min").astype(np.float64)
    # random and error: tie-free ordinal ranks from a stable argsort
    if policy.kind == "random":
        jitter = make_rng(policy.seed + salt).permutation(values.shape[0])
        order = np.lexsort((jitter, values))
    else:
        order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    ranks[order] = np.arange(1, values.shape[0] + 1, dtype=np.float64)
    return ranks


def pseudo_from_arrays(x, y, policy: TiePolicy = TiePolicy()) -> PseudoObservations:
    """Rank-transform two aligned arrays (no sample validation)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    xg, xt, xmask = _tie_counts(x)
    yg, yt, ymask = _tie_counts(y)
    report = TieReport(xg, xt, yg, yt, n, int(np.count_nonzero(xmask | ymask)))
    if policy.kind == "error" and report.has_ties:
        raise TieError(f"ties present (x: {xt} values in {xg} groups, y: {yt} in {yg})")
    u = _ranks(x, policy, 0) / n
    v = _ranks(y, policy, 1) / n
    return PseudoObservations(u, v, report, policy)


def rank_transform(s: BivariateSample, policy: TiePolicy = TiePolicy()) -> PseudoObservations:
    """Pseudo-observations ``u_k = rank(x_k)/n``, ``v_k = rank(y_k)/n``.

    Each axis is ranked independently, so the result is unchanged by any
    strictly increasing transform of either variable.
    """
    p = pseudo_from_arrays(s.x, s.y, policy)
    if p.ties.fraction > TIE_WARN_FRACTION:
        warnings.warn(
            f"{100 * p.ties.fraction:.1f}% of observations are tied; copula-based "
            "measures assume continuous variables and are only tie-adjusted",
            stacklevel=2,
        )
    return p


def ecdf(values: Sequence[float], q: float) -> float:
    """Empirical distribution function ``#{values <= q} / n``."""
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.shape[0] == 0:
        raise ValueError("ecdf of an empty sequence")
    return int(np.searchsorted(arr, q, side="right")) / arr.shape[0]


def _quantile_index(n: int, p: float) -> int:
    # smallest k in 1..n with k/n >= p, guarding against float round-off in p*n
    k = max(1, math.ceil(p * n))
    while k > 1 and (k - 1) / n >= p:
        k -= 1
    while k < n and k / n < p:
        k += 1
    return k


def empirical_quantile(values: Sequence[float], p: float) -> float:
    """Left-continuous generalized inverse of the empirical CDF.

    Returns the smallest order statistic ``x_(k)`` with ``k/n >= p``.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.shape[0] == 0:
        raise ValueError("quantile of an empty sequence")
    return float(arr[_quantile_index(arr.shape[0], p) - 1])
