"""Quadrant-dependence summary, diagonal crossings, gluing scan, R1-R9 labels.

The rank-plot categories follow the usual guideline table:

====  ==========================================  ===========================
R1    uniform                                     (close to) independence
R2    most points close to v = u                  PQD
R3    most points close to v = 1 - u              NQD
R4    some near v = u, some near v = 1 - u        convex mix of PQD and NQD
R5    some near v = u, some uniform               convex mix of PQD and indep.
R6    some near v = 1 - u, some uniform           convex mix of NQD and indep.
R7    PQD for u <= theta, NQD above               gluing PQD | NQD
R8    NQD for u <= theta, PQD above               gluing NQD | PQD
R9    independence on one side, QD on the other   gluing indep. | QD
====  ==========================================  ===========================

The table is qualitative. Every numeric threshold used here (band width,
band-mass cut-offs, epsilon, minimum subset size) is a heuristic and lives in
:class:`AnalysisOptions`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from rankdep import core
from rankdep.core import DiagonalCurves, EmpiricalCopula, MeasurePair
from rankdep.errors import DataError
from rankdep.ingest import BivariateSample
from rankdep.ranks import PseudoObservations, TiePolicy, empirical_quantile, rank_transform

PQD = "PQD"
NQD = "NQD"
NON_QD = "non_QD"
NEAR_INDEPENDENCE = "near_independence"

ABOVE_TO_BELOW = "above_to_below"
BELOW_TO_ABOVE = "below_to_above"


@dataclass(frozen=True)
class AnalysisOptions:
    alpha: float = 0.05
    permutations: int = 199
    seed: int = 0
    # permutation test runs on a seeded subsample above this size
    perm_max_n: int = 1000
    epsilon_floor: float = 0.02
    band_width: float = 0.2
    pure_band: float = 0.8
    mixture_band: float = 0.45
    min_side: int = 20
    min_run: Optional[int] = None
    diag_m: Optional[int] = None
    refine: bool = True
    threads: int = 1
    ties: TiePolicy = field(default_factory=TiePolicy)

    def epsilon(self, n: int) -> float:
        return max(self.epsilon_floor, 2.0 / math.sqrt(n))

    def as_dict(self):
        return {
            "alpha": self.alpha, "permutations": self.permutations, "seed": self.seed,
            "perm_max_n": self.perm_max_n, "epsilon_floor": self.epsilon_floor,
            "band_width": self.band_width, "pure_band": self.pure_band,
            "mixture_band": self.mixture_band, "min_side": self.min_side,
            "min_run": self.min_run, "diag_m": self.diag_m, "refine": self.refine,
            "ties": self.ties.describe(),
        }


@dataclass(frozen=True)
class DependenceSummary:
    measures: MeasurePair
    quadrant_status: str
    independence_p: float
    epsilon_used: float
    n: int
    tie_fraction: float
    perm_n: int

    @property
    def rho_n(self) -> float:
        return self.measures.rho_n

    @property
    def sigma_n(self) -> float:
        return self.measures.sigma_n


def quadrant_status(m: MeasurePair, p_value: float, eps: float, alpha: float) -> str:
    if p_value > alpha:
        return NEAR_INDEPENDENCE
    if m.rho_n > 0 and m.sigma_n - m.rho_n <= eps:
        return PQD
    if m.rho_n < 0 and m.sigma_n + m.rho_n <= eps:
        return NQD
    return NON_QD


def summarize_dependence(p: PseudoObservations, opts: AnalysisOptions = AnalysisOptions(),
                         sample: Optional[BivariateSample] = None,
                         copula: Optional[EmpiricalCopula] = None) -> DependenceSummary:
    """Measures, permutation p-value and quadrant status of one sample.

    Status uses ``eps = max(0.02, 2/sqrt(n))``: PQD when ``sigma - rho <= eps``
    with ``rho > 0``, NQD when ``sigma + rho <= eps`` with ``rho < 0``,
    ``near_independence`` when the permutation test does not reject at
    ``alpha``, and ``non_QD`` otherwise.
    """
    C = copula if copula is not None else core.empirical_copula(p)
    m = core.measures(C, sample, threads=opts.threads)
    reduced = core.reduced_for_permutation(p, opts.perm_max_n, opts.seed)
    pval = core.independence_permutation_test(reduced, opts.permutations, opts.seed)
    eps = opts.epsilon(p.n)
    return DependenceSummary(
        measures=m,
        quadrant_status=quadrant_status(m, pval, eps, opts.alpha),
        independence_p=pval,
        epsilon_used=eps,
        n=p.n,
        tie_fraction=p.ties.fraction,
        perm_n=reduced.n,
    )


# --------------------------------------------------------------------------
# diagonal crossings


@dataclass(frozen=True)
class Crossing:
    t: float
    direction: str
    curve: str


def _default_min_run(m: int) -> int:
    return max(2, m // 32)


def _sign_runs(sign: np.ndarray):
    """(sign, start, stop) for maximal runs of equal nonzero sign."""
    runs = []
    start = None
    for k, s in enumerate(sign.tolist() + [0]):
        if start is not None and s != sign[start]:
            runs.append((int(sign[start]), start, k))
            start = None
        if start is None and s != 0 and k < len(sign):
            start = k
    return runs


def _curve_crossings(t, diff, curve, min_run, band):
    sign = np.where(diff > band, 1, np.where(diff < -band, -1, 0))
    runs = [r for r in _sign_runs(sign) if r[2] - r[1] >= min_run]
    merged = []
    for r in runs:
        if merged and merged[-1][0] == r[0]:
            merged[-1] = (r[0], merged[-1][1], r[2])
        else:
            merged.append(r)
    found = []
    for (sa, _, ea), (sb, startb, _) in zip(merged, merged[1:]):
        lo, hi = ea - 1, startb
        # zero of the raw difference inside the gap nearest its middle
        mid = 0.5 * (t[lo] + t[hi])
        best = None
        for k in range(lo, hi):
            d0, d1 = diff[k], diff[k + 1]
            if d0 == 0 or d0 * d1 < 0 or (d0 * sa > 0 and d1 * sa <= 0):
                frac = 0.0 if d0 == d1 else d0 / (d0 - d1)
                tc = float(t[k] + min(max(frac, 0.0), 1.0) * (t[k + 1] - t[k]))
                if best is None or abs(tc - mid) < abs(best - mid):
                    best = tc
        tc = best if best is not None else float(mid)
        found.append(Crossing(tc, ABOVE_TO_BELOW if sa > 0 else BELOW_TO_ABOVE, curve))
    return found


def detect_crossings(d: DiagonalCurves, min_run: Optional[int] = None,
                     band: Optional[float] = None) -> list[Crossing]:
    """Persistent sign changes of ``delta_n - t^2`` and ``lambda_n - t(1-t)``.

    A point counts as above/below only when the difference exceeds ``band``
    (default ``1/n``, the grid resolution of ``C_n``); sign runs shorter than
    ``min_run`` grid points are ignored.
    """
    m = len(d.t) - 1
    if m + 1 < 16:
        raise ValueError("crossing detection needs at least 16 grid points")
    min_run = _default_min_run(m) if min_run is None else int(min_run)
    band = 1.0 / d.n if band is None else float(band)
    out = _curve_crossings(d.t, d.delta - d.delta_pi, "delta", min_run, band)
    out += _curve_crossings(d.t, d.lam - d.lambda_pi, "lambda", min_run, band)
    return sorted(out, key=lambda c: (c.t, c.curve))


# --------------------------------------------------------------------------
# gluing


@dataclass(frozen=True)
class GluingAnalysis:
    crossings: list
    best_theta: Optional[float]
    split_value: Optional[float]
    left: Optional[DependenceSummary]
    right: Optional[DependenceSummary]
    criterion: Optional[float]
    unsplit_score: float
    candidates: list = field(default_factory=list)

    @property
    def needed(self) -> bool:
        return self.best_theta is not None


def _split_mask(p: PseudoObservations, theta: float) -> np.ndarray:
    # left side is x <= F_n^-1(theta): the ceil(n*theta) smallest ranks
    k = math.ceil(p.n * theta - 1e-9)
    return p.u * p.n <= k + 1e-9


def _side_score(p: PseudoObservations, threads: int = 1) -> tuple[float, MeasurePair]:
    m = core.measures(core.empirical_copula(p), threads=threads)
    return m.sigma_n - abs(m.rho_n), m


def theta_score(p: PseudoObservations, theta: float, threads: int = 1) -> float:
    """``(sigma_L - |rho_L|) + (sigma_R - |rho_R|)`` for a split at ``theta``."""
    mask = _split_mask(p, theta)
    left, _ = _side_score(p.take(mask), threads)
    right, _ = _side_score(p.take(~mask), threads)
    return left + right


def default_theta_grid(crossings: Sequence[Crossing] = ()) -> list[float]:
    grid = {round(k / 10, 10) for k in range(1, 10)}
    for c in crossings:
        for off in (-0.05, 0.0, 0.05):
            grid.add(round(c.t + off, 10))
    return sorted(t for t in grid if 0.0 < t < 1.0)


def _valid(p: PseudoObservations, theta: float, min_side: int) -> bool:
    k = int(np.count_nonzero(_split_mask(p, theta)))
    if min(k, p.n - k) < min_side:
        return False
    sides = (p.u[_split_mask(p, theta)], p.v[_split_mask(p, theta)],
             p.u[~_split_mask(p, theta)], p.v[~_split_mask(p, theta)])
    return all(np.ptp(a) > 0 for a in sides)


def glue_scan(p: PseudoObservations, grid: Optional[Sequence[float]] = None,
              opts: AnalysisOptions = AnalysisOptions(),
              sample: Optional[BivariateSample] = None,
              crossings: Optional[Sequence[Crossing]] = None) -> GluingAnalysis:
    """Search for the gluing point that makes both halves quadrant dependent.

    For each candidate ``theta`` the pairs are split at ``u <= theta``, each
    half is re-ranked and scored by ``(sigma - |rho|)``; the sum of both
    halves is minimized, ties going to the candidate nearest 0.5. Without an
    explicit grid, candidates are the deciles plus detected diagonal
    crossings and their +-0.05 neighbours; the winner is then refined on a
    0.005 step within +-0.05. No gluing is proposed when the whole sample
    already has ``sigma - |rho| <= eps``.
    """
    if crossings is None:
        C = core.empirical_copula(p)
        crossings = detect_crossings(core.diagonal_sections(C, opts.diag_m), opts.min_run)
    explicit = grid is not None
    if grid is None:
        grid = default_theta_grid(crossings)
    candidates = [float(t) for t in grid]
    for t in candidates:
        if not 0.0 < t < 1.0:
            raise ValueError(f"gluing candidate {t} outside (0, 1)")
    usable = [t for t in candidates if _valid(p, t, opts.min_side)]
    if explicit and len(usable) < len(candidates):
        bad = sorted(set(candidates) - set(usable))
        raise DataError(f"candidates {bad} leave fewer than {opts.min_side} points on a side")

    unsplit, _ = _side_score(p, opts.threads)
    scored = {t: theta_score(p, t, opts.threads) for t in usable}
    if scored and opts.refine and not explicit:
        best = min(scored, key=lambda t: (round(scored[t], 12), abs(t - 0.5)))
        for k in range(-10, 11):
            t = round(best + 0.005 * k, 10)
            if t not in scored and 0.0 < t < 1.0 and _valid(p, t, opts.min_side):
                scored[t] = theta_score(p, t, opts.threads)
    table = sorted(scored.items())

    eps = opts.epsilon(p.n)
    if not scored or unsplit <= eps:
        return GluingAnalysis(list(crossings), None, None, None, None, None, unsplit, table)

    best = min(scored, key=lambda t: (round(scored[t], 12), abs(t - 0.5)))
    mask = _split_mask(p, best)
    left_p, right_p = p.take(mask), p.take(~mask)
    side_opts = replace(opts, seed=opts.seed + 1)
    left = summarize_dependence(left_p, side_opts,
                                sample.take(mask) if sample is not None else None)
    right = summarize_dependence(right_p, side_opts,
                                 sample.take(~mask) if sample is not None else None)
    split_value = empirical_quantile(sample.x, best) if sample is not None else None
    return GluingAnalysis(list(crossings), best, split_value, left, right,
                          scored[best], unsplit, table)


def split_at(s: BivariateSample, p: PseudoObservations, theta: float):
    """Split pairs at ``x <= F_n^-1(theta)``; returns ``(left, right, split_value)``.

    ``split_value`` is the empirical quantile of ``x`` at ``theta``. The left
    side holds the ``ceil(n theta)`` smallest x-ranks, which is ``u <= theta``
    whenever ``n theta`` is an integer.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    mask = _split_mask(p, theta)
    k = int(np.count_nonzero(mask))
    if k == 0 or k == s.n:
        raise DataError(f"split at theta={theta} leaves an empty side")
    if min(k, s.n - k) < 2:
        raise DataError(f"split at theta={theta} leaves a single point on one side")
    return s.take(mask), s.take(~mask), empirical_quantile(s.x, theta)


# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class DensityStats:
    main_band: float
    secondary_band: float
    width: float

    @property
    def uniform_expectation(self) -> float:
        return 1.0 - (1.0 - self.width) ** 2


def band_mass(p: PseudoObservations, width: float = 0.2) -> DensityStats:
    """Share of points within ``width`` of each diagonal of the unit square."""
    main = float(np.mean(np.abs(p.v - p.u) <= width))
    second = float(np.mean(np.abs(p.v - (1.0 - p.u)) <= width))
    return DensityStats(main, second, width)


@dataclass(frozen=True)
class RankPlotCategory:
    label: str
    confidence: str
    evidence: list

    def as_dict(self):
        return {"label": self.label, "confidence": self.confidence,
                "evidence": list(self.evidence)}


_WEAKER = {"clear": "weak", "weak": "ambiguous", "ambiguous": "ambiguous"}


def _crossing_label(crossings: Sequence[Crossing]):
    if not crossings:
        return None, False
    primary = [c for c in crossings if c.curve == "delta"] or list(crossings)
    directions = {c.direction for c in primary}
    if len(directions) > 1:
        return None, True
    label = "R7" if directions.pop() == ABOVE_TO_BELOW else "R8"
    agree = all((c.direction == ABOVE_TO_BELOW) == (label == "R7") for c in crossings)
    return label, not agree


def _sides_label(g: Optional[GluingAnalysis]):
    if g is None or not g.needed:
        return None
    pair = (g.left.quadrant_status, g.right.quadrant_status)
    if pair == (PQD, NQD):
        return "R7"
    if pair == (NQD, PQD):
        return "R8"
    qd = {PQD, NQD}
    if (pair[0] == NEAR_INDEPENDENCE and pair[1] in qd) or (
            pair[1] == NEAR_INDEPENDENCE and pair[0] in qd):
        return "R9"
    return None


def classify(summary: DependenceSummary, diagonals: DiagonalCurves,
             crossings: Sequence[Crossing], density: DensityStats,
             gluing: Optional[GluingAnalysis] = None,
             opts: AnalysisOptions = AnalysisOptions()) -> RankPlotCategory:
    """Assign one of R1..R9 with a confidence grade and textual evidence."""
    rho, sigma = summary.rho_n, summary.sigma_n
    eps = summary.epsilon_used
    gap = sigma - abs(rho)
    ev = [f"rho_n={rho:+.3f} sigma_n={sigma:.3f} eps={eps:.3f} "
          f"permutation p={summary.independence_p:.4f}"]
    status = summary.quadrant_status

    if status == NEAR_INDEPENDENCE:
        ev.append(f"independence not rejected at alpha={opts.alpha}")
        conf = "clear" if summary.independence_p > 2 * opts.alpha else "weak"
        return RankPlotCategory("R1", conf, ev)

    if status in (PQD, NQD):
        positive = status == PQD
        band = density.main_band if positive else density.secondary_band
        ev.append(f"{status}: sigma_n - |rho_n| = {gap:.3f} <= eps")
        ev.append(f"band mass {band:.3f} (uniform {density.uniform_expectation:.2f})")
        if band >= opts.pure_band:
            label, conf = ("R2" if positive else "R3"), "clear"
        elif band > opts.mixture_band:
            label, conf = ("R5" if positive else "R6"), "clear"
        else:
            label, conf = ("R2" if positive else "R3"), "weak"
            ev.append("points spread far from the diagonal: weak dependence")
        if gap > eps / 2:
            conf = _WEAKER[conf]
            ev.append("sigma_n - |rho_n| close to the quadrant-dependence boundary")
        if crossings:
            conf = _WEAKER[conf]
            ev.append(f"{len(crossings)} diagonal crossing(s) despite quadrant dependence")
        return RankPlotCategory(label, conf, ev)

    ev.append(f"non quadrant dependent: sigma_n - |rho_n| = {gap:.3f} > eps")
    cross_label, mixed = _crossing_label(crossings)
    side_label = _sides_label(gluing)
    for c in crossings:
        ev.append(f"{c.curve} crosses independence at t={c.t:.3f} ({c.direction})")
    if gluing is not None and gluing.needed:
        ev.append(f"best gluing point theta={gluing.best_theta:.3f}: left "
                  f"{gluing.left.quadrant_status}, right {gluing.right.quadrant_status}")

    if side_label is not None:
        if side_label == "R9":
            conf = "clear" if cross_label is None or not mixed else "weak"
        elif cross_label == side_label:
            conf = "weak" if mixed else "clear"
        elif cross_label is None:
            conf = "weak"
        else:
            conf = "ambiguous"
            ev.append(f"crossing direction suggests {cross_label}")
        return RankPlotCategory(side_label, conf, ev)
    if cross_label is not None:
        return RankPlotCategory(cross_label, "weak" if not mixed else "ambiguous", ev)
    faint = detect_crossings(diagonals, min_run=2)
    if faint or mixed:
        ev.append("faint or conflicting diagonal crossings")
        return RankPlotCategory("R4", "ambiguous", ev)
    return RankPlotCategory("R4", "clear" if gap > 2 * eps else "weak", ev)


# --------------------------------------------------------------------------
# full pipeline


@dataclass(frozen=True)
class DependenceAnalysis:
    sample: BivariateSample
    pseudo: PseudoObservations
    copula: EmpiricalCopula
    summary: DependenceSummary
    diagonals: DiagonalCurves
    crossings: list
    density: DensityStats
    gluing: GluingAnalysis
    category: RankPlotCategory
    options: AnalysisOptions


def analyze(sample: BivariateSample, opts: AnalysisOptions = AnalysisOptions()) -> DependenceAnalysis:
    """Everything a dplot needs, from raw pairs to the R-category."""
    if sample.n > core.DEFAULT_MAX_N:
        raise DataError(
            f"n={sample.n} exceeds {core.DEFAULT_MAX_N}; subsample explicitly (--max-n)"
        )
    pseudo = rank_transform(sample, opts.ties)
    C = core.empirical_copula(pseudo)
    summary = summarize_dependence(pseudo, opts, sample, C)
    diagonals = core.diagonal_sections(C, opts.diag_m)
    crossings = detect_crossings(diagonals, opts.min_run)
    density = band_mass(pseudo, opts.band_width)
    gluing = glue_scan(pseudo, None, opts, sample, crossings)
    category = classify(summary, diagonals, crossings, density, gluing, opts)
    return DependenceAnalysis(sample, pseudo, C, summary, diagonals, crossings,
                              density, gluing, category, opts)
