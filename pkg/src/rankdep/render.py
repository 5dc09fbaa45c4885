"""Deterministic SVG rendering of the 3x3 dplot and its marginal summaries."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union
from xml.sax.saxutils import escape

import numpy as np

from rankdep.core import DiagonalCurves
from rankdep.ingest import BivariateSample
from rankdep.ranks import PseudoObservations, empirical_quantile

# --------------------------------------------------------------------------
# marginal summaries


@dataclass(frozen=True)
class HistogramSpec:
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())


#: Upper bound on histogram bins; heavy tails otherwise explode the FD count.
MAX_BINS = 100


def _sturges(n: int) -> int:
    return int(math.ceil(math.log2(n))) + 1


def fd_bin_count(values) -> Optional[int]:
    """Freedman-Diaconis bin count, ``None`` when the IQR is zero."""
    arr = np.asarray(values, dtype=np.float64)
    iqr = empirical_quantile(arr, 0.75) - empirical_quantile(arr, 0.25)
    if iqr <= 0:
        return None
    width = 2.0 * iqr / arr.shape[0] ** (1.0 / 3.0)
    return max(1, int(math.ceil((arr.max() - arr.min()) / width)))


def histogram(values: Sequence[float], rule: Union[str, int] = "fd") -> HistogramSpec:
    """Histogram with Freedman-Diaconis, Sturges or a fixed bin count.

    ``rule`` is ``"fd"``, ``"sturges"`` or an integer. FD falls back to
    Sturges when the IQR is zero. Constant data yields a single unit-width
    bin centred on the value.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape[0] == 0:
        raise ValueError("histogram of an empty sequence")
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        warnings.warn("constant data: histogram has a single degenerate bin", stacklevel=2)
        return HistogramSpec(np.array([lo - 0.5, hi + 0.5]), np.array([arr.shape[0]]))
    if isinstance(rule, (int, np.integer)):
        bins = int(rule)
    elif rule == "fd":
        bins = fd_bin_count(arr) or _sturges(arr.shape[0])
    elif rule == "sturges":
        bins = _sturges(arr.shape[0])
    else:
        raise ValueError(f"unknown histogram rule {rule!r}")
    bins = min(max(bins, 1), MAX_BINS)
    counts, edges = np.histogram(arr, bins=bins, range=(lo, hi))
    return HistogramSpec(edges, counts)


@dataclass(frozen=True)
class BoxStats:
    min_whisker: float
    q1: float
    median: float
    q3: float
    max_whisker: float
    outliers: list


def boxplot_stats(values: Sequence[float]) -> BoxStats:
    """Tukey box plot with type-1 (left-continuous) quartiles."""
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.shape[0] < 5:
        raise ValueError("box plot needs at least 5 values")
    q1 = empirical_quantile(arr, 0.25)
    med = empirical_quantile(arr, 0.5)
    q3 = empirical_quantile(arr, 0.75)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = arr[(arr >= lo_fence) & (arr <= hi_fence)]
    outliers = arr[(arr < lo_fence) | (arr > hi_fence)]
    return BoxStats(float(inside.min()), q1, med, q3, float(inside.max()),
                    [float(x) for x in outliers])


# --------------------------------------------------------------------------
# SVG


@dataclass(frozen=True)
class DplotConfig:
    """Cosmetic defaults; nothing here affects any statistic."""

    panel: int = 300
    pad: int = 34
    font_family: str = "DejaVu Sans, Arial, sans-serif"
    font_size: int = 11
    point_color: str = "#1f4e79"
    point_opacity: float = 0.6
    negative_color: str = "#f2c200"
    positive_color: str = "#000000"
    reference_color: str = "#c0392b"
    bound_color: str = "#9a9a9a"
    bar_color: str = "#7f7f7f"
    hist_rule: Union[str, int] = "fd"


#: (row, column) of each panel in the 3x3 grid.
PANEL_LAYOUT = {
    "y-box": (0, 0), "rank": (0, 1), "delta": (0, 2),
    "y-hist": (1, 0), "scatter": (1, 1), "lambda": (1, 2),
    "bars": (2, 0), "x-hist": (2, 1), "x-box": (2, 2),
}


def point_radius(n: int) -> float:
    return min(3.0, max(1.2, 60.0 / math.sqrt(n)))


def padded_range(values, frac: float = 0.02):
    lo, hi = float(np.min(values)), float(np.max(values))
    span = hi - lo if hi > lo else max(abs(lo), 1.0)
    return lo - frac * span, hi + frac * span


def _f(x: float) -> str:
    return f"{x:.2f}"


def _tick(x: float) -> str:
    return f"{x:.3g}"


class _Panel:
    """Accumulates SVG elements for one panel in local coordinates."""

    def __init__(self, cfg: DplotConfig, xr, yr):
        self.cfg = cfg
        self.parts: list[str] = []
        self.x0, self.x1 = cfg.pad, cfg.panel - cfg.pad / 3
        self.y0, self.y1 = cfg.panel - cfg.pad, cfg.pad / 2
        self.xr, self.yr = xr, yr

    def sx(self, x):
        lo, hi = self.xr
        return self.x0 + (np.asarray(x, dtype=float) - lo) / (hi - lo) * (self.x1 - self.x0)

    def sy(self, y):
        lo, hi = self.yr
        return self.y0 - (np.asarray(y, dtype=float) - lo) / (hi - lo) * (self.y0 - self.y1)

    def frame(self, title, xticks=True, yticks=True):
        c = self.cfg
        self.parts.append(
            f'<rect x="{_f(self.x0)}" y="{_f(self.y1)}" width="{_f(self.x1 - self.x0)}" '
            f'height="{_f(self.y0 - self.y1)}" fill="none" stroke="#000000" stroke-width="0.8"/>'
        )
        self.text((self.x0 + self.x1) / 2, self.y1 - 4, title, anchor="middle")
        if xticks:
            for v in self.xr:
                self.text(float(self.sx(v)), self.y0 + 12, _tick(v), anchor="middle", size=c.font_size - 2)
        if yticks:
            for v in self.yr:
                self.text(self.x0 - 3, float(self.sy(v)) + 3, _tick(v), anchor="end", size=c.font_size - 2)

    def text(self, x, y, s, anchor="start", size=None):
        c = self.cfg
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-family="{c.font_family}" '
            f'font-size="{size or c.font_size}" text-anchor="{anchor}">{escape(s)}</text>'
        )

    def points(self, xs, ys, r):
        c = self.cfg
        px, py = self.sx(xs), self.sy(ys)
        self.parts.append(f'<g fill="{c.point_color}" fill-opacity="{c.point_opacity}">')
        self.parts.extend(f'<circle cx="{_f(a)}" cy="{_f(b)}" r="{_f(r)}"/>' for a, b in zip(px, py))
        self.parts.append("</g>")

    def polyline(self, xs, ys, color, width=1.2, dash=None, cls=None):
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(self.sx(xs), self.sy(ys)))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        extra += f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'
        )

    def rect(self, x, y, w, h, fill, ident=None, stroke="none"):
        ident = f' id="{ident}"' if ident else ""
        self.parts.append(
            f'<rect{ident} x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" '
            f'fill="{fill}" stroke="{stroke}" stroke-width="0.6"/>'
        )

    def line(self, x1, y1, x2, y2, color="#000000", width=1.0):
        self.parts.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{color}" stroke-width="{width}"/>'
        )


def _scatter_panel(cfg, sample, xr, yr):
    p = _Panel(cfg, xr, yr)
    p.frame(f"{sample.labels[1]} vs {sample.labels[0]}")
    p.points(sample.x, sample.y, point_radius(sample.n))
    return p


def _rank_panel(cfg, pseudo):
    p = _Panel(cfg, (0.0, 1.0), (0.0, 1.0))
    p.frame("rank plot (u, v)")
    p.points(pseudo.u, pseudo.v, point_radius(pseudo.n))
    return p


def _diagonal_panel(cfg, d: DiagonalCurves, which: str, zoom: bool = False):
    t = d.t
    if which == "delta":
        emp, ref, lo, hi, title = d.delta, d.delta_pi, d.delta_lower, d.delta_upper, "main diagonal delta_n(t)"
    else:
        emp, ref, lo, hi, title = d.lam, d.lambda_pi, d.lambda_lower, d.lambda_upper, "secondary diagonal lambda_n(t)"
    if zoom:
        diff = emp - ref
        span = max(float(np.max(np.abs(diff))), 1.0 / d.n)
        p = _Panel(cfg, (0.0, 1.0), (-1.05 * span, 1.05 * span))
        p.frame(f"{title} minus independence")
        p.polyline([0.0, 1.0], [0.0, 0.0], cfg.reference_color, dash="4,3", cls="reference")
        p.polyline(t, diff, "#000000", cls="empirical")
        return p
    ymax = 1.0 if which == "delta" else 0.5
    p = _Panel(cfg, (0.0, 1.0), (0.0, ymax))
    p.frame(title)
    p.polyline(t, lo, cfg.bound_color, width=0.8, cls="bound-lower")
    p.polyline(t, hi, cfg.bound_color, width=0.8, cls="bound-upper")
    p.polyline(t, ref, cfg.reference_color, dash="4,3", cls="reference")
    p.polyline(t, emp, "#000000", cls="empirical")
    return p


def _bar_panel(cfg, rho, sigma):
    p = _Panel(cfg, (0.0, 2.0), (0.0, 1.0))
    p.frame("dependence", xticks=False)
    rho_fill = cfg.negative_color if rho < 0 else cfg.positive_color
    base = float(p.sy(0.0))
    for k, (value, fill, ident, label) in enumerate(
            [(abs(rho), rho_fill, "bar-rho", "|rho_n|"), (sigma, cfg.positive_color, "bar-sigma", "sigma_n")]):
        x = float(p.sx(k + 0.2))
        w = float(p.sx(k + 0.8)) - x
        top = float(p.sy(value))
        p.rect(x, top, w, base - top, fill, ident=ident, stroke="#000000")
        p.text(x + w / 2, base + 12, label, anchor="middle")
        p.text(x + w / 2, top - 3, f"{value:.2f}", anchor="middle")
    return p


def _hist_panel(cfg, values, label, axis_range, horizontal):
    h = histogram(values, cfg.hist_rule)
    top = float(h.counts.max()) or 1.0
    if horizontal:
        p = _Panel(cfg, (0.0, top), axis_range)
        p.frame(f"histogram of {label}", xticks=False)
        for a, b, c in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts):
            y_hi, y_lo = float(p.sy(b)), float(p.sy(a))
            x_end = float(p.sx(c))
            p.rect(p.x0, y_hi, x_end - p.x0, y_lo - y_hi, cfg.bar_color, stroke="#ffffff")
    else:
        p = _Panel(cfg, axis_range, (0.0, top))
        p.frame(f"histogram of {label}", yticks=False)
        for a, b, c in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts):
            x_lo, x_hi = float(p.sx(a)), float(p.sx(b))
            y_top = float(p.sy(c))
            p.rect(x_lo, y_top, x_hi - x_lo, p.y0 - y_top, cfg.bar_color, stroke="#ffffff")
    return p


def _box_panel(cfg, values, label, vertical):
    b = boxplot_stats(values)
    rng = padded_range(values)
    r = point_radius(len(values))
    if vertical:
        p = _Panel(cfg, (0.0, 1.0), rng)
        p.frame(f"box plot of {label}", xticks=False)
        cx0, cx1, cm = float(p.sx(0.3)), float(p.sx(0.7)), float(p.sx(0.5))
        yq1, yq3 = float(p.sy(b.q1)), float(p.sy(b.q3))
        p.rect(cx0, yq3, cx1 - cx0, yq1 - yq3, "#ffffff", stroke="#000000")
        p.line(cx0, float(p.sy(b.median)), cx1, float(p.sy(b.median)), width=1.6)
        p.line(cm, yq1, cm, float(p.sy(b.min_whisker)))
        p.line(cm, yq3, cm, float(p.sy(b.max_whisker)))
        if b.outliers:
            p.points(np.full(len(b.outliers), 0.5), b.outliers, r)
    else:
        p = _Panel(cfg, rng, (0.0, 1.0))
        p.frame(f"box plot of {label}", yticks=False)
        cy0, cy1, cm = float(p.sy(0.7)), float(p.sy(0.3)), float(p.sy(0.5))
        xq1, xq3 = float(p.sx(b.q1)), float(p.sx(b.q3))
        p.rect(xq1, cy0, xq3 - xq1, cy1 - cy0, "#ffffff", stroke="#000000")
        p.line(float(p.sx(b.median)), cy0, float(p.sx(b.median)), cy1, width=1.6)
        p.line(xq1, cm, float(p.sx(b.min_whisker)), cm)
        p.line(xq3, cm, float(p.sx(b.max_whisker)), cm)
        if b.outliers:
            p.points(b.outliers, np.full(len(b.outliers), 0.5), r)
    return p


def _document(cfg: DplotConfig, panels: dict, layout: dict, rows: int, cols: int) -> bytes:
    width, height = cols * cfg.panel, rows * cfg.panel
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    for name, (r, c) in layout.items():
        out.append(f'<g id="panel-{name}" class="panel" '
                   f'transform="translate({c * cfg.panel},{r * cfg.panel})">')
        out.extend(panels[name].parts)
        out.append("</g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


@dataclass(frozen=True)
class DplotDocument:
    panels: dict
    svg_bytes: bytes
    report: dict


def render_dplot(sample: BivariateSample, pseudo: PseudoObservations, summary, diagonals: DiagonalCurves,
                 config: Optional[DplotConfig] = None, report: Optional[dict] = None) -> DplotDocument:
    """Lay out the nine dplot panels and serialize them as one SVG document.

    The |rho_n| bar is drawn in ``negative_color`` exactly when rho_n < 0.
    Output bytes depend only on the inputs and ``config``.
    """
    cfg = config or DplotConfig()
    xr, yr = padded_range(sample.x), padded_range(sample.y)
    lx, ly = sample.labels
    panels = {
        "y-box": _box_panel(cfg, sample.y, ly, vertical=True),
        "rank": _rank_panel(cfg, pseudo),
        "delta": _diagonal_panel(cfg, diagonals, "delta"),
        "y-hist": _hist_panel(cfg, sample.y, ly, yr, horizontal=True),
        "scatter": _scatter_panel(cfg, sample, xr, yr),
        "lambda": _diagonal_panel(cfg, diagonals, "lambda"),
        "bars": _bar_panel(cfg, summary.rho_n, summary.sigma_n),
        "x-hist": _hist_panel(cfg, sample.x, lx, xr, horizontal=False),
        "x-box": _box_panel(cfg, sample.x, lx, vertical=False),
    }
    svg = _document(cfg, panels, PANEL_LAYOUT, 3, 3)
    return DplotDocument(dict(PANEL_LAYOUT), svg, report if report is not None else {})


def render_diagonal_zoom(diagonals: DiagonalCurves, config: Optional[DplotConfig] = None) -> bytes:
    """Two panels showing ``delta_n - t^2`` and ``lambda_n - t(1-t)`` magnified."""
    cfg = config or DplotConfig()
    panels = {"delta-zoom": _diagonal_panel(cfg, diagonals, "delta", zoom=True),
              "lambda-zoom": _diagonal_panel(cfg, diagonals, "lambda", zoom=True)}
    return _document(cfg, panels, {"delta-zoom": (0, 0), "lambda-zoom": (0, 1)}, 1, 2)


def render_gallery_panel(sample: BivariateSample, title: str,
                         config: Optional[DplotConfig] = None) -> bytes:
    """Scatter plot with both marginal histograms (one cell of the gallery)."""
    cfg = config or DplotConfig()
    xr, yr = padded_range(sample.x), padded_range(sample.y)
    scatter = _scatter_panel(cfg, sample, xr, yr)
    scatter.text(cfg.panel / 2, cfg.panel - 4, title, anchor="middle")
    panels = {
        "y-hist": _hist_panel(cfg, sample.y, sample.labels[1], yr, horizontal=True),
        "scatter": scatter,
        "x-hist": _hist_panel(cfg, sample.x, sample.labels[0], xr, horizontal=False),
    }
    return _document(cfg, panels, {"y-hist": (0, 0), "scatter": (0, 1), "x-hist": (1, 1)}, 2, 2)
