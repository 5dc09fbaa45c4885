"""Loading, validating and subsampling paired observations."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from rankdep.errors import ColumnNotFoundError, DataError
from rankdep.rng import make_rng

Column = Union[str, int]


@dataclass(frozen=True)
class BivariateSample:
    """Paired raw observations ``(x_k, y_k)`` in native units."""

    x: np.ndarray
    y: np.ndarray
    labels: tuple = ("x", "y")

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        y = np.array(self.y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise DataError("x and y must be 1-d sequences of equal length")
        if x.shape[0] < 2:
            raise DataError(f"need at least 2 observations, got {x.shape[0]}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise DataError("sample contains NaN or infinite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    def take(self, index) -> "BivariateSample":
        return BivariateSample(self.x[index], self.y[index], self.labels)

    def swapped(self) -> "BivariateSample":
        return BivariateSample(self.y, self.x, self.labels[::-1])


@dataclass(frozen=True)
class IngestOptions:
    delimiter: str = ","
    has_header: bool = True
    x_column: Column = 0
    y_column: Column = 1
    na_policy: str = "drop_row"
    max_n: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.na_policy not in ("drop_row", "error"):
            raise ValueError(f"na_policy must be 'drop_row' or 'error', got {self.na_policy!r}")
        if self.max_n is not None and self.max_n < 2:
            raise ValueError("max_n must be at least 2")
        if len(self.delimiter) != 1:
            raise ValueError("delimiter must be a single character")


def _resolve(column: Column, header: Optional[Sequence[str]], width: int) -> int:
    if isinstance(column, str) and header is not None:
        stripped = [h.strip() for h in header]
        if column in stripped:
            # first match wins on duplicate names
            return stripped.index(column)
        if not column.lstrip("-").isdigit():
            raise ColumnNotFoundError(f"column {column!r} not found in header {stripped}")
    try:
        idx = int(column)
    except (TypeError, ValueError):
        raise ColumnNotFoundError(f"column {column!r} not found (file has no header)") from None
    if not 0 <= idx < width:
        raise ColumnNotFoundError(f"column index {idx} out of range for {width} columns")
    return idx


def _parse_cell(text: str) -> float:
    """Float value of a cell, NaN when missing or non-numeric."""
    text = text.strip()
    if not text:
        return math.nan
    try:
        value = float(text)
    except ValueError:
        return math.nan
    return value if math.isfinite(value) else math.nan


def load_csv(path: Union[str, Path], opts: IngestOptions = IngestOptions()) -> BivariateSample:
    """Read two numeric columns from a delimited UTF-8 file.

    Rows with a missing, non-numeric or non-finite value in either selected
    column are dropped (``na_policy="drop_row"``) or rejected
    (``na_policy="error"``). Row order is preserved. When ``opts.max_n`` is
    set and the file holds more rows, a seeded subsample is returned.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh, delimiter=opts.delimiter)
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    header = None
    if opts.has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header, rows = rows[0], rows[1:]
    width = len(header) if header is not None else max((len(r) for r in rows), default=0)
    ix = _resolve(opts.x_column, header, width)
    iy = _resolve(opts.y_column, header, width)

    xs, ys = [], []
    for lineno, row in enumerate(rows, start=2 if header is not None else 1):
        cx = _parse_cell(row[ix]) if ix < len(row) else math.nan
        cy = _parse_cell(row[iy]) if iy < len(row) else math.nan
        if math.isnan(cx) or math.isnan(cy):
            if opts.na_policy == "error":
                raise DataError(f"{path}:{lineno}: missing or non-numeric value")
            continue
        xs.append(cx)
        ys.append(cy)
    if len(xs) < 2:
        raise DataError(f"{path}: fewer than 2 valid rows ({len(xs)})")
    if header is not None:
        labels = (header[ix].strip(), header[iy].strip())
    else:
        labels = (f"column {ix}", f"column {iy}")
    sample = BivariateSample(np.array(xs), np.array(ys), labels)
    if opts.max_n is not None and sample.n > opts.max_n:
        sample = subsample(sample, opts.max_n, opts.seed)
    return sample


def subsample(s: BivariateSample, n: int, seed: int) -> BivariateSample:
    """Uniform subsample of ``n`` pairs without replacement, in input order.

    Runs a seeded partial Fisher-Yates shuffle of the index array and keeps
    the first ``n`` positions, then sorts them so the original row order is
    preserved.
    """
    if not 2 <= n <= s.n:
        raise ValueError(f"subsample size must be in [2, {s.n}], got {n}")
    if n == s.n:
        return s
    rng = make_rng(seed)
    idx = np.arange(s.n, dtype=np.int64)
    picks = rng.integers(np.arange(n), s.n)
    for i, j in enumerate(picks.tolist()):
        idx[i], idx[j] = idx[j], idx[i]
    return s.take(np.sort(idx[:n]))
