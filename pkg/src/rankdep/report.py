"""Versioned JSON report of a dependence analysis.

Schema (``schema_version`` "1.0")::

    {schema_version, labels{x, y}, n, tie_fraction, ties{...}, tie_adjusted,
     rho_n, sigma_n, pearson_r, independence_p, permutation_n, epsilon,
     quadrant_status, category{label, confidence, evidence[]},
     crossings[{t, direction, curve}],
     gluing{best_theta, split_value, criterion, unsplit_score,
            left{summary}, right{summary}, candidates[[theta, score]]},
     heuristic_thresholds, provenance{seed, options}}

Floats are written with 17 significant digits, so parsing and re-serializing
a report reproduces it byte for byte.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Optional, Union

SCHEMA_VERSION = "1.0"


def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with fixed float formatting; dict order is preserved."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(int(obj))
    if isinstance(obj, float):
        return _float(obj)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        return dumps(obj.item(), indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def summary_dict(s) -> Optional[dict]:
    if s is None:
        return None
    return {
        "n": s.n,
        "rho_n": s.rho_n,
        "sigma_n": s.sigma_n,
        "pearson_r": s.measures.pearson_r,
        "independence_p": s.independence_p,
        "epsilon": s.epsilon_used,
        "quadrant_status": s.quadrant_status,
        "tie_fraction": s.tie_fraction,
    }


def build_report(analysis, provenance: Optional[dict] = None) -> dict:
    """Report dictionary for a :class:`rankdep.analysis.DependenceAnalysis`."""
    s = analysis.summary
    g = analysis.gluing
    opts = analysis.options
    return {
        "schema_version": SCHEMA_VERSION,
        "labels": {"x": analysis.sample.labels[0], "y": analysis.sample.labels[1]},
        "n": s.n,
        "tie_fraction": s.tie_fraction,
        "ties": dict(analysis.pseudo.ties.as_dict(), policy=analysis.pseudo.policy.describe()),
        "tie_adjusted": s.measures.tie_adjusted,
        "rho_n": s.rho_n,
        "sigma_n": s.sigma_n,
        "pearson_r": s.measures.pearson_r,
        "independence_p": s.independence_p,
        "permutation_n": s.perm_n,
        "epsilon": s.epsilon_used,
        "quadrant_status": s.quadrant_status,
        "category": analysis.category.as_dict(),
        "crossings": [{"t": c.t, "direction": c.direction, "curve": c.curve}
                      for c in analysis.crossings],
        "gluing": {
            "best_theta": g.best_theta,
            "split_value": g.split_value,
            "criterion": g.criterion,
            "unsplit_score": g.unsplit_score,
            "left": summary_dict(g.left),
            "right": summary_dict(g.right),
            "candidates": [[t, v] for t, v in g.candidates],
        },
        "heuristic_thresholds": {
            "note": "band-mass, epsilon and permutation thresholds are heuristics",
            "band_width": opts.band_width,
            "pure_band": opts.pure_band,
            "mixture_band": opts.mixture_band,
        },
        "provenance": {"seed": opts.seed,
                       "options": dict(opts.as_dict(), **(provenance or {}))},
    }


def write_report(doc_or_report, path: Union[str, Path]) -> None:
    """Write a report (or the ``report`` of a DplotDocument) as JSON."""
    report = getattr(doc_or_report, "report", doc_or_report)
    Path(path).write_text(dumps(report) + "\n", encoding="utf-8")


def read_report(path: Union[str, Path]) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
