"""Command-line interface: ``analyze``, ``simulate``, ``glue-scan``, ``gallery``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 internal invariant
violation.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from rankdep import core
from rankdep.analysis import AnalysisOptions, analyze, glue_scan, split_at
from rankdep.errors import DataError, InvariantViolation, ModelSpecError
from rankdep.ingest import BivariateSample, IngestOptions, load_csv
from rankdep.models import (GALLERY_MARGINALS, NoisyLineMixture, Product, mixture_simulator,
                            parse_copula, parse_marginal, simulate_bivariate)
from rankdep.ranks import TiePolicy, rank_transform
from rankdep.render import render_diagonal_zoom, render_dplot, render_gallery_panel
from rankdep.report import build_report, dumps, write_report

log = logging.getLogger("rankdep")

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INVARIANT = 4


def _column(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def _add_input_args(p: argparse.ArgumentParser):
    p.add_argument("csv", type=Path, help="delimited input file")
    p.add_argument("--x", required=True, type=_column, help="x column name or 0-based index")
    p.add_argument("--y", required=True, type=_column, help="y column name or 0-based index")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--na-policy", choices=["drop_row", "error"], default="drop_row")
    p.add_argument("--max-n", type=int, default=None, help="subsample to at most N rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--permutations", type=int, default=199)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--ties", choices=["avg", "average", "min", "random", "error"], default="avg")
    p.add_argument("--threads", type=int, default=1)


def _load(args) -> BivariateSample:
    opts = IngestOptions(delimiter=args.delimiter, has_header=not args.no_header,
                         x_column=args.x, y_column=args.y, na_policy=args.na_policy,
                         max_n=args.max_n, seed=args.seed)
    return load_csv(args.csv, opts)


def _options(args) -> AnalysisOptions:
    if args.permutations < 19:
        raise DataError("--permutations must be at least 19")
    return AnalysisOptions(alpha=args.alpha, permutations=args.permutations, seed=args.seed,
                           threads=args.threads, ties=TiePolicy.parse(args.ties, args.seed))


def check_invariants(result) -> None:
    s = result.summary
    if s.sigma_n < abs(s.rho_n) - 1e-12:
        raise InvariantViolation("sigma_n < |rho_n|")
    eps = s.epsilon_used
    if s.quadrant_status == "PQD" and abs(s.sigma_n - s.rho_n) > eps:
        raise InvariantViolation("PQD status with |sigma_n - rho_n| > eps")
    if s.quadrant_status == "NQD" and abs(s.sigma_n + s.rho_n) > eps:
        raise InvariantViolation("NQD status with |sigma_n + rho_n| > eps")
    label = result.category.label
    if label in ("R2", "R5") and not (s.rho_n > 0 and s.sigma_n - s.rho_n <= eps):
        raise InvariantViolation(f"{label} without positive quadrant dependence")
    if label in ("R3", "R6") and not (s.rho_n < 0 and s.sigma_n + s.rho_n <= eps):
        raise InvariantViolation(f"{label} without negative quadrant dependence")


def _fmt(x):
    return "n/a" if x is None else f"{x:+.4f}"


def cmd_analyze(args) -> int:
    sample = _load(args)
    result = analyze(sample, _options(args))
    check_invariants(result)
    provenance = {"input": args.csv.name, "x": str(args.x), "y": str(args.y),
                  "max_n": args.max_n}
    report = build_report(result, provenance)
    s = result.summary
    print(f"n={s.n}  rho_n={_fmt(s.rho_n)}  sigma_n={s.sigma_n:.4f}  "
          f"pearson_r={_fmt(s.measures.pearson_r)}  p={s.independence_p:.4f}")
    print(f"status={s.quadrant_status}  category={result.category.label} "
          f"({result.category.confidence})")
    for line in result.category.evidence:
        print(f"  - {line}")
    if args.svg:
        doc = render_dplot(result.sample, result.pseudo, s, result.diagonals, report=report)
        args.svg.write_bytes(doc.svg_bytes)
    if args.diag_zoom:
        args.diag_zoom.write_bytes(render_diagonal_zoom(result.diagonals))
    if args.json:
        write_report(report, args.json)
    return 0


def cmd_glue_scan(args) -> int:
    sample = _load(args)
    opts = _options(args)
    pseudo = rank_transform(sample, opts.ties)
    grid = None
    if args.grid:
        try:
            grid = [float(t) for t in args.grid.split(",")]
        except ValueError:
            raise DataError(f"bad --grid {args.grid!r}") from None
    g = glue_scan(pseudo, grid, opts, sample)
    print(f"unsplit score (sigma_n - |rho_n|) = {g.unsplit_score:.4f}")
    for t, score in g.candidates:
        print(f"  theta={t:.4f}  score={score:.4f}")
    if g.needed:
        print(f"best theta={g.best_theta:.4f}  split value={g.split_value:.6g}  score={g.criterion:.4f}")
        for name, side in (("left", g.left), ("right", g.right)):
            print(f"  {name}: n={side.n} rho_n={side.rho_n:+.4f} sigma_n={side.sigma_n:.4f} "
                  f"{side.quadrant_status}")
    else:
        print("no gluing needed")
    if args.json:
        from rankdep.report import summary_dict
        write_report({
            "schema_version": "1.0",
            "unsplit_score": g.unsplit_score,
            "best_theta": g.best_theta,
            "split_value": g.split_value,
            "criterion": g.criterion,
            "left": summary_dict(g.left),
            "right": summary_dict(g.right),
            "candidates": [[t, v] for t, v in g.candidates],
            "crossings": [{"t": c.t, "direction": c.direction, "curve": c.curve}
                          for c in g.crossings],
        }, args.json)
    return 0


def _write_csv(path: Path, sample: BivariateSample) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        for a, b in zip(sample.x.tolist(), sample.y.tolist()):
            w.writerow([format(a, ".17g"), format(b, ".17g")])


def cmd_simulate(args) -> int:
    try:
        mx = parse_marginal(args.margin_x)
        if args.noisy_line is not None:
            noise = parse_marginal(args.noise)
            model = NoisyLineMixture(mx, mx, noise, args.noisy_line)
            sample = mixture_simulator(model, args.n, args.seed)
        else:
            sample = simulate_bivariate(parse_copula(args.copula), mx,
                                        parse_marginal(args.margin_y), args.n, args.seed)
    except (ModelSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write_csv(args.out, sample)
    return 0


def cmd_gallery(args) -> int:
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    panels = []
    for i, (ny, my) in enumerate(GALLERY_MARGINALS):
        for j, (nx, mx) in enumerate(GALLERY_MARGINALS):
            seed = args.seed + 5 * i + j
            sample = simulate_bivariate(Product(), mx, my, args.n, seed)
            sample = BivariateSample(sample.x, sample.y, (nx, ny))
            m = core.measures(core.empirical_copula(rank_transform(sample)), sample)
            name = f"gallery_r{i + 1}_c{j + 1}.svg"
            (out / name).write_bytes(render_gallery_panel(sample, f"X {nx} / Y {ny}"))
            panels.append({"file": name, "row": i + 1, "column": j + 1, "x_marginal": nx,
                           "y_marginal": ny, "seed": seed, "n": sample.n,
                           "rho_n": m.rho_n, "sigma_n": m.sigma_n, "pearson_r": m.pearson_r})
    (out / "gallery.json").write_text(
        dumps({"schema_version": "1.0", "copula": "product", "panels": panels}) + "\n",
        encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankdep",
                                     description="Rank plots, empirical copulas and dplots.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="full dependence analysis with optional dplot")
    _add_input_args(a)
    a.add_argument("--svg", type=Path, help="write the dplot SVG here")
    a.add_argument("--json", type=Path, help="write the JSON report here")
    a.add_argument("--diag-zoom", type=Path, help="write magnified diagonal panels here")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="draw a sample from a copula and two marginals")
    s.add_argument("--copula", default="product")
    s.add_argument("--margin-x", default="uniform:0,1")
    s.add_argument("--margin-y", default="uniform:0,1")
    s.add_argument("--noisy-line", type=float, default=None, metavar="P",
                   help="instead of a copula: Y=(1-B)(X+eps)+BZ with B~Bernoulli(P)")
    s.add_argument("--noise", default="normal:0,0.03")
    s.add_argument("-n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("glue-scan", help="search for a gluing point")
    _add_input_args(g)
    g.add_argument("--grid", help="comma-separated theta candidates")
    g.add_argument("--json", type=Path)
    g.set_defaults(func=cmd_glue_scan)

    y = sub.add_parser("gallery", help="5x5 independence gallery with varied marginals")
    y.add_argument("--out", type=Path, required=True)
    y.add_argument("-n", type=int, default=1000)
    y.add_argument("--seed", type=int, default=0)
    y.set_defaults(func=cmd_gallery)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DataError, FileNotFoundError, ModelSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
