"""Compare the compiled and pure-Python deviation-sum kernels.

    python benchmarks/bench_kernels.py --sizes 1000 5000 10000 --repeat 3

Both backends must return identical integer sums; timings are best-of-N.
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from rankdep import kernels


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run(sizes, repeat, threads):
    rows = []
    for n in sizes:
        perm = np.random.default_rng(n).permutation(n).astype(np.int64) + 1
        idx = np.arange(1, n + 1, dtype=np.int64)
        result = {"n": n}
        sums = {}
        for backend in kernels.available_backends():
            for t in sorted({1, threads}):
                key = f"{backend}/t{t}"
                secs, sums[key] = _time(
                    lambda: kernels.deviation_sums(idx, perm, n, threads=t, backend=backend), repeat)
                result[key] = secs
        if len(set(sums.values())) != 1:
            raise SystemExit(f"backends disagree at n={n}: {sums}")
        rows.append(result)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 2000, 5000, 10000])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    rows = run(args.sizes, args.repeat, args.threads)
    keys = [k for k in rows[0] if k != "n"]
    print(f"{'n':>7}  " + "  ".join(f"{k:>14}" for k in keys) + "  speedup")
    for r in rows:
        cells = "  ".join(f"{r[k]:>13.4f}s" for k in keys)
        speed = (r["python/t1"] / r["cython/t1"]) if "cython/t1" in r else float("nan")
        print(f"{r['n']:>7}  {cells}  {speed:6.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
