#!/usr/bin/env python3
"""Escape-kernel benchmark: numba vs. vectorized numpy on the same grids.

Prints one line per (grid, backend) with the best-of-N wall time and the
number of pixels whose escape code differs from the numpy result.  The two
backends use different exp/sin/cos implementations, so long chaotic orbits
may end with different verdicts; more than MAX_MISMATCH of such pixels makes
the script exit with status 1.  Use --json for a machine-readable dump.
"""

import argparse
import json
import sys
import time

import numpy as np

from expray import _jit, kernels
from expray.dynamics import GROWTH_FACTOR, L_CONFIRM, R_ESC
from expray.render import GridSpec

MAX_MISMATCH = 1e-3

GRIDS = {
    # name: (center, width, height, budget)
    "param-overview": (0j, 8.0, 8.0, 500),
    "param-real-slice": (0j, 6.0, 0.02, 2000),
    "dyn-kappa0": (0j, 8.0, 8.0, 500),
}


def _time(fn, runs):
    best = float("inf")
    out = None
    for _ in range(runs):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(name, px, runs, threads):
    center, w, h, budget = GRIDS[name]
    grid = GridSpec(center, w, h, px, px, budget)
    pts = grid.points()
    kappa = 0j if name.startswith("dyn") else pts
    args = (budget, R_ESC, L_CONFIRM, GROWTH_FACTOR)
    rows = []
    codes = {}
    backends = ["numpy"] + (["numba"] if _jit.HAVE_NUMBA else [])
    for backend in backends:
        use = backend == "numba"
        if use:  # compile outside the timed region
            kernels.escape_codes(kappa if np.ndim(kappa) == 0 else kappa[:1, :1], pts[:1, :1],
                                 *args, threads=threads, use_numba=True)
        dt, out = _time(lambda: kernels.escape_codes(kappa, pts, *args, threads=threads,
                                                     use_numba=use), runs)
        codes[backend] = out
        rows.append({"grid": name, "pixels": px * px, "backend": backend, "seconds": dt,
                     "escaping": int((out >= 0).sum())})
    for r in rows:
        r["mismatch"] = int((codes[r["backend"]] != codes["numpy"]).sum())
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--px", type=int, default=200, help="pixels per side")
    ap.add_argument("--runs", type=int, default=3)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--grid", choices=sorted(GRIDS), action="append")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    rows = []
    for name in args.grid or list(GRIDS):
        rows.extend(bench(name, args.px, args.runs, args.threads))
    if args.json:
        json.dump(rows, sys.stdout, indent=2)
        print()
        return 0
    base = {r["grid"]: r["seconds"] for r in rows if r["backend"] == "numpy"}
    for r in rows:
        speedup = base[r["grid"]] / r["seconds"]
        print(f"{r['grid']:18s} {r['backend']:6s} {r['pixels']:8d} px  {r['seconds']:8.3f} s"
              f"  x{speedup:5.1f}  mismatch={r['mismatch']}")
    return 0 if all(r["mismatch"] <= MAX_MISMATCH * r["pixels"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
