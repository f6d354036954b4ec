"""Time the compiled and pure-Python kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Two workloads: the grid pair search of the spectral initializer
(N = 300 samples, 22 grid points, and a finer 0.05 grid), and the
exhaustive label search on unsolvable SubsetSum gadgets of size 8.
Outputs are checked for equality before timing.
"""

import argparse
import json
import sys
import time

import numpy as np

from mixedreg import kernels
from mixedreg.oracles import hardness_gadget


def workloads():
    rng = np.random.default_rng(0)
    grid = {g: rng.random((300, g)) ** 2 for g in (22, 127)}
    gadgets = [hardness_gadget(v) for v in ((1, 2, 3, 4, 5, 6, 7, 9), (2, 3, 5, 7, 11, 13, 17, 19))]
    return [
        (f"grid_pair_search n=300 g={g}", lambda impl, sq=sq: impl.grid_pair_search(sq))
        for g, sq in grid.items()
    ] + [
        ("first_consistent_assignment k=8 (2 gadgets)",
         lambda impl: [impl.first_consistent_assignment(x, y, 1e-9) for x, y in gadgets]),
    ]


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def run(repeat=5):
    impls = kernels.backends()
    rows = []
    for name, fn in workloads():
        outs = {b: fn(m) for b, m in impls.items()}
        ref = outs["python"]
        same = all(_equal(o, ref) for o in outs.values())
        row = dict(workload=name, consistent=same)
        for b, m in impls.items():
            row[f"{b}_s"] = best_time(lambda m=m: fn(m), repeat)
        if "cython_s" in row:
            row["speedup"] = row["python_s"] / row["cython_s"]
        rows.append(row)
    return rows


def _equal(a, b):
    if isinstance(a, tuple):
        return a[:2] == b[:2] and abs(a[2] - b[2]) <= 1e-9 * max(1.0, abs(b[2]))
    return a == b


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", help="also write results here")
    args = p.parse_args(argv)
    rows = run(args.repeat)
    for r in rows:
        cy = f"{r['cython_s'] * 1e3:9.3f} ms" if "cython_s" in r else "      n/a"
        sp = f"{r['speedup']:7.1f}x" if "speedup" in r else ""
        print(f"{r['workload']:45s} python {r['python_s'] * 1e3:9.3f} ms  cython {cy}  {sp}"
              f"{'' if r['consistent'] else '  MISMATCH'}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["consistent"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
