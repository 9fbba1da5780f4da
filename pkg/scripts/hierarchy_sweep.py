"""Sweep the omega_k hierarchy over random instances and write a CSV.

Example:
    python scripts/hierarchy_sweep.py --dim 1 --n 6 7 8 --density 0.3 0.7 --seeds 5
"""
import argparse
import csv
import sys
import time

from floorbound.bound import K_CAP, exact_optimum, hierarchy, relative_gap
from floorbound.instance import generate_instance


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, choices=(1, 2), default=1)
    ap.add_argument("--n", type=int, nargs="+", default=[6, 7])
    ap.add_argument("--density", type=float, nargs="+", default=[0.3, 0.7, 1.0])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--k-max", type=int, default=None)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="-")
    return ap.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["dim", "n", "density", "seed", "k", "omega", "upper", "gap_pct", "seconds"])
    for n in args.n:
        for dens in args.density:
            for seed in range(args.seeds):
                inst = generate_instance(args.dim, n, dens, seed)
                if not list(inst.pairs()):
                    continue
                k_max = min(args.k_max or K_CAP[args.dim], n)
                t0 = time.perf_counter()
                res = hierarchy(inst, k_max, workers=args.workers)
                spent = time.perf_counter() - t0
                upper = exact_optimum(inst).upper if n <= K_CAP[args.dim] else None
                for r in res:
                    gap = "" if upper is None else f"{relative_gap(r.omega, upper):.3f}"
                    w.writerow([args.dim, n, dens, seed, r.level, float(r.omega),
                                "" if upper is None else float(upper), gap, f"{spent:.3f}"])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
