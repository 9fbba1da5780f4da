"""Check that worker counts give identical results and report wall-clock speedup."""
import argparse
import time

from floorbound.bound import hierarchy
from floorbound.instance import generate_instance


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, choices=(1, 2), default=2)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4, 8])
    args = ap.parse_args(argv)
    inst = generate_instance(args.dim, args.n, 1.0, args.seed)
    reference, base = None, None
    for w in args.workers:
        t0 = time.perf_counter()
        res = hierarchy(inst, args.k, workers=w)
        spent = time.perf_counter() - t0
        key = [(r.level, r.omega, sorted(r.duals.items())) for r in res]
        if reference is None:
            reference, base = key, spent
        print(f"workers={w:<3} {spent:8.2f}s  speedup {base / spent:5.2f}  "
              f"identical={key == reference}  omega={[float(r.omega) for r in res]}")


if __name__ == "__main__":
    main()
