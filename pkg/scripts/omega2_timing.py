"""Time omega_2 via the closed form and via the master LP for growing n."""
import argparse
import time

from floorbound.bound import hierarchy, omega2_closed_form
from floorbound.instance import generate_instance


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        val = fn()
        best = min(best, time.perf_counter() - t0)
    return best, val


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[10, 20, 33, 50])
    ap.add_argument("--density", type=float, default=1.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'n':>4} {'closed(ms)':>11} {'master(s)':>10} {'mode':>9}  agree")
    for n in args.n:
        inst = generate_instance(1, n, args.density, n)
        t_cf, cf = best_of(lambda: omega2_closed_form(inst), args.repeat)
        t_lp, res = best_of(lambda: hierarchy(inst, 2)[0], args.repeat)
        agree = abs(float(res.omega) - float(cf)) <= 1e-6 * max(1.0, float(cf))
        print(f"{n:>4} {t_cf * 1e3:>11.3f} {t_lp:>10.4f} {res.mode:>9}  {agree}")


if __name__ == "__main__":
    main()
