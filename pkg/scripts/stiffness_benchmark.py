"""Largest stable explicit step for the L2(ds) flow against the H2(ds) flow.

Bisects the L2 threshold at each N and checks that fixed-step RK4 on the
H2 flow survives the same budget at a much larger step.
"""

import argparse

from h2elastica.curve import make_curve
from h2elastica.flow import max_stable_dt, survive


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128])
    ap.add_argument("--budget", type=int, default=1000)
    ap.add_argument("--h2-dt", type=float, default=0.1)
    args = ap.parse_args()

    prev = None
    print(f"{'N':>5} {'L2 max dt':>12} {'shrink':>8} {'H2 survived':>12} {'ratio':>10}")
    for n in args.sizes:
        c = make_curve("ellipse", n, a=1.3, b=0.7)
        l2 = max_stable_dt(c, 1.0, "l2", lo=1e-10, hi=1e-3, budget=args.budget, iters=16)
        steps, _ = survive(c, 1.0, "h2", args.h2_dt, budget=min(args.budget, 200))
        shrink = f"{prev / l2:8.1f}" if prev else " " * 8
        print(f"{n:5d} {l2:12.3e} {shrink} {steps:12d} {args.h2_dt / l2:10.1e}")
        prev = l2


if __name__ == "__main__":
    main()
