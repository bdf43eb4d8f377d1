"""Zero counts of random solutions of [A v'']'' + C v = 0 with constant A, C.

    python3 scripts/zero_gap.py --C 1 4 9 --n 10 --interval 0 50 --seeds 5
"""

import argparse
import math

from oscrit.empirical import zero_gap_property


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--C", type=float, nargs="+", default=[1.0, 4.0])
    ap.add_argument("--A", type=float, default=1.0)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--interval", type=float, nargs=2, default=[0.0, 50.0])
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    c, d = args.interval
    for cval in args.C:
        # roots of A l^4 + C = 0 have imaginary part (C/A)^(1/4)/sqrt(2)
        spacing = math.pi / ((cval / args.A) ** 0.25 / math.sqrt(2))
        for seed in range(args.seeds):
            diff, counts = zero_gap_property(lambda s: args.A, lambda s, v=cval: v, args.n, (c, d), seed=seed)
            print(f"C={cval:g} seed={seed}: expected ~{(d - c) / spacing:.1f} zeros, "
                  f"counts {counts}, max difference {diff}")


if __name__ == "__main__":
    main()
