"""Compare zeros of phi1 from direct integration with those obtained through
the fourth-order reduction and the inverse substitution.

    python3 scripts/pipeline_equivalence.py corpus/whyburn.cfg --span 30 --n 5
"""

import argparse
import math

import numpy as np

from oscrit import cli, empirical, ode, riccati, transforms


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("config")
    ap.add_argument("--span", type=float, default=30.0)
    ap.add_argument("--n", type=int, default=5, help="number of random initial conditions")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = cli.load_config(args.config).spec
    t0, t1 = spec.t0, spec.t0 + args.span
    est = riccati.find_alpha_star(spec.riccati(), t0, t0 + max(50.0, 2 * args.span))
    beta = transforms.build_beta(spec, est.path, t1 + 1.0)
    fo = transforms.fourth_order(spec, beta, component=1)
    tight = ode.SolverConfig(rtol=1e-11, atol=1e-14, blowup_norm=math.inf)
    print(f"alpha_* estimate {est.alpha_star:.8g}, image length of beta {beta.s_max:.6g}")

    rng = np.random.default_rng(args.seed)
    print(f"{'ic':>44s} {'direct':>7s} {'reduced':>8s} {'max |dt|':>10s}")
    for _ in range(args.n):
        ic = rng.standard_normal(4)
        direct = empirical.simulate(spec, ic, t1 + 1.0, 1e-11).find_zeros(0, (t0, t1)).sign_changes
        y0 = transforms.initial_state(spec, beta, est.path, ic[:2], ic[2:] / float(spec.p(t0)), component=1)
        phi = transforms.map_back(transforms.solve_fourth_order(fo, y0, beta.s_max, tight), beta, component=1)
        reduced = phi.find_zeros(0, (t0, t1)).sign_changes
        dev = float(np.max(np.abs(direct - reduced))) if len(direct) == len(reduced) and len(direct) else math.nan
        print(f"{np.array2string(ic, precision=3):>44s} {len(direct):7d} {len(reduced):8d} {dev:10.2e}")


if __name__ == "__main__":
    main()
