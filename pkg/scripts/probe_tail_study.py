"""Dyadic probe table for one condition of one theorem, to see why a probe
stays Inconclusive (slow tails, panel budget, overflow).

    python3 scripts/probe_tail_study.py corpus/example32.cfg thm34 B4 --horizon-count 12
"""

import argparse

from oscrit import cli, criteria
from oscrit.calculus import with_overrides


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("config")
    ap.add_argument("theorem", choices=criteria.THEOREMS)
    ap.add_argument("condition")
    ap.add_argument("--horizon-count", type=int)
    ap.add_argument("--max-panels", type=int)
    args = ap.parse_args()

    cfg = cli.load_config(args.config)
    probe = with_overrides(cfg.probe, horizon_count=args.horizon_count, max_panels=args.max_panels)
    rep = criteria.run(args.theorem, cfg.spec, probe)
    cond = rep.condition(args.condition)
    print(f"{args.theorem} {cond.id}: {cond.status.value}  ({cond.description})")
    ev = cond.evidence
    if ev is None:
        print("no integral evidence attached;", cond.witness, cond.note)
        return
    print(f"verdict {ev.kind.value}; {ev.diagnostic}")
    prev = None
    print(f"{'T':>12s} {'F(T)':>22s} {'increment':>12s} {'ratio':>8s}")
    last_inc = None
    for T, F in ev.probes:
        inc = None if prev is None else F - prev
        ratio = "" if inc is None or not last_inc else f"{inc / last_inc:8.4f}"
        print(f"{T:12.6g} {F:22.15g} {'' if inc is None else f'{inc:12.4e}'} {ratio}")
        prev, last_inc = F, inc


if __name__ == "__main__":
    main()
