"""Run every criterion on every corpus config and tabulate the verdicts.

    python3 scripts/run_corpus.py [--out results/corpus] [--horizon-count 20]
"""

import argparse
import json
import time
from pathlib import Path

from oscrit import cli, criteria
from oscrit.calculus import with_overrides

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=str(ROOT / "results" / "corpus"))
    ap.add_argument("--horizon-count", type=int, default=None)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for path in sorted((ROOT / "corpus").glob("*.cfg")):
        try:
            cfg = cli.load_config(path)
        except cli.ConfigError as exc:
            print(f"{path.name:18s} skipped: {exc}")
            continue
        probe = with_overrides(cfg.probe, horizon_count=args.horizon_count)
        start = time.perf_counter()
        reports = criteria.run_all(cfg.spec, probe)
        elapsed = time.perf_counter() - start
        (out / f"{path.stem}.json").write_text(json.dumps([r.to_json() for r in reports], indent=2) + "\n")
        rows.append((path.stem, [r.overall.value for r in reports], elapsed))

    head = f"{'config':14s} " + " ".join(f"{t:>17s}" for t in criteria.THEOREMS) + "   seconds"
    print(head)
    print("-" * len(head))
    for name, verdicts, sec in rows:
        print(f"{name:14s} " + " ".join(f"{v:>17s}" for v in verdicts) + f"   {sec:7.2f}")


if __name__ == "__main__":
    main()
