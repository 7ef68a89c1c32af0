"""Run every shipped figure sweep and write one CSV per spec.

    python3 scripts/reproduce_figures.py --out results/ [--mode both --workers 4]
"""

import argparse
import dataclasses
import sys
from pathlib import Path

from multiband_mac.experiments import SweepSpec, run_sweep, write_rows

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    ap.add_argument("--mode", choices=("analytic", "simulate", "both"))
    ap.add_argument("--slots", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("specs", nargs="*", type=Path, help="defaults to configs/fig*.json")
    args = ap.parse_args()

    specs = args.specs or sorted((ROOT / "configs").glob("fig*.json"))
    args.out.mkdir(parents=True, exist_ok=True)
    for path in specs:
        spec = SweepSpec.load(path)
        changes = {k: v for k, v in (("mode", args.mode), ("slots", args.slots)) if v is not None}
        if changes:
            spec = dataclasses.replace(spec, **changes)
        rows = run_sweep(spec, workers=args.workers)
        target = args.out / f"{path.stem}.csv"
        with open(target, "w", newline="") as fh:
            write_rows(rows, fh)
        failed = sum(r.error is not None for r in rows)
        print(f"{path.name}: {len(rows)} rows -> {target}" + (f" ({failed} failed)" if failed else ""), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
