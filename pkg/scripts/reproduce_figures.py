"""Regenerate the four figure presets (CSV, JSON and SVG) under one directory.

    python scripts/reproduce_figures.py --out figures --workers 4

fig2 and fig3 are Monte Carlo runs (minutes on one core); fig4 and fig5 are
closed-form sweeps.
"""

import argparse
import sys
import time

from pilot_reuse.cli import run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="+", choices=["fig2", "fig3", "fig4", "fig5"],
                    default=["fig2", "fig3", "fig4", "fig5"])
    args = ap.parse_args()
    for fig in args.only:
        start = time.perf_counter()
        code = run(["figure", fig, "--out", args.out, "--seed", str(args.seed),
                    "--workers", str(args.workers), "--format", "csv,json,svg"])
        print(f"{fig}: exit {code} in {time.perf_counter() - start:.0f} s", file=sys.stderr)
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
