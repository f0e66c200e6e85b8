#!/usr/bin/env python3
"""Full-scale Lyapunov spectrum run on the classical wind-tree bundle.

Writes a JSON summary to --out (default ./out-spectrum) and prints it."""

import argparse
import json
import sys
from pathlib import Path

from windtree.cli import run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=330_000)
    ap.add_argument("--directions", type=int, default=32)
    ap.add_argument("--seed", type=int, default=20260826)
    ap.add_argument("--out", default="out-spectrum")
    args = ap.parse_args()
    cfg = {
        "kind": "spectrum",
        "seed": args.seed,
        "table": {
            "lattice": [["1", "0"], ["0", "1"]],
            "polygon": {"rectangle": ["1/2", "1/2"]},
        },
        "budgets": {
            "n_steps": args.steps,
            "n_directions": args.directions,
            "classes": 2,
        },
    }
    summary = run(cfg, out=args.out)
    print(json.dumps(summary, indent=1, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
