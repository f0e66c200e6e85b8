#!/usr/bin/env python3
"""Diffusion-exponent measurement on E(Z^2, a, b).

Writes a JSON summary and a CSV running-max series to --out."""

import argparse
import json
import sys

from windtree.cli import run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", default="1/2")
    ap.add_argument("--b", default="1/2")
    ap.add_argument("--T", type=float, default=1e6)
    ap.add_argument("--dt", type=float, default=1000.0)
    ap.add_argument("--orbits", type=int, default=100)
    ap.add_argument("--seed", type=int, default=20260826)
    ap.add_argument("--out", default="out-diffusion")
    args = ap.parse_args()
    cfg = {
        "kind": "diffusion",
        "seed": args.seed,
        "table": {"lambda": "0", "a": args.a, "b": args.b},
        "budgets": {"T": args.T, "dt": args.dt, "n_orbits": args.orbits},
    }
    summary = run(cfg, out=args.out)
    print(json.dumps(summary, indent=1, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
