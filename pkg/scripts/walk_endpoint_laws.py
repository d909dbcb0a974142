#!/usr/bin/env python3
"""Probe the updating-walk embedding: acceptance rates and endpoint laws.

Two regimes are compared at small n:

* embedded pairs -- plain-walk endpoints (x0, xl) kept when the embedding
  experiment accepts.  These are parity-locked: popcount(x0 ^ xl) always has
  the parity of ell, so half the 4^n endpoint cells are structurally empty.
* updating pairs -- endpoints of genuine updating walks conditioned on
  covering every coordinate.  These are uniform over all 4^n cells.

The report carries per-n acceptance rates plus a chi-square uniformity
statistic for both regimes (p-values when scipy is importable).
"""

import argparse
import json
import logging
import sys

import numpy as np

from junta_walk.walk import (
    refresh_steps,
    updating_acceptance_trials,
    updating_walk_endpoints,
)

try:
    from scipy import stats
except ImportError:  # p-values become None; the statistic is still reported
    stats = None


def uniformity(cells: np.ndarray, n: int) -> dict:
    counts = np.bincount(cells, minlength=1 << (2 * n))
    expected = counts.sum() / counts.size
    statistic = float(((counts - expected) ** 2 / expected).sum())
    out = {
        "pairs": int(counts.sum()),
        "cells": int(counts.size),
        "empty_cells": int(np.count_nonzero(counts == 0)),
        "chi2": statistic,
        "df": int(counts.size - 1),
    }
    if stats is not None:
        out["pvalue"] = float(stats.chi2.sf(statistic, counts.size - 1))
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--ns", type=int, nargs="+", default=[2, 4, 8])
    parser.add_argument("--delta", type=float, default=0.1)
    parser.add_argument("--trials", type=int, default=10_000, help="per acceptance rate")
    parser.add_argument("--endpoint-n", type=int, default=3, dest="endpoint_n")
    parser.add_argument(
        "--endpoint-trials", type=int, default=110_000, dest="endpoint_trials"
    )
    parser.add_argument("--seed", type=int, default=300)
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.WARNING)

    acceptance = []
    for n in args.ns:
        ell = refresh_steps(n, args.delta)
        accepted, _ = updating_acceptance_trials(
            n, ell, cutoff=4 * ell, trials=args.trials, seed=args.seed + n
        )
        acceptance.append(
            {
                "n": n,
                "ell": ell,
                "cutoff": 4 * ell,
                "trials": args.trials,
                "accepted": accepted,
                "rate": accepted / args.trials,
            }
        )

    en = args.endpoint_n
    ell = refresh_steps(en, args.delta)
    accepted, embedded_cells = updating_acceptance_trials(
        en, ell, cutoff=4 * ell, trials=args.endpoint_trials,
        seed=args.seed + 51, collect_pairs=True,
    )
    covered, updating_cells = updating_walk_endpoints(
        en, ell, trials=args.endpoint_trials, seed=args.seed + 52
    )
    report = {
        "delta": args.delta,
        "acceptance": acceptance,
        "endpoints": {
            "n": en,
            "ell": ell,
            "embedded": uniformity(embedded_cells, en),
            "updating": uniformity(updating_cells, en),
        },
    }
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
