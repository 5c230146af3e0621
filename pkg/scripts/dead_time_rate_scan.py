#!/usr/bin/env python3
"""Sweep the pair rate and compare trigger blocking against the renewal model.

For a Poisson trigger stream of rate r hitting a device that ignores
requests for tau seconds after each accepted one, the blocked fraction is
x / (1 + x) with x = r * tau, and the coincidence-fringe visibility of the
feed-forward curve is 2 / (1 + x) - 1.  This script measures both in the
event simulation across a rate ladder and prints them next to the model.

Usage: python3 scripts/dead_time_rate_scan.py [--seed N] [--duration S]
"""

from __future__ import annotations

import argparse
import math

import numpy as np

from biphoton_feedforward import (
    CurvePoint,
    ExperimentConfig,
    cell_busy_time,
    derive_seed,
    fit_visibility,
    polarizer_scan,
)

PAIR_RATES = (5e3, 1e4, 2e4, 5e4, 1e5, 2e5, 5e5)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--duration", type=float, default=2.0, help="seconds per scan point")
    args = parser.parse_args()

    thetas = list(np.linspace(0.0, math.pi, 9, endpoint=False))
    print(f"{'pair rate':>10} {'trigger rate':>13} {'blocked':>8} {'model':>8} "
          f"{'V_coinc':>8} {'model':>8}")
    for i, pair_rate in enumerate(PAIR_RATES):
        config = ExperimentConfig(
            pair_rate=pair_rate,
            duration=args.duration,
            seed=derive_seed(args.seed, f"rate:{i}"),
        )
        trigger_rate = pair_rate * 0.5 * config.eta_idler
        x = trigger_rate * cell_busy_time(config)
        points = polarizer_scan(config, thetas)
        blocked = 1.0 - sum(p.result.rotated_fraction for p in points) / len(points)
        fit = fit_visibility(
            [CurvePoint(p.x, p.rate_coincidence, p.sigma_coincidence) for p in points]
        )
        print(
            f"{pair_rate:10.0f} {trigger_rate:13.1f} {blocked:8.4f} {x / (1 + x):8.4f} "
            f"{fit.visibility_v:8.4f} {2 / (1 + x) - 1:8.4f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
