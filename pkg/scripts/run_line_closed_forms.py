#!/usr/bin/env python3
"""Closed-form line-deployment sweep: t*, minimum delay, latency gain, max depth.

No Monte Carlo here — everything is evaluated from the per-BS bottleneck
functions for a uniform-capacity chain deployment.

Usage: run_line_closed_forms.py [--K N] [--w N] [--ra-pps X] [--rb-pps X]
                                [--delta-ms X] [--eta X] [--out DIR]
"""

import argparse
import json
import os

import numpy as np

from iabnet.analysis import LineNetworkParams, write_line_sweep_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--K", type=int, default=3)
    ap.add_argument("--w", type=int, default=1)
    ap.add_argument("--ra-pps", type=float, default=2500.0)
    ap.add_argument("--rb-pps", type=float, default=7500.0)
    ap.add_argument("--delta-ms", type=float, default=10.0)
    ap.add_argument("--eta", type=float, default=0.9)
    ap.add_argument("--out", default="results/line_closed_forms")
    args = ap.parse_args()

    params = LineNetworkParams(
        K=args.K, w=args.w, R_b=args.rb_pps, R_a=args.ra_pps, lambda_min=0.0
    )
    # sweep lambda up to the single-UE access limit; the CSV flags infeasible rows
    lambdas = np.linspace(0.0, args.ra_pps / args.w, 41)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "line_sweep.csv")
    write_line_sweep_csv(path, params, lambdas, args.delta_ms * 1e-3, args.eta)
    print(json.dumps({"csv": path}))


if __name__ == "__main__":
    main()
