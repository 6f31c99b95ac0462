#!/usr/bin/env python3
"""Minimum feasible delay per drop and duplex mode.

Solves the min-delay linear program on each Monte Carlo drop, cross-checks it
against the closed-form row-minimum expression, and writes per-mode rows plus
the per-drop latency gain.

Usage: run_min_delay_sweep.py [--drops N] [--seed S] [--lambda-min PPS] [--out DIR]
"""

import argparse
import json

from iabnet.experiments import (
    DuplexConfig,
    ExperimentConfig,
    McConfig,
    OutputConfig,
    QosConfig,
    TopologyConfig,
    run_min_delay_sweep,
    save_run,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--drops", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--lambda-min", type=float, default=100.0)
    ap.add_argument("--out", default="results/min_delay")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        topology=TopologyConfig(kind="line", K=3, w=1),
        qos=QosConfig(lambda_min_pps=args.lambda_min),
        duplex=DuplexConfig(modes=("hd", "fd"), rinr_db_sweep=(-15.0,)),
        mc=McConfig(n_drops=args.drops, seed=args.seed),
        output=OutputConfig(dir=args.out),
    )
    paths = save_run(cfg, "min_delay", results=run_min_delay_sweep(cfg))
    print(json.dumps(paths, indent=2))


if __name__ == "__main__":
    main()
