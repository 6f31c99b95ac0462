#!/usr/bin/env python3
"""Rate gain of full duplex over half duplex versus residual self-interference.

Solves the utility maximization per drop on a 4-hop line deployment for both
duplex modes across an RINR sweep and writes one CSV row per
(drop, rinr, hop) with the hop sum-rates and their ratio.

Usage: run_rate_sweep.py [--drops N] [--seed S] [--out DIR]
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
    run_rate_sweep,
    save_run,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--drops", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/rate_sweep")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        topology=TopologyConfig(kind="line", K=3, w=1),
        qos=QosConfig(delta_s=3.5e-3),
        duplex=DuplexConfig(
            modes=("hd", "fd"),
            rinr_db_sweep=(-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0),
        ),
        mc=McConfig(n_drops=args.drops, seed=args.seed),
        output=OutputConfig(dir=args.out),
    )
    paths = save_run(cfg, "rate_sweep", results=run_rate_sweep(cfg))
    print(json.dumps(paths, indent=2))


if __name__ == "__main__":
    main()
