#!/usr/bin/env python3
"""Rate gain of full duplex over half duplex versus the delay threshold.

Same drops and deployment as the RINR sweep, but the residual
self-interference is held fixed while the delivery deadline delta varies.

Usage: run_delay_sweep.py [--drops N] [--seed S] [--rinr-db X] [--out DIR]
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
    run_delay_sweep,
    save_run,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--drops", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rinr-db", type=float, default=-15.0)
    ap.add_argument("--out", default="results/delay_sweep")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        topology=TopologyConfig(kind="line", K=3, w=1),
        qos=QosConfig(delta_s=(1.5e-3, 2.5e-3, 3.5e-3, 5.0e-3, 10.0e-3)),
        duplex=DuplexConfig(modes=("hd", "fd"), rinr_db_sweep=(args.rinr_db,)),
        mc=McConfig(n_drops=args.drops, seed=args.seed),
        output=OutputConfig(dir=args.out),
    )
    paths = save_run(cfg, "delay_sweep", results=run_delay_sweep(cfg))
    print(json.dumps(paths, indent=2))


if __name__ == "__main__":
    main()
