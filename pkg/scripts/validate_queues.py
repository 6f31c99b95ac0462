#!/usr/bin/env python3
"""Simulate the queueing network at a solved operating point and compare the
empirical per-queue sojourn CDFs and delivery probabilities against their
analytic forms.

Usage: validate_queues.py [--packets N] [--delta-ms X] [--seed S] [--out DIR]
"""

import argparse
import json

from iabnet.experiments import (
    ExperimentConfig,
    McConfig,
    OutputConfig,
    QosConfig,
    TopologyConfig,
    run_queue_validation,
    save_run,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--packets", type=int, default=100_000)
    ap.add_argument("--delta-ms", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/queue_validation")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        topology=TopologyConfig(kind="line", K=1, w=1),
        qos=QosConfig(delta_s=args.delta_ms * 1e-3),
        mc=McConfig(n_drops=1, seed=args.seed),
        output=OutputConfig(dir=args.out),
    )
    report = run_queue_validation(cfg, n_packets=args.packets)
    paths = save_run(cfg, "queue_validation", report=report)
    print(json.dumps({"paths": paths, "report": report}, indent=2, default=str))


if __name__ == "__main__":
    main()
