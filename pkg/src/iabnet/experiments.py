"""Configuration-driven Monte Carlo experiments.

Each experiment drops UEs around their serving BSs, draws one set of link
states per drop, evaluates both duplex modes on those shared states (paired
comparison), and writes figure-ready CSV tables plus a run.json manifest.

Drops run serially; each owns an independent RNG substream keyed by
(seed, drop index), so outputs are bit-identical for a fixed (config, seed)
regardless of execution order.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import queueing
from .channel import ArrayConfig, LinkBudget, RinrConfig, capacity_from_links, link_states
from .optimizer import (
    InfeasibleDelay,
    NumericalFailure,
    ProblemInstance,
    Solution,
    SolveStatus,
    closed_form_t_star,
    constraint_report,
    solve_min_delay_lp,
    solve_utility_max,
)
from .topology import (
    DuplexMode,
    RoutingTree,
    line_network,
    network_matrices,
    tree_from_json,
    two_child_tree,
)
from .channel import drop_ues


@dataclass(frozen=True)
class TopologyConfig:
    kind: str = "line"           # line | two_child | custom
    K: int = 3
    w: int = 1
    spacing_m: float = 200.0
    ue_radius_m: float = 100.0
    tree_json: str | None = None  # path, for kind == "custom"


@dataclass(frozen=True)
class ChannelConfig:
    carrier_hz: float = 30e9
    bandwidth_hz: float = 100e6
    n_bs_ant: int = 64
    n_ue_ant: int = 16
    ptx_dbm: float = 30.0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 10.0


@dataclass(frozen=True)
class QosConfig:
    eta: float = 0.9
    delta_s: float | tuple[float, ...] = 3.5e-3
    lambda_min_pps: float | tuple[float, ...] = 0.0
    packet_bytes: int = 10000


@dataclass(frozen=True)
class DuplexConfig:
    modes: tuple[str, ...] = ("hd", "fd")
    rinr_db_sweep: tuple[float, ...] = (-math.inf,)


@dataclass(frozen=True)
class McConfig:
    n_drops: int = 20
    seed: int = 0


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "results"
    formats: tuple[str, ...] = ("csv",)


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    qos: QosConfig = field(default_factory=QosConfig)
    duplex: DuplexConfig = field(default_factory=DuplexConfig)
    mc: McConfig = field(default_factory=McConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        def build(cls, key):
            sub = dict(d.get(key, {}))
            for k, v in sub.items():
                if isinstance(v, list):
                    sub[k] = tuple(v)
                elif v == "-inf":
                    sub[k] = -math.inf
            if "rinr_db_sweep" in sub:
                sub["rinr_db_sweep"] = tuple(
                    -math.inf if x == "-inf" else float(x) for x in sub["rinr_db_sweep"]
                )
            return cls(**sub)

        return ExperimentConfig(
            topology=build(TopologyConfig, "topology"),
            channel=build(ChannelConfig, "channel"),
            qos=build(QosConfig, "qos"),
            duplex=build(DuplexConfig, "duplex"),
            mc=build(McConfig, "mc"),
            output=build(OutputConfig, "output"),
        )


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))


@dataclass
class DropResult:
    """One Monte Carlo drop: solutions per (mode, sweep point) plus hop rates."""

    drop: int
    seed: tuple[int, int]
    rows: list[dict]


# ---------------------------------------------------------------------------
# shared plumbing


def base_tree(cfg: ExperimentConfig) -> RoutingTree:
    t = cfg.topology
    if t.kind == "line":
        return line_network(t.K, t.w, t.spacing_m)
    if t.kind == "two_child":
        return two_child_tree(t.w, t.spacing_m)
    if t.kind == "custom":
        if not t.tree_json:
            raise ValueError("custom topology needs tree_json path")
        with open(t.tree_json) as fh:
            return tree_from_json(fh.read())
    raise ValueError(f"unknown topology kind {t.kind!r}")


def _budget(cfg: ExperimentConfig) -> LinkBudget:
    c = cfg.channel
    return LinkBudget(
        ptx_dbm=c.ptx_dbm,
        bandwidth_hz=c.bandwidth_hz,
        noise_psd_dbm_hz=c.noise_psd_dbm_hz,
        noise_figure_db=c.noise_figure_db,
        carrier_hz=c.carrier_hz,
    )


def _arrays(cfg: ExperimentConfig) -> ArrayConfig:
    return ArrayConfig(n_bs_ant=cfg.channel.n_bs_ant, n_ue_ant=cfg.channel.n_ue_ant)


def _modes(cfg: ExperimentConfig) -> list[DuplexMode]:
    return [DuplexMode(m) for m in cfg.duplex.modes]


def _packet_bits(cfg: ExperimentConfig) -> float:
    return 8.0 * cfg.qos.packet_bytes


def _drop_rng(cfg: ExperimentConfig, drop: int) -> np.random.Generator:
    return np.random.default_rng([cfg.mc.seed, drop])


def _drop_links(cfg: ExperimentConfig, tree: RoutingTree, drop: int):
    rng = _drop_rng(cfg, drop)
    dropped = drop_ues(tree, cfg.topology.ue_radius_m, rng)
    links = link_states(dropped, _budget(cfg), rng, _arrays(cfg))
    return dropped, links


def hop_sum_rates(tree: RoutingTree, lam: np.ndarray) -> dict[int, float]:
    """Sum of solved UE rates grouped by route length (hop index 1..max)."""
    out: dict[int, float] = {}
    for m, ue in enumerate(tree.ue_ids):
        h = tree.hops(ue)
        out[h] = out.get(h, 0.0) + float(lam[m])
    return out


def _solve_utility(cfg, tree, links, mode, rinr_db, delta_s):
    caps = capacity_from_links(
        links, mode, RinrConfig(rinr_db=rinr_db), _budget(cfg), _packet_bits(cfg)
    )
    mats = network_matrices(tree, mode, caps)
    inst = ProblemInstance(matrices=mats, eta=cfg.qos.eta, delta_s=delta_s)
    try:
        sol = solve_utility_max(inst)
        return sol, "optimal"
    except InfeasibleDelay:
        return None, "infeasible"
    except NumericalFailure as exc:  # recorded, never fatal per drop
        return None, f"error:{exc}"


def _gain_cell(num: float | None, den: float | None) -> tuple[str, bool]:
    """(gain string, both_feasible flag); infinite gain is the string 'inf'."""
    if num is None and den is None:
        return "", False
    if den is None or den == 0.0:
        return "inf", False
    if num is None:
        return "0", False
    return f"{num / den:.9g}", True


# ---------------------------------------------------------------------------
# sweeps


def run_rate_sweep(cfg: ExperimentConfig) -> list[DropResult]:
    """Per-hop sum-rate and FD/HD rate gain versus residual self-interference."""
    tree0 = base_tree(cfg)
    delta = float(np.atleast_1d(cfg.qos.delta_s)[0])
    results = []
    for drop in range(cfg.mc.n_drops):
        tree, links = _drop_links(cfg, tree0, drop)
        rows = []
        for rinr_db in cfg.duplex.rinr_db_sweep:
            sols = {}
            stats = {}
            for mode in _modes(cfg):
                sols[mode], stats[mode] = _solve_utility(cfg, tree, links, mode, rinr_db, delta)
            hd, fd = DuplexMode.HALF_DUPLEX, DuplexMode.FULL_DUPLEX
            rates = {
                mode: hop_sum_rates(tree, s.lam) if (s := sols.get(mode)) else {}
                for mode in sols
            }
            hops = sorted(set().union(*[r.keys() for r in rates.values()]) or {1})
            for h in hops:
                gain, both = _gain_cell(
                    rates.get(fd, {}).get(h), rates.get(hd, {}).get(h)
                )
                rows.append(
                    {
                        "drop": drop,
                        "rinr_db": rinr_db,
                        "hop": h,
                        "sum_rate_hd_pps": rates.get(hd, {}).get(h, ""),
                        "sum_rate_fd_pps": rates.get(fd, {}).get(h, ""),
                        "rate_gain": gain,
                        "both_feasible": both,
                        "status_hd": stats.get(hd, ""),
                        "status_fd": stats.get(fd, ""),
                    }
                )
        results.append(DropResult(drop=drop, seed=(cfg.mc.seed, drop), rows=rows))
    return results


def run_delay_sweep(cfg: ExperimentConfig) -> list[DropResult]:
    """Per-hop rate gain versus the delay threshold, on shared drops."""
    tree0 = base_tree(cfg)
    deltas = [float(d) for d in np.atleast_1d(cfg.qos.delta_s)]
    rinr_db = cfg.duplex.rinr_db_sweep[0]
    results = []
    for drop in range(cfg.mc.n_drops):
        tree, links = _drop_links(cfg, tree0, drop)
        rows = []
        for delta in deltas:
            sols, stats = {}, {}
            for mode in _modes(cfg):
                sols[mode], stats[mode] = _solve_utility(cfg, tree, links, mode, rinr_db, delta)
            hd, fd = DuplexMode.HALF_DUPLEX, DuplexMode.FULL_DUPLEX
            rates = {
                mode: hop_sum_rates(tree, s.lam) if (s := sols.get(mode)) else {}
                for mode in sols
            }
            hops = sorted(set().union(*[r.keys() for r in rates.values()]) or {1})
            for h in hops:
                gain, both = _gain_cell(
                    rates.get(fd, {}).get(h), rates.get(hd, {}).get(h)
                )
                rows.append(
                    {
                        "drop": drop,
                        "delta_s": delta,
                        "hop": h,
                        "sum_rate_hd_pps": rates.get(hd, {}).get(h, ""),
                        "sum_rate_fd_pps": rates.get(fd, {}).get(h, ""),
                        "rate_gain": gain,
                        "both_feasible": both,
                        "status_hd": stats.get(hd, ""),
                        "status_fd": stats.get(fd, ""),
                    }
                )
        results.append(DropResult(drop=drop, seed=(cfg.mc.seed, drop), rows=rows))
    return results


def run_min_delay_sweep(cfg: ExperimentConfig) -> list[DropResult]:
    """Minimum feasible delay versus the rate floor, LP cross-checked against
    the closed-form row minimum on every row."""
    tree0 = base_tree(cfg)
    lambdas = [float(v) for v in np.atleast_1d(cfg.qos.lambda_min_pps)]
    rinr_db = cfg.duplex.rinr_db_sweep[0]
    results = []
    for drop in range(cfg.mc.n_drops):
        tree, links = _drop_links(cfg, tree0, drop)
        rows = []
        for lam_min in lambdas:
            per_mode: dict[DuplexMode, Solution] = {}
            for mode in _modes(cfg):
                caps = capacity_from_links(
                    links, mode, RinrConfig(rinr_db=rinr_db), _budget(cfg), _packet_bits(cfg)
                )
                mats = network_matrices(tree, mode, caps)
                sol = solve_min_delay_lp(
                    ProblemInstance(matrices=mats, eta=cfg.qos.eta, lambda_min_pps=lam_min)
                )
                t_cf, k_cf = closed_form_t_star(mats, lam_min)
                rel = abs(sol.t_star - t_cf) / max(abs(t_cf), 1e-300)
                if rel > 1e-6:
                    raise NumericalFailure(
                        f"LP / closed-form disagreement: {sol.t_star} vs {t_cf}"
                    )
                per_mode[mode] = sol
                rows.append(
                    {
                        "drop": drop,
                        "lambda_min_pps": lam_min,
                        "mode": mode.value,
                        "t_star": sol.t_star,
                        "delta_star_s": sol.delta_star_s if sol.delta_star_s else "",
                        "feasible": sol.status is SolveStatus.OPTIMAL,
                        "bottleneck_bs": k_cf,
                        "closed_form_rel_err": rel,
                    }
                )
            hd = per_mode.get(DuplexMode.HALF_DUPLEX)
            fd = per_mode.get(DuplexMode.FULL_DUPLEX)
            if hd is not None and fd is not None:
                gain, _ = _gain_cell(
                    fd.t_star if fd.t_star > 0 else None,
                    hd.t_star if hd.t_star > 0 else None,
                )
                rows.append(
                    {
                        "drop": drop,
                        "lambda_min_pps": lam_min,
                        "mode": "gain",
                        "t_star": "",
                        "delta_star_s": "",
                        "feasible": hd.t_star > 0 and fd.t_star > 0,
                        "bottleneck_bs": "",
                        "closed_form_rel_err": "",
                        "gain": gain,
                    }
                )
        results.append(DropResult(drop=drop, seed=(cfg.mc.seed, drop), rows=rows))
    return results


def run_queue_validation(
    cfg: ExperimentConfig,
    n_packets: int = 100_000,
    mode: DuplexMode = DuplexMode.FULL_DUPLEX,
) -> dict:
    """Solve one drop, simulate the queueing network at the solved operating
    point, and compare empirical delivery probabilities and per-queue sojourn
    CDFs with their analytic forms."""
    from scipy.stats import kstest

    tree0 = base_tree(cfg)
    tree, links = _drop_links(cfg, tree0, 0)
    delta = float(np.atleast_1d(cfg.qos.delta_s)[0])
    rinr_db = cfg.duplex.rinr_db_sweep[0]
    sol, status = _solve_utility(cfg, tree, links, mode, rinr_db, delta)
    if sol is None:
        return {"status": status, "mode": mode.value}

    caps = capacity_from_links(
        links, mode, RinrConfig(rinr_db=rinr_db), _budget(cfg), _packet_bits(cfg)
    )
    mats = network_matrices(tree, mode, caps)
    sim_rng = np.random.default_rng([cfg.mc.seed, 10_000])
    samples = queueing.simulate(mats, sol.lam, sol.mu, n_packets, sim_rng)

    delivery = queueing.delivery_probability(samples, mats.num_ue, delta)
    gaps = mats.C * sol.mu - mats.F @ sol.lam
    ks = {}
    for edge, sojourns in queueing.per_queue_sojourns(samples, mats).items():
        stat = kstest(sojourns, lambda x, g=gaps[edge]: -np.expm1(-g * x)).statistic
        ks[int(edge)] = float(stat)

    inst = ProblemInstance(matrices=mats, eta=cfg.qos.eta, delta_s=delta)
    return {
        "status": status,
        "mode": mode.value,
        "eta": cfg.qos.eta,
        "delta_s": delta,
        "n_packets": len(samples),
        "delivery_probability": [float(p) for p in delivery],
        "ks_distance_per_edge": ks,
        "constraint_report": constraint_report(inst, sol),
    }


# ---------------------------------------------------------------------------
# persistence


def write_rows_csv(path: str, rows: list[dict]) -> None:
    if not rows:
        with open(path, "w", newline="") as fh:
            fh.write("")
        return
    fields = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, restval="")
        writer.writeheader()
        writer.writerows(rows)


def _jsonable(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "-inf" if obj < 0 else "inf"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def save_run(
    cfg: ExperimentConfig,
    name: str,
    results: list[DropResult] | None = None,
    report: dict | None = None,
) -> dict[str, str]:
    """Persist a sweep (CSV) or report (JSON) plus the run.json manifest.

    Returns the paths written, keyed by artifact kind.
    """
    os.makedirs(cfg.output.dir, exist_ok=True)
    paths = {}
    if results is not None:
        rows = [row for r in results for row in r.rows]
        csv_path = os.path.join(cfg.output.dir, f"{name}.csv")
        write_rows_csv(csv_path, rows)
        paths["csv"] = csv_path
    if report is not None:
        rep_path = os.path.join(cfg.output.dir, f"{name}.json")
        with open(rep_path, "w") as fh:
            json.dump(_jsonable(report), fh, indent=2)
        paths["report"] = rep_path
    manifest = {
        "experiment": name,
        "config": _jsonable(asdict(cfg)),
        "seed": cfg.mc.seed,
        "n_drops": cfg.mc.n_drops,
        "artifacts": sorted(paths.values()),
    }
    man_path = os.path.join(cfg.output.dir, "run.json")
    with open(man_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    paths["manifest"] = man_path
    return paths
