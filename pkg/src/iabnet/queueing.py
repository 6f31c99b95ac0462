"""Queueing view of the backhaul tree: independent M/M/1 queues per edge.

Analytic pieces: the exponential per-hop sojourn CDF, the product-form CDF of
the scaled worst-hop delay, and the log-domain left-hand side of the delivery
probability constraint.  The event-driven simulator is the empirical oracle
for all of them.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .topology import NetworkMatrices


class UnstableQueue(ValueError):
    """Service rate does not exceed arrival rate."""


@dataclass(frozen=True)
class QueueSpec:
    """Single edge queue: service at capacity*time-fraction, Poisson input."""

    edge: int
    service_rate: float
    arrival_rate: float

    @property
    def gap(self) -> float:
        return self.service_rate - self.arrival_rate

    def check_stable(self) -> None:
        if self.arrival_rate < 0:
            raise ValueError(f"edge {self.edge}: negative arrival rate")
        if self.gap <= 0:
            raise UnstableQueue(
                f"edge {self.edge}: service {self.service_rate} <= arrival {self.arrival_rate}"
            )


@dataclass
class DelaySample:
    """Per-packet delays for one delivered packet."""

    ue: int
    hop_sojourns_s: list[float]

    @property
    def total_s(self) -> float:
        return sum(self.hop_sojourns_s)

    @property
    def max_hop_s(self) -> float:
        return max(self.hop_sojourns_s)


def hop_delay_cdf(spec: QueueSpec, d: float) -> float:
    """P[sojourn <= d] for one M/M/1 queue: 1 - exp(-(service-arrival)*d)."""
    spec.check_stable()
    if d < 0:
        raise ValueError("delay must be nonnegative")
    return -math.expm1(-spec.gap * d)


def route_max_delay_cdf(route_specs: Sequence[QueueSpec], h_m: int, d: float) -> float:
    """CDF of h_m * (worst per-hop sojourn) on a route, evaluated at d.

    Independence of the per-hop sojourns makes this the product of per-hop
    exponential CDFs at d / h_m.
    """
    p = 1.0
    for spec in route_specs:
        p *= hop_delay_cdf(spec, d / h_m)
    return p


def latency_constraint_lhs(route_specs: Sequence[QueueSpec], h_m: int, delta: float) -> float:
    """Sum of log(1 - exp(-gap * delta / h_m)) along the route.

    The delivery-probability constraint holds iff this is >= log(eta).
    """
    total = 0.0
    for spec in route_specs:
        spec.check_stable()
        x = spec.gap * delta / h_m
        total += math.log(-math.expm1(-x))
    return total


def route_specs(matrices: NetworkMatrices, lam: np.ndarray, mu: np.ndarray, m: int) -> list[QueueSpec]:
    """QueueSpecs along UE m's route at operating point (lam, mu)."""
    arrivals = matrices.F @ lam
    service = matrices.C * mu
    return [QueueSpec(l, service[l], arrivals[l]) for l in matrices.routes[m]]


# ---------------------------------------------------------------------------
# event-driven simulation


def simulate(
    matrices: NetworkMatrices,
    lam: np.ndarray,
    mu: np.ndarray,
    n_packets: int,
    rng: np.random.Generator,
    split: str = "destination",
    warmup_frac: float = 0.1,
    allow_unstable: bool = False,
) -> list[DelaySample]:
    """Simulate the queueing network and return per-packet hop sojourns.

    Packets arrive at the donor as one Poisson stream per UE; each queue is
    FIFO with exponential service at rate C_v * mu_v, and service times are
    redrawn independently at every hop.  split selects how relays forward:
    "destination" routes by the packet's destination tag, "probabilistic"
    forwards with the stationary splitting probabilities (equivalent in
    distribution on a tree).  The first warmup_frac of deliveries is dropped.
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    arrivals = matrices.F @ lam
    service = matrices.C * mu
    if not allow_unstable and np.any(service - arrivals <= 0):
        bad = int(np.argmin(service - arrivals))
        raise UnstableQueue(
            f"edge {bad}: service {service[bad]:.6g} <= arrival {arrivals[bad]:.6g}"
        )
    if split not in ("destination", "probabilistic"):
        raise ValueError(f"unknown split mode {split!r}")

    E = matrices.num_edges
    routes = matrices.routes
    # next_edge[l][m]: edge after l on route m (destination routing);
    # children_of[l]: candidate outgoing edges after edge l, with probabilities
    next_edge = [dict() for _ in range(E)]
    first_edge = [r[0] for r in routes]
    for m, r in enumerate(routes):
        for i, l in enumerate(r[:-1]):
            next_edge[l][m] = r[i + 1]

    # outgoing edges per "location": location = edge just completed (or donor)
    out_edges_donor = sorted({r[0] for r in routes})
    out_after: list[list[int]] = [[] for _ in range(E)]
    for m, r in enumerate(routes):
        for i, l in enumerate(r[:-1]):
            nxt = r[i + 1]
            if nxt not in out_after[l]:
                out_after[l].append(nxt)

    total_rate = float(lam.sum())
    if total_rate <= 0:
        raise ValueError("total arrival rate must be positive")
    ue_probs = lam / total_rate

    # per-queue FIFO state
    queue: list[list] = [[] for _ in range(E)]
    busy = [False] * E

    t = 0.0
    seq = 0
    events: list[tuple[float, int, str, tuple]] = []

    def push(time, kind, payload):
        nonlocal seq
        heapq.heappush(events, (time, seq, kind, payload))
        seq += 1

    def start_service(l, time):
        pkt = queue[l][0]
        busy[l] = True
        svc = rng.exponential(1.0 / service[l])
        push(time + svc, "depart", (l,))

    def enqueue(l, pkt, time):
        pkt["enter"] = time
        queue[l].append(pkt)
        if not busy[l]:
            start_service(l, time)

    delivered: list[DelaySample] = []
    n_target = int(n_packets)

    def _pick_donor_edge():
        # stationary split at the donor across its outgoing queues
        w = arrivals[out_edges_donor]
        return int(rng.choice(out_edges_donor, p=w / w.sum()))

    def inject(time):
        if split == "destination":
            m = int(rng.choice(len(ue_probs), p=ue_probs))
            enqueue(first_edge[m], {"ue": m, "sojourns": []}, time)
        else:
            enqueue(_pick_donor_edge(), {"ue": None, "sojourns": []}, time)

    push(rng.exponential(1.0 / total_rate), "arrive", ())

    while events and len(delivered) < n_target:
        t, _, kind, payload = heapq.heappop(events)
        if kind == "arrive":
            inject(t)
            push(t + rng.exponential(1.0 / total_rate), "arrive", ())
        else:
            (l,) = payload
            pkt = queue[l].pop(0)
            busy[l] = False
            pkt["sojourns"].append(t - pkt["enter"])
            if queue[l]:
                start_service(l, t)
            if split == "destination":
                nxt = next_edge[l].get(pkt["ue"])
            else:
                nxt = _probabilistic_next(l, out_after, arrivals, rng)
            if nxt is None:
                ue = pkt["ue"] if pkt["ue"] is not None else _ue_of_access_edge(matrices, l)
                delivered.append(DelaySample(ue=ue, hop_sojourns_s=pkt["sojourns"]))
            else:
                enqueue(nxt, pkt, t)

    n_skip = int(warmup_frac * len(delivered))
    return delivered[n_skip:]


def _probabilistic_next(l, out_after, arrivals, rng):
    outs = out_after[l]
    access_rate = arrivals[l] - sum(arrivals[o] for o in outs)
    if not outs:
        return None
    # exit (deliver at this BS's UE side) vs forward deeper
    weights = np.array([max(access_rate, 0.0)] + [arrivals[o] for o in outs])
    idx = int(rng.choice(len(weights), p=weights / weights.sum()))
    return None if idx == 0 else outs[idx - 1]


def _ue_of_access_edge(matrices: NetworkMatrices, l: int) -> int:
    # access edge serves exactly one UE whose route ends at l
    for m, r in enumerate(matrices.routes):
        if r[-1] == l:
            return m
    raise ValueError(f"edge {l} is not the last hop of any route")


def delivery_probability(samples: Iterable[DelaySample], num_ue: int, delta_s: float) -> np.ndarray:
    """Empirical P[total delay <= delta] per UE."""
    hits = np.zeros(num_ue)
    counts = np.zeros(num_ue)
    for s in samples:
        counts[s.ue] += 1
        if s.total_s <= delta_s:
            hits[s.ue] += 1
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, hits / np.maximum(counts, 1), np.nan)


def per_queue_sojourns(
    samples: Iterable[DelaySample], matrices: NetworkMatrices
) -> dict[int, np.ndarray]:
    """Group hop sojourn times by edge index."""
    acc: dict[int, list[float]] = {}
    for s in samples:
        for hop, soj in zip(matrices.routes[s.ue], s.hop_sojourns_s):
            acc.setdefault(hop, []).append(soj)
    return {l: np.asarray(v) for l, v in acc.items()}


def write_delay_csv(samples: Iterable[DelaySample], path) -> None:
    """Export: ue_id, hop, sojourn_s, total_s."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ue_id", "hop", "sojourn_s", "total_s"])
        for s in samples:
            total = s.total_s
            for hop, soj in enumerate(s.hop_sojourns_s):
                writer.writerow([s.ue, hop, f"{soj:.9g}", f"{total:.9g}"])
