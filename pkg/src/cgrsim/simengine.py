"""Deterministic discrete-event simulation of store-carry-forward delivery.

Each node mirrors the classic three-role split: an app role that generates
and receives traffic, a dtn role that stores, routes, and forwards packets,
and a com role that moves packets across active contacts.  The engine walks
the state timeline boundary by boundary: at each timestamp it processes
arrivals from the state that just ended, expires stored packets whose
deadline has passed, injects newly generated traffic, and then lets every
contact of the starting state transmit up to its per-state capacity in FIFO
order.  Transmissions are sent at the state start and arrive at the state
end, which is what makes the effective delivery time of a congested packet
lag behind its locally estimated delivery time.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .contact_plan import UNLIMITED, ContactPlan, NodeSpec, discretize
from .forwarding import Packet, Policy, VolumeLedger, select_route
from .routing import RouteCache

GENERATED = "generated"
TRANSMITTED = "transmitted"
DELIVERED_ON_TIME = "delivered_on_time"
DELIVERED_LATE = "delivered_late"
DROPPED = "dropped"

DROP_NO_ROUTE = "no-route"
DROP_EXPIRED = "expired"
DROP_BUFFER_FULL = "buffer-full"


class ConfigError(ValueError):
    """A scenario references unknown nodes or is otherwise inconsistent."""


@dataclass(frozen=True)
class Demand:
    """count packets from src to dst, generated at t_gen with the given ttl."""

    src: int
    dst: int
    count: int
    t_gen: float
    ttl: float

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("demand count must be >= 1")
        if self.src == self.dst:
            raise ConfigError("demand source and destination must differ")
        if self.t_gen < 0:
            raise ConfigError("demand generation time must be >= 0")


@dataclass(frozen=True)
class TrafficModel:
    demands: tuple[Demand, ...]

    @property
    def generation_times(self) -> tuple[float, ...]:
        return tuple(sorted({d.t_gen for d in self.demands}))

    @property
    def total_packets(self) -> int:
        return sum(d.count for d in self.demands)

    @property
    def ttl_classes(self) -> tuple[float, ...]:
        return tuple(sorted({d.ttl for d in self.demands}))


@dataclass(frozen=True)
class EventRecord:
    t: float
    kind: str
    packet: int
    node: int
    dst: int | None = None
    ttl: float | None = None
    contact: int | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        d: dict = {"t": self.t, "event": self.kind, "packet": self.packet, "node": self.node}
        if self.dst is not None:
            d["dst"] = self.dst
        if self.ttl is not None:
            d["ttl"] = "inf" if math.isinf(self.ttl) else self.ttl
        if self.contact is not None:
            d["contact"] = self.contact
        if self.reason is not None:
            d["reason"] = self.reason
        return d


@dataclass
class EventLog:
    """Ordered record of everything that happened during one run."""

    records: list[EventRecord] = field(default_factory=list)
    horizon: float = 0.0

    def append(self, record: EventRecord) -> None:
        self.records.append(record)

    def by_kind(self, kind: str) -> list[EventRecord]:
        return [r for r in self.records if r.kind == kind]

    def to_ndjson(self) -> str:
        """One JSON object per line, for external auditing."""
        return "\n".join(json.dumps(r.to_dict(), sort_keys=True) for r in self.records) + (
            "\n" if self.records else ""
        )


@dataclass
class NodeState:
    """Runtime storage of one node: per-neighbor transmit queues plus the
    limbo list that holds packets between arrival and the routing decision."""

    id: int
    buffer_capacity: int | None
    queues: dict[int, deque] = field(default_factory=dict)
    limbo: list = field(default_factory=list)
    ledger: VolumeLedger = field(default_factory=VolumeLedger)

    def stored(self) -> int:
        return sum(len(q) for q in self.queues.values()) + len(self.limbo)

    def has_room(self) -> bool:
        return self.buffer_capacity is None or self.stored() < self.buffer_capacity

    def enqueue(self, neighbor: int, pkt: Packet) -> None:
        self.queues.setdefault(neighbor, deque()).append(pkt)


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate metrics of one run; undefined fields are None."""

    generated: int
    delivered_on_time: int
    delivered_late: int
    dropped: int
    residual: int
    transmissions: int
    delivery_ratio: float
    dropped_per_node: dict[int, int]
    mean_hops: float | None
    energy_efficiency: float | None
    mean_delay: float | None
    mean_delay_by_ttl_class: dict[float, float | None]


def run_simulation(
    plan: ContactPlan,
    traffic: TrafficModel,
    policy: Policy,
    node_specs: Iterable[NodeSpec] = (),
    seed: int = 0,
    k_routes: int | None = 20,
) -> EventLog:
    """Simulate one scenario and return its event log.

    The run is a pure function of its arguments: identical inputs produce an
    identical log.  The seed is recorded as part of the run identity but the
    v1 dynamics contain no random choices.
    """
    del seed  # no stochastic dynamics in v1
    for d in traffic.demands:
        if d.src not in plan.nodes or d.dst not in plan.nodes:
            raise ConfigError(f"demand endpoint not in plan: {d.src}->{d.dst}")
        if d.t_gen >= plan.horizon:
            raise ConfigError(f"demand generated at {d.t_gen}, at or after horizon")

    caps = {spec.id: spec.buffer_capacity for spec in node_specs}
    for node in caps:
        if node not in plan.nodes:
            raise ConfigError(f"node spec for unknown node {node}")
    nodes = {
        n: NodeState(id=n, buffer_capacity=caps.get(n, UNLIMITED)) for n in sorted(plan.nodes)
    }

    timeline = discretize(plan, traffic.generation_times)
    cache = RouteCache(plan, k_routes)
    n_nodes = len(plan.nodes)
    horizon = plan.horizon
    log = EventLog(horizon=horizon)

    schedule: dict[float, list[Demand]] = {}
    for d in traffic.demands:
        schedule.setdefault(d.t_gen, []).append(d)
    next_packet_id = 1

    def route_and_enqueue(node: NodeState, pkt: Packet, t: float) -> None:
        table = cache.routes(node.id, pkt.dst, t)
        chosen = select_route(table, policy, pkt, t, n_nodes, horizon, ledger=node.ledger)
        if chosen is None:
            log.append(EventRecord(t, DROPPED, pkt.id, node.id, reason=DROP_NO_ROUTE))
        elif not node.has_room():
            log.append(EventRecord(t, DROPPED, pkt.id, node.id, reason=DROP_BUFFER_FULL))
        else:
            node.enqueue(chosen.next_hop, pkt)

    def drain_limbo(node: NodeState, t: float) -> None:
        pending, node.limbo = node.limbo, []
        for pkt in pending:
            route_and_enqueue(node, pkt, t)

    # (packet, node) pairs that finish transit when the running state ends
    in_transit: list[tuple[Packet, int]] = []

    for idx, t in enumerate(timeline.timestamps):
        # arrivals from the state that just ended
        arrivals, in_transit = in_transit, []
        for pkt, node_id in arrivals:
            if node_id == pkt.dst:
                kind = DELIVERED_ON_TIME if t <= pkt.deadline else DELIVERED_LATE
                log.append(EventRecord(t, kind, pkt.id, node_id))
            else:
                nodes[node_id].limbo.append(pkt)
                drain_limbo(nodes[node_id], t)

        # expire stored packets whose deadline has passed
        for node in nodes.values():
            for neighbor in sorted(node.queues):
                queue = node.queues[neighbor]
                survivors = deque()
                for pkt in queue:
                    if pkt.deadline < t:
                        log.append(EventRecord(t, DROPPED, pkt.id, node.id, reason=DROP_EXPIRED))
                    else:
                        survivors.append(pkt)
                node.queues[neighbor] = survivors

        # traffic generation
        for demand in schedule.get(t, ()):
            src_node = nodes[demand.src]
            for _ in range(demand.count):
                pkt = Packet.create(
                    next_packet_id, demand.src, demand.dst, t, demand.ttl, horizon
                )
                next_packet_id += 1
                log.append(
                    EventRecord(t, GENERATED, pkt.id, demand.src, dst=demand.dst, ttl=demand.ttl)
                )
                src_node.limbo.append(pkt)
            drain_limbo(src_node, t)

        # transmissions of the state starting at t
        if idx < timeline.n_states:
            for arc in timeline.arcs[idx]:
                contact = arc.contact
                budget = arc.capacity
                queue = nodes[contact.frm].queues.get(contact.to)
                while budget > 0 and queue:
                    pkt = queue.popleft()
                    pkt.hop_count += 1
                    budget -= 1
                    log.append(
                        EventRecord(t, TRANSMITTED, pkt.id, contact.frm, contact=contact.id)
                    )
                    in_transit.append((pkt, contact.to))

    return log


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def compute_metrics(log: EventLog, traffic: TrafficModel) -> MetricsReport:
    """Derive the run metrics from the event log alone.

    Delivery ratio counts only on-time arrivals.  Mean hops divides the total
    transmissions of all packets (including wasted ones) by the on-time
    deliveries, and energy efficiency is its inverse.  Delay statistics cover
    on-time deliveries only, overall and per TTL class.
    """
    generated = 0
    created: dict[int, tuple[float, float]] = {}  # packet -> (t_created, ttl)
    delivered_on_time = 0
    delivered_late = 0
    transmissions = 0
    dropped_per_node: dict[int, int] = {}
    delays: list[float] = []
    delays_by_class: dict[float, list[float]] = {ttl: [] for ttl in traffic.ttl_classes}

    for rec in log.records:
        if rec.kind == GENERATED:
            generated += 1
            created[rec.packet] = (rec.t, rec.ttl)
        elif rec.kind == TRANSMITTED:
            transmissions += 1
        elif rec.kind == DELIVERED_ON_TIME:
            delivered_on_time += 1
            t0, ttl = created[rec.packet]
            delays.append(rec.t - t0)
            delays_by_class.setdefault(ttl, []).append(rec.t - t0)
        elif rec.kind == DELIVERED_LATE:
            delivered_late += 1
        elif rec.kind == DROPPED:
            dropped_per_node[rec.node] = dropped_per_node.get(rec.node, 0) + 1

    dropped = sum(dropped_per_node.values())
    residual = generated - delivered_on_time - delivered_late - dropped
    delivery_ratio = delivered_on_time / generated if generated else 0.0
    mean_hops = transmissions / delivered_on_time if delivered_on_time else None
    energy_efficiency = delivered_on_time / transmissions if delivered_on_time else None
    return MetricsReport(
        generated=generated,
        delivered_on_time=delivered_on_time,
        delivered_late=delivered_late,
        dropped=dropped,
        residual=residual,
        transmissions=transmissions,
        delivery_ratio=delivery_ratio,
        dropped_per_node=dict(sorted(dropped_per_node.items())),
        mean_hops=mean_hops,
        energy_efficiency=energy_efficiency,
        mean_delay=_mean(delays),
        mean_delay_by_ttl_class={
            ttl: _mean(vals) for ttl, vals in sorted(delays_by_class.items())
        },
    )
