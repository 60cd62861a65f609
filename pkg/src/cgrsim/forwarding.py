"""Route filtering and policy-driven route selection.

All policies share one filtering stage: a route is a candidate only while it
has not expired, has residual volume for the packet, and its estimated
delivery time meets the packet deadline.  The policies differ solely in the
metric minimized afterwards: estimated delivery time (DELTIME), hop count
(HOPS), or the weighted multi-objective blend (MO).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .routing import Route

#: TTL value meaning "no maximum latency requirement".
INFINITE_TTL = math.inf


class DegenerateScenario(ValueError):
    """Multi-objective normalization is undefined (zero horizon)."""


class PolicyKind(Enum):
    DELTIME = "deltime"
    HOPS = "hops"
    MO = "mo"


@dataclass(frozen=True)
class Policy:
    """Route-selection policy; w is required exactly for MO."""

    kind: PolicyKind
    w: float | None = None

    def __post_init__(self):
        if self.kind is PolicyKind.MO:
            if self.w is None or not 0.0 <= self.w <= 1.0:
                raise ValueError("MO policy needs a weight w in [0, 1]")
        elif self.w is not None:
            raise ValueError(f"{self.kind.value} policy takes no weight")

    @classmethod
    def deltime(cls) -> "Policy":
        return cls(PolicyKind.DELTIME)

    @classmethod
    def hops(cls) -> "Policy":
        return cls(PolicyKind.HOPS)

    @classmethod
    def mo(cls, w: float) -> "Policy":
        return cls(PolicyKind.MO, w)

    @classmethod
    def parse(cls, text: str) -> "Policy":
        """Parse 'deltime', 'hops', or 'mo:<w>'."""
        t = text.strip().lower()
        if t == "deltime":
            return cls.deltime()
        if t == "hops":
            return cls.hops()
        if t.startswith("mo:"):
            return cls.mo(float(t.split(":", 1)[1]))
        raise ValueError(f"unknown policy {text!r}")

    @property
    def label(self) -> str:
        if self.kind is PolicyKind.MO:
            return f"mo:{self.w:g}"
        return self.kind.value


@dataclass
class Packet:
    """A unit of traffic; size is one capacity unit in v1."""

    id: int
    src: int
    dst: int
    created_at: float
    ttl: float
    deadline: float
    size: int = 1
    hop_count: int = 0

    @classmethod
    def create(
        cls, id: int, src: int, dst: int, created_at: float, ttl: float, horizon: float
    ) -> "Packet":
        """Build a packet; an infinite TTL maps the deadline to the plan horizon."""
        deadline = horizon if math.isinf(ttl) else created_at + ttl
        return cls(id=id, src=src, dst=dst, created_at=created_at, ttl=ttl, deadline=deadline)


class VolumeLedger:
    """Node-local record of capacity committed to already-forwarded packets.

    Each node keeps its own ledger; committing a route subtracts the packet
    size from every contact along it.  There is no network-wide reservation,
    so two nodes may optimistically commit the same contact.
    """

    def __init__(self):
        self._used: dict[int, int] = {}

    def used(self, contact_id: int) -> int:
        return self._used.get(contact_id, 0)

    def residual(self, route: Route) -> int:
        return min(c.capacity - self.used(c.id) for c in route.contacts)

    def commit(self, route: Route, size: int = 1) -> None:
        for c in route.contacts:
            self._used[c.id] = self.used(c.id) + size


def route_volume(route: Route, ledger: VolumeLedger | None) -> int:
    return route.volume if ledger is None else ledger.residual(route)


def filter_routes(
    routes: list[Route] | tuple[Route, ...],
    pkt: Packet,
    t_now: float,
    ledger: VolumeLedger | None = None,
) -> list[Route]:
    """Keep routes that are alive, have room, and can meet the deadline."""
    return [
        r
        for r in routes
        if r.expiry > t_now and route_volume(r, ledger) >= pkt.size and r.edt <= pkt.deadline
    ]


def mo_metric(route: Route, n_nodes: int, horizon: float, w: float) -> float:
    """Weighted blend of normalized hop count and normalized delivery time."""
    if horizon <= 0:
        raise DegenerateScenario("horizon must be positive to normalize delivery time")
    if n_nodes <= 0:
        raise DegenerateScenario("n_nodes must be positive to normalize hops")
    if not 0.0 <= w <= 1.0:
        raise ValueError("w must lie in [0, 1]")
    return w * (route.hops / n_nodes) + (1.0 - w) * (route.edt / horizon)


def _selection_key(route: Route, policy: Policy, n_nodes: int, horizon: float):
    if policy.kind is PolicyKind.DELTIME:
        metric: float = route.edt
    elif policy.kind is PolicyKind.HOPS:
        metric = route.hops
    else:
        metric = mo_metric(route, n_nodes, horizon, policy.w)
    # Common tie-break across policies: fewer hops, then earlier delivery,
    # then lexicographically smaller contact ids.
    return (metric, route.hops, route.edt, route.ids)


def select_route(
    routes: list[Route] | tuple[Route, ...],
    policy: Policy,
    pkt: Packet,
    t_now: float,
    n_nodes: int,
    horizon: float,
    ledger: VolumeLedger | None = None,
) -> Route | None:
    """Filter candidates and pick the policy argmin, committing its volume.

    Returns None when no route survives filtering.  On success the selected
    route's residual volume is decremented in the caller's ledger along every
    contact of the route.
    """
    candidates = filter_routes(routes, pkt, t_now, ledger)
    if not candidates:
        return None
    best = min(candidates, key=lambda r: _selection_key(r, policy, n_nodes, horizon))
    if ledger is not None:
        ledger.commit(best, pkt.size)
    return best
