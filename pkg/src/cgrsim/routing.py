"""Contact graph construction and earliest-delivery route search.

The contact graph is a static structure whose vertices are contacts and
whose edges mean "data can be retained at a node between these two
contacts".  Route search walks it with arrival-time propagation
``arrival(next) = max(arrival(prev), next.t_start)`` and zero one-way light
time, so the estimated delivery time of a route is the arrival at the start
of its last contact.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import islice
from typing import Iterator

from .contact_plan import Contact, ContactPlan


class UnknownNode(ValueError):
    """Routing was requested for a node that is not in the plan."""


@dataclass(frozen=True)
class Route:
    """An ordered contact path with its derived attributes.

    volume is the minimum residual capacity across the path at construction
    time; expiry is the earliest contact end, after which the route can no
    longer be used for new traffic.
    """

    contacts: tuple[Contact, ...]
    edt: float
    volume: int

    @property
    def hops(self) -> int:
        return len(self.contacts)

    @property
    def expiry(self) -> float:
        return min(c.t_end for c in self.contacts)

    @property
    def next_hop(self) -> int:
        return self.contacts[0].to

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(c.id for c in self.contacts)

    @property
    def sort_key(self) -> tuple[float, int, tuple[int, ...]]:
        return (self.edt, self.hops, self.ids)

    @classmethod
    def from_contacts(cls, contacts: tuple[Contact, ...], t_now: float) -> "Route":
        """Build a route, propagating arrival times and checking feasibility.

        Feasibility is per step: every contact must be entered strictly
        before its own end.  The route-level expiry (earliest contact end)
        bounds how long the route may be offered to new traffic, not the
        delivery time itself.
        """
        if not contacts:
            raise ValueError("a route needs at least one contact")
        arrival = t_now
        for i, c in enumerate(contacts):
            if i > 0 and contacts[i - 1].to != c.frm:
                raise ValueError("contacts do not form a path")
            arrival = max(arrival, c.t_start)
            if arrival >= c.t_end:
                raise ValueError(f"contact {c.id} ends before it can be used")
        volume = min(c.capacity for c in contacts)
        return cls(contacts=contacts, edt=arrival, volume=volume)


@dataclass(frozen=True, eq=False)
class ContactGraph:
    """Contact graph for one (source, dest, t_now) query.

    vertices are the contacts still alive at t_now; root_out lists contacts
    departing the source and terminal_in those arriving at the destination.
    The retention arcs between contacts are exposed through edges() /
    successors(); route search walks the by-sender adjacency directly.
    """

    source: int
    dest: int
    t_now: float
    vertices: tuple[Contact, ...]
    root_out: tuple[int, ...]
    terminal_in: tuple[int, ...]
    by_from: dict[int, tuple[Contact, ...]]

    def _linkable(self, a: Contact, b: Contact) -> bool:
        return b.t_end > max(self.t_now, a.t_start)

    def successors(self, contact: Contact) -> tuple[Contact, ...]:
        return tuple(
            b for b in self.by_from.get(contact.to, ()) if self._linkable(contact, b)
        )

    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (a.id, b.id) for a in self.vertices for b in self.successors(a)
        )


def build_contact_graph(
    plan: ContactPlan, source: int, dest: int, t_now: float = 0.0
) -> ContactGraph:
    """Build the contact graph of contacts usable from t_now onward."""
    if source == dest:
        raise ValueError("source and destination must differ")
    for node in (source, dest):
        if node not in plan.nodes:
            raise UnknownNode(f"node {node} not in plan")
    alive = tuple(sorted((c for c in plan.contacts if c.t_end > t_now), key=lambda c: c.id))
    by_from: dict[int, list[Contact]] = {}
    for c in alive:
        by_from.setdefault(c.frm, []).append(c)
    return ContactGraph(
        source=source,
        dest=dest,
        t_now=t_now,
        vertices=alive,
        root_out=tuple(c.id for c in alive if c.frm == source),
        terminal_in=tuple(c.id for c in alive if c.to == dest),
        by_from={frm: tuple(lst) for frm, lst in by_from.items()},
    )


def _iter_routes(graph: ContactGraph) -> Iterator[Route]:
    """Yield all simple contact routes in ascending (edt, hops, ids) order.

    Best-first search over partial paths.  The key (arrival, hops, ids) is
    strictly increasing along any extension, so complete paths pop off the
    heap in exactly the order the route table requires, and the search can
    stop as soon as enough routes have been produced.  Paths that revisit a
    node are skipped; each contact must be entered strictly before its own
    end.
    """
    by_from = graph.by_from

    # heap entries: (arrival, hops, ids, path, visited_nodes)
    heap: list[tuple[float, int, tuple[int, ...], tuple[Contact, ...], frozenset[int]]] = []
    for c in by_from.get(graph.source, []):
        arrival = max(graph.t_now, c.t_start)
        if arrival >= c.t_end:
            continue
        heapq.heappush(
            heap,
            (arrival, 1, (c.id,), (c,), frozenset((graph.source, c.to))),
        )
    while heap:
        arrival, hops, ids, path, visited = heapq.heappop(heap)
        last = path[-1]
        if last.to == graph.dest:
            yield Route(contacts=path, edt=arrival, volume=min(c.capacity for c in path))
            continue
        for c in by_from.get(last.to, []):
            if c.to in visited:
                continue
            nxt = max(arrival, c.t_start)
            if nxt >= c.t_end:
                continue
            heapq.heappush(
                heap,
                (nxt, hops + 1, ids + (c.id,), path + (c,), visited | {c.to}),
            )


def earliest_route(graph: ContactGraph) -> Route | None:
    """The route minimizing estimated delivery time, or None when no path exists."""
    return next(_iter_routes(graph), None)


def k_best_routes(graph: ContactGraph, k: int | None = 20) -> list[Route]:
    """The k best distinct routes sorted by (edt, hops, contact ids).

    k=None exhausts the route space.  Ties on delivery time are broken by
    fewer hops, then by the lexicographically smaller contact-id sequence,
    which keeps runs deterministic.
    """
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    it = _iter_routes(graph)
    return list(it) if k is None else list(islice(it, k))


class RouteCache:
    """Route tables computed on demand per (node, destination).

    A cached table stays valid until the earliest expiry among its routes;
    after that the table is recomputed at the requesting time.  An empty
    table never expires, since contacts only disappear as time advances.
    """

    def __init__(self, plan: ContactPlan, k: int | None = 20):
        self._plan = plan
        self._k = k
        self._tables: dict[tuple[int, int], tuple[float, tuple[Route, ...]]] = {}

    def routes(self, node: int, dest: int, t_now: float) -> tuple[Route, ...]:
        key = (node, dest)
        entry = self._tables.get(key)
        if entry is not None and t_now < entry[0]:
            return entry[1]
        graph = build_contact_graph(self._plan, node, dest, t_now)
        table = tuple(k_best_routes(graph, self._k))
        valid_until = min((r.expiry for r in table), default=float("inf"))
        self._tables[key] = (valid_until, table)
        return table
