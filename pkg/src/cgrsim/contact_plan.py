"""Contact plans: scheduled communication opportunities of a DTN.

A contact is one unidirectional transmission window between two nodes with a
finite capacity measured in packets.  The contact plan is the full schedule
distributed to every node ahead of time.  This module parses and serializes
plan files, generates random plans, and discretizes a plan into the
piecewise-constant state timeline consumed by the flow oracle and the
simulation engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random
from typing import Iterable

#: Sentinel for node buffers without a storage limit.
UNLIMITED = None


class PlanError(ValueError):
    """Base class for contact-plan construction and parsing failures."""


class MalformedLine(PlanError):
    """A plan file line has the wrong arity, keyword, or field types."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class InvalidInterval(PlanError):
    """A contact was declared with t_start >= t_end."""


class DuplicateId(PlanError):
    """Two contacts share the same id."""


@dataclass(frozen=True)
class Contact:
    """One scheduled unidirectional communication episode.

    The transmission window is the half-open interval [t_start, t_end);
    capacity is the total number of packets the contact can carry.
    """

    id: int
    frm: int
    to: int
    t_start: float
    t_end: float
    capacity: int

    def __post_init__(self):
        if self.t_start >= self.t_end:
            raise InvalidInterval(
                f"contact {self.id}: t_start {self.t_start} >= t_end {self.t_end}"
            )
        if self.frm == self.to:
            raise PlanError(f"contact {self.id}: from and to are both {self.frm}")
        if self.capacity < 0:
            raise PlanError(f"contact {self.id}: negative capacity {self.capacity}")

    def active_through(self, start: float, end: float) -> bool:
        """True when the whole interval [start, end) lies inside the window."""
        return self.t_start <= start and end <= self.t_end


@dataclass(frozen=True)
class ContactPlan:
    """An immutable collection of contacts plus the node population."""

    contacts: tuple[Contact, ...]
    nodes: frozenset[int]
    horizon: float

    def __post_init__(self):
        seen: set[int] = set()
        for c in self.contacts:
            if c.id in seen:
                raise DuplicateId(f"contact id {c.id} appears twice")
            seen.add(c.id)
            if c.frm not in self.nodes or c.to not in self.nodes:
                raise PlanError(f"contact {c.id} references undeclared node")
            if c.t_end > self.horizon:
                raise PlanError(
                    f"contact {c.id} ends at {c.t_end}, after horizon {self.horizon}"
                )

    @classmethod
    def of(
        cls,
        contacts: Iterable[Contact],
        extra_nodes: Iterable[int] = (),
        horizon: float | None = None,
    ) -> "ContactPlan":
        contacts = tuple(contacts)
        nodes = frozenset(extra_nodes) | {c.frm for c in contacts} | {c.to for c in contacts}
        if horizon is None:
            horizon = max((c.t_end for c in contacts), default=0.0)
        return cls(contacts=contacts, nodes=nodes, horizon=horizon)

    def contact_by_id(self, cid: int) -> Contact:
        for c in self.contacts:
            if c.id == cid:
                return c
        raise KeyError(cid)


@dataclass(frozen=True)
class NodeSpec:
    """Per-node configuration; buffer_capacity is in packets, None = unlimited."""

    id: int
    buffer_capacity: int | None = UNLIMITED

    def __post_init__(self):
        if self.buffer_capacity is not None and self.buffer_capacity < 0:
            raise PlanError(f"node {self.id}: negative buffer capacity")


@dataclass(frozen=True)
class StateArc:
    """A contact active throughout one state, with its per-state capacity."""

    contact: Contact
    capacity: int


@dataclass(frozen=True)
class StateTimeline:
    """Discretization of a plan into states with constant topology.

    timestamps: t_0 < t_1 < ... < t_f covering plan boundaries, generation
    times, 0, and the horizon.  State q (0-based index) spans
    [timestamps[q], timestamps[q+1]) and carries the arcs active throughout.
    """

    timestamps: tuple[float, ...]
    arcs: tuple[tuple[StateArc, ...], ...]

    @property
    def n_states(self) -> int:
        return len(self.arcs)

    @property
    def states(self) -> tuple[tuple[float, float], ...]:
        ts = self.timestamps
        return tuple((ts[i], ts[i + 1]) for i in range(len(ts) - 1))

    def timestamp_index(self, t: float) -> int:
        return self.timestamps.index(t)


def parse_contact_plan(text: str) -> ContactPlan:
    """Parse the line-oriented plan format.

    Records: ``node <id>`` declares a node, ``contact <t_start> <t_end>
    <from> <to> <capacity> [owlt]`` declares a contact.  Comments (#) and
    blank lines are ignored.  The trailing owlt field is accepted for
    format compatibility and discarded.
    """
    contacts: list[Contact] = []
    declared: set[int] = set()
    next_id = 1
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        keyword = fields[0]
        if keyword == "node":
            if len(fields) != 2:
                raise MalformedLine(line_no, f"node record needs 1 field, got {len(fields) - 1}")
            try:
                declared.add(int(fields[1]))
            except ValueError:
                raise MalformedLine(line_no, f"non-integer node id {fields[1]!r}") from None
        elif keyword == "contact":
            if len(fields) not in (6, 7):
                raise MalformedLine(
                    line_no, f"contact record needs 5 or 6 fields, got {len(fields) - 1}"
                )
            try:
                t_start = float(fields[1])
                t_end = float(fields[2])
                frm = int(fields[3])
                to = int(fields[4])
                capacity = int(fields[5])
                if len(fields) == 7:
                    float(fields[6])  # owlt, reserved
            except ValueError:
                raise MalformedLine(line_no, f"non-numeric field in {line!r}") from None
            if t_start >= t_end:
                raise InvalidInterval(
                    f"line {line_no}: contact interval [{t_start}, {t_end}) is empty"
                )
            try:
                contacts.append(Contact(next_id, frm, to, t_start, t_end, capacity))
            except InvalidInterval:
                raise
            except PlanError as exc:
                raise MalformedLine(line_no, str(exc)) from None
            next_id += 1
        else:
            raise MalformedLine(line_no, f"unknown record type {keyword!r}")
    return ContactPlan.of(contacts, extra_nodes=declared)


def _fmt_time(t: float) -> str:
    return str(int(t)) if t == int(t) else repr(t)


def serialize_contact_plan(plan: ContactPlan) -> str:
    """Render a plan in the format accepted by :func:`parse_contact_plan`."""
    lines = [f"node {n}" for n in sorted(plan.nodes)]
    for c in sorted(plan.contacts, key=lambda c: c.id):
        lines.append(
            f"contact {_fmt_time(c.t_start)} {_fmt_time(c.t_end)} {c.frm} {c.to} {c.capacity}"
        )
    return "\n".join(lines) + "\n"


def generate_random_network(
    seed: int,
    n_nodes: int,
    n_states: int,
    state_duration: float,
    density: float,
    capacity: int,
) -> ContactPlan:
    """Generate a random time-varying topology.

    For every unordered node pair and every state, with probability
    ``density`` a symmetric pair of directed contacts spanning exactly that
    state is emitted.  The draw sequence is fully determined by the seed, so
    identical arguments produce identical plans.
    """
    if n_nodes < 2:
        raise ValueError("n_nodes must be >= 2")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    if n_states < 0 or state_duration <= 0 or capacity < 0:
        raise ValueError("invalid random-network parameters")
    rng = Random(seed)
    contacts: list[Contact] = []
    next_id = 1
    for q in range(n_states):
        a = q * state_duration
        b = (q + 1) * state_duration
        for i in range(1, n_nodes + 1):
            for j in range(i + 1, n_nodes + 1):
                if rng.random() < density:
                    contacts.append(Contact(next_id, i, j, a, b, capacity))
                    contacts.append(Contact(next_id + 1, j, i, a, b, capacity))
                    next_id += 2
    return ContactPlan.of(
        contacts,
        extra_nodes=range(1, n_nodes + 1),
        horizon=n_states * state_duration,
    )


def discretize(plan: ContactPlan, generation_times: Iterable[float] = ()) -> StateTimeline:
    """Slice a plan into states of constant topology.

    Timestamps are the sorted union of 0, the horizon, all contact
    boundaries, and all demand generation times.  A contact belongs to every
    state its window covers; its total capacity is prorated over those states
    proportionally to duration and rounded down so all per-state capacities
    stay integral.
    """
    gen = tuple(generation_times)
    for t in gen:
        if not 0.0 <= t <= plan.horizon:
            raise ValueError(f"generation time {t} outside [0, {plan.horizon}]")
    stamps = {0.0, plan.horizon}
    for c in plan.contacts:
        stamps.add(c.t_start)
        stamps.add(c.t_end)
    stamps.update(float(t) for t in gen)
    timestamps = tuple(sorted(stamps))
    arcs: list[tuple[StateArc, ...]] = []
    for i in range(len(timestamps) - 1):
        a, b = timestamps[i], timestamps[i + 1]
        state_arcs = []
        for c in plan.contacts:
            if c.active_through(a, b):
                share = (Fraction(b) - Fraction(a)) / (Fraction(c.t_end) - Fraction(c.t_start))
                state_arcs.append(StateArc(c, math.floor(c.capacity * share)))
        state_arcs.sort(key=lambda arc: arc.contact.id)
        arcs.append(tuple(state_arcs))
    return StateTimeline(timestamps=timestamps, arcs=tuple(arcs))
