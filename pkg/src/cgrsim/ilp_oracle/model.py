"""Integer-program formulation of optimal traffic flow over a state timeline.

Variables are per-commodity flows X on each arc of each state and buffer
occupancies B of each node at each timestamp.  The objective charges every
transmission a weight that strictly increases with the state index, so the
optimizer both delivers traffic and delivers it as early as possible.  The
constraint families are: buffer bookkeeping linking consecutive timestamps,
shared buffer capacities, shared arc capacities, initial buffer contents,
source-residency lower bounds for traffic generated mid-timeline, full
delivery at the final timestamp, and explicit deadline rows forcing each
finite-TTL commodity to sit at its destination from its deadline onward.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Sequence

from ..contact_plan import NodeSpec, StateTimeline
from ..simengine import TrafficModel


class UnalignedDemand(ValueError):
    """A demand's generation time is not a timeline timestamp."""


@dataclass(frozen=True)
class Commodity:
    """One traffic demand treated as a distinct flow.

    gen_index / deadline_index are timestamp indices; the deadline is the
    earliest timestamp at or after t_gen + ttl, clamped to the final
    timestamp (infinite TTL maps straight to the final timestamp).
    """

    id: int
    src: int
    dst: int
    gen_index: int
    ttl: float
    amount: int
    deadline_index: int

    def __post_init__(self):
        if self.amount < 1:
            raise ValueError("commodity amount must be >= 1")
        if self.src == self.dst:
            raise ValueError("commodity endpoints must differ")


def commodities_from_traffic(timeline: StateTimeline, traffic: TrafficModel) -> list[Commodity]:
    """Map demands onto timestamp indices, computing each deadline index."""
    stamps = timeline.timestamps
    last = len(stamps) - 1
    commodities = []
    for i, d in enumerate(traffic.demands):
        pos = bisect_left(stamps, d.t_gen)
        if pos > last or stamps[pos] != d.t_gen:
            raise UnalignedDemand(f"generation time {d.t_gen} is not a timeline timestamp")
        if math.isinf(d.ttl):
            deadline = last
        else:
            deadline = min(bisect_left(stamps, d.t_gen + d.ttl), last)
        commodities.append(
            Commodity(
                id=i,
                src=d.src,
                dst=d.dst,
                gen_index=pos,
                ttl=d.ttl,
                amount=d.count,
                deadline_index=deadline,
            )
        )
    return commodities


@dataclass(frozen=True)
class VarDef:
    name: str
    objective: int
    upper: int | None  # None = unbounded above; lower bound is always 0


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: dict[int, int]  # variable index -> integral coefficient
    sense: str  # 'E', 'L', or 'G'
    rhs: int


def x_name(state_q: int, contact_id: int, commodity: int) -> str:
    """Flow variable name; state_q is the 1-based state label."""
    return f"X_k{state_q}_e{contact_id}_d{commodity}"


def b_name(ts_index: int, node: int, commodity: int) -> str:
    return f"B_t{ts_index}_v{node}_d{commodity}"


@dataclass
class IlpModel:
    """The assembled integer program plus the data it was built from."""

    variables: list[VarDef]
    rows: list[Row]
    index: dict[str, int]
    timeline: StateTimeline
    node_specs: dict[int, int | None]
    commodities: list[Commodity]
    state_weights: list[int]
    nodes: list[int]

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def var_index(self, name: str) -> int:
        return self.index[name]


def build_ilp(
    timeline: StateTimeline,
    node_specs: Sequence[NodeSpec],
    demands: Sequence[Commodity],
    state_weight: Callable[[int], int] | None = None,
) -> IlpModel:
    """Assemble the flow model for one timeline and demand set.

    state_weight maps the 1-based state label to its integral objective
    weight and must be strictly increasing; the default is the identity.
    """
    weight = state_weight or (lambda q: q)
    n_states = timeline.n_states
    weights = [int(weight(q)) for q in range(1, n_states + 1)]
    if any(b <= a for a, b in zip(weights, weights[1:])) or any(w <= 0 for w in weights):
        raise ValueError("state weights must be positive and strictly increasing")

    nodes = sorted(
        {c.src for c in demands}
        | {c.dst for c in demands}
        | {spec.id for spec in node_specs}
        | {a.contact.frm for arcs in timeline.arcs for a in arcs}
        | {a.contact.to for arcs in timeline.arcs for a in arcs}
    )
    caps = {spec.id: spec.buffer_capacity for spec in node_specs}
    commodities = list(demands)
    last_ts = len(timeline.timestamps) - 1

    variables: list[VarDef] = []
    index: dict[str, int] = {}

    def add_var(name: str, objective: int, upper: int | None) -> int:
        index[name] = len(variables)
        variables.append(VarDef(name=name, objective=objective, upper=upper))
        return index[name]

    for q_idx in range(n_states):
        for arc in timeline.arcs[q_idx]:
            for c in commodities:
                add_var(x_name(q_idx + 1, arc.contact.id, c.id), weights[q_idx], arc.capacity)
    for t in range(last_ts + 1):
        for v in nodes:
            for c in commodities:
                add_var(b_name(t, v, c.id), 0, caps.get(v))

    rows: list[Row] = []

    def add_row(name: str, coeffs: dict[int, int], sense: str, rhs: int) -> None:
        if coeffs:
            rows.append(Row(name=name, coeffs=coeffs, sense=sense, rhs=rhs))

    # buffer bookkeeping between consecutive timestamps
    for c in commodities:
        for t in range(1, last_ts + 1):
            q_idx = t - 1  # state [t-1, t] is state index t-1 (label t)
            for v in nodes:
                coeffs = {
                    index[b_name(t, v, c.id)]: 1,
                    index[b_name(t - 1, v, c.id)]: -1,
                }
                for arc in timeline.arcs[q_idx]:
                    xi = index[x_name(q_idx + 1, arc.contact.id, c.id)]
                    if arc.contact.to == v:
                        coeffs[xi] = coeffs.get(xi, 0) - 1
                    if arc.contact.frm == v:
                        coeffs[xi] = coeffs.get(xi, 0) + 1
                rhs = c.amount if (v == c.src and c.gen_index == t) else 0
                add_row(f"cons_t{t}_v{v}_d{c.id}", coeffs, "E", rhs)

    # shared buffer capacities
    for t in range(last_ts + 1):
        for v in nodes:
            cap = caps.get(v)
            if cap is None:
                continue
            coeffs = {index[b_name(t, v, c.id)]: 1 for c in commodities}
            add_row(f"buf_t{t}_v{v}", coeffs, "L", cap)

    # shared arc capacities
    for q_idx in range(n_states):
        for arc in timeline.arcs[q_idx]:
            coeffs = {
                index[x_name(q_idx + 1, arc.contact.id, c.id)]: 1 for c in commodities
            }
            add_row(f"arc_k{q_idx + 1}_e{arc.contact.id}", coeffs, "L", arc.capacity)

    # initial buffers
    for c in commodities:
        for v in nodes:
            rhs = c.amount if (v == c.src and c.gen_index == 0) else 0
            add_row(f"init_v{v}_d{c.id}", {index[b_name(0, v, c.id)]: 1}, "E", rhs)

    # traffic generated mid-timeline must still sit at its source when created
    for c in commodities:
        if c.gen_index > 0:
            add_row(
                f"res_t{c.gen_index}_d{c.id}",
                {index[b_name(c.gen_index, c.src, c.id)]: 1},
                "G",
                c.amount,
            )

    # full delivery at the final timestamp
    for c in commodities:
        for v in nodes:
            rhs = c.amount if v == c.dst else 0
            add_row(f"final_v{v}_d{c.id}", {index[b_name(last_ts, v, c.id)]: 1}, "E", rhs)

    # deadline rows: at the deadline the commodity is fully at its
    # destination and stays there for every later timestamp
    for c in commodities:
        if c.deadline_index < last_ts:
            add_row(
                f"dl_d{c.id}",
                {index[b_name(c.deadline_index, c.dst, c.id)]: 1},
                "E",
                c.amount,
            )
            for t in range(c.deadline_index + 1, last_ts):
                add_row(
                    f"ret_t{t}_d{c.id}",
                    {index[b_name(t, c.dst, c.id)]: 1},
                    "G",
                    c.amount,
                )

    return IlpModel(
        variables=variables,
        rows=rows,
        index=index,
        timeline=timeline,
        node_specs=caps,
        commodities=commodities,
        state_weights=weights,
        nodes=nodes,
    )
