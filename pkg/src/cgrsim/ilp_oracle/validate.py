"""Independent audit of flow solutions.

Re-evaluates every constraint family in exact integer arithmetic straight
from the timeline, node specs, and commodities.  This deliberately shares no
row-assembly code with the model builder: the checks below are written
against the mathematical statement of each constraint, so a builder bug and
a validator bug would have to coincide to let a bad solution through.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import IlpModel, b_name, x_name
from .solver import FlowSolution


@dataclass(frozen=True)
class Violation:
    row: str
    detail: str


def validate_solution(model: IlpModel, sol: FlowSolution) -> list[Violation]:
    """Return all constraint violations of an OPTIMAL solution (empty = feasible)."""
    if sol.status != "OPTIMAL":
        raise ValueError("only OPTIMAL solutions can be validated")
    timeline = model.timeline
    commodities = model.commodities
    nodes = model.nodes
    caps = model.node_specs
    last = len(timeline.timestamps) - 1
    out: list[Violation] = []

    def x(q_idx: int, contact_id: int, d: int) -> int:
        return sol.value(x_name(q_idx + 1, contact_id, d))

    def b(t: int, v: int, d: int) -> int:
        return sol.value(b_name(t, v, d))

    # variable sign and per-variable caps
    for name, val in sol.values.items():
        if val < 0:
            out.append(Violation(name, f"negative value {val}"))

    for c in commodities:
        # initial buffers
        for v in nodes:
            expected = c.amount if (v == c.src and c.gen_index == 0) else 0
            got = b(0, v, c.id)
            if got != expected:
                out.append(
                    Violation(f"init_v{v}_d{c.id}", f"B at t0 is {got}, expected {expected}")
                )
        # bookkeeping between consecutive timestamps
        for t in range(1, last + 1):
            q_idx = t - 1
            for v in nodes:
                inflow = sum(
                    x(q_idx, a.contact.id, c.id)
                    for a in timeline.arcs[q_idx]
                    if a.contact.to == v
                )
                outflow = sum(
                    x(q_idx, a.contact.id, c.id)
                    for a in timeline.arcs[q_idx]
                    if a.contact.frm == v
                )
                gen = c.amount if (v == c.src and c.gen_index == t) else 0
                expected = b(t - 1, v, c.id) + inflow - outflow + gen
                got = b(t, v, c.id)
                if got != expected:
                    out.append(
                        Violation(
                            f"cons_t{t}_v{v}_d{c.id}",
                            f"B is {got}, bookkeeping gives {expected}",
                        )
                    )
        # generation-time residency at the source
        if c.gen_index > 0:
            got = b(c.gen_index, c.src, c.id)
            if got < c.amount:
                out.append(
                    Violation(
                        f"res_t{c.gen_index}_d{c.id}",
                        f"source holds {got} < generated {c.amount}",
                    )
                )
        # full delivery at the final timestamp
        for v in nodes:
            expected = c.amount if v == c.dst else 0
            got = b(last, v, c.id)
            if got != expected:
                out.append(
                    Violation(f"final_v{v}_d{c.id}", f"B at t_f is {got}, expected {expected}")
                )
        # deadline and retention at the destination
        if c.deadline_index < last:
            got = b(c.deadline_index, c.dst, c.id)
            if got != c.amount:
                out.append(
                    Violation(f"dl_d{c.id}", f"B at deadline is {got}, expected {c.amount}")
                )
            for t in range(c.deadline_index + 1, last):
                got = b(t, c.dst, c.id)
                if got < c.amount:
                    out.append(
                        Violation(f"ret_t{t}_d{c.id}", f"B fell to {got} after the deadline")
                    )

    # shared buffer capacities
    for t in range(last + 1):
        for v in nodes:
            cap = caps.get(v)
            if cap is None:
                continue
            total = sum(b(t, v, c.id) for c in commodities)
            if total > cap:
                out.append(Violation(f"buf_t{t}_v{v}", f"occupancy {total} > capacity {cap}"))

    # shared arc capacities
    for q_idx in range(timeline.n_states):
        for a in timeline.arcs[q_idx]:
            total = sum(x(q_idx, a.contact.id, c.id) for c in commodities)
            if total > a.capacity:
                out.append(
                    Violation(
                        f"arc_k{q_idx + 1}_e{a.contact.id}",
                        f"flow {total} > capacity {a.capacity}",
                    )
                )

    return out
