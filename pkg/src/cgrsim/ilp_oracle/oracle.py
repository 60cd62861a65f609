"""Optimal-flow metrics and the feasibility filter for random scenarios."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..contact_plan import ContactPlan, NodeSpec, discretize
from ..simengine import MetricsReport, TrafficModel
from .model import Commodity, build_ilp, commodities_from_traffic
from .solver import FlowSolution, SolverFailure, solve


def flows_to_metrics(
    sol: FlowSolution, timeline, commodities: Sequence[Commodity]
) -> MetricsReport:
    """Convert optimal flows into the metrics reported for simulation runs.

    All traffic is delivered by construction.  Each delivered unit is
    attributed to the first timestamp at which the commodity's buffer at the
    destination has grown past it, the conservative end-of-state reading.
    """
    if sol.status != "OPTIMAL":
        raise ValueError("metrics require an OPTIMAL solution")
    stamps = timeline.timestamps
    total_amount = sum(c.amount for c in commodities)
    transmissions = sum(
        v for name, v in sol.values.items() if name.startswith("X_")
    )
    delays: list[float] = []
    delays_by_class: dict[float, list[float]] = {}
    for c in commodities:
        t_gen = stamps[c.gen_index]
        seen = 0
        for t in range(len(stamps)):
            level = sol.b(t, c.dst, c.id)
            if level > seen:
                delays.extend([stamps[t] - t_gen] * (level - seen))
                delays_by_class.setdefault(c.ttl, []).extend(
                    [stamps[t] - t_gen] * (level - seen)
                )
                seen = level
    mean = lambda vals: sum(vals) / len(vals) if vals else None
    return MetricsReport(
        generated=total_amount,
        delivered_on_time=total_amount,
        delivered_late=0,
        dropped=0,
        residual=0,
        transmissions=transmissions,
        delivery_ratio=1.0 if total_amount else 0.0,
        dropped_per_node={},
        mean_hops=transmissions / total_amount if total_amount else None,
        energy_efficiency=total_amount / transmissions if transmissions else None,
        mean_delay=mean(delays),
        mean_delay_by_ttl_class={
            ttl: mean(vals) for ttl, vals in sorted(delays_by_class.items())
        },
    )


@dataclass(frozen=True)
class FilterRecord:
    """Outcome of the feasibility filter for one candidate plan."""

    index: int
    status: str  # 'kept', 'excluded', or 'excluded-error'
    objective: int | None = None
    error: str | None = None


def filter_plans_detailed(
    plans: Sequence[ContactPlan],
    traffic: TrafficModel,
    node_specs: Sequence[NodeSpec] = (),
    backend=None,
) -> list[FilterRecord]:
    """Solve each candidate's flow model; solver errors never abort the batch."""
    records = []
    for i, plan in enumerate(plans):
        try:
            timeline = discretize(plan, traffic.generation_times)
            commodities = commodities_from_traffic(timeline, traffic)
            model = build_ilp(timeline, node_specs, commodities)
            sol = solve(model, backend)
        except (SolverFailure, ValueError) as exc:
            records.append(FilterRecord(index=i, status="excluded-error", error=str(exc)))
            continue
        if sol.status == "OPTIMAL":
            records.append(FilterRecord(index=i, status="kept", objective=sol.objective))
        else:
            records.append(FilterRecord(index=i, status="excluded"))
    return records


def feasibility_filter(
    plans: Sequence[ContactPlan],
    traffic: TrafficModel,
    node_specs: Sequence[NodeSpec] = (),
    backend=None,
) -> list[ContactPlan]:
    """Keep only the plans whose flow model solves to optimality."""
    records = filter_plans_detailed(plans, traffic, node_specs, backend)
    return [plans[r.index] for r in records if r.status == "kept"]
