"""Optimal traffic-flow integer program: model, solvers, validation, metrics."""

from .model import Commodity, IlpModel, UnalignedDemand, build_ilp, commodities_from_traffic
from .oracle import FilterRecord, feasibility_filter, filter_plans_detailed, flows_to_metrics
from .solver import (
    BackendUnavailable,
    ExactBackend,
    ExternalBackend,
    FlowSolution,
    HighsBackend,
    SolverFailure,
    Timeout,
    make_backend,
    solve,
)
from .validate import Violation, validate_solution

__all__ = [
    "Commodity",
    "IlpModel",
    "UnalignedDemand",
    "build_ilp",
    "commodities_from_traffic",
    "FlowSolution",
    "HighsBackend",
    "ExactBackend",
    "ExternalBackend",
    "BackendUnavailable",
    "SolverFailure",
    "Timeout",
    "make_backend",
    "solve",
    "Violation",
    "validate_solution",
    "FilterRecord",
    "feasibility_filter",
    "filter_plans_detailed",
    "flows_to_metrics",
]
