"""Solver backends for the traffic-flow integer program.

Three interchangeable backends sit behind one contract:

* ``HighsBackend`` (default, "highs"): in-process branch-and-bound through
  SciPy's HiGHS bindings, with the MIP gap pinned to zero.
* ``ExactBackend`` ("exact"): the bundled rational-arithmetic branch-and-
  bound, adequate for desk-scale models and used to cross-check HiGHS.
* ``ExternalBackend`` ("external:<command>"): writes the model in LP text
  format, invokes a configured solver command, and parses its solution file.

Every backend returns integral values; statuses other than OPTIMAL /
INFEASIBLE surface as exceptions.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import optimize, sparse

from . import lp_io, simplex
from .model import IlpModel, b_name, x_name

OPTIMAL = "OPTIMAL"
INFEASIBLE = "INFEASIBLE"


class SolverFailure(RuntimeError):
    """The backend terminated without a usable status."""


class BackendUnavailable(SolverFailure):
    """The requested backend cannot run in this environment."""


class Timeout(SolverFailure):
    """The backend exceeded its configured limit; no solution is available."""

    def __init__(self, limit):
        super().__init__(f"solver limit exceeded: {limit}")
        self.limit = limit


@dataclass(frozen=True)
class FlowSolution:
    """Integral flows and buffer occupancies, or an infeasibility certificate."""

    status: str
    values: dict[str, int] = field(default_factory=dict)
    objective: int | None = None

    def value(self, name: str) -> int:
        return self.values.get(name, 0)

    def x(self, state_q: int, contact_id: int, commodity: int) -> int:
        return self.value(x_name(state_q, contact_id, commodity))

    def b(self, ts_index: int, node: int, commodity: int) -> int:
        return self.value(b_name(ts_index, node, commodity))


def _exact_objective(model: IlpModel, values: dict[str, int]) -> int:
    return sum(v.objective * values.get(v.name, 0) for v in model.variables)


class HighsBackend:
    """Default in-process backend via scipy.optimize.milp."""

    name = "highs"

    def __init__(self, time_limit: float | None = None):
        self.time_limit = time_limit

    def solve(self, model: IlpModel) -> FlowSolution:
        n = model.n_variables
        if n == 0:
            return FlowSolution(status=OPTIMAL, values={}, objective=0)
        c = np.array([v.objective for v in model.variables], dtype=float)
        ub = np.array(
            [np.inf if v.upper is None else float(v.upper) for v in model.variables]
        )
        bounds = optimize.Bounds(np.zeros(n), ub)
        constraints = []
        if model.rows:
            data, rows_ix, cols_ix, lo, hi = [], [], [], [], []
            for i, row in enumerate(model.rows):
                for j, a in row.coeffs.items():
                    rows_ix.append(i)
                    cols_ix.append(j)
                    data.append(float(a))
                if row.sense == "E":
                    lo.append(float(row.rhs))
                    hi.append(float(row.rhs))
                elif row.sense == "L":
                    lo.append(-np.inf)
                    hi.append(float(row.rhs))
                else:
                    lo.append(float(row.rhs))
                    hi.append(np.inf)
            A = sparse.csr_matrix((data, (rows_ix, cols_ix)), shape=(len(model.rows), n))
            constraints.append(optimize.LinearConstraint(A, lo, hi))
        options: dict = {"mip_rel_gap": 0.0}
        if self.time_limit is not None:
            options["time_limit"] = self.time_limit
        res = optimize.milp(
            c,
            constraints=constraints,
            integrality=np.ones(n),
            bounds=bounds,
            options=options,
        )
        if res.status == 2:
            return FlowSolution(status=INFEASIBLE)
        if res.status == 1:
            raise Timeout(self.time_limit)
        if not res.success or res.x is None:
            raise SolverFailure(f"HiGHS returned status {res.status}: {res.message}")
        values: dict[str, int] = {}
        for v, xj in zip(model.variables, res.x):
            r = round(xj)
            if abs(xj - r) > 1e-6:
                raise SolverFailure(f"non-integral value {xj} for {v.name}")
            if r:
                values[v.name] = int(r)
        return FlowSolution(
            status=OPTIMAL, values=values, objective=_exact_objective(model, values)
        )


class ExactBackend:
    """Rational-arithmetic branch and bound (see simplex module)."""

    name = "exact"

    def __init__(self, node_limit: int = 200_000, time_limit: float | None = None):
        self.node_limit = node_limit
        self.time_limit = time_limit

    def solve(self, model: IlpModel) -> FlowSolution:
        if model.n_variables == 0:
            return FlowSolution(status=OPTIMAL, values={}, objective=0)
        prob = simplex.Problem(
            c=[Fraction(v.objective) for v in model.variables],
            rows=[
                ({j: Fraction(a) for j, a in row.coeffs.items()}, row.sense, Fraction(row.rhs))
                for row in model.rows
            ],
            lower=[Fraction(0)] * model.n_variables,
            upper=[None if v.upper is None else Fraction(v.upper) for v in model.variables],
        )
        try:
            status, values, objective = simplex.solve_integer(
                prob, node_limit=self.node_limit, time_limit=self.time_limit
            )
        except simplex.ExactSolverLimit as exc:
            raise Timeout(str(exc)) from None
        if status == simplex.INFEASIBLE:
            return FlowSolution(status=INFEASIBLE)
        if status != simplex.OPTIMAL:
            raise SolverFailure(f"exact solver returned {status}")
        out = {
            v.name: int(values[j]) for j, v in enumerate(model.variables) if values[j]
        }
        return FlowSolution(status=OPTIMAL, values=out, objective=int(objective))


class ExternalBackend:
    """File-based delegation to a configured solver command.

    The command template holds ``{model}`` and ``{solution}`` placeholders
    that are replaced with the LP file path and the expected solution path.
    """

    name = "external"

    def __init__(self, command_template: str, timeout: float | None = None):
        self.command_template = command_template
        self.timeout = timeout

    def solve(self, model: IlpModel) -> FlowSolution:
        with tempfile.TemporaryDirectory(prefix="cgrsim-ilp-") as tmp:
            model_path = Path(tmp) / "model.lp"
            solution_path = Path(tmp) / "solution.txt"
            model_path.write_text(lp_io.write_lp(model), encoding="utf-8")
            argv = [
                arg.format(model=str(model_path), solution=str(solution_path))
                for arg in shlex.split(self.command_template)
            ]
            try:
                proc = subprocess.run(
                    argv, capture_output=True, text=True, timeout=self.timeout
                )
            except FileNotFoundError as exc:
                raise BackendUnavailable(f"solver command not found: {exc}") from None
            except subprocess.TimeoutExpired:
                raise Timeout(self.timeout) from None
            if proc.returncode != 0:
                raise SolverFailure(
                    f"solver exited with {proc.returncode}: {proc.stderr.strip()}"
                )
            if not solution_path.exists():
                raise SolverFailure("solver produced no solution file")
            status, values = lp_io.parse_solution(
                solution_path.read_text(encoding="utf-8")
            )
        if status == INFEASIBLE:
            return FlowSolution(status=INFEASIBLE)
        if status != OPTIMAL:
            raise SolverFailure(f"external solver reported {status}")
        known = {v.name for v in model.variables}
        unknown = set(values) - known
        if unknown:
            raise SolverFailure(f"solution names unknown variables: {sorted(unknown)[:3]}")
        values = {k: v for k, v in values.items() if v}
        return FlowSolution(
            status=OPTIMAL, values=values, objective=_exact_objective(model, values)
        )


def make_backend(spec: str = "highs", **kwargs):
    """Backend factory: 'highs', 'exact', or 'external:<command template>'."""
    if spec == "highs":
        return HighsBackend(**kwargs)
    if spec == "exact":
        return ExactBackend(**kwargs)
    if spec.startswith("external:"):
        return ExternalBackend(spec.split(":", 1)[1], **kwargs)
    raise ValueError(f"unknown solver backend {spec!r}")


def solve(model: IlpModel, backend=None) -> FlowSolution:
    """Solve a model to proven optimality or report infeasibility."""
    if backend is None:
        backend = HighsBackend()
    return backend.solve(model)
