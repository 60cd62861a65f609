"""Exact integer programming over rational arithmetic.

A dense two-phase primal simplex with bounded variables, run entirely on
Fractions so every LP bound and every incumbent is exact, wrapped in a
depth-first branch-and-bound.  A singleton-row presolve (bound tightening
and variable fixing with substitution) shrinks the flow models considerably
before the tableau is built.  Intended for desk-scale models; larger models
should go through the HiGHS or external backends.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

OPTIMAL = "OPTIMAL"
INFEASIBLE = "INFEASIBLE"
UNBOUNDED = "UNBOUNDED"


class ExactSolverLimit(Exception):
    """Node or wall-clock budget exhausted before the tree was closed."""


@dataclass
class Problem:
    """min c.x subject to rows (coeffs, sense, rhs) and 0-based variable bounds."""

    c: list[Fraction]
    rows: list[tuple[dict[int, Fraction], str, Fraction]]  # sense in {'E','L','G'}
    lower: list[Fraction]
    upper: list[Fraction | None]


def _presolve(prob: Problem):
    """Iteratively turn singleton rows into bounds and substitute fixed vars.

    Returns (status, fixed_values, reduced_problem, col_map, obj_offset);
    status is INFEASIBLE when bound tightening crossed over.
    """
    n = len(prob.c)
    lower = list(prob.lower)
    upper = list(prob.upper)
    rows = [(dict(coeffs), sense, rhs) for coeffs, sense, rhs in prob.rows]
    fixed: dict[int, Fraction] = {}

    def tighten(j: int, lo: Fraction | None, hi: Fraction | None) -> bool:
        if lo is not None and lo > lower[j]:
            lower[j] = lo
        if hi is not None and (upper[j] is None or hi < upper[j]):
            upper[j] = hi
        return upper[j] is None or lower[j] <= upper[j]

    changed = True
    while changed:
        changed = False
        kept = []
        for coeffs, sense, rhs in rows:
            live = {j: a for j, a in coeffs.items() if j not in fixed and a != 0}
            shift = sum((a * fixed[j] for j, a in coeffs.items() if j in fixed), Fraction(0))
            rhs = rhs - shift
            if not live:
                ok = rhs == 0 if sense == "E" else (rhs >= 0 if sense == "L" else rhs <= 0)
                if not ok:
                    return INFEASIBLE, fixed, None, None, Fraction(0)
                changed = True
                continue
            if len(live) == 1:
                (j, a), = live.items()
                bound = rhs / a
                if sense == "E":
                    ok = tighten(j, bound, bound)
                elif (sense == "L") == (a > 0):
                    ok = tighten(j, None, bound)
                else:
                    ok = tighten(j, bound, None)
                if not ok:
                    return INFEASIBLE, fixed, None, None, Fraction(0)
                changed = True
                continue
            kept.append((live, sense, rhs))
        rows = kept
        for j in range(n):
            if j not in fixed and upper[j] is not None and lower[j] == upper[j]:
                fixed[j] = lower[j]
                changed = True

    col_map = [j for j in range(n) if j not in fixed]
    obj_offset = sum((prob.c[j] * v for j, v in fixed.items()), Fraction(0))
    new_index = {j: k for k, j in enumerate(col_map)}
    reduced_rows = []
    for coeffs, sense, rhs in rows:
        shift = sum((a * fixed[j] for j, a in coeffs.items() if j in fixed), Fraction(0))
        live = {new_index[j]: a for j, a in coeffs.items() if j not in fixed}
        reduced_rows.append((live, sense, rhs - shift))
    reduced = Problem(
        c=[prob.c[j] for j in col_map],
        rows=reduced_rows,
        lower=[lower[j] for j in col_map],
        upper=[upper[j] for j in col_map],
    )
    return OPTIMAL, fixed, reduced, col_map, obj_offset


class _BoundedSimplex:
    """Dense two-phase primal simplex with variable bounds, exact arithmetic."""

    AT_LOWER = 0
    AT_UPPER = 1
    BASIC = 2

    def __init__(self, prob: Problem):
        self.m = len(prob.rows)
        n = len(prob.c)
        self.lower = list(prob.lower)
        self.upper = list(prob.upper)
        self.obj = list(prob.c)
        cols = n
        # slacks: <= rows get +1 slack, >= rows get -1 surplus
        self.rowdata = []
        for coeffs, sense, rhs in prob.rows:
            row = dict(coeffs)
            if sense in ("L", "G"):
                row[cols] = Fraction(1) if sense == "L" else Fraction(-1)
                self.lower.append(Fraction(0))
                self.upper.append(None)
                self.obj.append(Fraction(0))
                cols += 1
            self.rowdata.append((row, rhs))
        self.n = cols

    def solve(self):
        """Returns (status, values, objective)."""
        m, n = self.m, self.n
        if m == 0:
            values = [
                self.lower[j]
                if self.obj[j] >= 0 or self.upper[j] is None
                else self.upper[j]
                for j in range(n)
            ]
            if any(self.obj[j] < 0 and self.upper[j] is None for j in range(n)):
                return UNBOUNDED, None, None
            return OPTIMAL, values, sum(
                (self.obj[j] * values[j] for j in range(n)), Fraction(0)
            )

        status = [self.AT_LOWER] * n
        value = [self.lower[j] for j in range(n)]
        # one artificial per row; rows with negative residual are negated so
        # the starting tableau is exactly B^-1 A for the artificial basis
        T = [[Fraction(0)] * (n + m) for _ in range(m)]
        basis = list(range(n, n + m))
        xb = []
        for i, (row, rhs) in enumerate(self.rowdata):
            resid = rhs - sum((a * value[j] for j, a in row.items()), Fraction(0))
            flip = resid < 0
            for j, a in row.items():
                T[i][j] = -Fraction(a) if flip else Fraction(a)
            T[i][n + i] = Fraction(1)
            xb.append(abs(resid))
        lower = self.lower + [Fraction(0)] * m
        upper = self.upper + [None] * m
        for i in range(m):
            status.append(self.BASIC)
            value.append(xb[i])

        # phase 1: minimize the sum of artificials
        phase_obj = [Fraction(0)] * n + [Fraction(1)] * m
        result = self._iterate(T, basis, status, value, lower, upper, phase_obj)
        if result == UNBOUNDED:  # pragma: no cover - phase 1 is bounded below
            return INFEASIBLE, None, None
        art_total = sum((value[j] for j in range(n, n + m)), Fraction(0))
        if art_total != 0:
            return INFEASIBLE, None, None
        # pin artificials to zero for phase 2
        for j in range(n, n + m):
            upper[j] = Fraction(0)

        full_obj = list(self.obj) + [Fraction(0)] * m
        result = self._iterate(T, basis, status, value, lower, upper, full_obj)
        if result == UNBOUNDED:
            return UNBOUNDED, None, None
        objective = sum((self.obj[j] * value[j] for j in range(self.n)), Fraction(0))
        return OPTIMAL, value[: self.n], objective

    def _iterate(self, T, basis, status, value, lower, upper, obj):
        """Primal iterations until optimality or unboundedness.

        Dantzig pricing normally; pure Bland's rule after a long degenerate
        stall, which guarantees termination in exact arithmetic.
        """
        m = len(T)
        ncols = len(T[0])
        stall = 0
        bland = False
        while True:
            cb = [obj[basis[i]] for i in range(m)]
            entering = -1
            ent_dir = 0
            best_score = Fraction(0)
            for j in range(ncols):
                if status[j] == self.BASIC:
                    continue
                if upper[j] is not None and upper[j] == lower[j]:
                    continue  # pinned variable, can never move
                zj = obj[j] - sum((cb[i] * T[i][j] for i in range(m)), Fraction(0))
                if status[j] == self.AT_LOWER and zj < 0:
                    score, direction = -zj, 1
                elif status[j] == self.AT_UPPER and zj > 0:
                    score, direction = zj, -1
                else:
                    continue
                if bland:
                    entering, ent_dir = j, direction
                    break
                if score > best_score:
                    best_score, entering, ent_dir = score, j, direction
            if entering < 0:
                return OPTIMAL

            # ratio test: how far can the entering variable move
            limit = None  # (step, blocking_row, to_upper_flag); row -1 = bound flip
            if upper[entering] is not None:
                limit = (upper[entering] - lower[entering], -1, False)
            for i in range(m):
                coef = T[i][entering] * ent_dir
                if coef > 0:
                    room = value[basis[i]] - lower[basis[i]]
                    step = room / coef
                    if limit is None or step < limit[0] or (step == limit[0] and limit[1] >= 0 and basis[i] < basis[limit[1]]):
                        limit = (step, i, False)
                elif coef < 0:
                    if upper[basis[i]] is None:
                        continue
                    room = upper[basis[i]] - value[basis[i]]
                    step = room / (-coef)
                    if limit is None or step < limit[0] or (step == limit[0] and limit[1] >= 0 and basis[i] < basis[limit[1]]):
                        limit = (step, i, True)
            if limit is None:
                return UNBOUNDED
            step, row, to_upper = limit

            # apply the move
            value[entering] += ent_dir * step
            for i in range(m):
                value[basis[i]] -= T[i][entering] * ent_dir * step
            if row == -1:
                status[entering] = self.AT_UPPER if ent_dir > 0 else self.AT_LOWER
            else:
                leaving = basis[row]
                status[leaving] = self.AT_UPPER if to_upper else self.AT_LOWER
                value[leaving] = upper[leaving] if to_upper else lower[leaving]
                piv = T[row][entering]
                inv = Fraction(1) / piv
                T[row] = [a * inv for a in T[row]]
                for i in range(m):
                    if i != row and T[i][entering] != 0:
                        f = T[i][entering]
                        Ti, Tr = T[i], T[row]
                        T[i] = [Ti[k] - f * Tr[k] for k in range(ncols)]
                basis[row] = entering
                status[entering] = self.BASIC

            if step == 0:
                stall += 1
                if stall > 2 * (m + ncols):
                    bland = True
            else:
                stall = 0


def solve_lp(prob: Problem):
    """Exact LP solve; returns (status, values, objective)."""
    status, fixed, reduced, col_map, offset = _presolve(prob)
    if status == INFEASIBLE:
        return INFEASIBLE, None, None
    lp_status, values, objective = _BoundedSimplex(reduced).solve()
    if lp_status != OPTIMAL:
        return lp_status, None, None
    full = [Fraction(0)] * len(prob.c)
    for j, v in fixed.items():
        full[j] = v
    for k, j in enumerate(col_map):
        full[j] = values[k]
    return OPTIMAL, full, objective + offset


def solve_integer(
    prob: Problem,
    node_limit: int = 200_000,
    time_limit: float | None = None,
):
    """Branch and bound over the exact LP relaxation.

    All-integer data means every feasible integral point has an integral
    objective, so a node is pruned as soon as its LP bound cannot undercut
    the incumbent by at least one.  Returns (status, values, objective).
    """
    t0 = time.monotonic()
    status, fixed, reduced, col_map, offset = _presolve(prob)
    if status == INFEASIBLE:
        return INFEASIBLE, None, None
    if any(v.denominator != 1 for v in fixed.values()):
        return INFEASIBLE, None, None
    n = len(reduced.c)
    root_lower = [Fraction(math.ceil(b)) for b in reduced.lower]
    root_upper = [None if b is None else Fraction(math.floor(b)) for b in reduced.upper]
    if any(u is not None and l > u for l, u in zip(root_lower, root_upper)):
        return INFEASIBLE, None, None
    best_values: list[Fraction] | None = None
    best_obj: Fraction | None = None
    stack = [(root_lower, root_upper)]
    nodes = 0
    while stack:
        nodes += 1
        if nodes > node_limit:
            raise ExactSolverLimit(f"node limit {node_limit} exceeded")
        if time_limit is not None and time.monotonic() - t0 > time_limit:
            raise ExactSolverLimit(f"time limit {time_limit}s exceeded")
        lower, upper = stack.pop()
        node_prob = Problem(c=reduced.c, rows=reduced.rows, lower=lower, upper=upper)
        lp_status, values, objective = solve_lp(node_prob)
        if lp_status == INFEASIBLE:
            continue
        if lp_status == UNBOUNDED:  # pragma: no cover - flow models are bounded
            return UNBOUNDED, None, None
        if best_obj is not None and objective > best_obj - 1:
            continue
        frac_j = -1
        for j in range(n):
            if values[j].denominator != 1:
                frac_j = j
                break
        if frac_j < 0:
            best_values, best_obj = values, objective
            continue
        floor_v = Fraction(math.floor(values[frac_j]))
        up_l, up_u = list(lower), list(upper)
        up_l[frac_j] = floor_v + 1
        down_l, down_u = list(lower), list(upper)
        down_u[frac_j] = floor_v
        stack.append((up_l, up_u))
        stack.append((down_l, down_u))  # explore the floor branch first

    if best_values is None:
        return INFEASIBLE, None, None
    full = [Fraction(0)] * len(prob.c)
    for j, v in fixed.items():
        full[j] = v
    for k, j in enumerate(col_map):
        full[j] = best_values[k]
    return OPTIMAL, full, best_obj + offset
