"""LP text format export and external-solver solution parsing."""

from __future__ import annotations

from .model import IlpModel

_SENSE = {"E": "=", "L": "<=", "G": ">="}


def write_lp(model: IlpModel) -> str:
    """Render the model in CPLEX LP text format with deterministic naming."""
    lines = ["Minimize"]
    terms = [
        f"{v.objective} {v.name}"
        for v in model.variables
        if v.objective != 0
    ]
    lines.append(" obj: " + (" + ".join(terms) if terms else "0 " + model.variables[0].name if model.variables else "0"))
    lines.append("Subject To")
    names = [v.name for v in model.variables]
    for row in model.rows:
        parts = []
        for j in sorted(row.coeffs):
            a = row.coeffs[j]
            if a == 0:
                continue
            if not parts:
                parts.append(f"{a} {names[j]}" if a >= 0 else f"- {-a} {names[j]}")
            elif a >= 0:
                parts.append(f"+ {a} {names[j]}")
            else:
                parts.append(f"- {-a} {names[j]}")
        lines.append(f" {row.name}: " + " ".join(parts) + f" {_SENSE[row.sense]} {row.rhs}")
    lines.append("Bounds")
    for v in model.variables:
        if v.upper is None:
            lines.append(f" 0 <= {v.name}")
        else:
            lines.append(f" 0 <= {v.name} <= {v.upper}")
    lines.append("General")
    for v in model.variables:
        lines.append(f" {v.name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> tuple[str, dict[str, int]]:
    """Parse an external solution file: a status line plus `variable value` pairs.

    The status line is either a bare status token or ``status <token>``;
    variable values are rounded to the nearest integer.
    """
    status: str | None = None
    values: dict[str, int] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if status is None:
            if len(fields) == 1:
                status = fields[0].upper()
                continue
            if fields[0].lower() == "status" and len(fields) == 2:
                status = fields[1].upper()
                continue
            raise ValueError(f"expected a status line, got {raw!r}")
        if len(fields) != 2:
            raise ValueError(f"expected 'variable value', got {raw!r}")
        values[fields[0]] = round(float(fields[1]))
    if status is None:
        raise ValueError("solution file is empty")
    return status, values
