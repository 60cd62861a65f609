"""Render summary figures and aggregate tables from experiment CSVs.

Given a raw runs CSV this recomputes the aggregate table and draws one
figure per headline metric (delivery ratio, mean hops, energy efficiency,
mean delay, per-class delays) as load sweeps with 95% confidence bands,
plus a dropped-packets-per-node bar chart.  Files land next to the
aggregate CSV.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .experiments import aggregate_columns, aggregate_rows, write_csv

_METRIC_LABELS = {
    "delivery_ratio": "Delivery ratio",
    "mean_hops": "Mean hops per packet",
    "energy_efficiency": "Energy efficiency",
    "mean_delay": "Mean delay per packet [s]",
    "mean_delay_ttl_finite": "Mean delay, finite-TTL traffic [s]",
    "mean_delay_ttl_inf": "Mean delay, unconstrained traffic [s]",
}


def _series_label(policy: str, w: str) -> str:
    return policy if not w else f"{policy} (w={w})"


def _plot_metric(aggregates: list[dict[str, str]], metric: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    series: dict[str, list[tuple[int, float, float]]] = {}
    for row in aggregates:
        if row[f"{metric}_mean"] == "":
            continue
        label = _series_label(row["policy"], row["w"])
        series.setdefault(label, []).append(
            (int(row["load"]), float(row[f"{metric}_mean"]), float(row[f"{metric}_ci95"]))
        )
    for label in sorted(series):
        pts = sorted(series[label])
        loads = [p[0] for p in pts]
        means = [p[1] for p in pts]
        halfs = [p[2] for p in pts]
        ax.plot(loads, means, marker="o", label=label)
        ax.fill_between(
            loads,
            [m - h for m, h in zip(means, halfs)],
            [m + h for m, h in zip(means, halfs)],
            alpha=0.2,
        )
    ax.set_xlabel("Traffic load [packets per source]")
    ax.set_ylabel(_METRIC_LABELS.get(metric, metric))
    ax.grid(True, alpha=0.3)
    if series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _plot_drops_per_node(rows: list[dict[str, str]], load: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    per_policy: dict[str, dict[int, float]] = {}
    counts: dict[str, int] = {}
    for row in rows:
        if row["load"] != load or not row["dropped_per_node"]:
            continue
        label = _series_label(row["policy"], row["w"])
        acc = per_policy.setdefault(label, {})
        counts[label] = counts.get(label, 0) + 1
        for node, n in json.loads(row["dropped_per_node"]).items():
            acc[int(node)] = acc.get(int(node), 0) + n
    nodes = sorted({n for acc in per_policy.values() for n in acc})
    if not nodes:
        nodes = [0]
    width = 0.8 / max(len(per_policy), 1)
    for i, label in enumerate(sorted(per_policy)):
        acc = per_policy[label]
        xs = [n + i * width for n in range(len(nodes))]
        ys = [acc.get(n, 0) / counts[label] for n in nodes]
        ax.bar(xs, ys, width=width, label=label)
    ax.set_xticks([n + 0.4 - width / 2 for n in range(len(nodes))])
    ax.set_xticklabels([str(n) for n in nodes])
    ax.set_xlabel("Node")
    ax.set_ylabel(f"Mean dropped packets (load {load})")
    ax.grid(True, axis="y", alpha=0.3)
    if per_policy:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(runs_csv: Path, out_dir: Path | None = None) -> list[Path]:
    """Write aggregates.csv and the metric figures next to the runs CSV."""
    runs_csv = Path(runs_csv)
    out_dir = Path(out_dir) if out_dir is not None else runs_csv.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(runs_csv, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    aggregates = aggregate_rows(rows)
    written = [out_dir / "aggregates.csv"]
    write_csv(written[0], aggregate_columns(), aggregates)
    for metric in _METRIC_LABELS:
        path = out_dir / f"{metric}.png"
        _plot_metric(aggregates, metric, path)
        written.append(path)
    sim_rows = [r for r in rows if r["policy"] != "ilp"]
    loads = sorted({int(r["load"]) for r in sim_rows if r["load"]})
    if loads:
        mid = str(loads[len(loads) // 2])
        path = out_dir / f"dropped_per_node_load{mid}.png"
        _plot_drops_per_node(sim_rows, mid, path)
        written.append(path)
    return written
