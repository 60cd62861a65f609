"""Experiment orchestration: scenario configs, sweeps, and CSV emission.

A scenario is a plan source (files or random-generator parameters), a
traffic specification swept over a load range, a set of policies, and run
seeds.  Every (plan, load, policy, seed) combination is one run emitting one
CSV row; aggregate rows carry the mean and the 95% confidence half-width
(normal approximation) across plans and seeds.  Output is deterministic for
a fixed configuration, byte for byte.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .contact_plan import ContactPlan, discretize, generate_random_network, parse_contact_plan
from .forwarding import INFINITE_TTL, Policy, PolicyKind
from .ilp_oracle import (
    build_ilp,
    commodities_from_traffic,
    flows_to_metrics,
    make_backend,
    solve,
)
from .simengine import (
    ConfigError,
    Demand,
    MetricsReport,
    TrafficModel,
    compute_metrics,
    run_simulation,
)

RUN_COLUMNS = [
    "scenario_id",
    "plan_seed",
    "load",
    "policy",
    "w",
    "K",
    "run_seed",
    "delivery_ratio",
    "dropped_total",
    "dropped_per_node",
    "mean_hops",
    "energy_efficiency",
    "mean_delay",
    "mean_delay_ttl_finite",
    "mean_delay_ttl_inf",
    "generated",
    "delivered_on_time",
    "delivered_late",
    "residual",
]

AGGREGATE_METRICS = [
    "delivery_ratio",
    "dropped_total",
    "mean_hops",
    "energy_efficiency",
    "mean_delay",
    "mean_delay_ttl_finite",
    "mean_delay_ttl_inf",
]


@dataclass(frozen=True)
class RandomNetParams:
    n_nodes: int = 11
    n_states: int = 10
    state_duration: float = 10.0
    density: float = 0.2
    capacity: int = 10
    seeds: tuple[int, ...] = ()


@dataclass(frozen=True)
class TrafficSpec:
    """All-to-one traffic: each source sends `load` packets to dest at t=0.

    ttl_by_source maps each source to its TTL class; sources default to the
    reference setup (sources 1-5 unconstrained, 6-10 at 20 s, destination
    node 11).  Explicit demand tuples override the pattern entirely; a count
    of -1 stands for the swept load.
    """

    sources: tuple[int, ...] = tuple(range(1, 11))
    dest: int = 11
    ttl_by_source: dict[int, float] = field(
        default_factory=lambda: {s: (INFINITE_TTL if s <= 5 else 20.0) for s in range(1, 11)}
    )
    loads: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)
    explicit: tuple[tuple[int, int, int, float, float], ...] = ()  # (src,dst,count,t_gen,ttl)

    def model_for_load(self, load: int) -> TrafficModel:
        if self.explicit:
            demands = tuple(
                Demand(src=s, dst=d, count=(load if c == -1 else c), t_gen=t, ttl=ttl)
                for s, d, c, t, ttl in self.explicit
            )
        else:
            demands = tuple(
                Demand(src=s, dst=self.dest, count=load, t_gen=0.0, ttl=self.ttl_by_source[s])
                for s in self.sources
            )
        return TrafficModel(demands=demands)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str = "scenario"
    plan_files: tuple[str, ...] = ()
    random_params: RandomNetParams | None = None
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    policies: tuple[Policy, ...] = ()
    run_seeds: tuple[int, ...] = (0,)
    k_routes: int = 20
    oracle: bool = False
    backend: str = "highs"
    out_dir: str = "results"
    candidates: int = 100  # feasibility-filter candidate count
    jobs: int = 1

    def validate(self) -> None:
        if not self.policies:
            raise ConfigError("at least one policy is required")
        if not self.traffic.loads:
            raise ConfigError("load range must be non-empty")
        for p in self.policies:
            if p.kind is PolicyKind.MO and not 0.0 <= p.w <= 1.0:
                raise ConfigError("MO weights must lie in [0, 1]")
        if not self.plan_files and self.random_params is None:
            raise ConfigError("a plan source (files or random parameters) is required")


def _parse_int_list(text: str) -> tuple[int, ...]:
    """Accept '1,2,3' and 'a-b' range syntax, possibly mixed."""
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _parse_ttl(text: str) -> float:
    t = text.strip().lower()
    return INFINITE_TTL if t in ("inf", "infinite", "none") else float(t)


def _parse_ttl_map(text: str) -> dict[int, float]:
    out: dict[int, float] = {}
    for part in text.split(","):
        if not part.strip():
            continue
        nodes, ttl = part.rsplit(":", 1)
        for n in _parse_int_list(nodes):
            out[n] = _parse_ttl(ttl)
    return out


def _parse_demands(text: str) -> tuple[tuple[int, int, int, float, float], ...]:
    """Parse 'src:dst:count:t_gen:ttl' tuples separated by whitespace or commas;
    count may be the literal 'load' to stand for the swept load."""
    out = []
    for item in text.replace(",", " ").split():
        src, dst, count, t_gen, ttl = item.split(":")
        out.append(
            (
                int(src),
                int(dst),
                -1 if count.strip().lower() == "load" else int(count),
                float(t_gen),
                _parse_ttl(ttl),
            )
        )
    return tuple(out)


def load_config(path: str | Path | None, overrides: dict | None = None) -> ScenarioConfig:
    """Build a ScenarioConfig from an INI file plus flag overrides."""
    values: dict[str, str] = {}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(str(path))
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            for key, val in parser.items(section):
                values[key] = val
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = str(val)

    try:
        traffic = TrafficSpec(
            sources=_parse_int_list(values.get("sources", "1-10")),
            dest=int(values.get("dest", "11")),
            ttl_by_source=_parse_ttl_map(values.get("ttl_map", "1-5:inf,6-10:20")),
            loads=_parse_int_list(values.get("loads", "1-10")),
            explicit=_parse_demands(values["demands"]) if "demands" in values else (),
        )
        if not traffic.explicit:
            missing = [s for s in traffic.sources if s not in traffic.ttl_by_source]
            if missing:
                raise ConfigError(f"ttl_map misses sources {missing}")
        random_params = None
        if "plan_seeds" in values:
            random_params = RandomNetParams(
                n_nodes=int(values.get("n_nodes", "11")),
                n_states=int(values.get("n_states", "10")),
                state_duration=float(values.get("state_duration", "10")),
                density=float(values.get("density", "0.2")),
                capacity=int(values.get("capacity", "10")),
                seeds=_parse_int_list(values["plan_seeds"]),
            )
        policies = tuple(
            Policy.parse(p) for p in values.get("policies", "").replace(",", " ").split()
        )
        config = ScenarioConfig(
            scenario_id=values.get("scenario_id", "scenario"),
            plan_files=tuple(values["plan_files"].split()) if "plan_files" in values else (),
            random_params=random_params,
            traffic=traffic,
            policies=policies,
            run_seeds=_parse_int_list(values.get("run_seeds", "0")),
            k_routes=int(values.get("k", "20")),
            oracle=values.get("oracle", "off").lower() in ("on", "true", "1", "yes"),
            backend=values.get("backend", "highs"),
            out_dir=values.get("out_dir", "results"),
            candidates=int(values.get("candidates", "100")),
            jobs=int(values.get("jobs", "1")),
        )
    except ConfigError:
        raise
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad configuration value: {exc}") from None
    config.validate()
    return config


def load_plans(config: ScenarioConfig) -> list[tuple[int, ContactPlan]]:
    """Materialize (plan_seed, plan) pairs from files or the generator."""
    if config.plan_files:
        plans = []
        for i, f in enumerate(config.plan_files):
            plans.append((i, parse_contact_plan(Path(f).read_text(encoding="utf-8"))))
        return plans
    p = config.random_params
    return [
        (
            seed,
            generate_random_network(
                seed, p.n_nodes, p.n_states, p.state_duration, p.density, p.capacity
            ),
        )
        for seed in p.seeds
    ]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return format(value, ".12g")
    return str(value)


def _split_delay_classes(metrics: MetricsReport) -> tuple[float | None, float | None]:
    """Mean delay over finite-TTL classes and over the infinite class."""
    finite_vals = []
    inf_val = None
    for ttl, mean in metrics.mean_delay_by_ttl_class.items():
        if math.isinf(ttl):
            inf_val = mean
        elif mean is not None:
            finite_vals.append(mean)
    finite = sum(finite_vals) / len(finite_vals) if finite_vals else None
    return finite, inf_val


def metrics_to_row(
    scenario_id: str,
    plan_seed: int,
    load: int,
    policy_label: str,
    w: float | None,
    k: int | str,
    run_seed: int | str,
    metrics: MetricsReport,
) -> dict[str, str]:
    finite, inf_val = _split_delay_classes(metrics)
    return {
        "scenario_id": scenario_id,
        "plan_seed": str(plan_seed),
        "load": str(load),
        "policy": policy_label,
        "w": _fmt(w),
        "K": str(k),
        "run_seed": str(run_seed),
        "delivery_ratio": _fmt(metrics.delivery_ratio),
        "dropped_total": str(metrics.dropped),
        "dropped_per_node": json.dumps(metrics.dropped_per_node, sort_keys=True),
        "mean_hops": _fmt(metrics.mean_hops),
        "energy_efficiency": _fmt(metrics.energy_efficiency),
        "mean_delay": _fmt(metrics.mean_delay),
        "mean_delay_ttl_finite": _fmt(finite),
        "mean_delay_ttl_inf": _fmt(inf_val),
        "generated": str(metrics.generated),
        "delivered_on_time": str(metrics.delivered_on_time),
        "delivered_late": str(metrics.delivered_late),
        "residual": str(metrics.residual),
    }


def _one_run(args) -> dict[str, str]:
    scenario_id, plan_seed, plan, load, policy, run_seed, k_routes, traffic_spec = args
    traffic = traffic_spec.model_for_load(load)
    log = run_simulation(plan, traffic, policy, seed=run_seed, k_routes=k_routes)
    metrics = compute_metrics(log, traffic)
    return metrics_to_row(
        scenario_id,
        plan_seed,
        load,
        policy.label,
        policy.w,
        k_routes,
        run_seed,
        metrics,
    )


def _oracle_run(args) -> dict[str, str]:
    scenario_id, plan_seed, plan, load, backend_spec, traffic_spec = args
    traffic = traffic_spec.model_for_load(load)
    timeline = discretize(plan, traffic.generation_times)
    commodities = commodities_from_traffic(timeline, traffic)
    model = build_ilp(timeline, [], commodities)
    sol = solve(model, make_backend(backend_spec))
    if sol.status == "OPTIMAL":
        metrics = flows_to_metrics(sol, timeline, commodities)
        return metrics_to_row(scenario_id, plan_seed, load, "ilp", None, "", "", metrics)
    row = {col: "" for col in RUN_COLUMNS}
    row.update(
        scenario_id=scenario_id,
        plan_seed=str(plan_seed),
        load=str(load),
        policy="ilp",
        K="",
        run_seed="",
        delivery_ratio="",
    )
    return row


def run_experiments(config: ScenarioConfig) -> list[dict[str, str]]:
    """Execute the full sweep and return the raw run rows in stable order."""
    plans = load_plans(config)
    sim_jobs = [
        (config.scenario_id, seed, plan, load, policy, run_seed, config.k_routes, config.traffic)
        for seed, plan in plans
        for load in config.traffic.loads
        for policy in config.policies
        for run_seed in config.run_seeds
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(_one_run, sim_jobs, chunksize=4))
    else:
        rows = [_one_run(job) for job in sim_jobs]
    if config.oracle:
        for seed, plan in plans:
            for load in config.traffic.loads:
                rows.append(
                    _oracle_run(
                        (config.scenario_id, seed, plan, load, config.backend, config.traffic)
                    )
                )
    return rows


def aggregate_rows(rows: Iterable[dict[str, str]]) -> list[dict[str, str]]:
    """Mean and 95% half-width per (load, policy, w, K) across plans and seeds."""
    groups: dict[tuple, list[dict[str, str]]] = {}
    for row in rows:
        key = (row["load"], row["policy"], row["w"], row["K"])
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=lambda k: (int(k[0]) if k[0] else 0, k[1], k[2], k[3])):
        load, policy, w, k = key
        agg: dict[str, str] = {"load": load, "policy": policy, "w": w, "K": k}
        agg["n_runs"] = str(len(groups[key]))
        for metric in AGGREGATE_METRICS:
            vals = [float(r[metric]) for r in groups[key] if r[metric] not in ("", "inf")]
            if not vals:
                agg[f"{metric}_mean"] = ""
                agg[f"{metric}_ci95"] = ""
                continue
            mean = sum(vals) / len(vals)
            if len(vals) > 1:
                var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                half = 1.96 * math.sqrt(var / len(vals))
            else:
                half = 0.0
            agg[f"{metric}_mean"] = _fmt(mean)
            agg[f"{metric}_ci95"] = _fmt(half)
        out.append(agg)
    return out


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict[str, str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def aggregate_columns() -> list[str]:
    cols = ["load", "policy", "w", "K", "n_runs"]
    for metric in AGGREGATE_METRICS:
        cols.append(f"{metric}_mean")
        cols.append(f"{metric}_ci95")
    return cols
