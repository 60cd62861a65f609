"""Command-line interface: experiment runs, feasibility filtering, reports.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 solver error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .contact_plan import PlanError, generate_random_network, serialize_contact_plan
from .experiments import (
    RUN_COLUMNS,
    ScenarioConfig,
    aggregate_columns,
    aggregate_rows,
    load_config,
    load_plans,
    run_experiments,
    write_csv,
)
from .ilp_oracle import filter_plans_detailed, make_backend
from .ilp_oracle.solver import SolverFailure
from .simengine import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI scenario file; flags override its values")
    parser.add_argument("--scenario-id", dest="scenario_id")
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--plan-files", dest="plan_files", help="whitespace-separated plan paths")
    parser.add_argument("--plan-seeds", dest="plan_seeds", help="random plan seeds, e.g. 1-25")
    parser.add_argument("--n-nodes", dest="n_nodes", type=int)
    parser.add_argument("--n-states", dest="n_states", type=int)
    parser.add_argument("--state-duration", dest="state_duration", type=float)
    parser.add_argument("--density", dest="density", type=float)
    parser.add_argument("--capacity", dest="capacity", type=int)
    parser.add_argument("--sources", dest="sources")
    parser.add_argument("--dest", dest="dest", type=int)
    parser.add_argument("--ttl-map", dest="ttl_map", help="e.g. 1-5:inf,6-10:20")
    parser.add_argument("--loads", dest="loads", help="e.g. 1-10 or 3,6,10")
    parser.add_argument("--demands", dest="demands", help="explicit src:dst:count:t_gen:ttl list")
    parser.add_argument("--policies", dest="policies", help="e.g. deltime,hops,mo:0.5")
    parser.add_argument("--run-seeds", dest="run_seeds")
    parser.add_argument("--k", dest="k", type=int)
    parser.add_argument("--oracle", dest="oracle", choices=["on", "off"])
    parser.add_argument("--backend", dest="backend", help="highs, exact, or external:<cmd>")
    parser.add_argument("--candidates", dest="candidates", type=int)
    parser.add_argument("--jobs", dest="jobs", type=int)


_CONFIG_KEYS = [
    "scenario_id",
    "out_dir",
    "plan_files",
    "plan_seeds",
    "n_nodes",
    "n_states",
    "state_duration",
    "density",
    "capacity",
    "sources",
    "dest",
    "ttl_map",
    "loads",
    "demands",
    "policies",
    "run_seeds",
    "k",
    "oracle",
    "backend",
    "candidates",
    "jobs",
]


def _config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    return load_config(args.config, overrides)


def cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    rows = run_experiments(config)
    out_dir = Path(config.out_dir)
    runs_path = out_dir / "runs.csv"
    write_csv(runs_path, RUN_COLUMNS, rows)
    write_csv(out_dir / "aggregates.csv", aggregate_columns(), aggregate_rows(rows))
    print(f"wrote {runs_path} ({len(rows)} rows)")
    if args.report:
        from .report import render_report

        for path in render_report(runs_path, out_dir):
            print(f"wrote {path}")
    return EXIT_OK


def cmd_filter(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.random_params is None:
        raise ConfigError("the filter pipeline needs random-generator parameters")
    params = config.random_params
    seeds = params.seeds
    if not seeds:
        first = args.seed_base if args.seed_base is not None else 1
        seeds = tuple(range(first, first + config.candidates))
    max_load = max(config.traffic.loads)
    traffic = config.traffic.model_for_load(max_load)
    plans = [
        (
            seed,
            generate_random_network(
                seed,
                params.n_nodes,
                params.n_states,
                params.state_duration,
                params.density,
                params.capacity,
            ),
        )
        for seed in seeds
    ]
    backend = make_backend(config.backend)
    records = filter_plans_detailed([p for _, p in plans], traffic, backend=backend)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_rows = []
    kept = 0
    for (seed, plan), record in zip(plans, records):
        if record.status == "kept":
            kept += 1
            plan_path = out_dir / f"plan_s{seed}.cp"
            plan_path.write_text(serialize_contact_plan(plan), encoding="utf-8")
        manifest_rows.append(
            {
                "seed": str(seed),
                "status": record.status,
                "objective": "" if record.objective is None else str(record.objective),
                "error": record.error or "",
            }
        )
    manifest_path = out_dir / "manifest.csv"
    write_csv(manifest_path, ["seed", "status", "objective", "error"], manifest_rows)
    print(f"kept {kept}/{len(plans)} plans at load {max_load}; manifest {manifest_path}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    from .report import render_report

    for path in render_report(Path(args.runs_csv), Path(args.out_dir) if args.out_dir else None):
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgrsim",
        description="Contact graph routing experiments for scheduled DTNs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a load sweep and emit CSV results")
    _add_common_options(p_run)
    p_run.add_argument("--report", action="store_true", help="also render figures")
    p_run.set_defaults(func=cmd_run)

    p_filter = sub.add_parser("filter", help="generate candidates and keep ILP-feasible plans")
    _add_common_options(p_filter)
    p_filter.add_argument("--seed-base", dest="seed_base", type=int, default=None)
    p_filter.set_defaults(func=cmd_filter)

    p_report = sub.add_parser("report", help="render aggregates and figures from a runs CSV")
    p_report.add_argument("runs_csv")
    p_report.add_argument("--out-dir", dest="out_dir")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PlanError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolverFailure as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    raise SystemExit(main())
