"""``recruit`` command line: scenario generation and experiment runs.

Subcommands:
    gen    write a (synthetic) scenario directory
    run    Monte Carlo comparison of the recruiters -> metrics.csv plus
           plan/community exports from the first iteration
    sweep  radius sweep of the cd-ilp pipeline -> metrics.csv
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .community import TrustedSet, export_partition_csv, louvain, trusted_workers
from .dataset import ScenarioConfig, generate_scenario, save_scenario, scenario_config_from_file
from .harness import (
    CD_ILP,
    CONNECTIVITY_HOPS,
    ExperimentConfig,
    STOCHASTIC,
    _randomized,
    _cost_bounds,
    _seed_for,
    base_scenario,
    run_comparison,
    run_radius_sweep,
    write_metrics_csv,
)
from .optimizer import OwnerDistances, export_plan_csv, solve
from .relations import build_sfor, build_sor, contact_pairs_with_bond
from .spatial import filter_by_radius


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", metavar="DIR", help="load a scenario directory")
    parser.add_argument("--config", metavar="PATH", help="generator config file")
    parser.add_argument("--iterations", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--connectivity", choices=sorted(CONNECTIVITY_HOPS), default="medium"
    )
    parser.add_argument("--max-candidates", type=int, default=100)
    parser.add_argument("--out", metavar="DIR", default="out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recruit",
        description="Socially-guided worker recruitment for spatial crowdsourcing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic scenario directory")
    gen.add_argument("--config", metavar="PATH", help="generator config file")
    gen.add_argument("--seed", type=int, default=None, help="override the config seed")
    gen.add_argument("--out", metavar="DIR", default="scenario")

    run = sub.add_parser("run", help="compare recruiters over Monte Carlo iterations")
    _add_common(run)
    run.add_argument(
        "--algos", default=f"{CD_ILP},{STOCHASTIC}",
        help="comma-separated subset of: cd-ilp,stochastic",
    )

    sweep = sub.add_parser("sweep", help="radius sweep for the cd-ilp pipeline")
    _add_common(sweep)
    sweep.add_argument(
        "--radius-sweep", default="0.1,0.3,0.5,0.7,1.0",
        help="comma-separated radius fractions of the map diagonal",
    )
    return parser


def _experiment_config(args, algorithms=None, radius_sweep=None) -> ExperimentConfig:
    scenario_config = None
    if args.scenario is None:
        scenario_config = (
            scenario_config_from_file(args.config)
            if args.config
            else ScenarioConfig(seed=args.seed)
        )
    kwargs = dict(
        scenario_path=args.scenario,
        scenario_config=scenario_config,
        iterations=args.iterations,
        connectivity=args.connectivity,
        seed=args.seed,
        max_candidates=args.max_candidates,
    )
    if algorithms is not None:
        kwargs["algorithms"] = algorithms
    if radius_sweep is not None:
        kwargs["radius_sweep"] = radius_sweep
    return ExperimentConfig(**kwargs)


def _cmd_gen(args) -> int:
    cfg = scenario_config_from_file(args.config) if args.config else ScenarioConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    scenario = generate_scenario(cfg)
    save_scenario(scenario, args.out)
    print(f"wrote scenario with {len(scenario.devices)} devices, "
          f"{len(scenario.tasks)} tasks to {args.out}/")
    return 0


def _cmd_run(args) -> int:
    algorithms = tuple(a.strip() for a in args.algos.split(",") if a.strip())
    cfg = _experiment_config(args, algorithms=algorithms)
    rows = run_comparison(cfg)
    os.makedirs(args.out, exist_ok=True)
    metrics_path = os.path.join(args.out, "metrics.csv")
    write_metrics_csv(rows, metrics_path)
    if CD_ILP in algorithms:
        _export_first_iteration(cfg, args.out)
    for row in rows:
        print(
            f"{row.algorithm}: mean objective "
            f"{row.mean_objective:.4f} over {row.solved_iterations} solved iterations "
            f"({row.infeasible_iterations} infeasible), "
            f"mean runtime {row.mean_runtime_ms:.2f} ms"
        )
    print(f"wrote {metrics_path}")
    return 0


def _cmd_sweep(args) -> int:
    fractions = tuple(float(x) for x in args.radius_sweep.split(",") if x.strip())
    cfg = _experiment_config(args, radius_sweep=fractions)
    rows = run_radius_sweep(cfg)
    os.makedirs(args.out, exist_ok=True)
    metrics_path = os.path.join(args.out, "metrics.csv")
    write_metrics_csv(rows, metrics_path)
    for row in rows:
        print(
            f"radius {row.radius_fraction}: mean objective {row.mean_objective:.4f}, "
            f"mean runtime {row.mean_runtime_ms:.2f} ms"
        )
    print(f"wrote {metrics_path}")
    return 0


def _export_first_iteration(cfg: ExperimentConfig, out_dir: str) -> None:
    """Re-create iteration 0 of the run and export its plan and communities."""
    base = base_scenario(cfg)
    hops = CONNECTIVITY_HOPS[cfg.connectivity]
    owner_distances = OwnerDistances(base, hops)
    contact_pairs_with_bond(base)
    cost_lo, cost_hi = _cost_bounds(cfg, base)
    rng = np.random.default_rng(_seed_for(cfg.seed, 1, 0))
    scenario = _randomized(base, rng, cost_lo, cost_hi)

    pools = {task.id: filter_by_radius(scenario, task) for task in scenario.tasks}
    trusted = {}
    exported_communities = False
    for task in scenario.tasks:
        pool = pools[task.id]
        if not pool.members:
            trusted[task.id] = TrustedSet(task=task.id, workers=frozenset())
            continue
        sfor = build_sfor(scenario, pool, max_hops=hops)
        sor = build_sor(scenario, pool)
        part_sfor = louvain(sfor, seed=_seed_for(cfg.seed, 2, 0, task.id, 0))
        part_sor = louvain(sor, seed=_seed_for(cfg.seed, 2, 0, task.id, 1))
        trusted[task.id] = trusted_workers(part_sfor, part_sor, task.requester, pool)
        if not exported_communities:
            export_partition_csv(part_sfor, os.path.join(out_dir, "communities_sfor.csv"))
            export_partition_csv(part_sor, os.path.join(out_dir, "communities_sor.csv"))
            exported_communities = True

    plan = solve(
        scenario.tasks, trusted, scenario,
        max_hops=hops, owner_distances=owner_distances, on_infeasible="mark",
    )
    for task_id in plan.solved_tasks():
        export_plan_csv(plan, os.path.join(out_dir, f"plan_{task_id}.csv"), task_id=task_id)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gen":
        return _cmd_gen(args)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_sweep(args)


if __name__ == "__main__":
    sys.exit(main())
