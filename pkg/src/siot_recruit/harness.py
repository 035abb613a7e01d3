"""Monte Carlo experiment driver.

Each iteration re-samples device skills, quoted costs and task locations
(device positions, ownership and the owner/contact networks stay fixed),
runs the community-detection pipeline and/or the stochastic baseline, and
accumulates per-algorithm means.

Reported runtime is the wall clock of the selection stage only — the
efficiency scoring plus assignment search for ``cd-ilp`` and the full
sample-and-stop loop for ``stochastic``.  Shared pre-processing (radius
filtering, relation graphs, community detection, owner-distance tables) is
staged outside the timed region.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .baseline import StopRule, stochastic_select
from .community import TrustedSet, louvain, trusted_workers
from .dataset import MAP_DIAGONAL, ScenarioConfig, generate_scenario, load_scenario
from .domain import ConfigError, Device, Location, Scenario, Task, TaskId
from .optimizer import InfeasibleTask, OwnerDistances, solve
from .relations import build_sfor, build_sor, contact_pairs_with_bond
from .spatial import filter_by_radius

CD_ILP = "cd-ilp"
STOCHASTIC = "stochastic"

CONNECTIVITY_HOPS: dict[str, int | None] = {"small": 1, "medium": 2, "full": None}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario_path: str | None = None
    scenario_config: ScenarioConfig | None = None
    iterations: int = 1000
    connectivity: str = "medium"
    algorithms: tuple[str, ...] = (CD_ILP, STOCHASTIC)
    radius_sweep: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 1.0)
    seed: int = 0
    max_candidates: int = 100
    reject_fraction: float = 0.3

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.connectivity not in CONNECTIVITY_HOPS:
            raise ConfigError(f"unknown connectivity {self.connectivity!r}")
        for algo in self.algorithms:
            if algo not in (CD_ILP, STOCHASTIC):
                raise ConfigError(f"unknown algorithm {algo!r}")
        if not self.algorithms:
            raise ConfigError("at least one algorithm required")
        for r in self.radius_sweep:
            if not (0.0 < r <= 1.0):
                raise ConfigError("radius sweep fractions must lie in (0, 1]")


@dataclass(frozen=True)
class IterationRecord:
    algorithm: str
    iteration: int
    solved: bool
    objective: float
    skill_term: float
    cost_term: float
    trust_term: float
    runtime_ms: float


@dataclass(frozen=True)
class MetricsRow:
    algorithm: str
    connectivity: str
    radius_fraction: float | None
    solved_iterations: int
    infeasible_iterations: int
    mean_skill_term: float
    mean_cost_term: float
    mean_trust_term: float
    mean_objective: float
    mean_runtime_ms: float


def base_scenario(cfg: ExperimentConfig) -> Scenario:
    if cfg.scenario_path is not None:
        return load_scenario(cfg.scenario_path)
    sc = cfg.scenario_config or ScenarioConfig(seed=cfg.seed)
    return generate_scenario(sc)


# ---------------------------------------------------------------------------
# Per-iteration re-randomization
# ---------------------------------------------------------------------------

def _cost_bounds(cfg: ExperimentConfig, base: Scenario) -> tuple[float, float]:
    if cfg.scenario_config is not None:
        return cfg.scenario_config.cost_range
    costs = base.cost_matrix()
    return float(costs.min()), float(costs.max())


def _randomized(
    base: Scenario,
    rng: np.random.Generator,
    cost_lo: float,
    cost_hi: float,
    radius: float | None = None,
) -> Scenario:
    n = len(base.devices)
    s = base.n_skills
    skills = rng.random((n, s))
    costs = rng.uniform(cost_lo, cost_hi, size=(n, s))
    devices = tuple(
        replace(
            dev,
            skill_level=tuple(float(v) for v in skills[i]),
            skill_cost=tuple(float(v) for v in costs[i]),
        )
        for i, dev in enumerate(base.devices)
    )
    tasks = tuple(
        Task(
            id=t.id,
            requester=t.requester,
            location=Location(float(rng.random()), float(rng.random())),
            required=t.required,
            radius=radius if radius is not None else t.radius,
        )
        for t in base.tasks
    )
    scenario = Scenario(
        devices=devices,
        tasks=tasks,
        owner_social=base.owner_social,
        contact_log=base.contact_log,
        weights=base.weights,
        distance_price=base.distance_price,
        trust_threshold=base.trust_threshold,
        n_skills=base.n_skills,
    )
    # Device positions, ownership and the contact log are unchanged: share
    # those derived caches instead of recomputing them every iteration.
    for key, value in base._cache.items():
        if key in ("coords", "device_index", "owners") or (
            isinstance(key, tuple) and key and key[0] == "sor_pairs"
        ):
            scenario._cache[key] = value
    scenario.warm_caches()
    return scenario


def _seed_for(master: int, *path: int) -> int:
    return int(np.random.SeedSequence((master, *path)).generate_state(1)[0])


def _trusted_sets(
    scenario: Scenario,
    pools,
    hops: int | None,
    louvain_seeds,
) -> dict[TaskId, TrustedSet]:
    trusted: dict[TaskId, TrustedSet] = {}
    for task in scenario.tasks:
        pool = pools[task.id]
        if not pool.members:
            trusted[task.id] = TrustedSet(task=task.id, workers=frozenset())
            continue
        sfor = build_sfor(scenario, pool, max_hops=hops)
        sor = build_sor(scenario, pool)
        part_sfor = louvain(sfor, seed=louvain_seeds(task.id, 0))
        part_sor = louvain(sor, seed=louvain_seeds(task.id, 1))
        trusted[task.id] = trusted_workers(part_sfor, part_sor, task.requester, pool)
    return trusted


# ---------------------------------------------------------------------------
# Experiment loops
# ---------------------------------------------------------------------------

def _run_iterations(
    cfg: ExperimentConfig,
    base: Scenario,
    radius: float | None = None,
    algorithms: tuple[str, ...] | None = None,
):
    algorithms = algorithms if algorithms is not None else cfg.algorithms
    hops = CONNECTIVITY_HOPS[cfg.connectivity]
    cost_lo, cost_hi = _cost_bounds(cfg, base)

    owner_distances = OwnerDistances(base, hops)
    owner_distances.warm({base.device(t.requester).owner for t in base.tasks})
    contact_pairs_with_bond(base)  # fills the shared SOR cache once

    records: dict[str, list[IterationRecord]] = {a: [] for a in algorithms}
    for it in range(cfg.iterations):
        rng = np.random.default_rng(_seed_for(cfg.seed, 1, it))
        scenario = _randomized(base, rng, cost_lo, cost_hi, radius=radius)
        pools = {task.id: filter_by_radius(scenario, task) for task in scenario.tasks}

        if CD_ILP in algorithms:
            trusted = _trusted_sets(
                scenario, pools, hops,
                lambda tid, kind: _seed_for(cfg.seed, 2, it, tid, kind),
            )
            start = time.perf_counter()
            plan = solve(
                scenario.tasks, trusted, scenario,
                max_hops=hops, owner_distances=owner_distances,
                on_infeasible="mark",
            )
            elapsed_ms = (time.perf_counter() - start) * 1000.0
            records[CD_ILP].append(_record(CD_ILP, it, plan, elapsed_ms))

        if STOCHASTIC in algorithms:
            rule = StopRule(
                reject_fraction=cfg.reject_fraction,
                max_candidates=cfg.max_candidates,
                seed=_seed_for(cfg.seed, 3, it),
            )
            start = time.perf_counter()
            try:
                plan = stochastic_select(
                    scenario.tasks, pools, scenario, rule,
                    max_hops=hops, owner_distances=owner_distances,
                )
            except InfeasibleTask:
                plan = None
            elapsed_ms = (time.perf_counter() - start) * 1000.0
            records[STOCHASTIC].append(_record(STOCHASTIC, it, plan, elapsed_ms))

    return records


def _record(algorithm: str, iteration: int, plan, elapsed_ms: float) -> IterationRecord:
    if plan is None or not plan.fully_solved():
        return IterationRecord(
            algorithm=algorithm, iteration=iteration, solved=False,
            objective=math.nan, skill_term=math.nan, cost_term=math.nan,
            trust_term=math.nan, runtime_ms=elapsed_ms,
        )
    sk, co, tr = plan.term_means()
    return IterationRecord(
        algorithm=algorithm, iteration=iteration, solved=True,
        objective=plan.objective, skill_term=sk, cost_term=co, trust_term=tr,
        runtime_ms=elapsed_ms,
    )


def _summarize(
    algorithm: str,
    connectivity: str,
    radius_fraction: float | None,
    records: list[IterationRecord],
) -> MetricsRow:
    solved = [r for r in records if r.solved]
    n = len(solved)

    def mean(attr: str) -> float:
        if n == 0:
            return math.nan
        return sum(getattr(r, attr) for r in solved) / n

    return MetricsRow(
        algorithm=algorithm,
        connectivity=connectivity,
        radius_fraction=radius_fraction,
        solved_iterations=n,
        infeasible_iterations=len(records) - n,
        mean_skill_term=mean("skill_term"),
        mean_cost_term=mean("cost_term"),
        mean_trust_term=mean("trust_term"),
        mean_objective=mean("objective"),
        mean_runtime_ms=mean("runtime_ms"),
    )


def run_comparison(cfg: ExperimentConfig, return_records: bool = False):
    """One MetricsRow per requested algorithm at the configured connectivity."""
    base = base_scenario(cfg)
    records = _run_iterations(cfg, base)
    rows = [
        _summarize(algo, cfg.connectivity, None, records[algo])
        for algo in cfg.algorithms
    ]
    if return_records:
        return rows, records
    return rows


def run_radius_sweep(cfg: ExperimentConfig, return_records: bool = False):
    """One MetricsRow per sweep radius for the cd-ilp pipeline.

    The same iteration seeds are reused at every radius (common random
    numbers), so sweep rows differ only through the radius itself.
    """
    if not cfg.radius_sweep:
        raise ConfigError("radius_sweep must be nonempty")
    base = base_scenario(cfg)
    rows = []
    all_records: dict[float, list[IterationRecord]] = {}
    for fraction in cfg.radius_sweep:
        records = _run_iterations(
            cfg, base, radius=fraction * MAP_DIAGONAL, algorithms=(CD_ILP,)
        )
        rows.append(_summarize(CD_ILP, cfg.connectivity, fraction, records[CD_ILP]))
        all_records[fraction] = records[CD_ILP]
    if return_records:
        return rows, all_records
    return rows


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

METRICS_HEADER = [
    "algorithm", "connectivity", "radius_fraction",
    "solved_iterations", "infeasible_iterations",
    "mean_skill_term", "mean_cost_term", "mean_trust_term",
    "mean_objective", "mean_runtime_ms",
]


def write_metrics_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        for row in rows:
            writer.writerow([
                row.algorithm,
                row.connectivity,
                "" if row.radius_fraction is None else repr(row.radius_fraction),
                row.solved_iterations,
                row.infeasible_iterations,
                repr(row.mean_skill_term),
                repr(row.mean_cost_term),
                repr(row.mean_trust_term),
                repr(row.mean_objective),
                repr(row.mean_runtime_ms),
            ])
