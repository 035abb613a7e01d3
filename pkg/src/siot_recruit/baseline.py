"""Optimal-stopping benchmark recruiter.

Instead of filtering candidates through community detection, this recruiter
draws a seeded sequence of feasible worker sets straight from the radius
pools, scores each with the recruitment objective, rejects a leading
fraction outright and then accepts the first set that beats everything
seen during the rejection window (or the final set if none does).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .domain import ConfigError, Scenario, TaskId
from .matching import canonical_value, max_bipartite_matching
from .optimizer import (
    SOLVED,
    InfeasibleTask,
    OwnerDistances,
    RecruitmentPlan,
    TaskScorer,
    build_scorer,
    plan_from_scored_triples,
)
from .spatial import CandidatePool

# Re-draws allowed when a sampled set collides with itself across tasks.
_MAX_RESAMPLES = 200


@dataclass(frozen=True)
class StopRule:
    reject_fraction: float = 0.3
    max_candidates: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.reject_fraction <= 1.0):
            raise ConfigError("reject_fraction must lie in [0, 1]")
        if self.max_candidates < 1:
            raise ConfigError("max_candidates must be >= 1")


def select_stop_index(values, reject_fraction: float) -> int:
    """Index accepted by the stopping rule: reject the first
    ceil(reject_fraction * len) values, then take the first strict
    improvement over the best rejected value, else the last index."""
    n = len(values)
    n_reject = math.ceil(reject_fraction * n)
    best_rejected = max(values[:n_reject], default=-math.inf)
    for i in range(n_reject, n):
        if values[i] > best_rejected:
            return i
    return n - 1


def stochastic_select(
    tasks,
    pools: dict[TaskId, CandidatePool],
    scenario: Scenario,
    rule: StopRule,
    max_hops: int | None = 2,
    owner_distances: OwnerDistances | None = None,
) -> RecruitmentPlan:
    """Secretary-style selection over uniformly sampled feasible worker sets.

    Each candidate set assigns, per task, distinct workers from the radius
    pool to the required skill slots, injectively across all tasks.  Raises
    InfeasibleTask when no feasible worker set exists at all.
    """
    od = owner_distances or OwnerDistances(scenario, max_hops)
    ordered = sorted(tasks, key=lambda t: t.id)
    scorers: dict[TaskId, TaskScorer] = {}
    for task in ordered:
        scorer = build_scorer(
            scenario, task, pools[task.id].members,
            max_hops=max_hops, owner_distances=od,
        )
        needed = len(task.required_skills)
        if len(scorer.workers) < needed:
            raise InfeasibleTask(task.id, needed - len(scorer.workers))
        scorers[task.id] = scorer

    rng = random.Random(rule.seed)
    candidates = [
        _sample_worker_set(ordered, scorers, rng) for _ in range(rule.max_candidates)
    ]
    objectives = [
        canonical_value([(tr, scorers[tr[0]].value(tr[1], tr[2])) for tr in triples])
        for triples in candidates
    ]
    chosen = candidates[select_stop_index(objectives, rule.reject_fraction)]
    status = {task.id: SOLVED for task in ordered}
    return plan_from_scored_triples(chosen, scorers, status)


def _sample_worker_set(tasks, scorers, rng: random.Random):
    """One uniformly sampled injective assignment of workers to all slots."""
    for _ in range(_MAX_RESAMPLES):
        used: set[int] = set()
        triples = []
        ok = True
        for task in tasks:
            scorer = scorers[task.id]
            available = [w for w in scorer.workers if w not in used]
            req = task.required_skills
            if len(available) < len(req):
                ok = False
                break
            picked = rng.sample(available, len(req))
            used.update(picked)
            triples.extend((task.id, w, s) for w, s in zip(picked, req))
        if ok:
            return triples

    # Persistent collisions: decide feasibility exactly, then either report
    # the first starved task or fall back to a matching-derived set.
    slot_ids = []
    cands = []
    for task in tasks:
        for s in task.required_skills:
            slot_ids.append((task.id, s))
            cands.append(set(scorers[task.id].workers))
    matched = max_bipartite_matching(cands)
    if len(matched) < len(slot_ids):
        shortfall: dict[int, int] = {}
        for idx, (tid, _) in enumerate(slot_ids):
            if idx not in matched:
                shortfall[tid] = shortfall.get(tid, 0) + 1
        tid = min(shortfall)
        raise InfeasibleTask(tid, shortfall[tid])
    return [(tid, matched[idx], s) for idx, (tid, s) in enumerate(slot_ids)]
