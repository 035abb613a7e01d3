"""Worker efficiency scoring and exact recruitment optimization.

A worker's efficiency for a (task, skill) slot combines three normalized
terms: skill level (reward), recruitment cost including travel (penalty)
and ownership trust toward the requester (reward).  The selection problem
maximizes total efficiency subject to: each worker holds at most one
(task, skill) slot globally, and every required slot of a solved task is
filled exactly once.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .community import TrustedSet
from .domain import Device, DeviceId, Scenario, SkillId, Task, TaskId, euclidean_distance
from .matching import InfeasibleAssignment, canonical_value, max_bipartite_matching, solve_assignment
from .relations import owner_hop_distances

Triple = tuple[TaskId, DeviceId, SkillId]

SOLVED = "Solved"
INFEASIBLE = "Infeasible"

DECOMPOSITION_TOL = 1e-9


class InfeasibleTask(Exception):
    """A task has fewer reachable workers than required skill slots.

    Callers may widen the task's search radius and re-run the pipeline.
    """

    def __init__(self, task_id: TaskId, shortfall: int):
        super().__init__(f"task {task_id} infeasible, short {shortfall} worker(s)")
        self.task_id = task_id
        self.shortfall = shortfall


class PlanViolation(AssertionError):
    """An emitted plan breaks a hard constraint (validator failure)."""


# ---------------------------------------------------------------------------
# Trust and cost primitives
# ---------------------------------------------------------------------------

def travel_cost(worker: Device, task: Task, skill: SkillId, price: float) -> float:
    """Quoted skill price plus distance-to-task converted at ``price``."""
    if not task.required[skill]:
        raise ValueError(f"skill {skill} is not required by task {task.id}")
    return worker.skill_cost[skill] + euclidean_distance(worker.location, task.location) * price


def ownership_trust(
    scenario: Scenario,
    requester: Device,
    worker: Device,
    max_hops: int | None = 2,
) -> float:
    """1 for a shared owner, 1/(1+d) over owner-graph hops, 0 beyond reach."""
    if requester.owner == worker.owner:
        return 1.0
    dist = owner_hop_distances(scenario, requester.owner, max_hops)
    d = dist.get(worker.owner)
    if d is None:
        return 0.0
    return 1.0 / (1.0 + d)


class OwnerDistances:
    """Bounded owner-graph hop distances with per-source memoization.

    One instance per (scenario, max_hops); rows can be warmed eagerly so
    that timed solver paths only perform array gathers and dict lookups.
    """

    def __init__(self, scenario: Scenario, max_hops: int | None = 2):
        self.scenario = scenario
        self.max_hops = max_hops
        self._rows: dict[int, dict[int, int]] = {}
        self._trust_rows: dict[int, np.ndarray] = {}
        max_owner = max((d.owner for d in scenario.devices), default=0)
        max_owner = max(
            max_owner, max((o for e in scenario.owner_social for o in e[:2]), default=0)
        )
        self._n_owner_slots = max_owner + 1

    def row(self, owner: int) -> dict[int, int]:
        cached = self._rows.get(owner)
        if cached is None:
            cached = owner_hop_distances(self.scenario, owner, self.max_hops)
            self._rows[owner] = cached
        return cached

    def trust(self, owner_a: int, owner_b: int) -> float:
        if owner_a == owner_b:
            return 1.0
        d = self.row(owner_a).get(owner_b)
        if d is None:
            return 0.0
        return 1.0 / (1.0 + d)

    def trust_row(self, owner: int) -> np.ndarray:
        """Dense trust vector indexed by owner id (0 where unreachable)."""
        cached = self._trust_rows.get(owner)
        if cached is None:
            cached = np.zeros(self._n_owner_slots)
            for other, d in self.row(owner).items():
                cached[other] = 1.0 / (1.0 + d)
            cached[owner] = 1.0
            self._trust_rows[owner] = cached
        return cached

    def warm(self, owners) -> None:
        for owner in owners:
            self.trust_row(owner)


# ---------------------------------------------------------------------------
# Efficiency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EfficiencyMatrix:
    """Per-(worker, skill) efficiency for one task, with its decomposition."""

    task: TaskId
    workers: tuple[DeviceId, ...]  # admissible workers, sorted
    required: tuple[SkillId, ...]
    values: dict[tuple[DeviceId, SkillId], float]
    terms: dict[tuple[DeviceId, SkillId], tuple[float, float, float]]
    normalizers: tuple[float, float, float]  # mean skill, mean cost, mean trust


@dataclass(frozen=True)
class TaskScorer:
    """Array-backed efficiency scores for one task, evaluated on demand.

    Holds the same information as EfficiencyMatrix without materializing
    per-entry dictionaries, so scoring a handful of sampled workers out of
    a large pool costs only those lookups.
    """

    task: TaskId
    workers: tuple[DeviceId, ...]
    required: tuple[SkillId, ...]
    normalizers: tuple[float, float, float]
    _row: dict = field(repr=False)
    _col: dict = field(repr=False)
    _sk: np.ndarray = field(repr=False)
    _co: np.ndarray = field(repr=False)
    _tr: np.ndarray = field(repr=False)

    def value(self, worker: DeviceId, skill: SkillId) -> float:
        i, j = self._row[worker], self._col[skill]
        return (float(self._sk[i, j]) - float(self._co[i, j])) + float(self._tr[i])

    def entry(self, worker: DeviceId, skill: SkillId):
        i, j = self._row[worker], self._col[skill]
        sk, co, tr = float(self._sk[i, j]), float(self._co[i, j]), float(self._tr[i])
        return (sk - co) + tr, (sk, co, tr)

    def to_matrix(self) -> EfficiencyMatrix:
        values = {}
        terms = {}
        for w in self.workers:
            for s in self.required:
                values[(w, s)], terms[(w, s)] = self.entry(w, s)
        return EfficiencyMatrix(
            task=self.task, workers=self.workers, required=self.required,
            values=values, terms=terms, normalizers=self.normalizers,
        )


def _term(weight: float, value: float, mean: float) -> float:
    # A zero normalizer drops the whole term instead of dividing by zero.
    if mean <= 0.0:
        return 0.0
    return weight * value / mean


def efficiency(
    worker: Device,
    task: Task,
    skill: SkillId,
    scenario: Scenario,
    normalizers: tuple[float, float, float],
    max_hops: int | None = 2,
) -> float:
    """Single-entry efficiency: skill reward minus cost penalty plus trust."""
    mean_skill, mean_cost, mean_trust = normalizers
    w_skill, w_cost, w_trust = scenario.weights
    requester = scenario.device(task.requester)
    sk = _term(w_skill, worker.skill_level[skill], mean_skill)
    co = _term(w_cost, travel_cost(worker, task, skill, scenario.distance_price), mean_cost)
    tr = _term(w_trust, ownership_trust(scenario, requester, worker, max_hops), mean_trust)
    return sk - co + tr


def build_scorer(
    scenario: Scenario,
    task: Task,
    workers,
    max_hops: int | None = 2,
    owner_distances: OwnerDistances | None = None,
    normalizers: tuple[float, float, float] | None = None,
) -> TaskScorer:
    """Array-backed efficiency scores over a candidate worker set.

    Workers whose ownership trust falls below the scenario threshold are
    dropped before normalization.  Normalizers default to the per-task
    means over the admissible (worker, required-skill) entries.
    """
    od = owner_distances or OwnerDistances(scenario, max_hops)
    req = task.required_skills
    requester_owner = scenario.device(task.requester).owner
    idx = scenario.device_index()

    ordered = sorted(w for w in workers if w != task.requester)
    rows = np.fromiter((idx[w] for w in ordered), dtype=int, count=len(ordered))
    trust_vals = od.trust_row(requester_owner)[scenario.owner_vector()[rows]]
    if scenario.trust_threshold > 0.0 and ordered:
        keep = trust_vals >= scenario.trust_threshold
        ordered = [w for w, k in zip(ordered, keep) if k]
        rows = rows[keep]
        trust_vals = trust_vals[keep]

    empty = np.zeros((0, len(req)))
    if not ordered:
        return TaskScorer(
            task=task.id, workers=(), required=req, normalizers=(0.0, 0.0, 0.0),
            _row={}, _col={s: j for j, s in enumerate(req)},
            _sk=empty, _co=empty, _tr=np.zeros(0),
        )

    req_cols = np.array(req, dtype=int)

    skill_sub = scenario.skill_matrix()[np.ix_(rows, req_cols)]
    coords = scenario.coords()[rows]
    delta = np.hypot(coords[:, 0] - task.location.x, coords[:, 1] - task.location.y)
    cost_sub = (
        scenario.cost_matrix()[np.ix_(rows, req_cols)]
        + delta[:, None] * scenario.distance_price
    )

    if normalizers is None:
        normalizers = (
            float(skill_sub.mean()),
            float(cost_sub.mean()),
            float(trust_vals.mean()),
        )
    mean_skill, mean_cost, mean_trust = normalizers
    w_skill, w_cost, w_trust = scenario.weights

    sk = w_skill * skill_sub / mean_skill if mean_skill > 0.0 else np.zeros_like(skill_sub)
    co = w_cost * cost_sub / mean_cost if mean_cost > 0.0 else np.zeros_like(cost_sub)
    tr = w_trust * trust_vals / mean_trust if mean_trust > 0.0 else np.zeros_like(trust_vals)

    return TaskScorer(
        task=task.id, workers=tuple(ordered), required=req, normalizers=normalizers,
        _row={w: i for i, w in enumerate(ordered)},
        _col={s: j for j, s in enumerate(req)},
        _sk=sk, _co=co, _tr=tr,
    )


def build_efficiency(
    scenario: Scenario,
    task: Task,
    workers,
    max_hops: int | None = 2,
    owner_distances: OwnerDistances | None = None,
    normalizers: tuple[float, float, float] | None = None,
) -> EfficiencyMatrix:
    """Fully materialized efficiency matrix (see build_scorer)."""
    return build_scorer(
        scenario, task, workers,
        max_hops=max_hops, owner_distances=owner_distances, normalizers=normalizers,
    ).to_matrix()


# ---------------------------------------------------------------------------
# Recruitment plan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecruitmentPlan:
    assignments: tuple[Triple, ...]  # sorted (task, worker, skill)
    objective: float
    status: dict[TaskId, str]
    values: dict[Triple, float] = field(repr=False)
    terms: dict[Triple, tuple[float, float, float]] = field(repr=False)

    def solved_tasks(self) -> tuple[TaskId, ...]:
        return tuple(t for t in sorted(self.status) if self.status[t] == SOLVED)

    def fully_solved(self) -> bool:
        return all(s == SOLVED for s in self.status.values())

    def term_means(self) -> tuple[float, float, float]:
        """Mean skill/cost/trust term over all assignments (0s when empty)."""
        if not self.assignments:
            return (0.0, 0.0, 0.0)
        n = len(self.assignments)
        sums = [0.0, 0.0, 0.0]
        for triple in self.assignments:
            for i, part in enumerate(self.terms[triple]):
                sums[i] += part
        return (sums[0] / n, sums[1] / n, sums[2] / n)


def plan_from_triples(
    triples,
    matrices: dict[TaskId, EfficiencyMatrix],
    status: dict[TaskId, str],
) -> RecruitmentPlan:
    """Assemble a plan, evaluating the objective in canonical triple order."""
    values = {}
    terms = {}
    pairs = []
    for t, w, s in triples:
        mat = matrices[t]
        values[(t, w, s)] = mat.values[(w, s)]
        terms[(t, w, s)] = mat.terms[(w, s)]
        pairs.append(((t, w, s), mat.values[(w, s)]))
    return RecruitmentPlan(
        assignments=tuple(sorted(values)),
        objective=canonical_value(pairs),
        status=dict(status),
        values=values,
        terms=terms,
    )


def plan_from_scored_triples(
    triples,
    scorers: dict[TaskId, TaskScorer],
    status: dict[TaskId, str],
) -> RecruitmentPlan:
    """Like plan_from_triples, but pulls entries out of lazy scorers."""
    values = {}
    terms = {}
    pairs = []
    for t, w, s in triples:
        value, parts = scorers[t].entry(w, s)
        values[(t, w, s)] = value
        terms[(t, w, s)] = parts
        pairs.append(((t, w, s), value))
    return RecruitmentPlan(
        assignments=tuple(sorted(values)),
        objective=canonical_value(pairs),
        status=dict(status),
        values=values,
        terms=terms,
    )


def solve(
    tasks,
    trusted: dict[TaskId, TrustedSet],
    scenario: Scenario,
    max_hops: int | None = 2,
    owner_distances: OwnerDistances | None = None,
    on_infeasible: str = "raise",
) -> RecruitmentPlan:
    """Exact optimum of the recruitment problem over the trusted sets.

    ``on_infeasible`` is ``"raise"`` (raise InfeasibleTask for the lowest
    infeasible task id) or ``"mark"`` (record the task as Infeasible and
    solve the rest).
    """
    od = owner_distances or OwnerDistances(scenario, max_hops)
    ordered = sorted(tasks, key=lambda t: t.id)
    matrices = {
        task.id: build_efficiency(
            scenario, task, trusted[task.id].workers,
            max_hops=max_hops, owner_distances=od,
        )
        for task in ordered
    }
    return solve_from_matrices(ordered, matrices, on_infeasible=on_infeasible)


def solve_from_matrices(
    tasks,
    matrices: dict[TaskId, EfficiencyMatrix],
    on_infeasible: str = "raise",
) -> RecruitmentPlan:
    if on_infeasible not in ("raise", "mark"):
        raise ValueError(f"unknown on_infeasible mode {on_infeasible!r}")
    ordered = sorted(tasks, key=lambda t: t.id)
    status: dict[TaskId, str] = {}
    active: list[Task] = []

    for task in ordered:
        mat = matrices[task.id]
        needed = len(task.required_skills)
        if len(mat.workers) < needed:
            _infeasible(task.id, needed - len(mat.workers), status, on_infeasible)
        else:
            status[task.id] = SOLVED
            active.append(task)

    def slots_of(task_list):
        ids = []
        cands = []
        for task in task_list:
            mat = matrices[task.id]
            for s in task.required_skills:
                ids.append((task.id, s))
                cands.append({w: mat.values[(w, s)] for w in mat.workers})
        return ids, cands

    slot_ids, candidates = slots_of(active)
    try:
        result = solve_assignment(slot_ids, candidates)
    except InfeasibleAssignment:
        # Workers are scarce across tasks: admit tasks in id order, keeping
        # each only if all slots so far remain jointly matchable.
        admitted: list[Task] = []
        for task in active:
            ids, cands = slots_of(admitted + [task])
            matched = max_bipartite_matching(cands)
            if len(matched) == len(ids):
                admitted.append(task)
            else:
                _infeasible(task.id, len(ids) - len(matched), status, on_infeasible)
        slot_ids, candidates = slots_of(admitted)
        result = solve_assignment(slot_ids, candidates)

    return plan_from_triples(result.triples, matrices, status)


def _infeasible(task_id: TaskId, shortfall: int, status, mode: str) -> None:
    if mode == "raise":
        raise InfeasibleTask(task_id, shortfall)
    status[task_id] = INFEASIBLE


# ---------------------------------------------------------------------------
# Validation and export
# ---------------------------------------------------------------------------

def validate_plan(
    plan: RecruitmentPlan,
    tasks,
    trusted: dict[TaskId, TrustedSet] | None = None,
    matrices: dict[TaskId, EfficiencyMatrix] | None = None,
) -> None:
    """Machine-check the hard constraints; raises PlanViolation on failure."""
    by_id = {t.id: t for t in tasks}
    seen_workers: set[DeviceId] = set()
    filled: dict[TaskId, list[SkillId]] = {}

    for t, w, s in plan.assignments:
        task = by_id.get(t)
        if task is None:
            raise PlanViolation(f"assignment references unknown task {t}")
        if plan.status.get(t) != SOLVED:
            raise PlanViolation(f"assignment for non-solved task {t}")
        if s >= len(task.required) or not task.required[s]:
            raise PlanViolation(f"task {t}: skill {s} is not required")
        if w in seen_workers:
            raise PlanViolation(f"worker {w} assigned more than once")
        seen_workers.add(w)
        if trusted is not None and w not in trusted[t].workers:
            raise PlanViolation(f"task {t}: worker {w} outside the trusted set")
        filled.setdefault(t, []).append(s)

    for t, state in plan.status.items():
        if state != SOLVED:
            continue
        got = sorted(filled.get(t, []))
        want = sorted(by_id[t].required_skills)
        if got != want:
            raise PlanViolation(f"task {t}: slots {got} filled, required {want}")

    if matrices is not None:
        expected = canonical_value(
            [(tr, matrices[tr[0]].values[(tr[1], tr[2])]) for tr in plan.assignments]
        )
        if not math.isclose(expected, plan.objective, abs_tol=DECOMPOSITION_TOL):
            raise PlanViolation(
                f"objective {plan.objective!r} != recomputed {expected!r}"
            )


def export_plan_csv(plan: RecruitmentPlan, path: str, task_id: TaskId | None = None) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["task_id", "worker_id", "skill_id", "efficiency",
             "skill_term", "cost_term", "trust_term"]
        )
        for triple in plan.assignments:
            t, w, s = triple
            if task_id is not None and t != task_id:
                continue
            sk, co, tr = plan.terms[triple]
            writer.writerow([t, w, s, repr(plan.values[triple]), repr(sk), repr(co), repr(tr)])
