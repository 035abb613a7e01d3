"""Exact maximum-weight assignment of workers to (task, skill) slots.

The selection problem reduces to a rectangular assignment problem: every
required (task, skill) slot must receive exactly one worker and no worker
may hold more than one slot.  It is solved exactly with the
shortest-augmenting-path Hungarian method (Jonker-Volgenant style, with
dual potentials), followed by a canonicalization pass that — among all
maximum-weight solutions — returns the one whose sorted list of
(task, worker, skill) triples is lexicographically smallest.

The dual potentials certify optimality: an edge can participate in *some*
optimum only if its reduced cost is zero, which keeps the tie-break pass
cheap when the optimum is unique.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

Triple = tuple[int, int, int]  # (task, worker, skill)


class InfeasibleAssignment(Exception):
    """Not every slot can be matched to a distinct candidate worker."""


@dataclass(frozen=True)
class AssignmentResult:
    triples: tuple[Triple, ...]  # sorted
    value: float  # plain left-to-right sum of weights in triple order
    slot_to_worker: dict[tuple[int, int], int]


def canonical_value(triples_with_weights: list[tuple[Triple, float]]) -> float:
    """Objective evaluated in sorted triple order (float sums are
    order-dependent; fixing the order makes values reproducible)."""
    total = 0.0
    for _, w in sorted(triples_with_weights):
        total += w
    return total


def _hungarian_min(cost: np.ndarray):
    """Shortest-augmenting-path Hungarian method on an n x m matrix, n <= m.

    Forbidden edges are +inf.  Returns (col_for_row, u, v) with dual
    potentials satisfying cost[i, j] - u[i] - v[j] >= 0, or None when some
    row admits no augmenting path.
    """
    n, m = cost.shape
    if n == 0:
        return np.zeros(0, dtype=int), np.zeros(0), np.zeros(m)
    if n > m:
        return None

    a = np.full((n + 1, m + 1), np.inf)
    a[1:, 1:] = cost
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=int)  # p[j]: row matched to column j (0 = free)
    way = np.zeros(m + 1, dtype=int)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = a[i0, 1:] - u[i0] - v[1:]
            free = ~used[1:]
            improve = free & (cur < minv[1:])
            if improve.any():
                idx = np.where(improve)[0]
                minv[1 + idx] = cur[idx]
                way[1 + idx] = j0
            free_idx = np.where(free)[0]
            if free_idx.size == 0:
                return None
            k = free_idx[np.argmin(minv[1 + free_idx])]
            delta = minv[1 + k]
            if not np.isfinite(delta):
                return None  # row i cannot reach any free column
            used_idx = np.where(used)[0]
            u[p[used_idx]] += delta
            v[used_idx] -= delta
            minv[1 + free_idx] -= delta
            j0 = 1 + k
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    col_for_row = np.zeros(n + 1, dtype=int)
    for j in range(1, m + 1):
        if p[j]:
            col_for_row[p[j]] = j
    return col_for_row[1:] - 1, u[1:], v[1:]


def max_bipartite_matching(candidates: list) -> dict[int, int]:
    """Maximum-cardinality matching (Kuhn's algorithm) from slot index to
    worker id; ``candidates[i]`` is an iterable of worker ids for slot i.
    Deterministic: slots and workers are tried in ascending order."""
    cand = [sorted(c) for c in candidates]
    worker_slot: dict[int, int] = {}

    def try_assign(i: int, visited: set[int]) -> bool:
        for w in cand[i]:
            if w in visited:
                continue
            visited.add(w)
            if w not in worker_slot or try_assign(worker_slot[w], visited):
                worker_slot[w] = i
                return True
        return False

    for i in range(len(cand)):
        try_assign(i, set())
    return {slot: w for w, slot in worker_slot.items()}


def solve_assignment(
    slot_ids: list[tuple[int, int]],
    candidates: list[dict[int, float]],
) -> AssignmentResult:
    """Exact optimum of the slot assignment with the documented tie-break.

    ``slot_ids[i]`` is the (task, skill) pair of slot i and
    ``candidates[i]`` maps admissible worker ids to their efficiency.
    Raises InfeasibleAssignment when no perfect matching over the slots
    exists.
    """
    n = len(slot_ids)
    if n == 0:
        return AssignmentResult(triples=(), value=0.0, slot_to_worker={})

    workers = sorted({w for c in candidates for w in c})
    col_of = {w: j for j, w in enumerate(workers)}
    m = len(workers)
    cost = np.full((n, m), np.inf)
    for i, cand in enumerate(candidates):
        for w, weight in cand.items():
            cost[i, col_of[w]] = -weight

    solved = _hungarian_min(cost)
    if solved is None:
        raise InfeasibleAssignment("no perfect matching over the slots")
    col_for_row, u, v = solved

    def triple(i: int, j: int) -> Triple:
        t, s = slot_ids[i]
        return (t, workers[j], s)

    def weight(i: int, j: int) -> float:
        return -cost[i, j]

    plan = {i: int(col_for_row[i]) for i in range(n)}
    best_value = canonical_value([(triple(i, j), weight(i, j)) for i, j in plan.items()])

    plan = _lexicographic_min_plan(cost, u, v, slot_ids, workers, plan, best_value, triple, weight)

    triples_weights = [(triple(i, j), weight(i, j)) for i, j in plan.items()]
    slot_to_worker = {slot_ids[i]: workers[j] for i, j in plan.items()}
    return AssignmentResult(
        triples=tuple(sorted(t for t, _ in triples_weights)),
        value=canonical_value(triples_weights),
        slot_to_worker=slot_to_worker,
    )


def _lexicographic_min_plan(
    cost, u, v, slot_ids, workers, plan, best_value, triple, weight
) -> dict[int, int]:
    """Among maximum-weight plans, pick the lexicographically smallest sorted
    triple list.

    Scans candidate edges in ascending triple order; an edge strictly below
    the current plan's next triple is adopted only if forcing it still
    attains the optimal value.  Zero reduced cost is a necessary condition
    for an edge to sit in any optimum, so almost all candidates are skipped
    without a re-solve; an edge that fails a forcing test can never succeed
    later (forcing sets only grow), so the scan never revisits it.
    """
    n, m = cost.shape
    finite = np.isfinite(cost)
    tol = 1e-9 * max(1.0, float(np.abs(cost[finite]).max()) if finite.any() else 1.0)
    maybe = finite & (cost - u[:, None] - v[None, :] <= tol)

    entries = sorted(
        (triple(i, j), i, j) for i in range(n) for j in range(m) if finite[i, j]
    )
    keys = [e[0] for e in entries]

    fixed: dict[int, int] = {}
    used_cols: set[int] = set()
    ptr = 0

    while len(fixed) < n:
        c_next = min(triple(i, j) for i, j in plan.items() if i not in fixed)
        adopted = False
        while ptr < len(entries) and entries[ptr][0] < c_next:
            key, i, j = entries[ptr]
            ptr += 1
            if i in fixed or j in used_cols or not maybe[i, j]:
                continue
            candidate_plan = _resolve_with_forced(cost, fixed | {i: j})
            if candidate_plan is None:
                continue
            value = canonical_value(
                [(triple(a, b), weight(a, b)) for a, b in candidate_plan.items()]
            )
            if value == best_value:
                plan = candidate_plan
                fixed[i] = j
                used_cols.add(j)
                adopted = True
                break
        if not adopted:
            i = min(
                (i for i in plan if i not in fixed),
                key=lambda i: triple(i, plan[i]),
            )
            j = plan[i]
            fixed[i] = j
            used_cols.add(j)
            ptr = bisect.bisect_right(keys, c_next, lo=ptr)
    return fixed


def _resolve_with_forced(cost: np.ndarray, forced: dict[int, int]):
    """Optimal completion of ``forced`` (slot -> column); None if infeasible."""
    n, m = cost.shape
    rows = [i for i in range(n) if i not in forced]
    cols = [j for j in range(m) if j not in set(forced.values())]
    if not rows:
        return dict(forced)
    if len(rows) > len(cols):
        return None
    sub = cost[np.ix_(rows, cols)]
    solved = _hungarian_min(sub)
    if solved is None:
        return None
    col_for_row, _, _ = solved
    plan = dict(forced)
    for a, b in enumerate(col_for_row):
        plan[rows[a]] = cols[int(b)]
    return plan
