"""Construction of the two device relation graphs.

SFOR (social friendship and ownership relation) connects devices of one
owner as a weight-1 clique and devices of socially connected owners with a
weight that decays as 1/d over owner-graph hops, cut off at ``max_hops``.

SOR (social object relationship) connects device pairs whose contact
history contains enough long-enough meetings spaced far enough apart.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .domain import ContactEvent, DeviceId, OwnerId, Scenario
from .spatial import CandidatePool

SOR_MIN_MEETINGS = 3
SOR_MIN_DURATION = 30 * 60
SOR_MIN_GAP = 6 * 3600


@dataclass(frozen=True)
class RelationGraph:
    """Weighted undirected graph over device ids; edges keyed (u, v) with u < v."""

    kind: str  # "SFOR" | "SOR"
    nodes: tuple[DeviceId, ...]
    edges: dict[tuple[DeviceId, DeviceId], float]

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        for (u, v), w in self.edges.items():
            if u >= v:
                raise ValueError(f"edge ({u}, {v}) not in canonical order")
            if u not in node_set or v not in node_set:
                raise ValueError(f"edge ({u}, {v}) references a non-node")
            if not (0.0 < w <= 1.0):
                raise ValueError(f"edge ({u}, {v}) weight {w} outside (0, 1]")

    def adjacency(self) -> dict[DeviceId, dict[DeviceId, float]]:
        adj: dict[DeviceId, dict[DeviceId, float]] = {u: {} for u in self.nodes}
        for (u, v), w in self.edges.items():
            adj[u][v] = w
            adj[v][u] = w
        return adj

    def total_weight(self) -> float:
        return sum(self.edges.values())


def owner_hop_distances(
    scenario: Scenario, source: OwnerId, max_hops: int | None
) -> dict[OwnerId, int]:
    """BFS hop distances from ``source`` in the owner graph, bounded by max_hops."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        cur = queue.popleft()
        d = dist[cur]
        if max_hops is not None and d >= max_hops:
            continue
        for nbr in scenario.owner_neighbors(cur):
            if nbr not in dist:
                dist[nbr] = d + 1
                queue.append(nbr)
    return dist


def build_sfor(
    scenario: Scenario,
    pool: CandidatePool,
    max_hops: int | None = 2,
) -> RelationGraph:
    """Ownership/friendship graph over the pool plus the task requester."""
    if max_hops is not None and max_hops < 1:
        raise ValueError("max_hops must be >= 1")
    requester = scenario.task(pool.task).requester
    nodes = tuple(sorted(set(pool.members) | {requester}))

    groups: dict[OwnerId, list[DeviceId]] = {}
    for dev_id in nodes:
        groups.setdefault(scenario.device(dev_id).owner, []).append(dev_id)
    owners = sorted(groups)

    edges: dict[tuple[DeviceId, DeviceId], float] = {}

    for owner in owners:
        members = groups[owner]
        for i, u in enumerate(members):
            for v in members[i + 1 :]:
                edges[(u, v)] = 1.0

    # Cross-owner links: weight 1/d over owner hops; same-owner weight 1
    # always dominates, so only distinct owner pairs are touched here.
    present = set(owners)
    for owner in owners:
        dist = owner_hop_distances(scenario, owner, max_hops)
        for other, d in dist.items():
            if other <= owner or other not in present or d == 0:
                continue
            w = 1.0 / d
            for u in groups[owner]:
                for v in groups[other]:
                    key = (u, v) if u < v else (v, u)
                    if edges.get(key, 0.0) < w:
                        edges[key] = w

    return RelationGraph(kind="SFOR", nodes=nodes, edges=edges)


def qualifying_meeting_count(
    events: list[ContactEvent], min_duration: int, min_gap: int
) -> int:
    """Greedy left-to-right count of meetings that are long enough and spaced
    at least ``min_gap`` after the previous qualifying meeting's start."""
    count = 0
    last_start: int | None = None
    for ev in sorted(events, key=lambda e: (e.start, e.end)):
        if ev.end - ev.start < min_duration:
            continue
        if last_start is not None and ev.start - last_start < min_gap:
            continue
        count += 1
        last_start = ev.start
    return count


def contact_pairs_with_bond(
    scenario: Scenario,
    min_meetings: int = SOR_MIN_MEETINGS,
    min_duration: int = SOR_MIN_DURATION,
    min_gap: int = SOR_MIN_GAP,
) -> frozenset[tuple[DeviceId, DeviceId]]:
    """Device pairs whose contact history qualifies for an SOR edge.

    Cached on the scenario: the contact log is fixed, so the answer is
    shared by every task and every pipeline run on that scenario.
    """
    key = ("sor_pairs", min_meetings, min_duration, min_gap)
    cached = scenario._cache.get(key)
    if cached is not None:
        return cached

    by_pair: dict[tuple[DeviceId, DeviceId], list[ContactEvent]] = {}
    for ev in scenario.contact_log:
        pair = (ev.a, ev.b) if ev.a < ev.b else (ev.b, ev.a)
        by_pair.setdefault(pair, []).append(ev)

    qualified = frozenset(
        pair
        for pair, events in by_pair.items()
        if qualifying_meeting_count(events, min_duration, min_gap) >= min_meetings
    )
    scenario._cache[key] = qualified
    return qualified


def build_sor(
    scenario: Scenario,
    pool: CandidatePool,
    min_meetings: int = SOR_MIN_MEETINGS,
    min_duration: int = SOR_MIN_DURATION,
    min_gap: int = SOR_MIN_GAP,
) -> RelationGraph:
    """Contact-based graph over the pool plus the task requester."""
    requester = scenario.task(pool.task).requester
    nodes = tuple(sorted(set(pool.members) | {requester}))
    node_set = set(nodes)
    bonded = contact_pairs_with_bond(scenario, min_meetings, min_duration, min_gap)
    edges = {
        pair: 1.0 for pair in bonded if pair[0] in node_set and pair[1] in node_set
    }
    return RelationGraph(kind="SOR", nodes=nodes, edges=edges)


def export_edge_list(graph: RelationGraph, path: str) -> None:
    """Write `u v weight` lines for external visualization."""
    with open(path, "w") as fh:
        for (u, v), w in sorted(graph.edges.items()):
            fh.write(f"{u} {v} {w!r}\n")
