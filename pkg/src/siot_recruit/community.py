"""Louvain community detection and derivation of the trusted worker set."""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass

from .domain import DeviceId, TaskId
from .relations import RelationGraph
from .spatial import CandidatePool

MODULARITY_TOL = 1e-7


class EmptyGraphError(ValueError):
    """Community detection requires at least one node."""


@dataclass(frozen=True)
class CommunityPartition:
    """Disjoint communities with dense ids starting at 0."""

    assignment: dict[DeviceId, int]
    modularity: float
    graph_kind: str

    def members(self, community: int) -> frozenset[DeviceId]:
        return frozenset(n for n, c in self.assignment.items() if c == community)

    def community_of(self, node: DeviceId) -> int:
        return self.assignment[node]


@dataclass(frozen=True)
class TrustedSet:
    """Workers sharing a community with the requester, restricted to the pool."""

    task: TaskId
    workers: frozenset[DeviceId]


def modularity(graph: RelationGraph, assignment: dict[DeviceId, int]) -> float:
    """Weighted Newman modularity of a partition; 0 by convention when the
    graph has no edges."""
    m = graph.total_weight()
    if m == 0.0:
        return 0.0
    intra: dict[int, float] = {}
    deg_sum: dict[int, float] = {}
    degree: dict[DeviceId, float] = {n: 0.0 for n in graph.nodes}
    for (u, v), w in graph.edges.items():
        degree[u] += w
        degree[v] += w
        cu, cv = assignment[u], assignment[v]
        if cu == cv:
            intra[cu] = intra.get(cu, 0.0) + w
    for n in graph.nodes:
        c = assignment[n]
        deg_sum[c] = deg_sum.get(c, 0.0) + degree[n]
    two_m = 2.0 * m
    return sum(
        intra.get(c, 0.0) / m - (deg_sum[c] / two_m) ** 2 for c in sorted(deg_sum)
    )


def louvain(graph: RelationGraph, seed: int = 0) -> CommunityPartition:
    """Two-phase greedy modularity maximization.

    Local moves shift a node to the neighboring community with the largest
    modularity gain (ties broken toward the lowest community label); whole
    communities are then collapsed into super-nodes and the process repeats
    until the gain of a level drops below MODULARITY_TOL.  Deterministic for
    a fixed (graph, seed).
    """
    if not graph.nodes:
        raise EmptyGraphError("graph has no nodes")

    nodes = sorted(graph.nodes)
    m = graph.total_weight()
    if m == 0.0:
        assignment = {n: i for i, n in enumerate(nodes)}
        return CommunityPartition(assignment, 0.0, graph.kind)

    rng = random.Random(seed)
    adj: dict[int, dict[int, float]] = {u: {} for u in nodes}
    for (u, v), w in graph.edges.items():
        adj[u][v] = adj[u].get(v, 0.0) + w
        adj[v][u] = adj[v].get(u, 0.0) + w
    self_loops: dict[int, float] = {u: 0.0 for u in nodes}

    membership = {n: n for n in nodes}  # original node -> current super-node
    best_assignment = dict(membership)
    best_q = modularity(graph, best_assignment)

    while True:
        labels = _one_level(adj, self_loops, m, rng)
        candidate = {n: labels[membership[n]] for n in nodes}
        q = modularity(graph, candidate)
        if q - best_q < MODULARITY_TOL:
            break
        best_q, best_assignment = q, candidate
        membership = candidate
        adj, self_loops = _aggregate(adj, self_loops, labels)
        if len(adj) == 1:
            break

    return CommunityPartition(_relabel(best_assignment), best_q, graph.kind)


def _one_level(
    adj: dict[int, dict[int, float]],
    self_loops: dict[int, float],
    m: float,
    rng: random.Random,
) -> dict[int, int]:
    """Local-moving phase; returns node -> community label (labels are node keys)."""
    nodes = sorted(adj)
    comm = {u: u for u in nodes}
    # degree includes twice the self-loop weight, matching the aggregated view
    k = {u: 2.0 * self_loops[u] + sum(adj[u].values()) for u in nodes}
    tot = dict(k)
    two_m = 2.0 * m

    order = nodes[:]
    rng.shuffle(order)

    moved = True
    while moved:
        moved = False
        for u in order:
            cu = comm[u]
            links: dict[int, float] = {}
            for v, w in adj[u].items():
                if v != u:
                    links[comm[v]] = links.get(comm[v], 0.0) + w
            tot[cu] -= k[u]
            best_c = cu
            best_score = links.get(cu, 0.0) - tot[cu] * k[u] / two_m
            for c in sorted(links):
                if c == cu:
                    continue
                score = links[c] - tot[c] * k[u] / two_m
                if score > best_score or (score == best_score and c < best_c):
                    best_c, best_score = c, score
            tot[best_c] += k[u]
            if best_c != cu:
                comm[u] = best_c
                moved = True
    return comm


def _aggregate(
    adj: dict[int, dict[int, float]],
    self_loops: dict[int, float],
    comm: dict[int, int],
) -> tuple[dict[int, dict[int, float]], dict[int, float]]:
    """Collapse communities into super-nodes keyed by their community label."""
    labels = sorted(set(comm.values()))
    new_adj: dict[int, dict[int, float]] = {c: {} for c in labels}
    new_self: dict[int, float] = {c: 0.0 for c in labels}
    for u, nbrs in adj.items():
        cu = comm[u]
        new_self[cu] += self_loops[u]
        for v, w in nbrs.items():
            if v < u:
                continue
            cv = comm[v]
            if cu == cv:
                new_self[cu] += w
            else:
                new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
                new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
    return new_adj, new_self


def _relabel(assignment: dict[int, int]) -> dict[int, int]:
    """Dense community ids ordered by first appearance over sorted node ids."""
    mapping: dict[int, int] = {}
    out: dict[int, int] = {}
    for n in sorted(assignment):
        c = assignment[n]
        if c not in mapping:
            mapping[c] = len(mapping)
        out[n] = mapping[c]
    return out


def trusted_workers(
    sfor_part: CommunityPartition,
    sor_part: CommunityPartition,
    requester: DeviceId,
    pool: CandidatePool,
) -> TrustedSet:
    """Union of the requester's SFOR and SOR communities, within the pool."""
    if requester not in sfor_part.assignment or requester not in sor_part.assignment:
        raise ValueError(f"requester {requester} missing from a partition")
    union = sfor_part.members(sfor_part.community_of(requester)) | sor_part.members(
        sor_part.community_of(requester)
    )
    workers = (union & set(pool.members)) - {requester}
    return TrustedSet(task=pool.task, workers=frozenset(workers))


def export_partition_csv(partition: CommunityPartition, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "community_id"])
        for node in sorted(partition.assignment):
            writer.writerow([node, partition.assignment[node]])
