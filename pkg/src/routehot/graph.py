"""Labeled undirected graph storage, triangle supports and truss decomposition.

All operations work on canonical undirected edges: an edge is a ``(u, v)``
tuple of vertex ids with ``u < v`` under plain string comparison.  Routes may
traverse an edge in either direction or repeatedly, but the graph stores it
once.  Peeling routines operate on caller-owned edge collections; the graph
itself is immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Set, Tuple

EdgeKey = Tuple[str, str]


def edge_key(u: str, v: str) -> EdgeKey:
    """Canonical key for the undirected edge between ``u`` and ``v``."""
    if u == v:
        raise ValueError("self-loop (%r, %r) is not a valid edge" % (u, v))
    return (u, v) if u < v else (v, u)


def build_adjacency(edges: Iterable[EdgeKey]) -> Dict[str, Set[str]]:
    adj: Dict[str, Set[str]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


class LabeledGraph:
    """Undirected simple graph with exactly one label per vertex."""

    __slots__ = ("labels", "edges", "adj")

    def __init__(self, labels: Mapping[str, str], edges: Iterable[Tuple[str, str]]):
        self.labels: Dict[str, str] = dict(labels)
        seen: Set[EdgeKey] = set()
        for u, v in edges:
            e = edge_key(u, v)
            if u not in self.labels or v not in self.labels:
                raise ValueError("edge (%s, %s) references an unknown vertex" % (u, v))
            if e in seen:
                raise ValueError("duplicate edge (%s, %s)" % e)
            seen.add(e)
        self.edges: FrozenSet[EdgeKey] = frozenset(seen)
        adj = build_adjacency(self.edges)
        for v in self.labels:
            adj.setdefault(v, set())
        self.adj: Dict[str, FrozenSet[str]] = {v: frozenset(ns) for v, ns in adj.items()}

    @property
    def vertices(self) -> List[str]:
        return sorted(self.labels)

    @property
    def alphabet(self) -> List[str]:
        """Sorted set of labels used by the graph."""
        return sorted(set(self.labels.values()))

    def label(self, v: str) -> str:
        return self.labels[v]

    def neighbors(self, v: str) -> FrozenSet[str]:
        return self.adj[v]

    def degree(self, v: str) -> int:
        return len(self.adj[v])

    def has_edge(self, u: str, v: str) -> bool:
        return edge_key(u, v) in self.edges

    def __repr__(self) -> str:  # pragma: no cover
        return "LabeledGraph(|V|=%d, |E|=%d)" % (len(self.labels), len(self.edges))


@dataclass
class TrussDecomposition:
    """Edge trussness map and the largest k for which a k-truss exists.

    ``edge_trussness[e]`` is the largest k such that e lies in a subgraph
    whose minimum edge support is at least k-2.  For an edgeless input the
    map is empty and ``k_max`` is reported as 2.
    """

    edge_trussness: Dict[EdgeKey, int] = field(default_factory=dict)
    k_max: int = 2

    @property
    def is_empty(self) -> bool:
        return not self.edge_trussness


def compute_supports(
    edges: Iterable[EdgeKey], graph: "LabeledGraph | None" = None
) -> Dict[EdgeKey, int]:
    """Triangle count of every edge within the working edge set.

    When ``graph`` is given, edges outside the graph are rejected.
    """
    edge_set = set(edges)
    if graph is not None:
        unknown = edge_set - graph.edges
        if unknown:
            raise ValueError("edges not in graph: %s" % sorted(unknown))
    adj = build_adjacency(edge_set)
    return {(u, v): len(adj[u] & adj[v]) for u, v in edge_set}


def k_truss_peel(edges: Iterable[EdgeKey], k: int) -> FrozenSet[EdgeKey]:
    """Maximal sub-edge-set in which every edge has support >= k-2.

    The result is the union of all k-trusses inside the input; the peeling
    order does not affect it.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    edge_set = set(edges)
    adj = build_adjacency(edge_set)
    sup = {(u, v): len(adj[u] & adj[v]) for u, v in edge_set}
    threshold = k - 2
    queue = deque(e for e in sorted(edge_set) if sup[e] < threshold)
    queued = set(queue)
    while queue:
        e = queue.popleft()
        if e not in edge_set:
            continue
        u, v = e
        for w in sorted(adj[u] & adj[v]):
            for other in (edge_key(u, w), edge_key(v, w)):
                sup[other] -= 1
                if sup[other] < threshold and other not in queued:
                    queue.append(other)
                    queued.add(other)
        edge_set.discard(e)
        adj[u].discard(v)
        adj[v].discard(u)
    return frozenset(edge_set)


def truss_decompose(edges: Iterable[EdgeKey]) -> TrussDecomposition:
    """Iterative minimum-support peeling assigning each edge its trussness.

    Always removes an edge of minimum current support; the assigned level is
    2 + that support, clamped so levels never decrease.  Edges are bucketed
    by current support, so each decrement is O(1).  Trussness values do not
    depend on tie-breaking among equal-support edges.
    """
    edge_set = set(edges)
    if not edge_set:
        return TrussDecomposition({}, 2)
    adj = build_adjacency(edge_set)
    sup = {(u, v): len(adj[u] & adj[v]) for u, v in edge_set}
    buckets: List[Set[EdgeKey]] = [set() for _ in range(max(sup.values()) + 1)]
    for e, s in sup.items():
        buckets[s].add(e)
    trussness: Dict[EdgeKey, int] = {}
    k = 2
    n = len(edge_set)
    while len(trussness) < n:
        level = 0
        while not buckets[level]:
            level += 1
        k = max(k, level + 2)
        e = buckets[level].pop()
        u, v = e
        for w in adj[u] & adj[v]:
            for other in (edge_key(u, w), edge_key(v, w)):
                s = sup[other]
                buckets[s].discard(other)
                sup[other] = s - 1
                buckets[s - 1].add(other)
        adj[u].discard(v)
        adj[v].discard(u)
        trussness[e] = k
    return TrussDecomposition(trussness, max(trussness.values()))


def connected_components(edges: Iterable[EdgeKey]) -> List[FrozenSet[EdgeKey]]:
    """Partition an edge set into maximal connected sub-edge-sets.

    Connectivity is via shared vertices.  Components are returned sorted by
    their smallest edge so output order is deterministic.
    """
    edge_set = set(edges)
    adj = build_adjacency(edge_set)
    seen_vertices: Set[str] = set()
    components: List[FrozenSet[EdgeKey]] = []
    for start_edge in sorted(edge_set):
        u0 = start_edge[0]
        if u0 in seen_vertices:
            continue
        stack = [u0]
        comp_vertices = {u0}
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in comp_vertices:
                    comp_vertices.add(y)
                    stack.append(y)
        seen_vertices |= comp_vertices
        comp = frozenset(e for e in edge_set if e[0] in comp_vertices)
        components.append(comp)
    return components


def induce_from_routes(walks: Iterable[Iterable[str]]) -> FrozenSet[EdgeKey]:
    """Distinct edges traversed by any of the given vertex walks."""
    out: Set[EdgeKey] = set()
    for walk in walks:
        prev = None
        for v in walk:
            if prev is not None:
                out.add(edge_key(prev, v))
            prev = v
    return frozenset(out)
