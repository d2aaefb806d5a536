"""Brute-force oracle and definitional verifier.

Everything here recomputes from first principles: naive subsequence tests,
naive triangle counting, union-find connectivity, and exhaustive subset
enumeration.  It deliberately shares no algorithm code with the mining
module (only the plain record types), so the two sides can check each
other.  Correctness over speed throughout.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Set, Tuple

from .graph import EdgeKey, LabeledGraph, edge_key
from .mining import HotspotCatalog, RouteHotspot
from .routes import Fragment, Pattern, Route

MAXIMALITY_EDGE_BOUND = 12
PATTERN_ENUM_BUDGET = 500_000


def _subseq(pattern: Sequence[str], seq: Sequence[str]) -> bool:
    i = 0
    for item in seq:
        if i < len(pattern) and item == pattern[i]:
            i += 1
    return i == len(pattern)


def _route_seq(route: Route, graph: LabeledGraph) -> Tuple[str, ...]:
    return tuple(graph.labels[v] for v in route.walk)


def _runs_in(route: Route, edges: FrozenSet[EdgeKey]) -> List[Fragment]:
    """Maximal consecutive portions of the route inside the edge set."""
    walk = route.walk
    runs: List[Fragment] = []
    start = None
    for i in range(len(walk) - 1):
        if edge_key(walk[i], walk[i + 1]) in edges:
            if start is None:
                start = i
        else:
            if start is not None:
                runs.append(Fragment(route.tid, start, tuple(walk[start : i + 1])))
                start = None
    if start is not None:
        runs.append(Fragment(route.tid, start, tuple(walk[start:])))
    return runs


def _edges_of_walk(walk: Sequence[str]) -> Set[EdgeKey]:
    return {edge_key(walk[i], walk[i + 1]) for i in range(len(walk) - 1)}


def _connected(edges: Iterable[EdgeKey]) -> bool:
    edges = list(edges)
    if not edges:
        return False
    parent: Dict[str, str] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent.setdefault(u, u)
        parent.setdefault(v, v)
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    roots = {find(x) for x in parent}
    return len(roots) == 1


def _edge_supports(edges: Iterable[EdgeKey]) -> Dict[EdgeKey, int]:
    """Naive triple-scan triangle counts within the edge set."""
    edge_list = sorted(set(edges))
    edge_set = set(edge_list)
    vertices = sorted({x for e in edge_list for x in e})
    out = {}
    for u, v in edge_list:
        count = 0
        for w in vertices:
            if w == u or w == v:
                continue
            if edge_key(u, w) in edge_set and edge_key(v, w) in edge_set:
                count += 1
        out[(u, v)] = count
    return out


def _is_k_truss(edges: FrozenSet[EdgeKey], k: int) -> bool:
    sups = _edge_supports(edges)
    return all(s >= k - 2 for s in sups.values())


def oracle_patterns(
    routes: Mapping[int, Route],
    graph: LabeledGraph,
    min_sup: int,
    max_len: "int | None" = None,
    budget: int = PATTERN_ENUM_BUDGET,
) -> Set[Pattern]:
    """Frequent patterns by plain enumeration of every label string.

    Tries every sequence over the graph alphabet of length 2 up to the
    longest induced sequence, counting containment per route.  Refuses
    instances whose enumeration space exceeds ``budget``.
    """
    if min_sup < 1:
        raise ValueError("min_sup must be >= 1")
    sequences = [_route_seq(r, graph) for _, r in sorted(routes.items())]
    if not sequences:
        return set()
    alphabet = graph.alphabet
    longest = max(len(s) for s in sequences)
    if max_len is not None:
        longest = min(longest, max_len)
    total = sum(len(alphabet) ** l for l in range(2, longest + 1))
    if total > budget:
        raise ValueError(
            "enumeration space %d exceeds budget %d (alphabet %d, length %d)"
            % (total, budget, len(alphabet), longest)
        )
    out: Set[Pattern] = set()
    for length in range(2, longest + 1):
        for candidate in product(alphabet, repeat=length):
            support = sum(1 for s in sequences if _subseq(candidate, s))
            if support >= min_sup:
                out.add(candidate)
    return out


@dataclass
class _SubsetFacts:
    """Per connected subset: truss level plus participation/coverage for p."""

    edges: FrozenSet[EdgeKey]
    truss_level: int
    covered: bool
    tids: Tuple[int, ...]
    runs: Tuple[Fragment, ...]

    @property
    def qualifies(self) -> bool:
        return self.covered and bool(self.tids)


def _pattern_subsets(
    pattern: Pattern,
    routes: Mapping[int, Route],
    graph: LabeledGraph,
    min_sup: int,
    size_bound: int,
) -> List[_SubsetFacts]:
    """Facts for every connected subset of the pattern's route edges."""
    carrying = [
        r for _, r in sorted(routes.items()) if _subseq(pattern, _route_seq(r, graph))
    ]
    edge_universe = sorted({e for r in carrying for e in _edges_of_walk(r.walk)})
    n = len(edge_universe)
    if n > size_bound:
        raise ValueError(
            "pattern %r induces %d edges, above the exhaustive bound %d"
            % (pattern, n, size_bound)
        )
    facts: List[_SubsetFacts] = []
    for mask in range(1, 1 << n):
        subset = frozenset(edge_universe[i] for i in range(n) if mask >> i & 1)
        if not _connected(subset):
            continue
        sups = _edge_supports(subset)
        truss_level = min(sups.values()) + 2
        good_runs: List[Fragment] = []
        covered: Set[EdgeKey] = set()
        tids: Set[int] = set()
        for route in carrying:
            for run in _runs_in(route, subset):
                seq = tuple(graph.labels[x] for x in run.walk)
                if _subseq(pattern, seq):
                    good_runs.append(run)
                    covered |= _edges_of_walk(run.walk)
                    tids.add(run.tid)
        facts.append(
            _SubsetFacts(
                edges=subset,
                truss_level=truss_level,
                covered=covered >= subset,
                tids=tuple(sorted(tids)) if len(tids) >= min_sup else (),
                runs=tuple(sorted(good_runs, key=lambda f: (f.tid, f.start))),
            )
        )
    return facts


def oracle_hotspots(
    graph: LabeledGraph,
    routes: Mapping[int, Route],
    min_sup: int,
    size_bound: int = MAXIMALITY_EDGE_BOUND,
) -> HotspotCatalog:
    """Catalog by definition: enumerate, filter conditions, keep maximal.

    For every frequent pattern, every connected subset of the edges its
    routes traverse is tested as a k-truss covered by enough pattern
    fragments; the inclusion-maximal qualifiers per (pattern, k) form the
    answer.  Patterns whose edge universe exceeds ``size_bound`` raise.
    """
    catalog = HotspotCatalog(min_sup)
    for pattern in sorted(oracle_patterns(routes, graph, min_sup)):
        facts = [
            f
            for f in _pattern_subsets(pattern, routes, graph, min_sup, size_bound)
            if f.qualifies
        ]
        if not facts:
            continue
        top = max(f.truss_level for f in facts)
        for k in range(2, top + 1):
            live = [f for f in facts if f.truss_level >= k]
            for f in live:
                if any(o is not f and f.edges < o.edges for o in live):
                    continue
                catalog.add(
                    [RouteHotspot(pattern, k, f.edges, f.runs, f.tids)]
                )
    return catalog


@dataclass
class OracleReport:
    """Outcome of checking one hotspot against the definition."""

    digest: str
    conditions: Dict[str, bool] = field(default_factory=dict)
    partial: bool = False

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    def failed_conditions(self) -> List[str]:
        return sorted(name for name, ok in self.conditions.items() if not ok)

    def to_text(self) -> str:
        lines = ["hotspot %s: %s" % (self.digest, "PASS" if self.passed else "FAIL")]
        for name in sorted(self.conditions):
            lines.append("  %-14s %s" % (name, "ok" if self.conditions[name] else "VIOLATED"))
        if self.partial:
            lines.append("  maximality     skipped (instance above exhaustive bound)")
        return "\n".join(lines)


def _hotspot_digest(hotspot: RouteHotspot) -> str:
    payload = repr((hotspot.pattern, hotspot.k, sorted(hotspot.edges))).encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def verify_hotspot(
    hotspot: RouteHotspot,
    graph: LabeledGraph,
    routes: Mapping[int, Route],
    min_sup: int,
    size_bound: int = MAXIMALITY_EDGE_BOUND,
) -> OracleReport:
    """Recompute every hotspot condition from scratch."""
    report = OracleReport(_hotspot_digest(hotspot))
    edges = hotspot.edges
    k = hotspot.k
    report.conditions["k-truss"] = bool(edges) and _is_k_truss(edges, k)
    report.conditions["connected"] = _connected(edges)

    good_runs: List[Fragment] = []
    covered: Set[EdgeKey] = set()
    tids: Set[int] = set()
    for _, route in sorted(routes.items()):
        for run in _runs_in(route, edges):
            seq = tuple(graph.labels[x] for x in run.walk)
            if _subseq(hotspot.pattern, seq):
                good_runs.append(run)
                covered |= _edges_of_walk(run.walk)
                tids.add(run.tid)
    report.conditions["participation"] = len(tids) >= min_sup
    report.conditions["coverage"] = covered >= edges
    if hotspot.covering:
        expected = sorted(good_runs, key=lambda f: (f.tid, f.start))
        report.conditions["covering-list"] = list(hotspot.covering) == expected

    carrying = [
        r
        for _, r in sorted(routes.items())
        if _subseq(hotspot.pattern, _route_seq(r, graph))
    ]
    universe = {e for r in carrying for e in _edges_of_walk(r.walk)}
    if len(universe) > size_bound:
        report.partial = True
        return report
    try:
        facts = _pattern_subsets(hotspot.pattern, routes, graph, min_sup, size_bound)
    except ValueError:
        report.partial = True
        return report
    strictly_bigger = [
        f
        for f in facts
        if f.qualifies and f.truss_level >= k and edges < f.edges
    ]
    report.conditions["maximality"] = not strictly_bigger
    return report


def verify_catalog(
    catalog: HotspotCatalog,
    graph: LabeledGraph,
    routes: Mapping[int, Route],
    min_sup: int,
    size_bound: int = MAXIMALITY_EDGE_BOUND,
) -> Tuple[bool, List[str]]:
    """Cross-check a catalog against the oracle; messages name the failures."""
    messages: List[str] = []
    try:
        expected = oracle_hotspots(graph, routes, min_sup, size_bound)
    except ValueError as exc:
        messages.append("partial verification (%s)" % exc)
        for hotspot in catalog.all_hotspots():
            report = verify_hotspot(hotspot, graph, routes, min_sup, size_bound)
            if not report.passed:
                messages.append(
                    "hotspot (%s, k=%d) violates: %s"
                    % (",".join(hotspot.pattern), hotspot.k, ", ".join(report.failed_conditions()))
                )
        return (len(messages) == 1, messages)

    got = catalog.identity_set()
    want = expected.identity_set()
    for pattern, k, edges in sorted(want - got, key=lambda t: (t[0], t[1], sorted(t[2]))):
        messages.append(
            "missing hotspot (%s, k=%d) edges=%s" % (",".join(pattern), k, sorted(edges))
        )
    for pattern, k, edges in sorted(got - want, key=lambda t: (t[0], t[1], sorted(t[2]))):
        report_owner = next(
            h for h in catalog.all_hotspots() if (h.pattern, h.k, h.edges) == (pattern, k, edges)
        )
        report = verify_hotspot(report_owner, graph, routes, min_sup, size_bound)
        names = report.failed_conditions() or ["maximality"]
        messages.append(
            "spurious hotspot (%s, k=%d) violates: %s"
            % (",".join(pattern), k, ", ".join(names))
        )
    return (not messages, messages)
