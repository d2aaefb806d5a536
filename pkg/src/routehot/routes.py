"""Routes as identified edge walks, induced label sequences and patterns.

A route is a vertex walk; its induced sequence is the label string read off
the walk.  A pattern is a label sequence of length >= 2 and is contained in
a sequence when it embeds as an order-preserving, not necessarily
contiguous, subsequence.  Pattern support counts distinct routes by tid, so
several fragments of one route contribute once.

Everything here is immutable after construction; the predicates are pure
functions and safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from .graph import EdgeKey, LabeledGraph, edge_key

Pattern = Tuple[str, ...]
LabelSeq = Tuple[str, ...]


@dataclass(frozen=True)
class Route:
    """An identified walk over graph edges (vertex list form)."""

    tid: int
    walk: Tuple[str, ...]

    def __post_init__(self):
        if len(self.walk) < 2:
            raise ValueError("route %r needs a walk of at least 2 vertices" % (self.tid,))

    @property
    def length(self) -> int:
        """Number of traversed edges."""
        return len(self.walk) - 1

    def edges(self) -> FrozenSet[EdgeKey]:
        return frozenset(walk_edges(self.walk))


@dataclass(frozen=True)
class Fragment:
    """A consecutive portion of a route, tagged with its parent tid.

    ``start`` is the offset of the slice in the parent walk, so the slice
    covers parent positions [start, start + len(walk) - 1].
    """

    tid: int
    start: int
    walk: Tuple[str, ...]

    def __post_init__(self):
        if len(self.walk) < 2:
            raise ValueError("fragment of route %r has no edges" % (self.tid,))

    @property
    def end(self) -> int:
        return self.start + len(self.walk) - 1

    def edges(self) -> FrozenSet[EdgeKey]:
        return frozenset(walk_edges(self.walk))


RouteSet = Dict[int, Route]


def walk_edges(walk: Sequence[str]) -> List[EdgeKey]:
    """Edge keys traversed by a walk, in order and with repeats."""
    return [edge_key(walk[i], walk[i + 1]) for i in range(len(walk) - 1)]


def _walk_of(obj) -> Tuple[str, ...]:
    walk = getattr(obj, "walk", obj)
    return tuple(walk)


def induced_sequence(route, graph: LabeledGraph) -> LabelSeq:
    """Labels of the walk's vertices, in walk order."""
    walk = _walk_of(route)
    missing = [v for v in walk if v not in graph.labels]
    if missing:
        raise ValueError("walk vertices missing a label: %s" % sorted(set(missing)))
    return tuple(graph.labels[v] for v in walk)


def contains_pattern(seq: Sequence[str], pattern: Sequence[str]) -> bool:
    """True iff the pattern embeds into the sequence order-preservingly."""
    it = iter(seq)
    return all(item in it for item in pattern)


def pattern_support(routes: Mapping[int, Route], pattern: Sequence[str], graph: LabeledGraph) -> int:
    """Number of distinct routes whose induced sequence contains the pattern."""
    pat = tuple(pattern)
    return sum(
        1 for r in routes.values() if contains_pattern(induced_sequence(r, graph), pat)
    )


def route_contained(route, edges: FrozenSet[EdgeKey]) -> bool:
    """True iff every edge traversed by the route/fragment is in the set."""
    return all(e in edges for e in walk_edges(_walk_of(route)))


def covers(fragments: Iterable, edges: Iterable[EdgeKey]) -> bool:
    """True iff the fragments' traversed edges jointly include every edge."""
    edge_set = set(edges)
    covered = set()
    for frag in fragments:
        covered.update(walk_edges(_walk_of(frag)))
    return edge_set <= covered


def maximal_fragments(route: Route, edges: FrozenSet[EdgeKey]) -> List[Fragment]:
    """Inclusion-maximal consecutive slices of the route lying inside ``edges``.

    Slices of edge length >= 1 only; output slices are pairwise
    non-overlapping and ordered by start offset.
    """
    walk = route.walk
    out: List[Fragment] = []
    run_start = None
    for i in range(len(walk) - 1):
        inside = edge_key(walk[i], walk[i + 1]) in edges
        if inside and run_start is None:
            run_start = i
        elif not inside and run_start is not None:
            out.append(Fragment(route.tid, run_start, tuple(walk[run_start : i + 1])))
            run_start = None
    if run_start is not None:
        out.append(Fragment(route.tid, run_start, tuple(walk[run_start:])))
    return out


def route_trussness(route, edge_trussness: Mapping[EdgeKey, int]) -> int:
    """Maximum trussness over the traversed edges; 0 when none has an entry."""
    best = 0
    for e in walk_edges(_walk_of(route)):
        t = edge_trussness.get(e)
        if t is not None and t > best:
            best = t
    return best


def frequent_patterns(
    sequences: Mapping[int, LabelSeq],
    min_sup: int,
    max_len: "int | None" = None,
    max_patterns: "int | None" = None,
) -> Dict[Pattern, int]:
    """All patterns of length >= 2 contained in at least ``min_sup`` sequences.

    Prefix-projection growth: a pattern is extended with every item that is
    frequent in the suffixes following its leftmost embedding.  Support is
    per sequence id, so repeats inside one sequence count once.  Raises
    ``ValueError`` once more than ``max_patterns`` patterns accumulate.
    """
    if min_sup < 1:
        raise ValueError("min_sup must be >= 1")
    out: Dict[Pattern, int] = {}
    # projection: list of (tid, suffix start position)
    initial = [(tid, 0) for tid, _ in sorted(sequences.items())]

    def grow(prefix: Pattern, projection: List[Tuple[int, int]]):
        counts: Dict[str, int] = {}
        for tid, pos in projection:
            seq = sequences[tid]
            for item in set(seq[pos:]):
                counts[item] = counts.get(item, 0) + 1
        for item in sorted(counts):
            if counts[item] < min_sup:
                continue
            pattern = prefix + (item,)
            next_projection = []
            for tid, pos in projection:
                seq = sequences[tid]
                try:
                    found = seq.index(item, pos)
                except ValueError:
                    continue
                next_projection.append((tid, found + 1))
            if len(pattern) >= 2:
                out[pattern] = counts[item]
                if max_patterns is not None and len(out) > max_patterns:
                    raise ValueError(
                        "pattern count exceeded cap of %d" % max_patterns
                    )
            if max_len is None or len(pattern) < max_len:
                grow(pattern, next_projection)

    grow((), initial)
    return out


def induced_sequences(routes: Mapping[int, Route], graph: LabeledGraph) -> Dict[int, LabelSeq]:
    return {tid: induced_sequence(r, graph) for tid, r in sorted(routes.items())}
