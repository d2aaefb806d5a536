"""Route hotspot detection and the mining engines.

A route hotspot for a pattern p and truss level k is a connected k-truss
whose edges are all covered by pattern-containing route fragments, with at
least ``min_sup`` distinct routes participating, maximal among such
subgraphs.  Detection interleaves triangle-support peeling with route
fragmentation: removing an edge splits the fragments traversing it, split
products that lose the pattern (or whose best edge trussness cannot reach
k) are dropped, and edges left uncovered are scheduled for removal.  The
process runs to a fixpoint that does not depend on removal order.

Engines:

* ``greedy``               exhaustive patterns x all k in [2, k_max]
* ``greedy+patternprune``  skip (p, k) when the prefix had no hotspot at k
* ``greedy+hotspotprune``  stop the k loop at the first empty level
* ``fast``                 both prunings, peeled state carried across k
* ``parallel-fast``        ``fast`` with patterns as independent work items

All engines produce set-identical catalogs; the pruned ones are safe
because hotspot existence is downward-closed both in pattern refinement
and in k.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .graph import (
    EdgeKey,
    LabeledGraph,
    connected_components,
    edge_key,
    truss_decompose,
)
from .routes import (
    Fragment,
    Pattern,
    Route,
    contains_pattern,
    frequent_patterns,
    induced_sequence,
    induced_sequences,
    walk_edges,
)

ENGINES = (
    "greedy",
    "greedy+patternprune",
    "greedy+hotspotprune",
    "fast",
    "parallel-fast",
)


class ResourceGuardError(RuntimeError):
    """Raised when mining would touch more patterns than the configured cap."""


@dataclass(frozen=True)
class RouteHotspot:
    """A connected k-truss plus the route fragments that cover it."""

    pattern: Pattern
    k: int
    edges: FrozenSet[EdgeKey]
    covering: Tuple[Fragment, ...] = ()
    covering_tids: Tuple[int, ...] = ()

    @property
    def key(self) -> Tuple[Pattern, int, FrozenSet[EdgeKey]]:
        """Identity used for catalog set comparisons."""
        return (self.pattern, self.k, self.edges)

    def sort_key(self):
        return (self.pattern, self.k, tuple(sorted(self.edges)))


@dataclass
class MiningConfig:
    min_sup: int = 2
    engine: str = "fast"
    threads: int = 1
    max_pattern_len: Optional[int] = None
    max_k: Optional[int] = None
    max_patterns: int = 200_000

    def __post_init__(self):
        if self.min_sup < 1:
            raise ValueError("min_sup must be a positive integer")
        if self.engine not in ENGINES:
            raise ValueError("unknown engine %r (expected one of %s)" % (self.engine, ", ".join(ENGINES)))
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.max_pattern_len is not None and self.max_pattern_len < 2:
            raise ValueError("max_pattern_len must be >= 2")
        if self.max_k is not None and self.max_k < 2:
            raise ValueError("max_k must be >= 2")


class HotspotCatalog:
    """All mined hotspots keyed by (pattern, k), with deterministic order."""

    def __init__(self, min_sup: int):
        self.min_sup = min_sup
        self._entries: Dict[Tuple[Pattern, int], Tuple[RouteHotspot, ...]] = {}

    def add(self, hotspots: Iterable[RouteHotspot]) -> None:
        for h in hotspots:
            key = (h.pattern, h.k)
            current = self._entries.get(key, ())
            self._entries[key] = tuple(sorted(current + (h,), key=RouteHotspot.sort_key))

    def get(self, pattern: Sequence[str], k: int) -> Tuple[RouteHotspot, ...]:
        return self._entries.get((tuple(pattern), k), ())

    def entries(self) -> List[Tuple[Tuple[Pattern, int], Tuple[RouteHotspot, ...]]]:
        return sorted(self._entries.items())

    def all_hotspots(self) -> List[RouteHotspot]:
        return [h for _, hs in self.entries() for h in hs]

    def patterns(self) -> List[Pattern]:
        return sorted({p for p, _ in self._entries})

    def ks_for(self, pattern: Sequence[str]) -> List[int]:
        pat = tuple(pattern)
        return sorted(k for p, k in self._entries if p == pat)

    @property
    def num_patterns(self) -> int:
        """#NP: patterns supporting at least one hotspot."""
        return len(self.patterns())

    @property
    def num_hotspots(self) -> int:
        """#NH: total hotspot count."""
        return sum(len(hs) for hs in self._entries.values())

    def identity_set(self) -> FrozenSet[Tuple[Pattern, int, FrozenSet[EdgeKey]]]:
        return frozenset(h.key for h in self.all_hotspots())

    def __eq__(self, other) -> bool:
        if not isinstance(other, HotspotCatalog):
            return NotImplemented
        return self.identity_set() == other.identity_set()

    def __len__(self) -> int:
        return self.num_hotspots

    def __repr__(self) -> str:  # pragma: no cover
        return "HotspotCatalog(NP=%d, NH=%d)" % (self.num_patterns, self.num_hotspots)


def initial_fragments(
    pattern: Sequence[str], routes: Mapping[int, Route], graph: LabeledGraph
) -> List[Fragment]:
    """Whole routes containing the pattern, as their own maximal fragments."""
    pat = tuple(pattern)
    out = []
    for tid, route in sorted(routes.items()):
        if contains_pattern(induced_sequence(route, graph), pat):
            out.append(Fragment(tid, 0, route.walk))
    return out


def _split_fragment(frag: Fragment, e: EdgeKey) -> List[Fragment]:
    """Cut the fragment at every traversal of ``e``; keep pieces with edges."""
    walk = frag.walk
    pieces: List[Fragment] = []
    run_start = 0
    for i in range(len(walk) - 1):
        if edge_key(walk[i], walk[i + 1]) == e:
            if i > run_start:
                pieces.append(Fragment(frag.tid, frag.start + run_start, walk[run_start : i + 1]))
            run_start = i + 1
    if run_start < len(walk) - 1:
        pieces.append(Fragment(frag.tid, frag.start + run_start, walk[run_start:]))
    return pieces


class _PeelState:
    """Mutable working state for one pattern, reusable across rising k.

    Carrying the peeled remainder from level k to k+1 yields the same
    catalog as starting fresh, because the k-level fixpoint is contained in
    the (k-1)-level one.
    """

    def __init__(
        self,
        pattern: Sequence[str],
        fragments: Iterable[Fragment],
        min_sup: int,
        labels: Mapping[str, str],
    ):
        self.pattern = tuple(pattern)
        self.min_sup = min_sup
        self.labels = labels
        self.fragments: Dict[int, Fragment] = {}
        self.edge_frags: Dict[EdgeKey, Set[int]] = {}
        self._next_fid = 0
        for frag in fragments:
            fid = self._next_fid
            self._next_fid += 1
            self.fragments[fid] = frag
            for e in set(walk_edges(frag.walk)):
                self.edge_frags.setdefault(e, set()).add(fid)
        self.edges: Set[EdgeKey] = set(self.edge_frags)
        self.adj: Dict[str, Set[str]] = {}
        for u, v in self.edges:
            self.adj.setdefault(u, set()).add(v)
            self.adj.setdefault(v, set()).add(u)
        self.sup: Dict[EdgeKey, int] = {
            (u, v): len(self.adj[u] & self.adj[v]) for u, v in self.edges
        }

    def live_tids(self) -> Set[int]:
        return {frag.tid for frag in self.fragments.values()}

    def peel(self, k: int) -> List[RouteHotspot]:
        threshold = k - 2
        entry_tau = truss_decompose(self.edges).edge_trussness
        queue = deque(e for e in sorted(self.edges) if self.sup[e] < threshold)
        queued = set(queue)
        while queue:
            e = queue.popleft()
            queued.discard(e)
            if e not in self.edges:
                continue
            self._remove_edge(e, k, threshold, entry_tau, queue, queued)
        return self._emit(k)

    def _remove_edge(self, e, k, threshold, entry_tau, queue, queued):
        u, v = e
        for w in sorted(self.adj[u] & self.adj[v]):
            for other in (edge_key(u, w), edge_key(v, w)):
                self.sup[other] -= 1
                if self.sup[other] < threshold and other not in queued:
                    queue.append(other)
                    queued.add(other)
        self.edges.discard(e)
        del self.sup[e]
        self.adj[u].discard(v)
        self.adj[v].discard(u)

        touched: Set[EdgeKey] = set()
        for fid in sorted(self.edge_frags.pop(e, ())):
            frag = self.fragments.pop(fid)
            for oe in set(walk_edges(frag.walk)):
                if oe != e:
                    owners = self.edge_frags.get(oe)
                    if owners is not None:
                        owners.discard(fid)
                    touched.add(oe)
            for piece in _split_fragment(frag, e):
                seq = tuple(self.labels[x] for x in piece.walk)
                if not contains_pattern(seq, self.pattern):
                    continue
                piece_edges = set(walk_edges(piece.walk))
                # a fragment whose best edge cannot reach level k is useless
                if max(entry_tau.get(pe, 0) for pe in piece_edges) < k:
                    continue
                fid2 = self._next_fid
                self._next_fid += 1
                self.fragments[fid2] = piece
                for pe in piece_edges:
                    self.edge_frags.setdefault(pe, set()).add(fid2)
        # edges no longer covered by any fragment are scheduled for removal
        for oe in sorted(touched):
            if oe in self.edges and not self.edge_frags.get(oe):
                self.sup[oe] = 0
                if threshold > 0 and oe not in queued:
                    queue.append(oe)
                    queued.add(oe)

    def _emit(self, k: int) -> List[RouteHotspot]:
        if not self.edges:
            return []
        comps = connected_components(self.edges)
        comp_of_vertex: Dict[str, int] = {}
        for ci, comp in enumerate(comps):
            for u, v in comp:
                comp_of_vertex[u] = ci
                comp_of_vertex[v] = ci
        frags_by_comp: Dict[int, List[Fragment]] = {}
        for fid in sorted(self.fragments):
            frag = self.fragments[fid]
            ci = comp_of_vertex[frag.walk[0]]
            frags_by_comp.setdefault(ci, []).append(frag)
        out = []
        for ci, comp in enumerate(comps):
            frags = frags_by_comp.get(ci, [])
            covered = set()
            for frag in frags:
                covered.update(walk_edges(frag.walk))
            if not comp <= covered:  # pragma: no cover - fixpoint invariant
                raise AssertionError("peeling fixpoint left uncovered edges")
            tids = sorted({frag.tid for frag in frags})
            if len(tids) >= self.min_sup:
                covering = tuple(sorted(frags, key=lambda f: (f.tid, f.start)))
                out.append(
                    RouteHotspot(self.pattern, k, frozenset(comp), covering, tuple(tids))
                )
        return out


def detect_for(
    pattern: Sequence[str],
    k: int,
    fragments: Iterable[Fragment],
    graph: LabeledGraph,
    min_sup: int,
) -> List[RouteHotspot]:
    """Hotspots for a fixed (pattern, k) given the pattern's fragment set."""
    pat = tuple(pattern)
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(pat) < 2:
        raise ValueError("patterns of length < 2 are not mined")
    frags = list(fragments)
    for frag in frags:
        seq = tuple(graph.labels[x] for x in frag.walk)
        if not contains_pattern(seq, pat):
            raise ValueError("fragment of route %r does not contain the pattern" % frag.tid)
    return _PeelState(pat, frags, min_sup, graph.labels).peel(k)


def _leftmost_embedding_end(seq: Sequence[str], pattern: Sequence[str]) -> Optional[int]:
    pos = -1
    for item in pattern:
        try:
            pos = seq.index(item, pos + 1)
        except ValueError:
            return None
    return pos


def grow_candidates(
    pattern: Sequence[str],
    fragments: Iterable[Fragment],
    graph: LabeledGraph,
    min_sup: int,
) -> List[Pattern]:
    """One-label extensions of the pattern worth scanning next.

    Counts, per candidate label, the distinct routes in which the label
    occurs after a full embedding of the pattern.  Counting after the
    leftmost embedding is exact: any embedding of pattern+label implies the
    label occurs past the leftmost embedding of the pattern.
    """
    pat = tuple(pattern)
    label_tids: Dict[str, Set[int]] = {}
    for frag in fragments:
        seq = tuple(graph.labels[x] for x in frag.walk)
        end = _leftmost_embedding_end(seq, pat)
        if end is None:
            continue
        for lab in set(seq[end + 1 :]):
            label_tids.setdefault(lab, set()).add(frag.tid)
    return [pat + (lab,) for lab in sorted(label_tids) if len(label_tids[lab]) >= min_sup]


def precision_score(reference: HotspotCatalog, candidate: HotspotCatalog) -> float:
    """|C intersect C_hat| / |C| over (pattern, k, edge set) identities."""
    ref = reference.identity_set()
    cand = candidate.identity_set()
    if not ref:
        if not cand:
            return 1.0
        raise ValueError("reference catalog is empty but candidate is not")
    return len(ref & cand) / len(ref)


def _frequent_length2(
    sequences: Mapping[int, Tuple[str, ...]], min_sup: int
) -> List[Pattern]:
    return sorted(frequent_patterns(sequences, min_sup, max_len=2))


def mine_greedy(graph: LabeledGraph, routes: Mapping[int, Route], config: MiningConfig) -> HotspotCatalog:
    """Exhaustive scan: every frequent pattern crossed with every k."""
    sequences = induced_sequences(routes, graph)
    try:
        patterns = frequent_patterns(
            sequences, config.min_sup, config.max_pattern_len, config.max_patterns
        )
    except ValueError as exc:
        raise ResourceGuardError(str(exc)) from None
    k_max = truss_decompose(graph.edges).k_max
    if config.max_k is not None:
        k_max = min(k_max, config.max_k)
    catalog = HotspotCatalog(config.min_sup)
    for pattern in sorted(patterns):
        frags = initial_fragments(pattern, routes, graph)
        for k in range(2, k_max + 1):
            catalog.add(detect_for(pattern, k, frags, graph, config.min_sup))
    return catalog


def _mine_greedy_hotspotprune(graph, routes, config) -> HotspotCatalog:
    sequences = induced_sequences(routes, graph)
    try:
        patterns = frequent_patterns(
            sequences, config.min_sup, config.max_pattern_len, config.max_patterns
        )
    except ValueError as exc:
        raise ResourceGuardError(str(exc)) from None
    k_max = truss_decompose(graph.edges).k_max
    if config.max_k is not None:
        k_max = min(k_max, config.max_k)
    catalog = HotspotCatalog(config.min_sup)
    for pattern in sorted(patterns):
        frags = initial_fragments(pattern, routes, graph)
        for k in range(2, k_max + 1):
            found = detect_for(pattern, k, frags, graph, config.min_sup)
            catalog.add(found)
            if not found:
                break  # no hotspot at k means none at any higher k
    return catalog


def _mine_greedy_patternprune(graph, routes, config) -> HotspotCatalog:
    sequences = induced_sequences(routes, graph)
    k_max = truss_decompose(graph.edges).k_max
    if config.max_k is not None:
        k_max = min(k_max, config.max_k)
    catalog = HotspotCatalog(config.min_sup)
    queue = deque(_frequent_length2(sequences, config.min_sup))
    explored = 0
    ks_with: Dict[Pattern, List[int]] = {}
    while queue:
        pattern = queue.popleft()
        explored += 1
        if explored > config.max_patterns:
            raise ResourceGuardError("pattern count exceeded cap of %d" % config.max_patterns)
        frags = initial_fragments(pattern, routes, graph)
        if len(pattern) == 2:
            candidate_ks: Iterable[int] = range(2, k_max + 1)
        else:
            # a level empty for the prefix stays empty for every extension
            candidate_ks = ks_with[pattern[:-1]]
        hit = []
        for k in candidate_ks:
            found = detect_for(pattern, k, frags, graph, config.min_sup)
            catalog.add(found)
            if found:
                hit.append(k)
        ks_with[pattern] = hit
        if hit and (config.max_pattern_len is None or len(pattern) < config.max_pattern_len):
            queue.extend(grow_candidates(pattern, frags, graph, config.min_sup))
    return catalog


def _scan_pattern(pattern, routes, graph, config):
    """Full k scan for one pattern with state carried across levels."""
    frags = initial_fragments(pattern, routes, graph)
    state = _PeelState(pattern, frags, config.min_sup, graph.labels)
    found_by_k: List[RouteHotspot] = []
    phi2 = False
    k = 2
    while state.edges and len(state.live_tids()) >= config.min_sup:
        if config.max_k is not None and k > config.max_k:
            break
        found = state.peel(k)
        found_by_k.extend(found)
        if k == 2:
            phi2 = bool(found)
        k += 1
    children: List[Pattern] = []
    if phi2 and (config.max_pattern_len is None or len(pattern) < config.max_pattern_len):
        children = grow_candidates(pattern, frags, graph, config.min_sup)
    return found_by_k, children


def mine_fast(graph: LabeledGraph, routes: Mapping[int, Route], config: MiningConfig) -> HotspotCatalog:
    """Scanner with pattern growth gated on hotspot existence at k = 2."""
    sequences = induced_sequences(routes, graph)
    catalog = HotspotCatalog(config.min_sup)
    queue = deque(_frequent_length2(sequences, config.min_sup))
    explored = 0
    while queue:
        pattern = queue.popleft()
        explored += 1
        if explored > config.max_patterns:
            raise ResourceGuardError("pattern count exceeded cap of %d" % config.max_patterns)
        found, children = _scan_pattern(pattern, routes, graph, config)
        catalog.add(found)
        queue.extend(children)
    return catalog


def mine_parallel(graph: LabeledGraph, routes: Mapping[int, Route], config: MiningConfig) -> HotspotCatalog:
    """Patterns processed as independent work items; catalog merge is sorted.

    A worker that finishes a pattern enqueues that pattern's children, so
    the queue is the only shared structure.  The result is identical to
    ``mine_fast`` for every thread count.
    """
    sequences = induced_sequences(routes, graph)
    catalog = HotspotCatalog(config.min_sup)
    seeds = _frequent_length2(sequences, config.min_sup)
    explored = 0
    collected: List[RouteHotspot] = []
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        pending = {pool.submit(_scan_pattern, p, routes, graph, config) for p in seeds}
        try:
            while pending:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for fut in done:
                    found, children = fut.result()
                    explored += 1
                    if explored > config.max_patterns:
                        raise ResourceGuardError(
                            "pattern count exceeded cap of %d" % config.max_patterns
                        )
                    collected.extend(found)
                    pending |= {
                        pool.submit(_scan_pattern, c, routes, graph, config)
                        for c in children
                    }
        except BaseException:
            for fut in pending:
                fut.cancel()
            raise
    catalog.add(collected)
    return catalog


_ENGINE_FUNCS = {
    "greedy": mine_greedy,
    "greedy+patternprune": _mine_greedy_patternprune,
    "greedy+hotspotprune": _mine_greedy_hotspotprune,
    "fast": mine_fast,
    "parallel-fast": mine_parallel,
}


def mine(graph: LabeledGraph, routes: Mapping[int, Route], config: MiningConfig) -> HotspotCatalog:
    """Run the engine selected by the config."""
    return _ENGINE_FUNCS[config.engine](graph, routes, config)
