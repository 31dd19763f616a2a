"""Treewidth <= 2 recognition by series-parallel reduction, with K4-minor certificates.

A graph has treewidth at most 2 exactly when it has no K4 minor, and exactly
when repeatedly deleting vertices of degree <= 1 and bypassing vertices of
degree 2 (merging any parallel edge this creates) empties it.  The reduction
is recorded step by step so that :mod:`supertree_tw.planar` can replay it
backwards into an embedding.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Iterable, Union

from .dgraph import DisplayGraph

__all__ = [
    "Bypass",
    "DropIsolated",
    "DropPendant",
    "K4Witness",
    "ReductionTrace",
    "is_tw_le_2",
    "k4_witness",
    "verify_k4_witness",
]


@dataclass(frozen=True)
class DropIsolated:
    v: int


@dataclass(frozen=True)
class DropPendant:
    v: int
    neighbor: int
    edge: int
    anchor: int | None  # another edge at ``neighbor`` when ``v`` was dropped


@dataclass(frozen=True)
class Bypass:
    """``v`` had edges ``edge_a`` to ``a`` and ``edge_b`` to ``b``.

    ``edge_ab`` is the edge joining ``a`` and ``b`` afterwards: freshly
    created, or (``merged``) an edge that already existed.
    """

    v: int
    a: int
    b: int
    edge_a: int
    edge_b: int
    edge_ab: int
    merged: bool


Step = Union[DropIsolated, DropPendant, Bypass]


@dataclass
class ReductionTrace:
    vertices: tuple[int, ...]
    edges: dict[int, tuple[int, int]]
    steps: list[Step] = field(default_factory=list)
    kernel: dict[int, set[int]] = field(default_factory=dict)  # vertex -> incident edge ids
    kernel_edges: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return not self.kernel


@dataclass(frozen=True)
class K4Witness:
    """Four disjoint connected branch sets, pairwise joined by an edge."""

    branch_sets: tuple[frozenset[Any], frozenset[Any], frozenset[Any], frozenset[Any]]


def _as_edges(g: Any) -> tuple[list[Any], dict[int, tuple[Any, Any]]]:
    """Normalise the accepted graph inputs to (vertices, edge id -> endpoints).

    Accepts a :class:`DisplayGraph` (edge ids preserved), a networkx graph,
    or a ``(vertices, edge pairs)`` tuple.  Loops are dropped and parallel
    edges collapsed: neither affects treewidth.
    """
    if isinstance(g, DisplayGraph):
        edges, seen = {}, set()
        for e, (u, v, _) in g.edges().items():
            if frozenset((u, v)) not in seen:  # two-taxon trees give parallel edges
                seen.add(frozenset((u, v)))
                edges[e] = (u, v)
        return g.vertices(), edges
    if hasattr(g, "nodes") and hasattr(g, "edges"):
        vertices, pairs = list(g.nodes), list(g.edges())
        pairs = [(p[0], p[1]) for p in pairs]
    else:
        vertices, pairs = list(g[0]), list(g[1])
    seen = set()
    edges = {}
    for u, v in pairs:
        key = frozenset((u, v))
        if u == v or key in seen:
            continue
        seen.add(key)
        edges[len(edges)] = (u, v)
    return vertices, edges


def _reduce(vertices: Iterable[Any], edges: dict[int, tuple[Any, Any]]) -> ReductionTrace:
    vertices = tuple(vertices)
    trace = ReductionTrace(vertices, dict(edges))
    ends = dict(edges)
    inc: dict[Any, set[int]] = {v: set() for v in vertices}
    nbr_edge: dict[Any, dict[Any, int]] = {v: {} for v in vertices}
    for e, (u, v) in ends.items():
        inc[u].add(e)
        inc[v].add(e)
        nbr_edge[u][v] = e
        nbr_edge[v][u] = e
    next_edge = max(ends, default=-1) + 1
    rank = {v: i for i, v in enumerate(sorted(vertices, key=_sort_key))}
    heaps: list[list[tuple[int, Any]]] = [[], [], []]

    def push(v: Any) -> None:
        d = len(inc[v])
        if d <= 2:
            heapq.heappush(heaps[d], (rank[v], v))

    for v in vertices:
        push(v)

    def pop() -> Any | None:
        for d, h in enumerate(heaps):
            while h:
                _, v = h[0]
                if v in inc and len(inc[v]) == d:
                    heapq.heappop(h)
                    return v
                heapq.heappop(h)
        return None

    def drop_edge(e: int) -> None:
        u, v = ends.pop(e)
        inc[u].discard(e)
        inc[v].discard(e)
        del nbr_edge[u][v]
        del nbr_edge[v][u]

    while True:
        v = pop()
        if v is None:
            break
        deg = len(inc[v])
        if deg == 0:
            trace.steps.append(DropIsolated(v))
        elif deg == 1:
            (e,) = inc[v]
            (w,) = nbr_edge[v]
            drop_edge(e)
            anchor = min(inc[w]) if inc[w] else None
            trace.steps.append(DropPendant(v, w, e, anchor))
            push(w)
        else:
            ea, eb = sorted(inc[v])
            a = ends[ea][0] if ends[ea][1] == v else ends[ea][1]
            b = ends[eb][0] if ends[eb][1] == v else ends[eb][1]
            drop_edge(ea)
            drop_edge(eb)
            if b in nbr_edge[a]:
                eab, merged = nbr_edge[a][b], True
            else:
                eab, merged = next_edge, False
                next_edge += 1
                ends[eab] = (a, b)
                inc[a].add(eab)
                inc[b].add(eab)
                nbr_edge[a][b] = eab
                nbr_edge[b][a] = eab
            trace.steps.append(Bypass(v, a, b, ea, eb, eab, merged))
            push(a)
            push(b)
        del inc[v]
        del nbr_edge[v]

    trace.kernel = inc
    trace.kernel_edges = ends
    return trace


def _sort_key(v: Any) -> tuple[str, Any]:
    return (type(v).__name__, v)


def is_tw_le_2(g: Any) -> tuple[bool, ReductionTrace]:
    """Decide ``tw(g) <= 2`` by reduction; the trace records every step.

    On failure the trace's ``kernel`` is the stalled remainder, in which
    every vertex has degree >= 3.
    """
    vertices, edges = _as_edges(g)
    trace = _reduce(vertices, edges)
    return trace.success, trace


# ---------------------------------------------------------------------------
# K4 witness
# ---------------------------------------------------------------------------


def _adjacency(vertices: Iterable[Any], edges: Iterable[tuple[Any, Any]]) -> dict[Any, set[Any]]:
    adj: dict[Any, set[Any]] = {v: set() for v in vertices}
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    return adj


def _pairs(adj: dict[Any, set[Any]]) -> list[tuple[Any, Any]]:
    return sorted(
        ((u, v) for u in adj for v in adj[u] if _sort_key(u) < _sort_key(v)),
        key=lambda p: (_sort_key(p[0]), _sort_key(p[1])),
    )


def _shrink(adj: dict[Any, set[Any]], branch: dict[Any, set[Any]]) -> dict[Any, set[Any]]:
    """Reduce ``adj`` to its kernel, folding bypassed vertices into branch sets."""
    trace = _reduce(adj, dict(enumerate(_pairs(adj))))
    for step in trace.steps:
        if isinstance(step, Bypass):
            branch[step.a] |= branch.pop(step.v)
        else:
            branch.pop(step.v)
    return _adjacency(trace.kernel, trace.kernel_edges.values())


def _has_k4_minor(adj: dict[Any, set[Any]]) -> bool:
    return not _reduce(adj, dict(enumerate(_pairs(adj)))).success


def k4_witness(g: Any) -> K4Witness:
    """Branch sets of a K4 minor of ``g``, which must not have treewidth <= 2.

    Works on the stalled reduction kernel (a minor of ``g``), deleting or
    contracting kernel edges while a K4 minor survives.  The only
    minor-minimal graph without treewidth <= 2 is K4 itself, so this ends at
    four vertices whose accumulated branch sets form the model.  The result
    is checked against ``g`` before it is returned.
    """
    vertices, edges = _as_edges(g)
    adj = _adjacency(vertices, edges.values())
    branch: dict[Any, set[Any]] = {v: {v} for v in vertices}
    adj = _shrink(adj, branch)
    if not adj:
        raise ValueError("graph has treewidth <= 2; no K4 minor exists")

    while not (len(adj) == 4 and all(len(n) == 3 for n in adj.values())):
        progressed = False
        for u, v in _pairs(adj):
            trial = {x: set(n) for x, n in adj.items()}
            trial[u].discard(v)
            trial[v].discard(u)
            if _has_k4_minor(trial):
                adj = _shrink(trial, branch)
                progressed = True
                break
        if progressed:
            continue
        for u, v in _pairs(adj):
            trial = {x: set(n) for x, n in adj.items() if x != v}
            for w in adj[v]:
                if w != u:
                    trial[w].discard(v)
                    trial[w].add(u)
                    trial[u].add(w)
            trial[u].discard(v)
            if _has_k4_minor(trial):
                branch[u] |= branch.pop(v)
                adj = _shrink(trial, branch)
                progressed = True
                break
        if not progressed:  # pragma: no cover - contradicts the excluded-minor theorem
            raise AssertionError("no minor operation preserves the K4 minor")

    for x in [x for x in branch if x not in adj]:
        del branch[x]
    sets = sorted((frozenset(b) for b in branch.values()), key=lambda s: sorted(map(_sort_key, s)))
    witness = K4Witness(tuple(sets))  # type: ignore[arg-type]
    if not verify_k4_witness(g, witness):  # pragma: no cover - guarded invariant
        raise AssertionError(f"extracted K4 witness failed verification: {witness}")
    return witness


def verify_k4_witness(g: Any, witness: K4Witness) -> bool:
    """Check disjointness, connectivity of each branch set, and all six cross edges."""
    vertices, edges = _as_edges(g)
    adj = _adjacency(vertices, edges.values())
    sets = [set(s) for s in witness.branch_sets]
    if len(sets) != 4 or any(not s for s in sets):
        return False
    if len(set().union(*sets)) != sum(len(s) for s in sets):
        return False
    for s in sets:
        if not s <= adj.keys():
            return False
        start = next(iter(s))
        seen = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w in s and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != s:
            return False
    for i in range(4):
        for j in range(i + 1, 4):
            if not any(adj[x] & sets[j] for x in sets[i]):
                return False
    return True
