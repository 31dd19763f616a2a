"""Display graphs of tree sets and the cleanup procedure.

A display graph is the disjoint union of the input trees with equally
labelled leaves identified.  Every edge remembers the index of the tree it
came from; every internal vertex belongs to exactly one tree.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .phylo import PhyloTree

__all__ = [
    "CleanupTrace",
    "DisplayGraph",
    "RemovedTaxon",
    "RemovedTree",
    "SuppressedInternal",
    "build_display",
    "cleanup",
    "components",
    "replay_cleanup",
    "to_dot",
]


class DisplayGraph:
    """Simple graph with per-vertex origin and per-edge tree ownership.

    Taxon vertices carry a label; internal vertices carry the index of their
    tree.  Edge ids are stable across cleanup so traces can refer to them.
    """

    __slots__ = ("_labels", "_owner", "_edges", "_inc", "_by_label")

    def __init__(self, labels: dict[int, str], owner: dict[int, int], edges: dict[int, tuple[int, int, int]]):
        self._labels = labels
        self._owner = owner
        self._edges = edges
        self._inc: dict[int, set[int]] = {v: set() for v in (*labels, *owner)}
        for e, (u, v, _) in edges.items():
            self._inc[u].add(e)
            self._inc[v].add(e)
        self._by_label = {lab: v for v, lab in labels.items()}

    # -- vertices ----------------------------------------------------------

    def vertices(self) -> list[int]:
        return sorted(self._inc)

    @property
    def n_vertices(self) -> int:
        return len(self._inc)

    def __contains__(self, v: int) -> bool:
        return v in self._inc

    def is_taxon(self, v: int) -> bool:
        return v in self._labels

    def label(self, v: int) -> str | None:
        return self._labels.get(v)

    def taxon_vertex(self, label: str) -> int:
        return self._by_label[label]

    def internal_tree(self, v: int) -> int:
        return self._owner[v]

    def origin(self, v: int) -> tuple[frozenset[int], str | None]:
        """``(tree indices, label)``; label is None for internal vertices."""
        if v in self._owner:
            return frozenset({self._owner[v]}), None
        return frozenset(self._edges[e][2] for e in self._inc[v]), self._labels[v]

    def taxa(self) -> frozenset[str]:
        return frozenset(self._by_label)

    def describe(self, v: int) -> str:
        """Stable human-readable name: the taxon label, or ``T<tree>.<id>``."""
        lab = self._labels.get(v)
        return lab if lab is not None else f"T{self._owner[v]}.{v}"

    # -- edges -------------------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def edges(self) -> dict[int, tuple[int, int, int]]:
        """Edge id -> (u, v, tree index)."""
        return dict(self._edges)

    def edge(self, e: int) -> tuple[int, int, int]:
        return self._edges[e]

    def edge_pairs(self) -> list[tuple[int, int]]:
        return [(u, v) for u, v, _ in self._edges.values()]

    def incident(self, v: int) -> frozenset[int]:
        return frozenset(self._inc[v])

    def degree(self, v: int) -> int:
        return len(self._inc[v])

    def neighbors(self, v: int) -> list[int]:
        out = []
        for e in self._inc[v]:
            a, b, _ = self._edges[e]
            out.append(b if a == v else a)
        return sorted(out)

    # -- trees -------------------------------------------------------------

    def tree_indices(self) -> list[int]:
        return sorted({t for _, _, t in self._edges.values()} | set(self._owner.values()))

    def tree_taxa(self, index: int) -> frozenset[str]:
        return frozenset(
            self._labels[x] for u, v, t in self._edges.values() if t == index for x in (u, v) if x in self._labels
        )

    def trees(self) -> dict[int, PhyloTree]:
        """Reconstruct each tree still present in the graph from its edges."""
        by_tree: dict[int, list[tuple[int, int]]] = {}
        for u, v, t in self._edges.values():
            by_tree.setdefault(t, []).append((u, v))
        out = {}
        for t in sorted(by_tree):
            pairs = by_tree[t]
            labels = {x: self._labels[x] for p in pairs for x in p if x in self._labels}
            out[t] = PhyloTree.from_edges(pairs, labels)
        return out

    def __repr__(self) -> str:
        return f"DisplayGraph(|V|={self.n_vertices}, |E|={self.n_edges}, trees={self.tree_indices()})"


def build_display(trees: Sequence[PhyloTree]) -> DisplayGraph:
    """Union of ``trees`` with identical taxa identified.

    Taxa get ids 0..m-1 in label order; internal vertices follow tree by tree.
    """
    if not trees:
        raise ValueError("display graph of an empty tree list")
    taxa = sorted(set().union(*(t.taxa for t in trees)))
    labels = dict(enumerate(taxa))
    by_label = {lab: v for v, lab in labels.items()}
    owner: dict[int, int] = {}
    edges: dict[int, tuple[int, int, int]] = {}
    next_id = len(taxa)
    for i, tree in enumerate(trees):
        local = {}
        for v in tree.vertices():
            lab = tree.label(v)
            if lab is not None:
                local[v] = by_label[lab]
            else:
                local[v] = next_id
                owner[next_id] = i
                next_id += 1
        for u, v in tree.edges():
            edges[len(edges)] = (local[u], local[v], i)
    return DisplayGraph(labels, owner, edges)


# ---------------------------------------------------------------------------
# Cleanup
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RemovedTaxon:
    """A taxon of degree <= 1 was deleted; ``tree`` is the tree it still belonged to."""

    label: str
    tree: int | None


@dataclass(frozen=True)
class SuppressedInternal:
    vertex: int
    tree: int


@dataclass(frozen=True)
class RemovedTree:
    """A tree with fewer than four surviving taxa was deleted."""

    tree: int


CleanupEvent = Union[RemovedTaxon, SuppressedInternal, RemovedTree]


@dataclass(frozen=True)
class CleanupTrace:
    events: tuple[CleanupEvent, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


class _Scratch:
    """Mutable working copy of a display graph used by cleanup and replay."""

    def __init__(self, d: DisplayGraph):
        self.labels = {v: d.label(v) for v in d.vertices() if d.is_taxon(v)}
        self.owner = {v: d.internal_tree(v) for v in d.vertices() if not d.is_taxon(v)}
        self.edges = d.edges()
        self.inc = {v: set(d.incident(v)) for v in d.vertices()}
        self.by_label = {lab: v for v, lab in self.labels.items()}
        self.tree_taxa: dict[int, set[int]] = {}
        for u, v, t in self.edges.values():
            bucket = self.tree_taxa.setdefault(t, set())
            bucket.update(x for x in (u, v) if x in self.labels)
        for t in self.owner.values():
            self.tree_taxa.setdefault(t, set())

    def other(self, e: int, v: int) -> int:
        a, b, _ = self.edges[e]
        return b if a == v else a

    def remove_edge(self, e: int) -> None:
        u, v, _ = self.edges.pop(e)
        self.inc[u].discard(e)
        self.inc[v].discard(e)

    def remove_taxon(self, v: int) -> tuple[int | None, int | None]:
        """Delete taxon ``v``; returns (its tree, its former neighbour)."""
        tree = nbr = None
        for e in list(self.inc[v]):
            nbr = self.other(e, v)
            tree = self.edges[e][2]
            self.remove_edge(e)
            self.tree_taxa[tree].discard(v)
        del self.inc[v]
        del self.by_label[self.labels.pop(v)]
        return tree, nbr

    def suppress(self, w: int) -> tuple[int, int] | None:
        """Merge the two edges at internal vertex ``w``; returns endpoints if a duplicate edge was dropped."""
        e1, e2 = sorted(self.inc[w])
        tree = self.owner[w]
        x, y = self.other(e1, w), self.other(e2, w)
        self.remove_edge(e1)
        self.remove_edge(e2)
        del self.inc[w]
        del self.owner[w]
        if any(self.other(e, x) == y for e in self.inc[x]):
            return x, y
        self.edges[e1] = (x, y, tree)
        self.inc[x].add(e1)
        self.inc[y].add(e1)
        return None

    def remove_tree(self, t: int) -> set[int]:
        """Delete tree ``t``'s edges and internal vertices; returns affected taxa."""
        touched = set()
        for e in [e for e, (_, _, tt) in self.edges.items() if tt == t]:
            u, v, _ = self.edges[e]
            touched.update(x for x in (u, v) if x in self.labels)
            self.remove_edge(e)
        for v in [v for v, tt in self.owner.items() if tt == t]:
            del self.inc[v]
            del self.owner[v]
        del self.tree_taxa[t]
        return touched

    def freeze(self) -> DisplayGraph:
        return DisplayGraph(dict(self.labels), dict(self.owner), dict(self.edges))


def cleanup(d: DisplayGraph, order: str = "lowest") -> tuple[DisplayGraph, CleanupTrace]:
    """Run the cleanup procedure to its fixed point.

    Repeatedly: delete trees with fewer than four taxa (highest priority),
    delete taxa of degree <= 1, and suppress the internal vertex left with
    degree 2 by a deletion.  ``order`` picks which pending taxon goes next:
    ``"lowest"`` id, ``"queue"`` (FIFO) or ``"stack"`` (LIFO).
    """
    if order not in ("lowest", "queue", "stack"):
        raise ValueError(f"unknown order {order!r}")
    g = _Scratch(d)
    events: list[CleanupEvent] = []

    pending_trees: list[int] = []
    pending: deque[int] = deque()
    heap: list[int] = []
    queued: set[int] = set()

    def push_taxon(v: int) -> None:
        if v in g.labels and v not in queued and len(g.inc[v]) <= 1:
            queued.add(v)
            if order == "lowest":
                heapq.heappush(heap, v)
            else:
                pending.append(v)

    def pop_taxon() -> int:
        if order == "lowest":
            return heapq.heappop(heap)
        return pending.popleft() if order == "queue" else pending.pop()

    def check_tree(t: int | None) -> None:
        if t is not None and t in g.tree_taxa and len(g.tree_taxa[t]) < 4 and t not in pending_trees:
            heapq.heappush(pending_trees, t)

    for t in sorted(g.tree_taxa):
        check_tree(t)
    for v in sorted(g.labels):
        push_taxon(v)

    while pending_trees or heap or pending:
        if pending_trees:
            t = heapq.heappop(pending_trees)
            touched = g.remove_tree(t)
            events.append(RemovedTree(t))
            for v in sorted(touched):
                push_taxon(v)
            continue
        v = pop_taxon()
        queued.discard(v)
        if v not in g.labels or len(g.inc[v]) > 1:
            continue
        label = g.labels[v]
        tree, w = g.remove_taxon(v)
        events.append(RemovedTaxon(label, tree))
        if w is None:
            continue
        if w in g.owner and len(g.inc[w]) == 2:
            dup = g.suppress(w)
            events.append(SuppressedInternal(w, tree))
            if dup is not None:
                for x in dup:
                    push_taxon(x)
        elif w in g.labels:
            push_taxon(w)
        check_tree(tree)

    return g.freeze(), CleanupTrace(tuple(events))


def replay_cleanup(d: DisplayGraph, trace: CleanupTrace) -> DisplayGraph:
    """Apply recorded cleanup events to ``d`` in order."""
    g = _Scratch(d)
    for ev in trace:
        if isinstance(ev, RemovedTree):
            g.remove_tree(ev.tree)
        elif isinstance(ev, RemovedTaxon):
            g.remove_taxon(g.by_label[ev.label])
        else:
            g.suppress(ev.vertex)
    return g.freeze()


def components(d: DisplayGraph) -> list[DisplayGraph]:
    """Connected components, ordered by smallest vertex id."""
    seen: set[int] = set()
    out = []
    for s in d.vertices():
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            for w in d.neighbors(stack.pop()):
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        out.append(induced(d, comp))
    return out


def induced(d: DisplayGraph, keep: Iterable[int]) -> DisplayGraph:
    keep = set(keep)
    labels = {v: d.label(v) for v in keep if d.is_taxon(v)}
    owner = {v: d.internal_tree(v) for v in keep if not d.is_taxon(v)}
    edges = {e: (u, v, t) for e, (u, v, t) in d.edges().items() if u in keep and v in keep}
    return DisplayGraph(labels, owner, edges)


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f")


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(d: DisplayGraph, name: str = "display", edge_notes: dict[int, str] | None = None) -> str:
    """Graphviz source: taxa as boxes, internal vertices as circles, colours by tree."""
    lines = [f"graph {name} {{"]
    for v in d.vertices():
        if d.is_taxon(v):
            lines.append(f"  v{v} [shape=box, label={_dot_id(d.label(v))}];")
        else:
            colour = _PALETTE[d.internal_tree(v) % len(_PALETTE)]
            lines.append(f'  v{v} [shape=circle, label="", width=0.15, style=filled, fillcolor="{colour}"];')
    for e, (u, v, t) in sorted(d.edges().items()):
        colour = _PALETTE[t % len(_PALETTE)]
        attrs = [f'color="{colour}"', f'tree="{t}"']
        if edge_notes and e in edge_notes:
            attrs.append(f"label={_dot_id(edge_notes[e])}")
        lines.append(f"  v{u} -- v{v} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
