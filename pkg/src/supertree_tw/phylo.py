"""Unrooted phylogenetic trees: Newick I/O, restriction, splits, quartets.

Trees are kept in suppressed form: every labelled vertex is a leaf and no
unlabelled vertex has degree 2.  Vertex ids are dense integers assigned at
construction; taxa are plain strings, so identifying a taxon across trees is
string equality.
"""

from __future__ import annotations

import itertools
import random
import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

__all__ = [
    "NewickError",
    "PhyloTree",
    "Quartet",
    "Split",
    "displays",
    "parse_newick",
    "quartet_set",
    "random_binary_tree",
    "relabel",
    "quartet_topology",
    "read_newick_file",
    "restrict",
    "splits",
    "write_newick",
]

_BARE_LABEL = re.compile(r"[A-Za-z0-9_.|\-]+")


class NewickError(ValueError):
    """Malformed Newick input.  ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        self.message = message
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"col {position + 1}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


# ---------------------------------------------------------------------------
# Core types
# ---------------------------------------------------------------------------


class PhyloTree:
    """An unrooted phylogenetic tree with bijectively labelled leaves.

    Build one with :func:`parse_newick` or :meth:`from_edges`; instances are
    not meant to be mutated.  Equality is label-isomorphism (same taxa and
    same split set), so two trees drawn differently compare equal.
    """

    __slots__ = ("_adj", "_labels", "_leaf", "_splits")

    def __init__(self, adj: tuple[tuple[int, ...], ...], labels: Mapping[int, str]):
        self._adj = adj
        self._labels = dict(labels)
        self._leaf = {lab: v for v, lab in self._labels.items()}
        self._splits: frozenset[Split] | None = None

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], labels: Mapping[int, str]) -> "PhyloTree":
        """Normalise an arbitrary tree given by edges and leaf labels.

        Unlabelled leaves are pruned and unlabelled degree-2 vertices
        suppressed.  Labels on vertices of degree >= 2 are rejected.
        """
        adj: dict[int, set[int]] = {v: set() for v in labels}
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        return _normalise(adj, dict(labels))

    # -- basic accessors ---------------------------------------------------

    @property
    def taxa(self) -> frozenset[str]:
        return frozenset(self._leaf)

    @property
    def n_leaves(self) -> int:
        return len(self._leaf)

    @property
    def n_vertices(self) -> int:
        return len(self._adj)

    def vertices(self) -> range:
        return range(len(self._adj))

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def label(self, v: int) -> str | None:
        return self._labels.get(v)

    def leaf(self, taxon: str) -> int:
        return self._leaf[taxon]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(len(self._adj)) for v in self._adj[u] if u < v]

    def is_binary(self) -> bool:
        return all(len(nb) == 3 for v, nb in enumerate(self._adj) if v not in self._labels)

    def internal_vertices(self) -> list[int]:
        return [v for v in range(len(self._adj)) if v not in self._labels]

    def adjacency(self) -> dict[int, set[int]]:
        """A fresh mutable copy of the adjacency, for building derived trees."""
        return {v: set(nb) for v, nb in enumerate(self._adj)}

    def labels(self) -> dict[int, str]:
        return dict(self._labels)

    # -- comparison --------------------------------------------------------

    def split_set(self) -> frozenset["Split"]:
        if self._splits is None:
            self._splits = frozenset(Split.of(side, self.taxa - side) for _, _, side in _edge_sides(self))
        return self._splits

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhyloTree):
            return NotImplemented
        return self.taxa == other.taxa and self.split_set() == other.split_set()

    def __hash__(self) -> int:
        return hash((self.taxa, self.split_set()))

    def __repr__(self) -> str:
        return f"PhyloTree({write_newick(self)!r})"


@dataclass(frozen=True, order=True)
class Split:
    """A bipartition ``side_a | side_b``; ``side_a`` holds the smallest taxon."""

    side_a: frozenset[str]
    side_b: frozenset[str]

    @classmethod
    def of(cls, a: Iterable[str], b: Iterable[str]) -> "Split":
        a, b = frozenset(a), frozenset(b)
        if not a or not b:
            raise ValueError("both sides of a split must be nonempty")
        if a & b:
            raise ValueError(f"split sides overlap: {sorted(a & b)}")
        if min(b) < min(a):
            a, b = b, a
        return cls(a, b)

    @property
    def is_trivial(self) -> bool:
        return len(self.side_a) < 2 or len(self.side_b) < 2

    def restricted(self, taxa: frozenset[str]) -> "Split | None":
        a, b = self.side_a & taxa, self.side_b & taxa
        return Split.of(a, b) if a and b else None

    def __str__(self) -> str:
        return f"{','.join(sorted(self.side_a))}|{','.join(sorted(self.side_b))}"


@dataclass(frozen=True, order=True)
class Quartet:
    """Quartet topology ``ab|cd`` in canonical (sorted) form."""

    pair_1: tuple[str, str]
    pair_2: tuple[str, str]

    @classmethod
    def of(cls, a: str, b: str, c: str, d: str) -> "Quartet":
        if len({a, b, c, d}) != 4:
            raise ValueError(f"quartet needs four distinct taxa, got {a, b, c, d}")
        p1, p2 = tuple(sorted((a, b))), tuple(sorted((c, d)))
        if p2 < p1:
            p1, p2 = p2, p1
        return cls(p1, p2)

    @property
    def taxa(self) -> frozenset[str]:
        return frozenset(self.pair_1 + self.pair_2)

    def __str__(self) -> str:
        sep = "" if all(len(x) == 1 for x in self.pair_1 + self.pair_2) else ","
        return f"{sep.join(self.pair_1)}|{sep.join(self.pair_2)}"


# ---------------------------------------------------------------------------
# Normalisation
# ---------------------------------------------------------------------------


def _normalise(adj: dict[int, set[int]], labels: dict[int, str]) -> PhyloTree:
    """Prune unlabelled leaves, suppress unlabelled degree-2 vertices, renumber."""
    if not labels:
        raise ValueError("a phylogenetic tree needs at least one leaf")
    seen_labels: set[str] = set()
    for lab in labels.values():
        if lab in seen_labels:
            raise ValueError(f"duplicate taxon label {lab!r}")
        seen_labels.add(lab)

    n_edges = sum(len(nb) for nb in adj.values()) // 2
    if n_edges != len(adj) - 1 or not _connected(adj):
        raise ValueError("edges do not form a tree")

    queue = deque(v for v in adj if v not in labels and len(adj[v]) <= 1)
    while queue:
        v = queue.popleft()
        if v not in adj or len(adj[v]) > 1:
            continue
        for w in adj.pop(v):
            adj[w].discard(v)
            if w not in labels and len(adj[w]) <= 1:
                queue.append(w)

    for v in [v for v in adj if v not in labels and len(adj[v]) == 2]:
        x, y = adj.pop(v)
        adj[x].discard(v)
        adj[y].discard(v)
        adj[x].add(y)
        adj[y].add(x)

    if len(adj) > 1:
        bad = [labels[v] for v in labels if len(adj[v]) != 1]
        if bad:
            raise ValueError(f"labelled vertices must be leaves: {sorted(bad)}")

    # leaves first in label order, then internal vertices in BFS order from them
    leaves = sorted(labels, key=labels.__getitem__)
    order = list(leaves)
    placed = set(order)
    queue = deque(order)
    while queue:
        v = queue.popleft()
        for w in sorted(adj[v], key=lambda x: (x in labels, x)):
            if w not in placed:
                placed.add(w)
                order.append(w)
                queue.append(w)
    new_id = {v: i for i, v in enumerate(order)}
    new_adj = tuple(tuple(sorted(new_id[w] for w in adj[v])) for v in order)
    return PhyloTree(new_adj, {new_id[v]: labels[v] for v in labels})


def _connected(adj: Mapping[int, Iterable[int]]) -> bool:
    if not adj:
        return True
    start = next(iter(adj))
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def _edge_sides(tree: PhyloTree) -> list[tuple[int, int, frozenset[str]]]:
    """For every edge (child, parent) of ``tree`` rooted at vertex 0, the taxa below child."""
    if tree.n_vertices < 2:
        return []
    parent = {0: -1}
    order = [0]
    for v in order:
        for w in tree.neighbors(v):
            if w not in parent:
                parent[w] = v
                order.append(w)
    below: dict[int, frozenset[str]] = {}
    out = []
    for v in reversed(order):
        lab = tree.label(v)
        acc = {lab} if lab is not None else set()
        for w in tree.neighbors(v):
            if parent.get(w) == v:
                acc |= below[w]
        below[v] = frozenset(acc)
        if v != 0:
            out.append((v, parent[v], below[v]))
    out.reverse()
    return out


# ---------------------------------------------------------------------------
# Newick
# ---------------------------------------------------------------------------


class _NewickParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.adj: dict[int, set[int]] = {}
        self.labels: dict[int, str] = {}
        self.first_seen: dict[str, int] = {}

    def error(self, message: str, pos: int | None = None) -> NewickError:
        return NewickError(message, self.pos if pos is None else pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def new_vertex(self) -> int:
        v = len(self.adj)
        self.adj[v] = set()
        return v

    def parse(self) -> PhyloTree:
        self.subtree()
        if self.peek() != ";":
            raise self.error("expected ';'" if self.peek() else "missing terminating ';'")
        self.pos += 1
        if self.peek():
            raise self.error("trailing characters after ';'")
        if not self.labels:
            raise self.error("tree has no leaves", 0)
        try:
            return _normalise(self.adj, self.labels)
        except ValueError as exc:  # pragma: no cover - parser only builds trees
            raise NewickError(str(exc)) from exc

    def subtree(self) -> int:
        v = self.new_vertex()
        if self.peek() == "(":
            self.pos += 1
            while True:
                child = self.subtree()
                self.adj[v].add(child)
                self.adj[child].add(v)
                c = self.peek()
                if c == ",":
                    self.pos += 1
                elif c == ")":
                    self.pos += 1
                    break
                else:
                    raise self.error(f"expected ',' or ')' but found {c!r}" if c else "unexpected end of input")
            self.label()  # internal labels are parsed and dropped
        else:
            start = self.pos
            lab = self.label()
            if lab is None:
                c = self.peek()
                raise self.error(f"expected a taxon label but found {c!r}" if c else "unexpected end of input")
            if lab in self.first_seen:
                raise NewickError(f"duplicate taxon label {lab!r}", start)
            self.first_seen[lab] = start
            self.labels[v] = lab
        self.length()
        return v

    def label(self) -> str | None:
        c = self.peek()
        if c == "'":
            start = self.pos
            self.pos += 1
            chars = []
            while True:
                if self.pos >= len(self.text):
                    raise self.error("unterminated quoted label", start)
                ch = self.text[self.pos]
                if ch == "'":
                    if self.text.startswith("''", self.pos):
                        chars.append("'")
                        self.pos += 2
                        continue
                    self.pos += 1
                    break
                chars.append(ch)
                self.pos += 1
            if not chars:
                raise self.error("empty quoted label", start)
            return "".join(chars)
        m = _BARE_LABEL.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return m.group()
        return None

    def length(self) -> None:
        if self.peek() != ":":
            return
        self.pos += 1
        self.skip_ws()
        m = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?").match(self.text, self.pos)
        if not m:
            raise self.error("malformed branch length")
        self.pos = m.end()


def parse_newick(text: str) -> PhyloTree:
    """Parse one Newick tree terminated by ``;``.

    Rooted input is unrooted by suppressing the root; branch lengths and
    internal node labels are accepted and discarded.

    >>> sorted(parse_newick("((a,b),(c,d));").taxa)
    ['a', 'b', 'c', 'd']
    """
    return _NewickParser(text).parse()


def _quote(label: str) -> str:
    if _BARE_LABEL.fullmatch(label):
        return label
    return "'" + label.replace("'", "''") + "'"


def write_newick(tree: PhyloTree) -> str:
    """Deterministic Newick string; children are ordered by their smallest taxon."""
    if tree.n_vertices == 1:
        return _quote(tree.label(0)) + ";"
    if tree.n_vertices == 2:
        a, b = sorted(tree.taxa)
        return f"({_quote(a)},{_quote(b)});"
    # root at the internal neighbour of the smallest taxon (vertex 0)
    root = tree.neighbors(0)[0]

    min_below: dict[tuple[int, int], str] = {}

    def smallest(v: int, parent: int) -> str:
        key = (v, parent)
        if key not in min_below:
            lab = tree.label(v)
            if lab is not None:
                min_below[key] = lab
            else:
                min_below[key] = min(smallest(w, v) for w in tree.neighbors(v) if w != parent)
        return min_below[key]

    def render(v: int, parent: int) -> str:
        lab = tree.label(v)
        if lab is not None:
            return _quote(lab)
        kids = sorted((w for w in tree.neighbors(v) if w != parent), key=lambda w: smallest(w, v))
        return "(" + ",".join(render(w, v) for w in kids) + ")"

    return render(root, -1) + ";"


def read_newick_file(path: str | Path) -> list[PhyloTree]:
    """Read one tree per line; blank lines and ``#`` comments are skipped."""
    trees = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                trees.append(parse_newick(line))
            except NewickError as exc:
                raise NewickError(exc.message, exc.position, lineno) from exc
    return trees


# ---------------------------------------------------------------------------
# Restriction, splits, quartets, display
# ---------------------------------------------------------------------------


def restrict(tree: PhyloTree, taxa: Iterable[str]) -> PhyloTree:
    """``T|X'``: the subtree spanning ``taxa`` with degree-2 vertices suppressed."""
    keep = frozenset(taxa)
    if not keep:
        raise ValueError("cannot restrict to an empty taxon set")
    unknown = keep - tree.taxa
    if unknown:
        raise ValueError(f"unknown taxa: {sorted(unknown)}")
    if keep == tree.taxa:
        return tree
    labels = {v: lab for v, lab in tree.labels().items() if lab in keep}
    return _normalise(tree.adjacency(), labels)


def splits(tree: PhyloTree) -> frozenset[Split]:
    """One split per edge (trivial splits included)."""
    return tree.split_set()


def quartet_topology(tree: PhyloTree, a: str, b: str, c: str, d: str) -> Quartet | None:
    """Topology ``tree`` induces on four taxa, or None if unresolved."""
    dist = {x: _leaf_distances(tree, x) for x in (a, b, c)}
    sums = [
        (dist[a][tree.leaf(b)] + dist[c][tree.leaf(d)], (a, b, c, d)),
        (dist[a][tree.leaf(c)] + dist[b][tree.leaf(d)], (a, c, b, d)),
        (dist[a][tree.leaf(d)] + dist[b][tree.leaf(c)], (a, d, b, c)),
    ]
    sums.sort(key=lambda s: s[0])
    if sums[0][0] == sums[1][0]:
        return None
    return Quartet.of(*sums[0][1])


def _leaf_distances(tree: PhyloTree, taxon: str) -> list[int]:
    dist = [-1] * tree.n_vertices
    src = tree.leaf(taxon)
    dist[src] = 0
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for w in tree.neighbors(v):
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def quartet_set(tree: PhyloTree) -> frozenset[Quartet]:
    """All resolved quartets of ``tree`` by the four-point condition on path lengths."""
    names = sorted(tree.taxa)
    ids = [tree.leaf(x) for x in names]
    dist = {x: _leaf_distances(tree, x) for x in names}
    out = set()
    for i, j, k, m in itertools.combinations(range(len(names)), 4):
        a, b, c, d = names[i], names[j], names[k], names[m]
        da = dist[a]
        s1 = da[ids[j]] + dist[c][ids[m]]
        s2 = da[ids[k]] + dist[b][ids[m]]
        s3 = da[ids[m]] + dist[b][ids[k]]
        if s1 < s2 and s1 < s3:
            out.add(Quartet.of(a, b, c, d))
        elif s2 < s1 and s2 < s3:
            out.add(Quartet.of(a, c, b, d))
        elif s3 < s1 and s3 < s2:
            out.add(Quartet.of(a, d, b, c))
    return frozenset(out)


def displays(big: PhyloTree, small: PhyloTree) -> bool:
    """True iff ``big`` restricted to the taxa of ``small`` equals ``small``."""
    if not small.taxa <= big.taxa:
        raise ValueError(f"taxa missing from the displaying tree: {sorted(small.taxa - big.taxa)}")
    return restrict(big, small.taxa).split_set() == small.split_set()


def iter_edge_sides(tree: PhyloTree) -> Iterator[tuple[int, int, frozenset[str]]]:
    """Yield ``(child, parent, taxa below child)`` for each edge, rooted at vertex 0."""
    yield from _edge_sides(tree)


def random_binary_tree(taxa: Iterable[str], rng: random.Random) -> PhyloTree:
    """Binary tree on ``taxa`` grown by inserting taxa in random order on random edges.

    Every topology is reachable and equally likely.
    """
    order = sorted(set(taxa))
    if not order:
        raise ValueError("no taxa")
    rng.shuffle(order)
    if len(order) <= 2:
        return PhyloTree.from_edges([(0, 1)] if len(order) == 2 else [], dict(enumerate(order)))
    edges = [(0, 3), (1, 3), (2, 3)]
    labels = {0: order[0], 1: order[1], 2: order[2]}
    nxt = 4
    for name in order[3:]:
        u, v = edges.pop(rng.randrange(len(edges)))
        edges += [(u, nxt), (nxt, v), (nxt, nxt + 1)]
        labels[nxt + 1] = name
        nxt += 2
    return PhyloTree.from_edges(edges, labels)


def relabel(tree: PhyloTree, mapping: Mapping[str, str]) -> PhyloTree:
    """Same topology with every taxon renamed through ``mapping``."""
    return PhyloTree.from_edges(tree.edges(), {v: mapping[lab] for v, lab in tree.labels().items()})
