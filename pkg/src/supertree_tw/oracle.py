"""Exhaustive ground truth for small instances.

Nothing here is used by the supertree construction itself; these are the
references it is tested against.  Tree enumeration and the compatibility
search work on split bitmasks (each edge stored as the set of taxa on the
side away from the first taxon), exact treewidth on vertex bitmasks.
"""

from __future__ import annotations

from typing import Any, Iterable, Iterator, Sequence

from .phylo import PhyloTree
from .tw2 import _as_edges

__all__ = [
    "MAX_ORACLE_TAXA",
    "MAX_TREEWIDTH_VERTICES",
    "brute_force_compatible",
    "double_factorial",
    "enumerate_binary_trees",
    "exact_treewidth",
    "tree_from_masks",
]

MAX_ORACLE_TAXA = 9
MAX_TREEWIDTH_VERTICES = 20


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _mask_systems(n: int) -> Iterator[list[int]]:
    """Every unrooted binary tree on taxa 0..n-1 as a list of edge masks."""
    start = [0b110, 0b010, 0b100]  # pendant edges of taxa 0, 1, 2

    def grow(masks: list[int], taxon: int) -> Iterator[list[int]]:
        if taxon == n:
            yield masks
            return
        bit = 1 << taxon
        for i, below in enumerate(masks):
            nxt = []
            for j, m in enumerate(masks):
                if j == i:
                    nxt.append(below | bit)
                elif below & m == below:  # edge i hangs below edge j
                    nxt.append(m | bit)
                else:
                    nxt.append(m)
            nxt.append(below)
            nxt.append(bit)
            yield from grow(nxt, taxon + 1)

    yield from grow(start, 3)


def tree_from_masks(taxa: Sequence[str], masks: Iterable[int]) -> PhyloTree:
    """Build the tree whose edges induce the given splits (masks exclude taxon 0)."""
    masks = sorted(set(masks), key=lambda m: (bin(m).count("1"), m))
    full = (1 << len(taxa)) - 1
    # one vertex per edge mask (its lower endpoint) plus the leaf of taxon 0
    node_of = {m: i + 1 for i, m in enumerate(masks)}
    edges = []
    for m in masks:
        parents = [p for p in masks if p != m and p & m == m]
        parent = min(parents, key=lambda p: bin(p).count("1")) if parents else None
        edges.append((node_of[m], node_of[parent] if parent is not None else 0))
    labels = {0: taxa[0]}
    for m in masks:
        if m & (m - 1) == 0 and m != full:
            labels[node_of[m]] = taxa[m.bit_length() - 1]
    return PhyloTree.from_edges(edges, labels)


def enumerate_binary_trees(taxa: Iterable[str]) -> Iterator[PhyloTree]:
    """Each unrooted binary topology on ``taxa`` exactly once.

    Built by inserting taxa in sorted order onto every edge of every smaller
    tree, so there are ``(2n-5)!!`` trees and the order is reproducible.
    """
    names = sorted(set(taxa))
    if not 3 <= len(names) <= MAX_ORACLE_TAXA:
        raise ValueError(f"enumeration needs 3..{MAX_ORACLE_TAXA} taxa, got {len(names)}")
    for masks in _mask_systems(len(names)):
        yield tree_from_masks(names, masks)


def _small_tree(names: Sequence[str]) -> PhyloTree:
    if len(names) == 1:
        return PhyloTree.from_edges([], {0: names[0]})
    return PhyloTree.from_edges([(i, len(names)) for i in range(len(names))], dict(enumerate(names)))


def brute_force_compatible(trees: Sequence[PhyloTree]) -> PhyloTree | None:
    """First enumerated tree displaying every input tree, or None.

    Display is tested on split masks: a binary tree ``S`` displays a binary
    tree ``T`` on ``Y`` iff every nontrivial split of ``T`` is the
    restriction to ``Y`` of some split of ``S``.
    """
    if not trees:
        raise ValueError("empty instance")
    names = sorted(set().union(*(t.taxa for t in trees)))
    if len(names) > MAX_ORACLE_TAXA:
        raise ValueError(f"oracle ceiling is {MAX_ORACLE_TAXA} taxa, instance has {len(names)}")
    if any(not t.is_binary() for t in trees):
        raise ValueError("brute-force compatibility expects binary trees")
    if len(names) <= 3:
        return _small_tree(names)
    bit = {x: 1 << i for i, x in enumerate(names)}

    constraints = []
    for t in trees:
        if t.n_leaves < 4:
            continue
        ymask = sum(bit[x] for x in t.taxa)
        low = ymask & -ymask
        wanted = set()
        for sp in t.split_set():
            if sp.is_trivial:
                continue
            m = sum(bit[x] for x in sp.side_a)
            wanted.add(ymask ^ m if m & low else m)
        constraints.append((ymask, low, wanted))

    for masks in _mask_systems(len(names)):
        ok = True
        for ymask, low, wanted in constraints:
            have = set()
            for m in masks:
                r = m & ymask
                if r and r != ymask:
                    have.add(ymask ^ r if r & low else r)
            if not wanted <= have:
                ok = False
                break
        if ok:
            return tree_from_masks(names, masks)
    return None


# ---------------------------------------------------------------------------
# Exact treewidth
# ---------------------------------------------------------------------------


def _popcount(x: int) -> int:
    return bin(x).count("1")


def exact_treewidth(g: Any) -> int:
    """Exact treewidth by search over elimination orderings.

    ``tw <= k`` is decided by depth-first search over the set of eliminated
    vertices, memoising sets that cannot be completed; a vertex may be
    eliminated when its degree in the current elimination graph is at most
    ``k``.  Vertices of elimination degree <= 1 are eliminated without
    branching.  Limited to :data:`MAX_TREEWIDTH_VERTICES` vertices.
    """
    vertices, edges = _as_edges(g)
    n = len(vertices)
    if n > MAX_TREEWIDTH_VERTICES:
        raise ValueError(f"exact treewidth is limited to {MAX_TREEWIDTH_VERTICES} vertices, graph has {n}")
    if not edges:
        return 0
    index = {v: i for i, v in enumerate(vertices)}
    adj = [0] * n
    for u, v in edges.values():
        adj[index[u]] |= 1 << index[v]
        adj[index[v]] |= 1 << index[u]
    full = (1 << n) - 1

    def q_set(eliminated: int, v: int) -> int:
        comp = frontier = 1 << v
        reach = 0
        while frontier:
            nb = 0
            f = frontier
            while f:
                low = f & -f
                nb |= adj[low.bit_length() - 1]
                f ^= low
            reach |= nb
            frontier = nb & eliminated & ~comp
            comp |= frontier
        return reach & ~eliminated & ~(1 << v)

    def upper_bound() -> int:
        eliminated, width = 0, 0
        for _ in range(n):
            best = min((v for v in range(n) if not eliminated >> v & 1), key=lambda v: _popcount(q_set(eliminated, v)))
            width = max(width, _popcount(q_set(eliminated, best)))
            eliminated |= 1 << best
        return width

    def feasible(k: int) -> bool:
        failed: set[int] = set()

        def dfs(eliminated: int) -> bool:
            remaining = full & ~eliminated
            if _popcount(remaining) <= k + 1:
                return True
            if eliminated in failed:
                return False
            options = []
            r = remaining
            while r:
                low = r & -r
                v = low.bit_length() - 1
                r ^= low
                d = _popcount(q_set(eliminated, v))
                if d <= 1:
                    options = [v]
                    break
                if d <= k:
                    options.append(v)
            for v in options:
                if dfs(eliminated | 1 << v):
                    return True
            failed.add(eliminated)
            return False

        return dfs(0)

    ub = upper_bound()
    for k in range(1, ub):
        if feasible(k):
            return k
    return ub

