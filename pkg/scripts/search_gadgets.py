"""Search the small gadgets used by the treewidth-3 families.

Block: three restrictions of a caterpillar on ``s`` taxa whose display graph
has treewidth exactly 3, with both end taxa present.  Triple: three binary
trees that are pairwise compatible, jointly incompatible, and have a
treewidth-3 display graph on at most 20 vertices.  Prints the first hits in
a deterministic order; the results are frozen in ``supertree_tw.families``.
"""

from __future__ import annotations

import argparse
import itertools

from supertree_tw.algo import two_tree_compatible
from supertree_tw.dgraph import build_display
from supertree_tw.oracle import brute_force_compatible, enumerate_binary_trees, exact_treewidth
from supertree_tw.phylo import PhyloTree, restrict, write_newick


def caterpillar(taxa: list[str]) -> PhyloTree:
    """Caterpillar with ``taxa`` in order along the spine."""
    n = len(taxa)
    spine = list(range(n, 2 * n - 2))
    edges = [(0, spine[0]), (1, spine[0]), (n - 2, spine[-1]), (n - 1, spine[-1])]
    edges += [(i, spine[i - 1]) for i in range(2, n - 2)]
    edges += list(zip(spine, spine[1:]))
    return PhyloTree.from_edges(edges, dict(enumerate(taxa)))


def search_blocks(size: int, limit: int) -> None:
    names = [f"p{i}" for i in range(size)]
    cat = caterpillar(names)
    subsets = [c for r in range(4, size + 1) for c in itertools.combinations(range(size), r)]
    hits = 0
    for triple in itertools.combinations(subsets, 3):
        used = set().union(*triple)
        if 0 not in used or size - 1 not in used or len(used) != size:
            continue
        trees = [restrict(cat, [names[i] for i in s]) for s in triple]
        d = build_display(trees)
        if d.n_vertices > 20 or exact_treewidth(d) != 3:
            continue
        print(d.n_vertices, triple, " ".join(write_newick(t) for t in trees))
        hits += 1
        if hits >= limit:
            return


def search_triples(n_taxa: int, limit: int) -> None:
    taxa = [f"q{i}" for i in range(n_taxa)]
    pool = []
    for r in (4, 5):
        for sub in itertools.combinations(taxa, r):
            pool += list(enumerate_binary_trees(sub))
    hits = 0
    for t1, t2, t3 in itertools.combinations(pool, 3):
        if len(t1.taxa | t2.taxa | t3.taxa) != n_taxa:
            continue
        if not (two_tree_compatible(t1, t2) and two_tree_compatible(t1, t3) and two_tree_compatible(t2, t3)):
            continue
        d = build_display([t1, t2, t3])
        if d.n_vertices > 20 or brute_force_compatible([t1, t2, t3]) is not None:
            continue
        if exact_treewidth(d) != 3:
            continue
        print(d.n_vertices, write_newick(t1), write_newick(t2), write_newick(t3))
        hits += 1
        if hits >= limit:
            return


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("what", choices=("block", "triple"))
    ap.add_argument("--size", type=int, default=6)
    ap.add_argument("--limit", type=int, default=5)
    args = ap.parse_args()
    if args.what == "block":
        search_blocks(args.size, args.limit)
    else:
        search_triples(args.size, args.limit)


if __name__ == "__main__":
    main()
