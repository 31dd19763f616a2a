"""Build frozen instances on which the construction takes Case II or Case III-edge.

With lexicographic tie-breaking of face pairs, random restriction corpora
almost always resolve through a taxon on the shared path.  The two other
separator shapes are built directly:

* leaf separator: a taxon ``u`` of a random tree together with restrictions
  to ``u`` plus taxa from each side of ``u``'s neighbour;
* edge separator: a random tree cut at an inner edge, together with its
  restrictions to the two cross sides.

Taxa are then renamed (the separator taxon first, for the leaf shape) and
tree orders permuted until the recorded case trace contains the target
case.  Output lines are ``<case label><TAB><newick> <newick> ...``.
"""

from __future__ import annotations

import argparse
import itertools
import random

from supertree_tw.algo import CaseLabel, supertree_tw2
from supertree_tw.dgraph import build_display, cleanup
from supertree_tw.phylo import PhyloTree, random_binary_tree, relabel, restrict, write_newick
from supertree_tw.tw2 import is_tw_le_2


def branches(tree: PhyloTree, v: int) -> dict[int, frozenset[str]]:
    """Taxa behind each neighbour of ``v``."""
    out = {}
    for w in tree.neighbors(v):
        seen, stack, taxa = {v, w}, [w], set()
        while stack:
            x = stack.pop()
            if tree.label(x) is not None:
                taxa.add(tree.label(x))
            for y in tree.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        out[w] = frozenset(taxa)
    return out


def leaf_shape(rng: random.Random) -> tuple[list[PhyloTree], str] | None:
    n = rng.randint(7, 11)
    pool = [f"t{i}" for i in range(n)]
    big = random_binary_tree(pool, rng)
    u = rng.choice(pool)
    leaf = big.leaf(u)
    hub = big.neighbors(leaf)[0]
    y1, y2 = [taxa for w, taxa in branches(big, hub).items() if w != leaf]
    if len(y1) < 3 or len(y2) < 3:
        return None
    cross = {u} | set(rng.sample(sorted(y1), rng.randint(1, len(y1)))) | set(rng.sample(sorted(y2), rng.randint(1, len(y2))))
    trees = [restrict(big, cross)]
    trees += [restrict(big, {u} | set(rng.sample(sorted(y), rng.randint(3, len(y))))) for y in (y1, y2)]
    return trees, u


def edge_shape(rng: random.Random) -> tuple[list[PhyloTree], str] | None:
    n = rng.randint(8, 11)
    pool = [f"t{i}" for i in range(n)]
    big = random_binary_tree(pool, rng)
    inner = [(a, b) for a, b in big.edges() if big.label(a) is None and big.label(b) is None]
    if not inner:
        return None
    u, v = rng.choice(inner)
    bu = [t for w, t in branches(big, u).items() if w != v]
    bv = [t for w, t in branches(big, v).items() if w != u]
    x1, x2 = bu[0] | bv[0], bu[1] | bv[1]
    if len(x1) < 4 or len(x2) < 4:
        return None
    return [big, restrict(big, x1), restrict(big, x2)], ""


def hunt(shape: str, count: int, seed: int, tries: int = 30) -> list[list[str]]:
    rng = random.Random(seed)
    target = CaseLabel.CASE_II if shape == "leaf" else CaseLabel.CASE_III_EDGE
    make = leaf_shape if shape == "leaf" else edge_shape
    found: list[list[str]] = []
    seen: set[tuple[str, ...]] = set()
    while len(found) < count:
        made = make(rng)
        if made is None:
            continue
        trees, first = made
        if any(t.n_leaves < 4 for t in trees) or not is_tw_le_2(cleanup(build_display(trees))[0])[0]:
            continue
        taxa = sorted(set().union(*(t.taxa for t in trees)) - {first})
        for _ in range(tries):
            names = [f"x{i:02d}" for i in range(1, len(taxa) + 1)]
            rng.shuffle(names)
            mapping = dict(zip(taxa, names))
            if first:
                mapping[first] = "x00"
            renamed = [relabel(t, mapping) for t in trees]
            hit = None
            for order in itertools.permutations(renamed):
                res = supertree_tw2(list(order))
                if any(label == target.value for _, label, _ in res.case_trace):
                    hit = [write_newick(t) for t in order]
                    break
            if hit is not None:
                key = tuple(sorted(hit))
                if key not in seen:
                    seen.add(key)
                    found.append(hit)
                break
    return found


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=60)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("-o", "--output", default="tests/fixtures/case_fixtures.txt")
    args = ap.parse_args()
    lines = []
    for shape, label in (("leaf", CaseLabel.CASE_II), ("edge", CaseLabel.CASE_III_EDGE)):
        for trees in hunt(shape, args.count, args.seed):
            lines.append(f"{label.value}\t{' '.join(trees)}")
    with open(args.output, "w") as fh:
        fh.write("# generated by scripts/find_case_fixtures.py; one instance per line\n")
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} instances to {args.output}")


if __name__ == "__main__":
    main()
