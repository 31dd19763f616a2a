"""Instance generators: treewidth-3 families, the two-quartet conflict, random restrictions.

The treewidth-3 families are chains of small blocks.  A block is three
quartets cut from a caterpillar on five consecutive taxa; its display graph
has treewidth exactly 3.  Consecutive blocks share one taxon, so the display
graph of the chain is a sequence of one-vertex joins and its treewidth is
the maximum over blocks.  All trees are restrictions of one caterpillar on
every taxon, which is therefore a witness supertree for any length.

The block and the incompatible triple were found by exhaustive search
(``scripts/search_gadgets.py``) and are frozen here.
"""

from __future__ import annotations

import random
from collections.abc import Iterator
from dataclasses import dataclass
from typing import Literal

from .dgraph import build_display, cleanup
from .phylo import PhyloTree, parse_newick, random_binary_tree, relabel, restrict
from .tw2 import is_tw_le_2

__all__ = [
    "BLOCK_PATTERNS",
    "FamilySpec",
    "INCOMPATIBLE_TRIPLE",
    "caterpillar",
    "generate",
    "random_restriction_instance",
    "tw2_corpus",
    "witness_supertree",
]

Kind = Literal["compatible_tw3", "incompatible_tw3", "conflicting_quartets"]
KINDS: tuple[str, ...] = ("compatible_tw3", "incompatible_tw3", "conflicting_quartets")

# positions within a five-taxon window; the ends are shared with neighbouring blocks
BLOCK_PATTERNS: tuple[tuple[int, ...], ...] = ((0, 1, 2, 3), (0, 1, 2, 4), (0, 1, 3, 4))
BLOCK_SPAN = 4
FILLER_SPAN = 3

# pairwise compatible, jointly incompatible; "L" is the taxon shared with the chain
INCOMPATIBLE_TRIPLE: tuple[str, ...] = ("(q0,(q1,q2),q3);", "(q0,(q1,L),q2);", "(q0,(q1,q3),L);")


@dataclass(frozen=True)
class FamilySpec:
    kind: Kind
    k: int = 3

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.kind != "conflicting_quartets" and self.k < 3:
            raise ValueError(f"{self.kind} needs k >= 3, got {self.k}")


def caterpillar(taxa: list[str]) -> PhyloTree:
    """Caterpillar with ``taxa`` in order along the spine (at least three taxa)."""
    n = len(taxa)
    if n < 3:
        raise ValueError("a caterpillar needs at least three taxa")
    if n == 3:
        return PhyloTree.from_edges([(0, 3), (1, 3), (2, 3)], dict(enumerate(taxa)))
    spine = list(range(n, 2 * n - 2))
    edges = [(0, spine[0]), (1, spine[0]), (n - 2, spine[-1]), (n - 1, spine[-1])]
    edges += [(i, spine[i - 1]) for i in range(2, n - 2)]
    edges += list(zip(spine, spine[1:]))
    return PhyloTree.from_edges(edges, dict(enumerate(taxa)))


def _taxon(i: int) -> str:
    return f"c{i:02d}"


def _chain_windows(k: int) -> list[tuple[int, ...]]:
    """Taxon positions of each tree in the compatible chain of ``k`` trees."""
    windows = []
    start = 0
    for _ in range(k // 3):
        windows += [tuple(start + p for p in pattern) for pattern in BLOCK_PATTERNS]
        start += BLOCK_SPAN
    for _ in range(k % 3):
        windows.append(tuple(range(start, start + FILLER_SPAN + 1)))
        start += FILLER_SPAN
    return windows


def _chain_taxa(k: int) -> list[str]:
    last = max(max(w) for w in _chain_windows(k))
    return [_taxon(i) for i in range(last + 1)]


def generate(spec: FamilySpec) -> list[PhyloTree]:
    """The trees of the family instance described by ``spec``."""
    if spec.kind == "conflicting_quartets":
        return [parse_newick("((a,b),(c,d));"), parse_newick("((a,c),(b,d));")]
    cat = caterpillar(_chain_taxa(spec.k))
    chain = [restrict(cat, [_taxon(i) for i in w]) for w in _chain_windows(spec.k)]
    if spec.kind == "compatible_tw3":
        return chain
    # the triple takes the place of the first block and meets the rest at its last taxon
    link = _taxon(BLOCK_SPAN)
    names = {f"q{i}": f"q{i}" for i in range(4)}
    names["L"] = link
    triple = [relabel(parse_newick(t), names) for t in INCOMPATIBLE_TRIPLE]
    return triple + chain[3:]


def witness_supertree(spec: FamilySpec) -> PhyloTree:
    """A tree displaying every tree of a compatible family instance."""
    if spec.kind != "compatible_tw3":
        raise ValueError(f"no witness supertree for {spec.kind}")
    return caterpillar(_chain_taxa(spec.k))


def random_restriction_instance(
    rng: random.Random,
    n_range: tuple[int, int] = (6, 10),
    k_choices: tuple[int, ...] = (2, 3, 4),
    min_taxa: int = 4,
) -> tuple[PhyloTree, list[PhyloTree]]:
    """A random binary tree and ``k`` random restrictions of it, each on >= ``min_taxa`` taxa."""
    n = rng.randint(*n_range)
    taxa = [chr(ord("a") + i) if n <= 26 else f"t{i}" for i in range(n)]
    big = random_binary_tree(taxa, rng)
    k = rng.choice(k_choices)
    parts = [restrict(big, rng.sample(taxa, rng.randint(min_taxa, n))) for _ in range(k)]
    return big, parts


def tw2_corpus(count: int, seed: int = 0) -> Iterator[tuple[PhyloTree, list[PhyloTree]]]:
    """``count`` random restriction instances whose cleaned display graph has treewidth <= 2."""
    rng = random.Random(seed)
    made = 0
    while made < count:
        big, parts = random_restriction_instance(rng)
        if is_tw_le_2(cleanup(build_display(parts))[0])[0]:
            made += 1
            yield big, parts
