from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from supertree_tw.phylo import PhyloTree, random_binary_tree

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

TAXA = [chr(ord("a") + i) for i in range(12)]


@st.composite
def binary_trees(draw, min_taxa: int = 3, max_taxa: int = 10) -> PhyloTree:
    n = draw(st.integers(min_taxa, max_taxa))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_binary_tree(TAXA[:n], random.Random(seed))


def load_case_fixtures() -> list[tuple[str, list[str]]]:
    out = []
    for line in (FIXTURES / "case_fixtures.txt").read_text().splitlines():
        if line and not line.startswith("#"):
            label, trees = line.split("\t")
            out.append((label, trees.split()))
    return out


@pytest.fixture
def rng() -> random.Random:
    return random.Random(12345)


def face_pair_problems(d, f1, f2, path) -> list[str]:
    """Independent check of a selected face pair; empty when it qualifies."""
    problems = []
    if f1.is_outer or f2.is_outer:
        problems.append("outer face selected")
    shared_e = f1.edges & f2.edges
    shared_v = f1.vertices & f2.vertices
    if not shared_e:
        problems.append("faces share no edge")
    ends = {e: (u, v) for e, (u, v, _) in d.edges().items() if e in shared_e}
    deg: dict[int, int] = {}
    for u, v in ends.values():
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    if set(deg) != shared_v or len(shared_v) != len(shared_e) + 1 or max(deg.values(), default=0) > 2:
        problems.append("shared boundary is not a single path")
    if set(path.edges) != shared_e or set(path.vertices) != shared_v:
        problems.append("reported path differs from the shared boundary")
    if any(d.degree(x) != 2 for x in path.interior):
        problems.append("interior vertex of degree != 2")
    if d.degree(path.u) < 3 or d.degree(path.v) < 3:
        problems.append("endpoint of degree < 3")
    if sum(d.is_taxon(x) for x in path.interior) > 1:
        problems.append("more than one taxon inside the path")
    return problems
