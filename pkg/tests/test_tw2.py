import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from supertree_tw.dgraph import build_display
from supertree_tw.families import FamilySpec, generate
from supertree_tw.oracle import exact_treewidth
from supertree_tw.tw2 import Bypass, DropPendant, K4Witness, is_tw_le_2, k4_witness, verify_k4_witness


@st.composite
def small_graphs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return list(range(n)), chosen


def test_trees_and_cycles_reduce():
    for g in (nx.path_graph(6), nx.cycle_graph(7), nx.balanced_tree(2, 3), nx.empty_graph(3)):
        ok, trace = is_tw_le_2(g)
        assert ok and not trace.kernel
        assert len(trace.steps) == g.number_of_nodes()


def test_series_parallel_reduces():
    g = nx.Graph([(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 4), (4, 2)])
    ok, trace = is_tw_le_2(g)
    assert ok
    assert any(isinstance(s, Bypass) and s.merged for s in trace.steps)


def test_k4_stalls_with_full_kernel():
    ok, trace = is_tw_le_2(nx.complete_graph(4))
    assert not ok and set(trace.kernel) == {0, 1, 2, 3}
    assert trace.steps == []


def test_kernel_has_min_degree_three():
    g = nx.petersen_graph()
    g.add_edges_from([(0, 10), (10, 11)])
    ok, trace = is_tw_le_2(g)
    assert not ok
    assert all(len(es) >= 3 for es in trace.kernel.values())
    assert {10, 11}.isdisjoint(trace.kernel)


def test_pendant_steps_record_anchor():
    ok, trace = is_tw_le_2(nx.star_graph(3))
    drops = [s for s in trace.steps if isinstance(s, DropPendant)]
    assert ok and drops and all(s.anchor is not None for s in drops[:2])


def test_parallel_edges_and_loops_ignored():
    assert is_tw_le_2(([0, 1, 2], [(0, 1), (1, 0), (1, 1), (1, 2), (2, 0)]))[0]


@pytest.mark.parametrize(
    "graph",
    [
        nx.complete_graph(4),
        nx.complete_graph(6),
        nx.petersen_graph(),
        nx.grid_2d_graph(3, 3),
        nx.octahedral_graph(),
        nx.wheel_graph(7),
    ],
    ids=["K4", "K6", "petersen", "grid3x3", "octahedron", "wheel7"],
)
def test_k4_witness_on_named_graphs(graph):
    assert not is_tw_le_2(graph)[0]
    w = k4_witness(graph)
    assert verify_k4_witness(graph, w)
    assert len(set().union(*w.branch_sets)) <= graph.number_of_nodes()


def test_k4_witness_on_conflicting_quartets():
    d = build_display(generate(FamilySpec("conflicting_quartets")))
    assert not is_tw_le_2(d)[0]
    w = k4_witness(d)
    assert verify_k4_witness(d, w)
    assert {d.label(v) for s in w.branch_sets for v in s if d.is_taxon(v)} <= set("abcd")


def test_k4_witness_rejects_tw2():
    with pytest.raises(ValueError):
        k4_witness(nx.cycle_graph(5))


def test_verify_rejects_bad_models():
    g = nx.complete_graph(4)
    assert not verify_k4_witness(g, K4Witness((frozenset({0}), frozenset({1}), frozenset({2}), frozenset({2}))))
    c = nx.cycle_graph(6)
    assert not verify_k4_witness(c, K4Witness((frozenset({0, 3}), frozenset({1}), frozenset({2}), frozenset({4}))))
    assert not verify_k4_witness(c, K4Witness((frozenset({0}), frozenset({1}), frozenset({2}), frozenset({3}))))


@settings(max_examples=400, deadline=None)
@given(small_graphs())
def test_agrees_with_exact_treewidth(g):
    ok, _ = is_tw_le_2(g)
    assert ok == (exact_treewidth(g) <= 2)
    if not ok:
        assert verify_k4_witness(g, k4_witness(g))


@settings(max_examples=200, deadline=None)
@given(small_graphs(max_n=12))
def test_agrees_with_networkx_bounds(g):
    nxg = nx.Graph()
    nxg.add_nodes_from(g[0])
    nxg.add_edges_from(g[1])
    ok, _ = is_tw_le_2(g)
    upper, _ = nx.algorithms.approximation.treewidth_min_fill_in(nxg)
    if upper <= 2:
        assert ok
    if not ok:
        assert upper >= 3


@settings(max_examples=100, deadline=None)
@given(small_graphs(max_n=10), st.randoms(use_true_random=False))
def test_verdict_is_label_independent(g, rnd):
    vertices, edges = g
    perm = vertices[:]
    rnd.shuffle(perm)
    relabelled = ([f"v{perm[v]}" for v in vertices], [(f"v{perm[u]}", f"v{perm[v]}") for u, v in edges])
    assert is_tw_le_2(g)[0] == is_tw_le_2(relabelled)[0]


@settings(max_examples=200, deadline=None)
@given(small_graphs(max_n=10), st.data())
def test_contraction_keeps_tw2(g, data):
    vertices, edges = g
    if not edges or not is_tw_le_2(g)[0]:
        return
    u, v = data.draw(st.sampled_from(edges))
    merged = [(u if a == v else a, u if b == v else b) for a, b in edges]
    assert is_tw_le_2(([x for x in vertices if x != v], merged))[0]


def test_agrees_on_display_graphs():
    import random

    from supertree_tw.families import random_restriction_instance

    rnd = random.Random(5)
    checked = 0
    while checked < 200:
        _, parts = random_restriction_instance(rnd, n_range=(4, 6), k_choices=(1, 2, 3))
        d = build_display(parts)
        if d.n_vertices <= 16:
            assert is_tw_le_2(d)[0] == (exact_treewidth(d) <= 2)
            checked += 1
