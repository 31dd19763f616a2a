import random

import pytest
from hypothesis import given, settings, strategies as st

from supertree_tw.dgraph import (
    RemovedTaxon,
    RemovedTree,
    build_display,
    cleanup,
    components,
    replay_cleanup,
    to_dot,
)
from supertree_tw.families import random_restriction_instance
from supertree_tw.oracle import brute_force_compatible, exact_treewidth
from supertree_tw.phylo import parse_newick, random_binary_tree, restrict

from conftest import binary_trees


def quartets(*texts):
    return [parse_newick(t) for t in texts]


def shape(d):
    """Order-free description of a display graph."""
    return (
        frozenset(d.describe(v) for v in d.vertices()),
        frozenset((frozenset((d.describe(u), d.describe(v))), t) for u, v, t in d.edges().values()),
    )


def test_conflicting_quartets_graph():
    d = build_display(quartets("((a,b),(c,d));", "((a,c),(b,d));"))
    assert d.n_vertices == 8 and d.n_edges == 10
    assert all(d.degree(d.taxon_vertex(x)) == 2 for x in "abcd")
    assert all(d.degree(v) == 3 for v in d.vertices() if not d.is_taxon(v))
    cleaned, trace = cleanup(d)
    assert len(trace) == 0 and shape(cleaned) == shape(d)


def test_taxa_ids_sorted_and_shared():
    d = build_display(quartets("((c,d),(a,b));", "((a,e),(b,f));"))
    assert [d.label(v) for v in range(6)] == list("abcdef")
    assert d.tree_taxa(0) == set("abcd") and d.tree_taxa(1) == set("abef")
    assert d.origin(d.taxon_vertex("a"))[0] == {0, 1}


def test_trees_recovered_from_graph():
    ts = quartets("(a,b,(c,(d,e)));", "((a,e),(b,f));")
    assert list(build_display(ts).trees().values()) == ts


def test_single_tree_cleans_to_nothing():
    cleaned, trace = cleanup(build_display(quartets("(a,b,(c,(d,e)));")))
    assert cleaned.n_vertices == 0
    assert sum(isinstance(e, RemovedTaxon) for e in trace) == 5


def test_small_tree_removed_first():
    ts = [parse_newick("((a,b),(c,d));"), parse_newick("((a,b),(c,d));"), parse_newick("(a,b,e);")]
    cleaned, trace = cleanup(build_display(ts))
    assert trace.events[0] == RemovedTree(2)
    assert cleaned.taxa() == set("abcd")


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        build_display([])


def test_components_split_disjoint_trees():
    d = build_display(quartets("((a,b),(c,d));", "((e,f),(g,h));"))
    parts = components(d)
    assert [p.taxa() for p in parts] == [set("abcd"), set("efgh")]


def test_dot_output():
    text = to_dot(build_display(quartets("((a,b),(c,d));")), edge_notes={0: "F1"})
    assert text.startswith("graph display {")
    assert '[shape=box, label="a"]' in text
    assert 'label="F1"' in text
    assert text.count(" -- ") == 5


def random_instance(seed):
    return random_restriction_instance(random.Random(seed), n_range=(5, 9), k_choices=(2, 3, 4, 5))[1]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_cleanup_is_confluent(seed):
    d = build_display(random_instance(seed))
    results = {shape(cleanup(d, order)[0]) for order in ("lowest", "queue", "stack")}
    assert len(results) == 1


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_cleanup_fixed_point_and_replay(seed):
    d = build_display(random_instance(seed))
    cleaned, trace = cleanup(d)
    for v in cleaned.vertices():
        if cleaned.is_taxon(v):
            assert cleaned.degree(v) >= 2
        else:
            assert cleaned.degree(v) == 3
    for i in cleaned.tree_indices():
        assert len(cleaned.tree_taxa(i)) >= 4
    assert shape(replay_cleanup(d, trace)) == shape(cleaned)
    assert len(cleanup(cleaned)[1]) == 0


@settings(max_examples=100, deadline=None)
@given(binary_trees(min_taxa=4, max_taxa=8), st.data())
def test_display_graph_counts(tree, data):
    subs = data.draw(st.lists(st.sets(st.sampled_from(sorted(tree.taxa)), min_size=3), min_size=1, max_size=4))
    trees = [restrict(tree, s) for s in subs]
    d = build_display(trees)
    taxa = set().union(*(t.taxa for t in trees))
    assert d.n_vertices == len(taxa) + sum(t.n_vertices - t.n_leaves for t in trees)
    assert d.n_edges == sum(t.n_vertices - 1 for t in trees)
    for x in taxa:
        assert d.degree(d.taxon_vertex(x)) == sum(x in t.taxa for t in trees)


def mixed_instance(seed):
    """Restrictions of up to two unrelated trees, so some instances conflict."""
    rnd = random.Random(seed)
    taxa = list("abcdefgh")[: rnd.randint(5, 8)]
    sources = [random_binary_tree(taxa, rnd) for _ in range(rnd.randint(1, 2))]
    return [restrict(rnd.choice(sources), rnd.sample(taxa, rnd.randint(4, len(taxa)))) for _ in range(rnd.randint(2, 3))]


def test_cleanup_preserves_compatibility():
    for seed in range(300):
        trees = mixed_instance(seed)
        cleaned, _ = cleanup(build_display(trees))
        before = brute_force_compatible(trees) is not None
        remaining = list(cleaned.trees().values())
        after = brute_force_compatible(remaining) is not None if remaining else True
        assert before == after, [str(t) for t in trees]


def test_cleanup_is_monotone():
    for seed in range(300):
        d = build_display(mixed_instance(seed))
        cleaned, _ = cleanup(d)
        assert cleaned.n_vertices <= d.n_vertices and cleaned.n_edges <= d.n_edges
        if d.n_vertices <= 12:
            assert exact_treewidth(cleaned) <= exact_treewidth(d)


def test_cleanup_confluence_sweep():
    for seed in range(500):
        d = build_display(random_instance(seed))
        assert shape(cleanup(d, "queue")[0]) == shape(cleanup(d, "stack")[0])
