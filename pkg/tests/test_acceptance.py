"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run alone with ``pytest tests/test_acceptance.py -s -q`` or
``python3 tests/test_acceptance.py``.
"""

import contextlib
import functools
import io
import itertools
import json
import os
import random
import sys
import time
from collections import Counter
from pathlib import Path

import jsonschema
import networkx as nx
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import GOLDEN, face_pair_problems, load_case_fixtures  # noqa: E402

from supertree_tw import cli  # noqa: E402
from supertree_tw.algo import CaseLabel, Supertree, supertree_tw2, theorem1_check, two_tree_compatible  # noqa: E402
from supertree_tw.dgraph import build_display, cleanup, components  # noqa: E402
from supertree_tw.families import FamilySpec, generate, tw2_corpus, witness_supertree  # noqa: E402
from supertree_tw.oracle import (  # noqa: E402
    MAX_TREEWIDTH_VERTICES,
    brute_force_compatible,
    double_factorial,
    enumerate_binary_trees,
    exact_treewidth,
)
from supertree_tw.phylo import displays, parse_newick, random_binary_tree  # noqa: E402
from supertree_tw.planar import embed, faces, minimally_adjacent_faces  # noqa: E402
from supertree_tw.tw2 import is_tw_le_2, k4_witness, verify_k4_witness  # noqa: E402

CORPUS_SIZE = 1000
CORPUS_SEED = 2024


def three_way(t1, t2):
    return two_tree_compatible(t1, t2), theorem1_check(t1, t2), brute_force_compatible([t1, t2]) is not None


def criterion_1():
    trees = list(enumerate_binary_trees("abcde"))
    assert len(trees) == 15
    bad = sum(len(set(three_way(a, b))) != 1 for a, b in itertools.product(trees, repeat=2))
    assert bad == 0, f"{bad} disagreements"
    return "225 pairs, 0 disagreements"


def criterion_2():
    rng = random.Random(7)
    bad = 0
    counts = Counter()
    for n, count in ((6, 500), (7, 200)):
        taxa = "abcdefg"[:n]
        for _ in range(count):
            verdicts = three_way(random_binary_tree(taxa, rng), random_binary_tree(taxa, rng))
            bad += len(set(verdicts)) != 1
            counts[verdicts[2]] += 1
    assert bad == 0, f"{bad} disagreements"
    return f"700 pairs ({counts[True]} compatible), 0 disagreements"


def criterion_3():
    d = build_display([parse_newick("((a,b),(c,d));"), parse_newick("((a,c),(b,d));")])
    assert not is_tw_le_2(d)[0]
    assert verify_k4_witness(d, k4_witness(d))
    tw = exact_treewidth(d)
    assert tw == 3, f"exact treewidth {tw}"
    return "tw<=2 false, witness valid, exact treewidth 3"


@functools.lru_cache(maxsize=None)
def corpus_runs():
    return [(parts, supertree_tw2(parts)) for _, parts in tw2_corpus(CORPUS_SIZE, CORPUS_SEED)]


def criterion_4():
    runs = corpus_runs()
    assert len(runs) >= 1000
    not_super = sum(not isinstance(r, Supertree) for _, r in runs)
    assert not_super == 0, f"{not_super} instances without a supertree"
    bad_display = sum(not all(displays(r.tree, t) for t in parts) for parts, r in runs)
    assert bad_display == 0, f"{bad_display} supertrees fail display"
    small = [parts for parts, _ in runs if len(set().union(*(t.taxa for t in parts))) <= 8]
    missing = sum(brute_force_compatible(parts) is None for parts in small)
    assert missing == 0, f"oracle finds no supertree for {missing} small instances"
    return f"{len(runs)} instances all verified, {len(small)} checked by oracle"


def criterion_5():
    cases = Counter()
    for _, r in corpus_runs():
        cases.update(label for _, label, _ in r.case_trace)
    # case (i) raises ConstructionError inside the run, failing this criterion
    for _, texts in load_case_fixtures():
        r = supertree_tw2([parse_newick(t) for t in texts])
        assert isinstance(r, Supertree)
        cases.update(label for _, label, _ in r.case_trace)
    counts = {c.value: cases[c.value] for c in CaseLabel}
    low = {c: n for c, n in counts.items() if n < 50}
    assert not low, f"counts {counts}"
    return ", ".join(f"{c}={n}" for c, n in counts.items()) + ", case (i)=0"


def criterion_6():
    graphs = 0
    for parts, _ in corpus_runs():
        cleaned, _ = cleanup(build_display(parts))
        for d in components(cleaned):
            ok, trace = is_tw_le_2(d)
            assert ok
            system = embed(d, trace)
            fs = faces(system)
            assert d.n_vertices - d.n_edges + len(fs) == 2, "Euler formula"
            f1, f2, path = minimally_adjacent_faces(system, d)
            problems = face_pair_problems(d, f1, f2, path)
            assert not problems, problems
            graphs += 1
    return f"{graphs} embedded components, all pairs verified"


def criterion_7():
    exact = 0
    for k in range(3, 13):
        spec = FamilySpec("compatible_tw3", k)
        trees = generate(spec)
        d = build_display(trees)
        assert not is_tw_le_2(d)[0] and verify_k4_witness(d, k4_witness(d)), f"compatible k={k}"
        assert all(displays(witness_supertree(spec), t) for t in trees), f"witness k={k}"
        if d.n_vertices <= MAX_TREEWIDTH_VERTICES:
            assert exact_treewidth(d) == 3, f"compatible k={k} treewidth"
            exact += 1
        inc = generate(FamilySpec("incompatible_tw3", k))
        assert brute_force_compatible(inc[:3]) is None, f"incompatible k={k}"
        di = build_display(inc)
        if di.n_vertices <= MAX_TREEWIDTH_VERTICES:
            assert exact_treewidth(di) == 3, f"incompatible k={k} treewidth"
            exact += 1
    return f"k=3..12 verified, exact treewidth 3 on {exact} small instances"


def cycle_with_pendants(rng):
    g = nx.cycle_graph(rng.randint(3, 12))
    for v in range(g.number_of_nodes(), rng.randint(g.number_of_nodes(), 18)):
        g.add_edge(v, rng.randrange(v))
    return g


def criterion_8():
    for n in range(3, 9):
        assert sum(1 for _ in enumerate_binary_trees("abcdefgh"[:n])) == double_factorial(2 * n - 5)
    rng = random.Random(8)
    for _ in range(50):
        t = random_binary_tree([f"x{i}" for i in range(rng.randint(3, 10))], rng)
        assert exact_treewidth(build_display([t])) == 1
    for _ in range(50):
        assert exact_treewidth(cycle_with_pendants(rng)) == 2
    assert exact_treewidth(nx.complete_graph(4)) == 3
    return "counts n=3..8, 50 trees tw 1, 50 cycles tw 2, K4 tw 3"


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stderr(err):
        try:
            code = cli.main(argv, out=out)
        except SystemExit as exc:
            code = exc.code
    return code, out.getvalue(), err.getvalue()


@contextlib.contextmanager
def working_directory(path):
    old = os.getcwd()
    os.chdir(path)
    try:
        yield
    finally:
        os.chdir(old)


def criterion_9():
    from test_cli import CASES, mask_timings, render

    with working_directory(GOLDEN / "inputs"):
        for name, argv in CASES.items():
            got = render(*run_cli(argv))
            assert got == (GOLDEN / f"{name}.txt").read_text(), f"golden mismatch: {name}"
            again = render(*run_cli(argv))
            assert mask_timings(again) == mask_timings(got), f"nondeterministic: {name}"
            if "--json" in argv:
                payload = json.loads(run_cli(argv)[1])
                for item in payload if isinstance(payload, list) else [payload]:
                    item.pop("file", None)
                    jsonschema.validate(item, cli.REPORT_SCHEMA)
    return f"{len(CASES)} golden reports identical, JSON schema valid"


CRITERIA = [
    (1, "two-tree equivalence, exhaustive n=5", criterion_1, 10),
    (2, "two-tree equivalence, sampled n=6,7", criterion_2, 60),
    (3, "conflicting quartets fixture", criterion_3, 1),
    (4, "supertree construction on corpus", criterion_4, 300),
    (5, "case coverage", criterion_5, 300),
    (6, "face-pair selection and embeddings", criterion_6, 300),
    (7, "treewidth-3 families", criterion_7, 120),
    (8, "oracle self-checks", criterion_8, 60),
    (9, "CLI contract", criterion_9, 30),
]


def report(number, title, fn, limit):
    start = time.perf_counter()
    try:
        detail = fn()
        elapsed = time.perf_counter() - start
        ok = elapsed < limit
        if not ok:
            detail += f"; over the {limit}s limit"
    except AssertionError as exc:
        elapsed = time.perf_counter() - start
        ok, detail = False, str(exc) or "assertion failed"
    line = f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {detail}"
    return ok, line


@pytest.mark.parametrize("number,title,fn,limit", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, fn, limit, capsys):
    ok, line = report(number, title, fn, limit)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
