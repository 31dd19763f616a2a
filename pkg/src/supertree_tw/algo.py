"""Compatibility via display-graph treewidth, and supertree construction.

The constructive part follows the separator induction on the number of
taxa: clean the display graph, embed it, take two minimally adjacent bounded
faces, and use the endpoints of their shared boundary path as a separator
that splits the taxa into two sides.  Each side is solved recursively and the
two supertrees are glued.  Every supertree returned from any level of the
recursion is checked with :func:`displays` against that level's trees.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .dgraph import DisplayGraph, RemovedTaxon, build_display, cleanup, components
from .phylo import PhyloTree, Split, displays, iter_edge_sides, quartet_topology, restrict
from .planar import SharedBoundaryPath, embed, minimally_adjacent_faces
from .tw2 import K4Witness, is_tw_le_2, k4_witness

__all__ = [
    "CaseLabel",
    "ConstructionError",
    "Incompatible",
    "NotApplicable",
    "SeparatorInfo",
    "Supertree",
    "SupertreeResult",
    "attach_on_split_edge",
    "classify_case",
    "contract_metataxon",
    "glue_at_edge_image",
    "split_respected",
    "supertree_tw2",
    "theorem1_check",
    "two_tree_compatible",
]

log = logging.getLogger(__name__)


class ConstructionError(AssertionError):
    """An internal invariant of the construction failed."""


class CaseLabel(str, enum.Enum):
    CASE_II = "CaseII_leaf_inner"
    CASE_III_TAXON = "CaseIII_taxon_on_path"
    CASE_III_EDGE = "CaseIII_edge"


@dataclass(frozen=True)
class SeparatorInfo:
    u: int
    v: int
    t: int | None
    x1: frozenset[str]
    x2: frozenset[str]


@dataclass(frozen=True)
class Supertree:
    tree: PhyloTree
    case_trace: tuple[tuple[int, str, tuple[str, ...]], ...] = ()
    verdict = "compatible"


@dataclass(frozen=True)
class Incompatible:
    evidence: str
    verdict = "incompatible"


@dataclass(frozen=True)
class NotApplicable:
    witness: K4Witness
    graph: DisplayGraph
    verdict = "not_applicable"


SupertreeResult = Union[Supertree, Incompatible, NotApplicable]


def _require_binary(trees: Iterable[PhyloTree]) -> None:
    for i, t in enumerate(trees):
        if not t.is_binary():
            raise ValueError(f"tree {i} is not binary")


# ---------------------------------------------------------------------------
# Two trees
# ---------------------------------------------------------------------------


def two_tree_compatible(t1: PhyloTree, t2: PhyloTree) -> bool:
    """Quartet test: compatible iff no four common taxa are resolved differently."""
    _require_binary((t1, t2))
    common = t1.taxa & t2.taxa
    if len(common) <= 3:
        return True
    r1, r2 = restrict(t1, common), restrict(t2, common)
    for quad in itertools.combinations(sorted(common), 4):
        if quartet_topology(r1, *quad) != quartet_topology(r2, *quad):
            return False
    return True


def theorem1_check(t1: PhyloTree, t2: PhyloTree) -> bool:
    """Treewidth test: ``tw(D(T1|X*, T2|X*)) <= 2`` on the common taxa ``X*``."""
    common = t1.taxa & t2.taxa
    if common:
        t1, t2 = restrict(t1, common), restrict(t2, common)
    return is_tw_le_2(build_display([t1, t2]))[0]


# ---------------------------------------------------------------------------
# Tree surgery
# ---------------------------------------------------------------------------


def _leaf_tree(label: str) -> PhyloTree:
    return PhyloTree.from_edges([], {0: label})


def _small_tree(taxa: Iterable[str]) -> PhyloTree:
    names = sorted(taxa)
    if len(names) == 1:
        return _leaf_tree(names[0])
    if len(names) > 3:
        raise ValueError("more than three taxa have no unique topology")
    return PhyloTree.from_edges([(i, len(names)) for i in range(len(names))], dict(enumerate(names)))


def _separating_edge(tree: PhyloTree, side1: frozenset[str], side2: frozenset[str]) -> tuple[int, int] | None:
    """First edge (child, parent) with ``side1`` wholly on one side and ``side2`` on the other."""
    for child, parent, below in iter_edge_sides(tree):
        if (side1 <= below and not side2 & below) or (side2 <= below and not side1 & below):
            return child, parent
    return None


def attach_on_split_edge(tree: PhyloTree, leaf: str, x1: Iterable[str], x2: Iterable[str]) -> PhyloTree:
    """Subdivide the edge separating ``x1`` from ``x2`` and hang ``leaf`` there."""
    x1, x2 = frozenset(x1), frozenset(x2)
    if leaf in tree.taxa:
        raise ValueError(f"taxon {leaf!r} already present")
    if tree.n_vertices == 1:
        return PhyloTree.from_edges([(0, 1)], {0: tree.label(0), 1: leaf})
    edge = _separating_edge(tree, x1 & tree.taxa, x2 & tree.taxa) if x1 and x2 else None
    if edge is None:
        raise ValueError(f"no edge separates {sorted(x1)} from {sorted(x2)}")
    return _hang(tree, edge, leaf)


def _hang(tree: PhyloTree, edge: tuple[int, int], leaf: str) -> PhyloTree:
    u, v = edge
    adj = tree.adjacency()
    mid, tip = len(adj), len(adj) + 1
    adj[u].discard(v)
    adj[v].discard(u)
    adj[mid] = {u, v, tip}
    adj[u].add(mid)
    adj[v].add(mid)
    adj[tip] = {mid}
    labels = tree.labels()
    labels[tip] = leaf
    return _from_adj(adj, labels)


def _from_adj(adj: dict[int, set[int]], labels: dict[int, str]) -> PhyloTree:
    return PhyloTree.from_edges([(u, v) for u in adj for v in adj[u] if u < v], labels)


def contract_metataxon(tree: PhyloTree, side: Iterable[str], label: str) -> PhyloTree:
    """Replace the subtree spanning ``side ∩ taxa(tree)`` by one leaf ``label``."""
    inside = frozenset(side) & tree.taxa
    if not inside:
        return tree
    if inside == tree.taxa:
        return _leaf_tree(label)
    outside = tree.taxa - inside
    for child, parent, below in iter_edge_sides(tree):
        if below == inside:
            drop, keep = child, parent
        elif below == outside:
            drop, keep = parent, child
        else:
            continue
        adj = tree.adjacency()
        adj[drop].discard(keep)
        adj[keep].discard(drop)
        # keep only the component of ``keep``; the leaf takes the cut edge
        comp = {keep}
        stack = [keep]
        while stack:
            for w in adj[stack.pop()]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        sub = {x: adj[x] for x in comp}
        tip = max(adj) + 1
        sub[keep].add(tip)
        sub[tip] = {keep}
        labels = {x: lab for x, lab in tree.labels().items() if x in comp}
        labels[tip] = label
        return _from_adj(sub, labels)
    raise ValueError(f"no edge of the tree separates {sorted(inside)} from the rest")


def split_respected(trees: Iterable[PhyloTree], x1: Iterable[str], x2: Iterable[str]) -> bool:
    """Every tree restricted to ``x1 ∪ x2`` has an edge inducing ``A|B`` with ``A ⊆ x1``, ``B ⊆ x2``."""
    x1, x2 = frozenset(x1), frozenset(x2)
    if x1 & x2:
        raise ValueError("sides overlap")
    for t in trees:
        a, b = t.taxa & x1, t.taxa & x2
        if not a or not b:
            continue
        if Split.of(a, b) not in restrict(t, a | b).split_set():
            return False
    return True


def glue_at_edge_image(
    s1: PhyloTree,
    s2: PhyloTree,
    port1: str,
    port2: str,
    anchor1: str | None = None,
    anchor2: str | None = None,
) -> PhyloTree:
    """Join two supertrees at placeholder leaves ``port1`` and ``port2``.

    Without anchors the ports are deleted and their attachment points joined
    by a new edge.  With anchors, each port marks a point on the image of a
    cut tree edge: the two points are identified along a new edge whose one
    end collects the branches holding ``anchor1`` and ``anchor2`` and whose
    other end collects the remaining two branches.
    """
    for tree, port in ((s1, port1), (s2, port2)):
        if port not in tree.taxa:
            raise ValueError(f"port {port!r} missing")
    if s1.taxa & s2.taxa - {port1, port2}:
        raise ValueError("trees to glue share taxa")
    adj: dict[int, set[int]] = {}
    labels: dict[int, str] = {}
    attach = []
    for offset, tree, port, anchor in ((0, s1, port1, anchor1), (s1.n_vertices, s2, port2, anchor2)):
        for v in tree.vertices():
            adj[v + offset] = {w + offset for w in tree.neighbors(v)}
            lab = tree.label(v)
            if lab is not None and lab != port:
                labels[v + offset] = lab
        p = tree.leaf(port) + offset
        (q,) = adj.pop(p)
        adj[q].discard(p)
        attach.append((q, anchor, tree))
    (q1, a1, t1), (q2, a2, t2) = attach
    if a1 is None and a2 is None:
        adj[q1].add(q2)
        adj[q2].add(q1)
        return _from_adj(adj, labels)
    if a1 is None or a2 is None:
        raise ValueError("anchors must be given for both trees or neither")
    x1, y1 = _orient(adj, q1, a1, labels)
    x2, y2 = _orient(adj, q2, a2, labels)
    # q1 becomes the anchor end (x1, x2), q2 the other end (y1, y2)
    adj[q1] = {x1, x2, q2}
    adj[q2] = {y1, y2, q1}
    for x, old, new in ((x2, q2, q1), (y1, q1, q2)):
        adj[x].discard(old)
        adj[x].add(new)
    return _from_adj(adj, labels)


def _orient(adj: dict[int, set[int]], q: int, anchor: str, labels: dict[int, str]) -> tuple[int, int]:
    """Split the two neighbours of ``q`` into (branch holding ``anchor``, other)."""
    if len(adj[q]) != 2:
        raise ValueError("edge-image port must hang from an internal vertex")
    n1, n2 = sorted(adj[q])
    seen = {q, n1}
    stack = [n1]
    while stack:
        x = stack.pop()
        if labels.get(x) == anchor:
            return n1, n2
        for w in adj[x]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return n2, n1


# ---------------------------------------------------------------------------
# Case analysis
# ---------------------------------------------------------------------------


def classify_case(path: SharedBoundaryPath, d: DisplayGraph) -> tuple[CaseLabel, SeparatorInfo]:
    """Case of the shared path and the taxon sides of its separator."""
    u, v = path.u, path.v
    u_tax, v_tax = d.is_taxon(u), d.is_taxon(v)
    if u_tax and v_tax:
        raise ConstructionError("both endpoints of the shared path are taxa (case (i))")
    if any(not d.is_taxon(x) for x in path.interior):
        raise ConstructionError("internal tree vertex inside the shared path")
    if len(path.interior) > 1:
        raise ConstructionError("more than one taxon inside the shared path")
    t = path.interior[0] if path.interior else None

    if u_tax or v_tax:
        if t is not None:
            raise ConstructionError("case (ii) path is longer than one edge")
        case = CaseLabel.CASE_II
        if v_tax:
            u, v = v, u
        hub = v  # the internal endpoint; its two other edges lead to the two sides
        seeds = [w for w in d.neighbors(hub) if w != u]
    elif t is not None:
        case = CaseLabel.CASE_III_TAXON
        if d.internal_tree(u) == d.internal_tree(v):
            raise ConstructionError("case (iii) taxon path joins inner vertices of one tree")
        hub = u
        seeds = [w for w in d.neighbors(u) if w != t]
    else:
        case = CaseLabel.CASE_III_EDGE
        if d.internal_tree(u) != d.internal_tree(v):
            raise ConstructionError("case (iii) edge joins inner vertices of different trees")
        hub = u
        seeds = [w for w in d.neighbors(u) if w != v]
    if len(seeds) != 2:
        raise ConstructionError(f"separator endpoint {hub} does not have degree 3")

    removed = {u, v} | ({t} if t is not None else set())
    comp_of: dict[int, int] = {}
    comps: list[set[int]] = []
    for s in d.vertices():
        if s in removed or s in comp_of:
            continue
        comp = {s}
        stack = [s]
        while stack:
            for w in d.neighbors(stack.pop()):
                if w not in removed and w not in comp:
                    comp.add(w)
                    stack.append(w)
        for x in comp:
            comp_of[x] = len(comps)
        comps.append(comp)
    c1, c2 = comp_of[seeds[0]], comp_of[seeds[1]]
    if c1 == c2:
        raise ConstructionError("shared-path endpoints do not separate the two faces")
    side1 = set().union(*(c for i, c in enumerate(comps) if i != c2))
    side2 = comps[c2]
    if case is not CaseLabel.CASE_II and len(comps) != 2:
        raise ConstructionError("inner-vertex separator left more than two components")
    x1 = frozenset(d.label(x) for x in side1 if d.is_taxon(x))
    x2 = frozenset(d.label(x) for x in side2 if d.is_taxon(x))
    if not x1 or not x2:
        raise ConstructionError("separator side without taxa")
    if case is CaseLabel.CASE_III_EDGE and (len(x1) < 2 or len(x2) < 2):
        raise ConstructionError("case (iii) edge separator side with fewer than two taxa")
    return case, SeparatorInfo(u, v, t, x1, x2)


# ---------------------------------------------------------------------------
# Recursion
# ---------------------------------------------------------------------------


@dataclass
class _Run:
    taxa: set[str]
    bound: int
    case_trace: list[tuple[int, str, tuple[str, ...]]] = field(default_factory=list)
    counter: int = 0

    def fresh(self, stem: str) -> str:
        while True:
            self.counter += 1
            label = f"<{stem}{self.counter}>"
            if label not in self.taxa:
                self.taxa.add(label)
                return label


def _verify(tree: PhyloTree, trees: Sequence[PhyloTree], where: str) -> None:
    for i, t in enumerate(trees):
        if not displays(tree, t):
            raise ConstructionError(f"{where}: supertree does not display tree {i}")


def _graft(tree: PhyloTree | None, taxon: str, ref: PhyloTree | None) -> PhyloTree:
    """Insert ``taxon`` into ``tree`` where ``ref`` (a tree containing it) places it."""
    if tree is None:
        return _leaf_tree(taxon)
    common = tree.taxa & ref.taxa if ref is not None else frozenset()
    if len(common) >= 2:
        local = restrict(ref, common | {taxon})
        hub = local.neighbors(local.leaf(taxon))[0]
        sides = []
        for start in local.neighbors(hub):
            if local.label(start) == taxon:
                continue
            seen = {hub, start}
            stack = [start]
            found = set()
            while stack:
                x = stack.pop()
                if local.label(x) is not None:
                    found.add(local.label(x))
                for w in local.neighbors(x):
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            sides.append(found)
        return attach_on_split_edge(tree, taxon, sides[0], sides[1])
    if tree.n_vertices == 1:
        return PhyloTree.from_edges([(0, 1)], {0: tree.label(0), 1: taxon})
    return _hang(tree, tree.edges()[0], taxon)


def _join_disjoint(s1: PhyloTree, s2: PhyloTree, run: _Run) -> PhyloTree:
    """Join supertrees with disjoint taxa through ports on their first edges."""
    p1, p2 = run.fresh("J"), run.fresh("J")
    return glue_at_edge_image(_graft(s1, p1, None), _graft(s2, p2, None), p1, p2)


def _solve(trees: Sequence[PhyloTree], run: _Run, depth: int) -> PhyloTree:
    taxa = frozenset().union(*(t.taxa for t in trees))
    if depth > run.bound:
        raise ConstructionError("recursion depth exceeded the number of taxa")
    if len(taxa) <= 3:
        result = _small_tree(taxa)
        _verify(result, trees, f"depth {depth} base case")
        return result

    cleaned, trace = cleanup(build_display(trees))
    result: PhyloTree | None = None
    for comp in components(cleaned):
        part = _split_component(comp, run, depth)
        result = part if result is None else _join_disjoint(result, part, run)
    for ev in reversed(trace.events):
        if isinstance(ev, RemovedTaxon):
            result = _graft(result, ev.label, _alive_tree(trees[ev.tree], result, ev.label) if ev.tree is not None else None)
    assert result is not None
    if result.taxa != taxa:
        raise ConstructionError("supertree taxa differ from the instance taxa")
    _verify(result, trees, f"depth {depth}")
    return result


def _alive_tree(tree: PhyloTree, current: PhyloTree | None, taxon: str) -> PhyloTree:
    keep = (current.taxa if current is not None else frozenset()) & tree.taxa
    return restrict(tree, keep | {taxon})


def _split_component(d: DisplayGraph, run: _Run, depth: int) -> PhyloTree:
    ok, rtrace = is_tw_le_2(d)
    if not ok:
        raise ConstructionError("cleaned sub-instance has treewidth above 2")
    system = embed(d, rtrace)
    _, _, path = minimally_adjacent_faces(system, d)
    case, sep = classify_case(path, d)
    names = tuple(d.describe(x) for x in (sep.u, sep.v) + ((sep.t,) if sep.t is not None else ()))
    run.case_trace.append((depth, case.value, names))
    log.debug("depth %d: %s separator %s |X1|=%d |X2|=%d", depth, case.value, names, len(sep.x1), len(sep.x2))

    trees = list(d.trees().values())
    taxa = d.taxa()
    if case is CaseLabel.CASE_III_EDGE:
        result = _cut_and_glue(d, trees, sep, run, depth)
    else:
        gone = d.label(sep.u if case is CaseLabel.CASE_II else sep.t)
        rest = [restrict(t, t.taxa - {gone}) for t in trees if t.taxa - {gone}]
        if not split_respected(rest, sep.x1, sep.x2):
            raise ConstructionError("restricted trees do not respect the separator split")
        w1, w2 = run.fresh("W"), run.fresh("W")
        side1 = [contract_metataxon(t, sep.x2, w2) for t in rest] + [_leaf_tree(w2)]
        side2 = [contract_metataxon(t, sep.x1, w1) for t in rest] + [_leaf_tree(w1)]
        s1 = _recurse(side1, taxa, run, depth)
        s2 = _recurse(side2, taxa, run, depth)
        joined = glue_at_edge_image(s1, s2, w2, w1)
        result = attach_on_split_edge(joined, gone, sep.x1, sep.x2)
    _verify(result, trees, f"depth {depth} {case.value}")
    return result


def _recurse(trees: list[PhyloTree], parent_taxa: frozenset[str], run: _Run, depth: int) -> PhyloTree:
    taxa = frozenset().union(*(t.taxa for t in trees))
    real = {x for x in taxa if x in parent_taxa}
    if len(taxa) >= len(parent_taxa) or not real:
        raise ConstructionError("recursive instance is not smaller")
    return _solve(trees, run, depth + 1)


def _side_taxa(d: DisplayGraph, start: int, block: int) -> frozenset[str]:
    """Taxa reachable from ``start`` inside one tree without passing ``block``."""
    tree = d.internal_tree(block)
    seen = {block, start}
    stack = [start]
    out = set()
    while stack:
        x = stack.pop()
        if d.is_taxon(x):
            out.add(d.label(x))
            continue
        for e in d.incident(x):
            a, b, t = d.edge(e)
            w = b if a == x else a
            if t == tree and w not in seen:
                seen.add(w)
                stack.append(w)
    return frozenset(out)


def _cut_and_glue(d: DisplayGraph, trees: list[PhyloTree], sep: SeparatorInfo, run: _Run, depth: int) -> PhyloTree:
    """Case (iii) with an inner edge ``uv``: cut its tree, solve both sides, re-identify the edge."""
    owner = d.internal_tree(sep.u)
    cut = d.trees()[owner]
    branches = {}
    for end, other in ((sep.u, sep.v), (sep.v, sep.u)):
        for w in d.neighbors(end):
            if w != other:
                part = _side_taxa(d, w, end)
                branches[(end, 1 if part <= sep.x1 else 2)] = part
    if len(branches) != 4 or any(not b for b in branches.values()):
        raise ConstructionError("inner edge does not split into four nonempty branches")
    a1, b1 = branches[(sep.u, 1)], branches[(sep.v, 1)]
    a2, b2 = branches[(sep.u, 2)], branches[(sep.v, 2)]
    p1, p2 = run.fresh("P"), run.fresh("P")
    half1 = attach_on_split_edge(restrict(cut, a1 | b1), p1, a1, b1)
    half2 = attach_on_split_edge(restrict(cut, a2 | b2), p2, a2, b2)
    side1, side2 = [half1], [half2]
    for t in trees:
        if t is cut or t == cut:
            continue
        if t.taxa <= sep.x1:
            side1.append(t)
        elif t.taxa <= sep.x2:
            side2.append(t)
        else:
            raise ConstructionError("a tree other than the cut tree spans the separator")
    taxa = d.taxa()
    s1 = _recurse(side1, taxa, run, depth)
    s2 = _recurse(side2, taxa, run, depth)
    return glue_at_edge_image(s1, s2, p1, p2, min(a1), min(a2))


def supertree_tw2(trees: Sequence[PhyloTree]) -> SupertreeResult:
    """Build a supertree when the cleaned display graph has treewidth <= 2.

    Returns :class:`NotApplicable` with a K4 witness in the display graph
    otherwise.  A returned supertree has been checked to display every input.
    """
    if not trees:
        raise ValueError("empty tree list")
    _require_binary(trees)
    d = build_display(trees)
    cleaned, _ = cleanup(d)
    if not is_tw_le_2(cleaned)[0]:
        return NotApplicable(k4_witness(d), d)
    taxa = set().union(*(t.taxa for t in trees))
    run = _Run(taxa=set(taxa), bound=len(taxa) + 1)
    tree = _solve(list(trees), run, 0)
    for t in run.taxa - taxa:
        if t in tree.taxa:  # pragma: no cover - placeholders never survive
            raise ConstructionError(f"placeholder {t} left in the supertree")
    _verify(tree, trees, "top level")
    return Supertree(tree, tuple(run.case_trace))
