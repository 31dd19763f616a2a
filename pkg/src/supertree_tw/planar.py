"""Planar embeddings of treewidth-2 display graphs and face selection.

The embedding comes from replaying a successful series-parallel reduction
backwards, so no general planarity test is needed.  Faces are traced with the
usual rule: leaving along dart ``u -> v`` the walk continues at ``v`` with the
edge following ``uv`` in ``v``'s rotation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .dgraph import DisplayGraph
from .tw2 import Bypass, DropIsolated, DropPendant, ReductionTrace

__all__ = [
    "EmbeddingError",
    "Face",
    "RotationSystem",
    "SharedBoundaryPath",
    "dual_adjacency",
    "embed",
    "face_labels",
    "faces",
    "minimally_adjacent_faces",
    "shared_boundary",
]


class EmbeddingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RotationSystem:
    """Cyclic order of incident edge ids around each vertex."""

    rotation: dict[int, tuple[int, ...]]
    ends: dict[int, tuple[int, int]]

    def other(self, e: int, v: int) -> int:
        a, b = self.ends[e]
        return b if a == v else a

    def successor(self, v: int, e: int) -> int:
        rot = self.rotation[v]
        return rot[(rot.index(e) + 1) % len(rot)]

    @property
    def n_vertices(self) -> int:
        return len(self.rotation)

    @property
    def n_edges(self) -> int:
        return len(self.ends)


@dataclass(frozen=True)
class Face:
    """A face walk as a cyclic sequence of darts ``(tail vertex, edge id)``."""

    index: int
    boundary: tuple[tuple[int, int | None], ...]
    is_outer: bool = False

    @property
    def length(self) -> int:
        return sum(1 for _, e in self.boundary if e is not None)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for v, _ in self.boundary)

    @property
    def edges(self) -> frozenset[int]:
        return frozenset(e for _, e in self.boundary if e is not None)


@dataclass(frozen=True)
class SharedBoundaryPath:
    u: int
    v: int
    interior: tuple[int, ...]
    edges: tuple[int, ...]

    @property
    def vertices(self) -> tuple[int, ...]:
        return (self.u, *self.interior, self.v)


# ---------------------------------------------------------------------------
# Embedding by reverse replay
# ---------------------------------------------------------------------------


def embed(d: DisplayGraph, trace: ReductionTrace) -> RotationSystem:
    """Rotation system of ``d`` rebuilt from its reduction trace.

    Raises :class:`EmbeddingError` if the trace does not describe ``d`` or
    the result violates Euler's formula on some component.
    """
    if not trace.success:
        raise EmbeddingError("reduction did not succeed; graph is not series-parallel")
    d_edges = {e: (u, v) for e, (u, v, _) in d.edges().items()}
    if set(trace.vertices) != set(d.vertices()) or trace.edges != d_edges:
        raise EmbeddingError("trace does not match the display graph")

    rot: dict[int, list[int]] = {}
    ends: dict[int, tuple[int, int]] = {}
    for step in reversed(trace.steps):
        if isinstance(step, DropIsolated):
            rot[step.v] = []
        elif isinstance(step, DropPendant):
            ends[step.edge] = (step.v, step.neighbor)
            rot[step.v] = [step.edge]
            ring = rot[step.neighbor]
            if step.anchor is not None and step.anchor in ring:
                ring.insert(ring.index(step.anchor) + 1, step.edge)
            else:
                ring.append(step.edge)
        elif isinstance(step, Bypass):
            ends[step.edge_a] = (step.v, step.a)
            ends[step.edge_b] = (step.v, step.b)
            rot[step.v] = [step.edge_a, step.edge_b]
            ra, rb = rot[step.a], rot[step.b]
            if step.merged:
                # new path sits beside edge_ab, bounding a fresh 2-gon face
                ra.insert(ra.index(step.edge_ab), step.edge_a)
                rb.insert(rb.index(step.edge_ab) + 1, step.edge_b)
            else:
                ra[ra.index(step.edge_ab)] = step.edge_a
                rb[rb.index(step.edge_ab)] = step.edge_b
                del ends[step.edge_ab]
        else:  # pragma: no cover
            raise EmbeddingError(f"unknown step {step!r}")

    if {e: frozenset(p) for e, p in ends.items()} != {e: frozenset(p) for e, p in d_edges.items()}:
        raise EmbeddingError("replayed edge set differs from the display graph")
    system = RotationSystem({v: tuple(r) for v, r in sorted(rot.items())}, dict(sorted(d_edges.items())))
    _check_euler(system, faces(system))
    return system


def _components(system: RotationSystem) -> list[set[int]]:
    seen: set[int] = set()
    out = []
    for s in system.rotation:
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for e in system.rotation[v]:
                w = system.other(e, v)
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        out.append(comp)
    return out


def _check_euler(system: RotationSystem, face_list: list[Face]) -> None:
    for comp in _components(system):
        n_v = len(comp)
        n_e = sum(len(system.rotation[v]) for v in comp) // 2
        n_f = sum(1 for f in face_list if f.vertices <= comp)
        if n_v - n_e + n_f != 2:
            raise EmbeddingError(f"Euler check failed: V={n_v} E={n_e} F={n_f}")


# ---------------------------------------------------------------------------
# Faces
# ---------------------------------------------------------------------------


def faces(system: RotationSystem) -> list[Face]:
    """All face walks; exactly one face is flagged outer.

    The outer face is the longest one, ties going to the face containing the
    smallest vertex id, then to the earliest traced.
    """
    walks: list[tuple[tuple[int, int | None], ...]] = []
    used: set[tuple[int, int]] = set()
    darts = sorted((v, e) for v, r in system.rotation.items() for e in r)
    for start in darts:
        if start in used:
            continue
        walk = []
        dart = start
        while dart not in used:
            used.add(dart)
            walk.append(dart)
            v, e = dart
            w = system.other(e, v)
            dart = (w, system.successor(w, e))
        walks.append(tuple(walk))
    for v, r in system.rotation.items():
        if not r:
            walks.append(((v, None),))
    if not walks:
        return []

    def outer_key(i: int) -> tuple[int, int, int]:
        walk = walks[i]
        length = sum(1 for _, e in walk if e is not None)
        return (-length, min(v for v, _ in walk), i)

    outer = min(range(len(walks)), key=outer_key)
    return [Face(i, w, i == outer) for i, w in enumerate(walks)]


def dual_adjacency(face_list: list[Face]) -> dict[int, set[int]]:
    """Faces sharing at least one edge; a face is never its own neighbour."""
    by_edge: dict[int, set[int]] = {}
    for f in face_list:
        for e in f.edges:
            by_edge.setdefault(e, set()).add(f.index)
    adj: dict[int, set[int]] = {f.index: set() for f in face_list}
    for owners in by_edge.values():
        if len(owners) == 2:
            x, y = owners
            adj[x].add(y)
            adj[y].add(x)
    return adj


def face_labels(face_list: list[Face], adjacency: dict[int, set[int]] | None = None) -> dict[int, int]:
    """Breadth-first distance of every face from the outer face in the dual graph."""
    if adjacency is None:
        adjacency = dual_adjacency(face_list)
    outer = [f.index for f in face_list if f.is_outer]
    if len(outer) != 1:
        raise ValueError("exactly one outer face required")
    labels = {outer[0]: 0}
    queue = deque(outer)
    while queue:
        f = queue.popleft()
        for g in sorted(adjacency[f]):
            if g not in labels:
                labels[g] = labels[f] + 1
                queue.append(g)
    return labels


# ---------------------------------------------------------------------------
# Minimally adjacent faces
# ---------------------------------------------------------------------------


def shared_boundary(f1: Face, f2: Face, degree: dict[int, int]) -> SharedBoundaryPath | None:
    """``B(f1) ∩ B(f2)`` as a path, or None if it is not a single path with >= 1 edge.

    Also None when the path's interior has a vertex of degree != 2 or an
    endpoint of degree < 3 (``degree`` is taken in the whole graph).
    """
    shared_e = f1.edges & f2.edges
    shared_v = f1.vertices & f2.vertices
    if not shared_e:
        return None
    ends: dict[int, tuple[int, int]] = {}
    for walk in (f1.boundary, f2.boundary):
        for i, (v, e) in enumerate(walk):
            if e in shared_e:
                ends[e] = (v, walk[(i + 1) % len(walk)][0])
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in shared_v}
    for e, (a, b) in ends.items():
        adj[a].append((b, e))
        adj[b].append((a, e))
    if len(shared_v) != len(shared_e) + 1 or any(len(n) > 2 or not n for n in adj.values()):
        return None
    tips = sorted(v for v, n in adj.items() if len(n) == 1)
    if len(tips) != 2:
        return None
    path_v = [tips[0]]
    path_e: list[int] = []
    prev = None
    while len(path_v) <= len(shared_v):
        step = [(w, e) for w, e in adj[path_v[-1]] if e != prev]
        if not step:
            break
        w, e = step[0]
        path_v.append(w)
        path_e.append(e)
        prev = e
    if len(path_v) != len(shared_v) or path_v[-1] != tips[1]:
        return None
    interior = path_v[1:-1]
    if any(degree[x] != 2 for x in interior) or degree[path_v[0]] < 3 or degree[path_v[-1]] < 3:
        return None
    return SharedBoundaryPath(path_v[0], path_v[-1], tuple(interior), tuple(path_e))


def minimally_adjacent_faces(system: RotationSystem, d: DisplayGraph) -> tuple[Face, Face, SharedBoundaryPath]:
    """Pick two bounded, minimally adjacent faces by dual-distance labels.

    ``F1`` has the maximum label ``k``; ``F2`` is adjacent to it and has the
    largest label among faces adjacent to any label-``k`` face.  Ties go to
    the lexicographically smallest ``(F1, F2)`` index pair.  The pair is
    checked before it is returned: neither face outer, shared boundary a
    single path, interior degree 2, endpoint degree >= 3, and at most one
    taxon in the interior.
    """
    face_list = faces(system)
    if len(_components(system)) != 1:
        raise ValueError("minimally adjacent faces need a connected graph")
    adjacency = dual_adjacency(face_list)
    labels = face_labels(face_list, adjacency)
    k = max(labels.values())
    candidates = [
        (f1, f2) for f1 in sorted(labels) if labels[f1] == k for f2 in sorted(adjacency[f1]) if f2 != f1
    ]
    if k == 0 or not candidates:
        raise ValueError("no pair of adjacent bounded faces; the graph is not a cleaned treewidth-2 graph")
    best = max(labels[f2] for _, f2 in candidates)
    f1_i, f2_i = min((f1, f2) for f1, f2 in candidates if labels[f2] == best)
    f1, f2 = face_list[f1_i], face_list[f2_i]
    if f1.is_outer or f2.is_outer:
        raise ValueError("selected face pair includes the outer face")
    degree = {v: len(r) for v, r in system.rotation.items()}
    path = shared_boundary(f1, f2, degree)
    if path is None:
        raise ValueError(f"faces {f1_i} and {f2_i} are adjacent but not minimally adjacent")
    if sum(1 for x in path.interior if d.is_taxon(x)) > 1:
        raise ValueError("more than one taxon inside the shared boundary path")
    return f1, f2, path


def face_census(system: RotationSystem) -> list[tuple[Face, int]]:
    """Faces paired with their dual-distance labels, in trace order."""
    face_list = faces(system)
    labels = face_labels(face_list) if face_list else {}
    return [(f, labels.get(f.index, -1)) for f in face_list]

