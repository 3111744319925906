"""Finite multi-digraph kernel.

Everything here is deterministic: vertices carry the order in which they are
listed and edges the order of the edge list (their *rank*). Searches break
ties by the smallest rank.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import EmptySide, NotStronglyConnected, UnknownVertex


class EdgeKind(str, enum.Enum):
    CONCRETE = "concrete"
    QUOTIENT = "quotient"


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    kind: EdgeKind = EdgeKind.CONCRETE
    origin: str | None = None


@dataclass(frozen=True)
class MultiDigraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        seen = set()
        for v in self.vertices:
            if v in seen:
                raise ValueError(f"duplicate vertex {v!r}")
            seen.add(v)
        ids = set()
        quotient_pairs = set()
        for e in self.edges:
            if e.id in ids:
                raise ValueError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
            if e.tail not in seen or e.head not in seen:
                raise ValueError(f"edge {e.id!r} has an endpoint outside the vertex list")
            if e.tail == e.head:
                raise ValueError(f"edge {e.id!r} is a loop")
            if e.kind is EdgeKind.QUOTIENT:
                if (e.tail, e.head) in quotient_pairs:
                    raise ValueError(f"second quotient edge {e.tail!r}->{e.head!r}")
                quotient_pairs.add((e.tail, e.head))

    @classmethod
    def from_pairs(cls, vertices: Iterable[str], pairs: Iterable[tuple[str, str]]) -> "MultiDigraph":
        """Build a graph with concrete edges named ``e0, e1, ...``."""
        edges = tuple(Edge(f"e{i}", a, b) for i, (a, b) in enumerate(pairs))
        return cls(tuple(vertices), edges)

    @cached_property
    def order(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def rank(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    @cached_property
    def edge_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.tail].append(e)
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[Edge, ...]]:
        inc: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            inc[e.head].append(e)
        return {v: tuple(es) for v, es in inc.items()}

    def has_vertex(self, v: str) -> bool:
        return v in self.order

    def induced(self, keep: Iterable[str]) -> "MultiDigraph":
        keep = set(keep)
        return MultiDigraph(
            tuple(v for v in self.vertices if v in keep),
            tuple(e for e in self.edges if e.tail in keep and e.head in keep),
        )

    def without(self, drop: Iterable[str]) -> "MultiDigraph":
        drop = set(drop)
        return self.induced(v for v in self.vertices if v not in drop)


@dataclass(frozen=True)
class Cut:
    side1: frozenset[str]
    side2: frozenset[str]
    forward_size: int
    backward_size: int

    @property
    def balanced(self) -> bool:
        return self.forward_size == self.backward_size


@dataclass(frozen=True)
class Walk:
    """Alternating vertex/edge sequence; ``len(vertices) == len(edges) + 1``."""

    vertices: tuple[str, ...]
    edges: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise ValueError("a walk has exactly one more vertex than edges")

    @classmethod
    def empty(cls, vertex: str) -> "Walk":
        return cls((vertex,), ())

    @classmethod
    def from_edges(cls, g: MultiDigraph, start: str, edge_ids: Sequence[str]) -> "Walk":
        vertices = [start]
        for eid in edge_ids:
            vertices.append(g.edge_by_id[eid].head)
        return cls(tuple(vertices), tuple(edge_ids))

    @property
    def closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    @property
    def start(self) -> str:
        return self.vertices[0]

    def __len__(self) -> int:
        return len(self.edges)

    def to_list(self) -> list[str]:
        out = [self.vertices[0]]
        for e, v in zip(self.edges, self.vertices[1:]):
            out += [e, v]
        return out

    @classmethod
    def from_list(cls, items: Sequence[str]) -> "Walk":
        if len(items) % 2 == 0:
            raise ValueError("alternating walk list must have odd length")
        return cls(tuple(items[0::2]), tuple(items[1::2]))


@dataclass(frozen=True)
class Components:
    """Strong components; ``members[i]`` is component ``i``, listed in topological order."""

    label: dict[str, int]
    members: tuple[tuple[str, ...], ...]

    def __len__(self) -> int:
        return len(self.members)


def strong_components(g: MultiDigraph) -> Components:
    """Tarjan's algorithm, iterative, components in topological order of the condensation."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    found: list[list[str]] = []
    counter = 0

    for root in g.vertices:
        if root in index:
            continue
        work = [(root, iter(g.out_edges[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for e in it:
                w = e.head
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(g.out_edges[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                found.append(comp)

    # Tarjan emits sinks first.
    found.reverse()
    members = tuple(tuple(sorted(c, key=g.order.__getitem__)) for c in found)
    label = {v: i for i, comp in enumerate(members) for v in comp}
    return Components(label, members)


def condensation(g: MultiDigraph, comps: Components | None = None) -> MultiDigraph:
    """Condensation with one edge per ordered component pair; vertices are ``"K<i>"``."""
    comps = comps or strong_components(g)
    names = tuple(f"K{i}" for i in range(len(comps)))
    pairs = []
    seen = set()
    for e in g.edges:
        a, b = comps.label[e.tail], comps.label[e.head]
        if a != b and (a, b) not in seen:
            seen.add((a, b))
            pairs.append((names[a], names[b]))
    return MultiDigraph.from_pairs(names, pairs)


def reachable(g: MultiDigraph, start: str, reverse: bool = False) -> set[str]:
    adj = g.in_edges if reverse else g.out_edges
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for e in adj[v]:
            w = e.tail if reverse else e.head
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def is_strongly_connected(g: MultiDigraph) -> bool:
    return len(g.vertices) <= 1 or len(strong_components(g)) == 1


def unreachable_pair(g: MultiDigraph) -> tuple[str, str] | None:
    """A pair ``(v, w)`` with no ``v -> w`` path, or None if ``g`` is strongly connected.

    ``v`` is the first vertex of the last (sink) component in topological order and
    ``w`` the first vertex it cannot reach, so the witness points back against the flow.
    """
    comps = strong_components(g)
    if len(comps) <= 1:
        return None
    v = comps.members[-1][0]
    reach = reachable(g, v)
    w = next(u for u in g.vertices if u not in reach)
    return (v, w)


def cut_sizes(g: MultiDigraph, side1: Iterable[str]) -> Cut:
    s1 = frozenset(side1)
    for v in s1:
        if not g.has_vertex(v):
            raise UnknownVertex(v)
    s2 = frozenset(v for v in g.vertices if v not in s1)
    if not s1 or not s2:
        raise EmptySide("both sides of a cut must be non-empty")
    forward = sum(1 for e in g.edges if e.tail in s1 and e.head in s2)
    backward = sum(1 for e in g.edges if e.tail in s2 and e.head in s1)
    return Cut(s1, s2, forward, backward)


def vertex_degrees(g: MultiDigraph, v: str) -> tuple[int, int]:
    """``(in-degree, out-degree)`` counting parallel edges."""
    if not g.has_vertex(v):
        raise UnknownVertex(v)
    return len(g.in_edges[v]), len(g.out_edges[v])


def underlying_connected(g: MultiDigraph) -> bool:
    """Whether the non-isolated vertices lie in one component of the underlying graph."""
    active = [v for v in g.vertices if g.out_edges[v] or g.in_edges[v]]
    if not active:
        return True
    seen = {active[0]}
    queue = deque([active[0]])
    while queue:
        v = queue.popleft()
        for e in g.out_edges[v] + g.in_edges[v]:
            for w in (e.tail, e.head):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return all(v in seen for v in active)


def degree_balanced(g: MultiDigraph) -> bool:
    return all(len(g.in_edges[v]) == len(g.out_edges[v]) for v in g.vertices)


def default_anchor(g: MultiDigraph) -> str | None:
    for v in g.vertices:
        if g.out_edges[v]:
            return v
    return g.vertices[0] if g.vertices else None


def find_euler_tour(g: MultiDigraph, anchor: str | None = None) -> Walk | None:
    """Hierholzer's cycle splicing, always taking the unused out-edge of lowest rank.

    Returns ``None`` when no closed walk uses every edge exactly once (from
    ``anchor`` when one is given).
    """
    if anchor is None:
        anchor = default_anchor(g)
        if anchor is None:
            return None
    elif not g.has_vertex(anchor):
        raise UnknownVertex(anchor)
    if not g.edges:
        return Walk.empty(anchor)
    if not degree_balanced(g) or not underlying_connected(g) or not g.out_edges[anchor]:
        return None

    next_out = {v: 0 for v in g.vertices}
    stack: list[tuple[str, str | None]] = [(anchor, None)]
    circuit: list[tuple[str, str | None]] = []
    while stack:
        v, via = stack[-1]
        outs = g.out_edges[v]
        if next_out[v] < len(outs):
            e = outs[next_out[v]]
            next_out[v] += 1
            stack.append((e.head, e.id))
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    edge_ids = tuple(eid for _, eid in circuit[1:])
    return Walk(tuple(v for v, _ in circuit), edge_ids)


def _remaining_reachable(g: MultiDigraph, at: str, used: set[str], n_left: int) -> bool:
    """All unused edges hang off the part reachable from ``at`` through unused edges."""
    if n_left == 0:
        return True
    seen = {at}
    queue = [at]
    count = 0
    while queue:
        v = queue.pop()
        for e in g.out_edges[v]:
            if e.id in used:
                continue
            count += 1
            if e.head not in seen:
                seen.add(e.head)
                queue.append(e.head)
    return count == n_left


def euler_tours(g: MultiDigraph, anchor: str, step=None) -> Iterator[Walk]:
    """Generate anchored Euler tours in lexicographic order of edge ranks.

    ``step(edge, state)`` may veto extending a partial tour; it returns the
    new state or ``None``. ``state`` starts as ``0``; a finished tour is
    yielded only if ``step(None, state)`` is not ``None``.
    """
    if not g.has_vertex(anchor):
        raise UnknownVertex(anchor)
    total = len(g.edges)
    if total == 0:
        if step is None or step(None, 0) is not None:
            yield Walk.empty(anchor)
        return
    if not degree_balanced(g) or not underlying_connected(g) or not g.out_edges[anchor]:
        return

    used: set[str] = set()
    path: list[str] = []

    def extend(v: str, state) -> Iterator[Walk]:
        if len(path) == total:
            if v == anchor and (step is None or step(None, state) is not None):
                yield Walk.from_edges(g, anchor, path)
            return
        for e in g.out_edges[v]:
            if e.id in used:
                continue
            new_state = state if step is None else step(e, state)
            if new_state is None:
                continue
            used.add(e.id)
            path.append(e.id)
            if _remaining_reachable(g, e.head, used, total - len(path)):
                yield from extend(e.head, new_state)
            path.pop()
            used.discard(e.id)

    yield from extend(anchor, 0)


def enumerate_euler_tours(g: MultiDigraph, anchor: str, limit: int) -> tuple[list[Walk], bool]:
    """Up to ``limit`` anchored Euler tours in canonical order, plus an overflow flag."""
    tours = list(itertools.islice(euler_tours(g, anchor), limit + 1))
    overflow = len(tours) > limit
    return tours[:limit], overflow


def shortest_path(g: MultiDigraph, source: str, target: str, allowed: set[str] | None = None) -> list[str] | None:
    """Edge ids of a BFS-shortest path; earlier-ranked edges win ties."""
    if source == target:
        return []
    parent: dict[str, tuple[str, str]] = {}
    seen = {source}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for e in g.out_edges[v]:
            w = e.head
            if w in seen or (allowed is not None and w not in allowed):
                continue
            seen.add(w)
            parent[w] = (v, e.id)
            if w == target:
                path = []
                while w != source:
                    w, eid = parent[w]
                    path.append(eid)
                return path[::-1]
            queue.append(w)
    return None


def closed_spanning_walk(g: MultiDigraph, anchor: str | None = None) -> Walk:
    """Closed walk from ``anchor`` through every vertex.

    Unvisited vertices are reached in vertex order along shortest paths.
    """
    if not g.vertices:
        raise ValueError("empty graph has no spanning walk")
    anchor = g.vertices[0] if anchor is None else anchor
    if not g.has_vertex(anchor):
        raise UnknownVertex(anchor)
    pair = unreachable_pair(g)
    if pair is not None:
        raise NotStronglyConnected(pair)
    edges: list[str] = []
    visited = {anchor}
    here = anchor
    for target in g.vertices:
        if target in visited:
            continue
        for eid in shortest_path(g, here, target):
            edges.append(eid)
            visited.add(g.edge_by_id[eid].head)
        here = target
    edges += shortest_path(g, here, anchor)
    return Walk.from_edges(g, anchor, edges)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    violation: str | None = None
    index: int | None = None
    detail: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        out: dict = {"ok": self.ok}
        if not self.ok:
            out["violation"] = self.violation
            out["index"] = self.index
            out.update(self.detail)
        return out


def is_valid_walk(
    g: MultiDigraph,
    w: Walk,
    closed: bool = False,
    spanning: bool = False,
    eulerian: bool = False,
) -> Verdict:
    """Check ``w`` on ``g``; ``index`` is the edge position (or vertex position) at fault."""
    if not g.has_vertex(w.vertices[0]):
        return Verdict(False, "unknown_vertex", 0)
    seen_edges: set[str] = set()
    for i, (eid, v, u) in enumerate(zip(w.edges, w.vertices, w.vertices[1:])):
        e = g.edge_by_id.get(eid)
        if e is None:
            return Verdict(False, "unknown_edge", i)
        if e.tail != v or e.head != u:
            return Verdict(False, "incidence", i)
        if eulerian and eid in seen_edges:
            return Verdict(False, "repeated_edge", i)
        seen_edges.add(eid)
    if closed and not w.closed:
        return Verdict(False, "not_closed", len(w.edges))
    if eulerian and len(seen_edges) != len(g.edges):
        missing = next(e.id for e in g.edges if e.id not in seen_edges)
        return Verdict(False, "missing_edge", len(w.edges), {"edge": missing})
    if spanning:
        visited = set(w.vertices)
        for i, v in enumerate(g.vertices):
            if v not in visited:
                return Verdict(False, "spanning", i, {"vertex": v})
    return Verdict(True)
