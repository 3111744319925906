"""Ends, limit edges and the necklace/rank dichotomy, approximated level by level.

An end is tracked as a vertex-direction thread: one infinite strong component
of ``D - X_n`` per level, nested under the bonding maps. A limit edge is an
edge-direction thread: at every level where its endpoints are separated it
lives in a bundle, otherwise inside the common component.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .core import MultiDigraph, Verdict, is_strongly_connected, strong_components
from .errors import (
    INF,
    BadParams,
    Certainty,
    DepthExceeded,
    InvariantViolation,
    NonSolidAtLevel,
    UnknownComponent,
    count_json,
)
from .quotient import QuotientLevel, bonding_between, build_chain, quotient_edge_id
from .sources import ALL_VERTICES, ComponentReport, Source, VertexSet, solidity_check

# --------------------------------------------------------------------------- #
# Component tree and threads


@dataclass(frozen=True)
class ComponentNode:
    n: int
    id: str
    size: float
    parent: str | None
    representative: str

    @property
    def infinite(self) -> bool:
        return self.size == INF

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "id": self.id,
            "size": count_json(self.size),
            "parent": self.parent,
            "representative": self.representative,
        }


def solid_chain(source: Source, N: int) -> list[QuotientLevel]:
    """Levels ``0..N`` built from strong components only (no custom chain)."""
    return build_chain(source, N, allow_custom=False)


def component_tree(source: Source, N: int, levels: list[QuotientLevel] | None = None) -> list[list[ComponentNode]]:
    levels = levels if levels is not None else solid_chain(source, N)
    tree: list[list[ComponentNode]] = []
    for lv in levels:
        prev = levels[lv.n - 1] if lv.n > 0 else None
        nodes = []
        for c in lv.classes:
            if c.kind == "singleton":
                continue
            parent = prev.locate(c.representative) if prev is not None else None
            nodes.append(ComponentNode(lv.n, c.id, c.size, parent, c.representative))
        tree.append(nodes)
    return tree


@dataclass(frozen=True)
class EndThread:
    """Vertex-direction thread: ``components[n]`` is the end's component at level ``n``."""

    index: int
    components: tuple[str, ...]
    certainty: Certainty

    kind = "vertex"

    @property
    def depth(self) -> int:
        return len(self.components) - 1

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "index": self.index,
            "levels": [{"n": n, "component": c} for n, c in enumerate(self.components)],
            "certainty": self.certainty.value,
        }


@dataclass(frozen=True)
class LimitEdgeThread:
    """Edge-direction thread.

    Endpoints are ``("end", index)`` or ``("vertex", id)``; a limit edge between
    two vertices does not exist, so at least one endpoint is an end. Each level
    entry is ``("bundle", quotient edge id)`` or ``("component", class id)``.
    """

    tail: tuple[str, str]
    head: tuple[str, str]
    levels: tuple[tuple[str, str], ...]
    certainty: Certainty

    kind = "edge"

    def __post_init__(self):
        if self.tail[0] == "vertex" and self.head[0] == "vertex":
            raise BadParams("a limit edge needs at least one end")

    @property
    def endpoint_kind(self) -> str:
        if self.tail[0] == "end" and self.head[0] == "end":
            return "end-end"
        return "vertex-end" if self.tail[0] == "vertex" else "end-vertex"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "tail": {self.tail[0]: _endpoint_value(self.tail)},
            "head": {self.head[0]: _endpoint_value(self.head)},
            "levels": [{"n": n, where: ref} for n, (where, ref) in enumerate(self.levels)],
            "certainty": self.certainty.value,
        }


def _endpoint_value(p: tuple[str, str]):
    return int(p[1]) if p[0] == "end" else p[1]


def end_threads(source: Source, N: int, levels: list[QuotientLevel] | None = None) -> list[EndThread]:
    levels = levels if levels is not None else solid_chain(source, N)
    tree = component_tree(source, N, levels)
    certainty = Certainty.weakest(*(lv.certainty for lv in levels))
    by_level = [{node.id: node for node in nodes} for nodes in tree]
    threads = []
    for node in tree[-1]:
        if not node.infinite:
            continue
        chain = [node.id]
        cur = node
        while cur.parent is not None:
            cur = by_level[cur.n - 1][cur.parent]
            if not cur.infinite:
                raise InvariantViolation(f"infinite component {node.id} has finite ancestor {cur.id}")
            chain.append(cur.id)
        threads.append(tuple(reversed(chain)))
    # order ends by their classes from the coarsest level down
    positions = [{c.id: i for i, c in enumerate(lv.classes)} for lv in levels]
    threads.sort(key=lambda comps: [positions[n][c] for n, c in enumerate(comps)])
    return [EndThread(i, comps, certainty) for i, comps in enumerate(threads)]


def _vertex_class(lv: QuotientLevel, v: str) -> str:
    return v if v in lv.separator else lv.locate(v)


def limit_edge_threads(
    source: Source,
    N: int,
    levels: list[QuotientLevel] | None = None,
    ends: list[EndThread] | None = None,
) -> list[LimitEdgeThread]:
    """Limit edges detected on levels ``0..N``.

    A pair is reported when at every level separating it the level graph has a
    quotient edge in the right direction. Nonempty bundles at every separating
    set force infinite bundles (a finite bundle is killed by adding its heads
    to the separator), so requiring quotient edges is the same condition.
    """
    levels = levels if levels is not None else solid_chain(source, N)
    ends = ends if ends is not None else end_threads(source, N, levels)
    certainty = Certainty.weakest(*(lv.certainty for lv in levels))

    def trace(tail_at, head_at):
        out = []
        for lv in levels:
            a, b = tail_at(lv), head_at(lv)
            if a == b:
                out.append(("component", a))
                continue
            q = lv.quotient_edge(a, b)
            if q is None:
                return None
            out.append(("bundle", q.id))
        return tuple(out)

    found = []
    for w in ends:
        for e in ends:
            if w.index == e.index:
                continue
            levs = trace(lambda lv, w=w: w.components[lv.n], lambda lv, e=e: e.components[lv.n])
            if levs is not None:
                found.append(LimitEdgeThread(("end", str(w.index)), ("end", str(e.index)), levs, certainty))
    for v in levels[-1].separator:
        for e in ends:
            comp = lambda lv, e=e: e.components[lv.n]
            vert = lambda lv, v=v: _vertex_class(lv, v)
            levs = trace(vert, comp)
            if levs is not None:
                found.append(LimitEdgeThread(("vertex", v), ("end", str(e.index)), levs, certainty))
            levs = trace(comp, vert)
            if levs is not None:
                found.append(LimitEdgeThread(("end", str(e.index)), ("vertex", v), levs, certainty))
    return found


def thread_nesting(levels: list[QuotientLevel], thread: EndThread | LimitEdgeThread) -> Verdict:
    """Check that every level entry maps into the coarser ones under bonding."""
    for n in range(len(levels)):
        for m in range(n + 1):
            f = bonding_between(levels[n], levels[m])
            if isinstance(thread, EndThread):
                img = f.vertex_image(thread.components[n])
                if img != thread.components[m]:
                    return Verdict(False, "nesting", n, {"levels": [m, n], "got": img, "expected": thread.components[m]})
                continue
            where, ref = thread.levels[n]
            if where == "component":
                img = ("class", f.vertex_image(ref))
            else:
                img = f.edge_image(ref)
            want_where, want_ref = thread.levels[m]
            want = ("class", want_ref) if want_where == "component" else ("edge", want_ref)
            if img != want:
                return Verdict(False, "nesting", n, {"levels": [m, n], "got": list(img or ()), "expected": list(want)})
    return Verdict(True)


@dataclass
class EndSpace:
    depth: int
    levels: list[QuotientLevel]
    ends: list[EndThread]
    limit_edges: list[LimitEdgeThread]

    @property
    def certainty(self) -> Certainty:
        return Certainty.weakest(*(lv.certainty for lv in self.levels))

    def ends_per_level(self) -> list[int]:
        return [sum(1 for c in lv.classes if c.kind != "singleton" and c.infinite) for lv in self.levels]

    def to_json(self) -> dict:
        return {
            "ends": len(self.ends),
            "limit_edges": len(self.limit_edges),
            "depth": self.depth,
            "ends_per_level": self.ends_per_level(),
            "end_threads": [t.to_json() for t in self.ends],
            "limit_edge_threads": [t.to_json() for t in self.limit_edges],
            "certainty": self.certainty.value,
        }


def analyse_ends(source: Source, N: int) -> EndSpace:
    levels = solid_chain(source, N)
    ends = end_threads(source, N, levels)
    return EndSpace(len(levels) - 1, levels, ends, limit_edge_threads(source, N, levels, ends))


# --------------------------------------------------------------------------- #
# Basic open sets


@dataclass(frozen=True)
class BasicOpen:
    n: int
    component: str
    representative: str
    members: tuple[str, ...]  # members inside the oracle window
    ends: tuple[int, ...]
    limit_edges: tuple[int, ...]  # indices into the limit-edge list living in the component
    boundary: tuple[tuple[str, str, str, str], ...]  # (edge id, tail, head, kind)
    certainty: Certainty

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "component": self.component,
            "representative": self.representative,
            "window_members": list(self.members),
            "ends": list(self.ends),
            "limit_edges": list(self.limit_edges),
            "boundary": [{"id": i, "tail": t, "head": h, "kind": k} for i, t, h, k in self.boundary],
            "certainty": self.certainty.value,
        }


def basic_open(source: Source, end_index: int, n: int, depth: int) -> BasicOpen:
    """Combinatorial description of the basic open set around an end at level ``n``."""
    if n > depth:
        raise DepthExceeded(f"level {n} is deeper than the computed depth {depth}")
    space = analyse_ends(source, depth)
    if n >= len(space.levels):
        raise DepthExceeded(f"level {n} is deeper than the source allows")
    if not 0 <= end_index < len(space.ends):
        raise UnknownComponent(f"no end thread with index {end_index} (found {len(space.ends)})")
    lv = space.levels[n]
    cid = space.ends[end_index].components[n]
    residents = tuple(t.index for t in space.ends if t.components[n] == cid)
    living = tuple(i for i, t in enumerate(space.limit_edges) if t.levels[n] == ("component", cid))
    boundary = tuple(
        (e.id, e.tail, e.head, e.kind.value)
        for e in lv.graph.edges if (e.tail == cid) != (e.head == cid)
    )
    members = tuple(v for v, c in lv.class_of.items() if c == cid)
    return BasicOpen(
        n, cid, lv.class_by_id[cid].representative, members, residents, living, boundary, space.certainty,
    )


# --------------------------------------------------------------------------- #
# Necklaces


@dataclass(frozen=True)
class NecklacePrefix:
    beads: tuple[tuple[str, ...], ...]
    forward: tuple[tuple[str, ...], ...]  # vertex sequence of the path bead i -> bead i+1
    backward: tuple[tuple[str, ...], ...]  # vertex sequence of the path bead i+1 -> bead i
    attachment: tuple[tuple[str, ...], ...]  # names of the sets each bead meets
    sets: tuple[str, ...]
    depth: int

    def to_json(self) -> dict:
        return {
            "beads": [list(b) for b in self.beads],
            "forward_paths": [list(p) for p in self.forward],
            "backward_paths": [list(p) for p in self.backward],
            "attachment": [list(a) for a in self.attachment],
            "sets": list(self.sets),
            "depth": self.depth,
        }


def resolve_sets(source: Source, names: Iterable[str] | None) -> list[VertexSet]:
    available = source.designated_sets()
    if not names:
        return [ALL_VERTICES]
    out = []
    for name in names:
        if name not in available:
            raise BadParams(f"unknown vertex set {name!r} for {source.name}; available: {', '.join(available)}")
        out.append(available[name])
    return out


def _bfs_path(g: MultiDigraph, sources: set[str], targets: set[str], blocked: set[str]) -> tuple[str, ...] | None:
    """Shortest path from ``sources`` to ``targets`` with interior avoiding ``blocked``."""
    prev: dict[str, str | None] = {}
    queue = deque()
    for s in sorted(sources, key=g.order.__getitem__):
        prev[s] = None
        queue.append(s)
    while queue:
        v = queue.popleft()
        if v in targets:
            path = [v]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return tuple(reversed(path))
        if v not in sources and v in blocked:
            continue
        for e in g.out_edges[v]:
            w = e.head
            if w in prev:
                continue
            if w in blocked and w not in targets:
                continue
            prev[w] = v
            queue.append(w)
    return None


def necklace_search(
    source: Source, U_list: Sequence[VertexSet], beads: int, depth: int
) -> NecklacePrefix | None:
    """Greedy bounded search for a necklace attached to ``U_list``.

    Follows a nested chain of infinite components meeting every set of
    ``U_list`` infinitely; the beads are strongly connected pieces of the
    differences between consecutive distinct components, joined by shortest
    forward and backward paths inside ``D[X_depth]``.
    """
    if beads < 1:
        raise BadParams("beads must be positive")
    depth = source.clamp(depth)
    T = source.truncation(depth)
    reports: dict[int, ComponentReport] = {}

    def report(n: int) -> ComponentReport:
        if n not in reports:
            reports[n] = source.component_oracle(source.prefix(n), window=depth)
        return reports[n]

    def candidates(n: int, parent: str | None) -> list[str]:
        rep = report(n)
        out = []
        for cid in rep.infinite_ids():
            if parent is not None and report(n - 1).class_of(rep.representatives[cid]) != parent:
                continue
            if all(rep.intersection_infinite(cid, U)[0] for U in U_list):
                out.append(cid)
        return out

    def members(n: int, cid: str) -> set[str]:
        return {v for v in T.vertices if report(n).class_of(v) == cid}

    # depth-first search for a chain with beads+1 distinct components
    def chain_from(n: int, cid: str, found: list[tuple[int, str]]) -> list[tuple[int, str]] | None:
        found = found + [(n, cid)]
        if len(found) > beads:
            return found
        for nxt in range(n + 1, depth):
            options = candidates(nxt, None)
            options = [c for c in options if _nested(report, n, cid, nxt, c)]
            if not options:
                return None
            changed = [c for c in options if members(nxt, c) != members(n, cid)]
            if changed:
                for c in changed:
                    got = chain_from(nxt, c, found)
                    if got is not None:
                        return got
                return None
        return None

    chain = None
    for cid in candidates(0, None):
        chain = chain_from(0, cid, [])
        if chain is not None:
            break
    if chain is None:
        return None

    bead_list: list[tuple[str, ...]] = []
    previous: set[str] | None = None
    for (n, cid), (n2, cid2) in zip(chain, chain[1:]):
        diff = members(n, cid) - members(n2, cid2)
        bead = _pick_bead(T, diff, U_list, previous)
        if bead is None:
            return None
        bead_list.append(bead)
        previous = set(bead)
        if len(bead_list) == beads:
            break
    if len(bead_list) < beads:
        return None

    used = set().union(*map(set, bead_list))
    forward, backward = [], []
    for a, b in zip(bead_list, bead_list[1:]):
        for store, s_set, t_set in ((forward, set(a), set(b)), (backward, set(b), set(a))):
            path = _bfs_path(T, s_set, t_set, used)
            if path is None:
                return None
            used |= set(path[1:-1])
            store.append(path)
    attachment = tuple(tuple(U.name for U in U_list if any(U(v) for v in bead)) for bead in bead_list)
    return NecklacePrefix(
        tuple(bead_list), tuple(forward), tuple(backward), attachment,
        tuple(U.name for U in U_list), depth,
    )


def _nested(report, n: int, cid: str, m: int, cid2: str) -> bool:
    rep = report(m).representatives[cid2]
    return report(n).class_of(rep) == cid


def _pick_bead(T: MultiDigraph, diff: set[str], U_list, previous: set[str] | None) -> tuple[str, ...] | None:
    if not diff:
        return None
    sub = T.induced(sorted(diff, key=T.order.__getitem__))
    comps = strong_components(sub).members

    def score(comp):
        met = sum(1 for U in U_list if any(U(v) for v in comp))
        first = min(T.order[v] for v in comp)
        return (-met, first)

    for comp in sorted(comps, key=score):
        if previous is None:
            return tuple(sorted(comp, key=T.order.__getitem__))
        cs = set(comp)
        fwd = _bfs_path(T, previous, cs, set())
        back = _bfs_path(T, cs, previous, set())
        if fwd is not None and back is not None:
            return tuple(sorted(comp, key=T.order.__getitem__))
    return None


def verify_necklace(
    source: Source, p: NecklacePrefix, depth: int, U_list: Sequence[VertexSet] | None = None
) -> Verdict:
    """Re-check a necklace prefix inside ``D[X_depth]``."""
    T = source.truncation(depth)
    for bead in p.beads:
        for v in bead:
            if not T.has_vertex(v):
                raise DepthExceeded(f"bead vertex {v} lies outside the first {depth} vertices")
    for path in p.forward + p.backward:
        for v in path:
            if not T.has_vertex(v):
                raise DepthExceeded(f"path vertex {v} lies outside the first {depth} vertices")
    if U_list is None:
        U_list = resolve_sets(source, p.sets)

    seen: dict[str, int] = {}
    for i, bead in enumerate(p.beads):
        if not bead:
            return Verdict(False, "strong_connectivity", i, {"message": "empty bead"})
        for v in bead:
            if v in seen:
                return Verdict(False, "disjointness", i, {"vertex": v, "beads": [seen[v], i]})
            seen[v] = i
    for i, bead in enumerate(p.beads):
        if not is_strongly_connected(T.induced(bead)):
            return Verdict(False, "strong_connectivity", i, {"bead": list(bead)})
    if len(p.forward) != len(p.beads) - 1 or len(p.backward) != len(p.beads) - 1:
        which = "forward_path" if len(p.forward) != len(p.beads) - 1 else "backward_path"
        return Verdict(False, which, min(len(p.forward), len(p.backward)), {"message": "missing connecting path"})

    interior: dict[str, str] = {}
    for name, paths, step in (("forward_path", p.forward, 1), ("backward_path", p.backward, -1)):
        for i, path in enumerate(paths):
            a, b = (set(p.beads[i]), set(p.beads[i + 1])) if step == 1 else (set(p.beads[i + 1]), set(p.beads[i]))
            if len(path) < 2 or path[0] not in a or path[-1] not in b:
                return Verdict(False, name, i, {"path": list(path)})
            for x, y in zip(path, path[1:]):
                if not any(e.head == y for e in T.out_edges[x]):
                    return Verdict(False, name, i, {"missing_edge": [x, y]})
            for v in path[1:-1]:
                if v in seen:
                    return Verdict(False, name, i, {"vertex": v, "message": "path runs through a bead"})
                key = f"{name}:{i}"
                if v in interior and interior[v] != key:
                    return Verdict(False, "path_disjointness", i, {"vertex": v})
                interior[v] = key
    for i, bead in enumerate(p.beads):
        actual = tuple(U.name for U in U_list if any(U(v) for v in bead))
        if i >= len(p.attachment) or tuple(p.attachment[i]) != actual:
            return Verdict(False, "attachment", i, {"recorded": list(p.attachment[i]) if i < len(p.attachment) else None, "actual": list(actual)})
    return Verdict(True)


# --------------------------------------------------------------------------- #
# Rank


@dataclass
class RankResult:
    rank: int | None  # None means no rank up to r_max
    r_max: int
    witness: dict | None
    certainty: Certainty
    sets: tuple[str, ...] = ()

    @property
    def outcome(self) -> str:
        return "rank" if self.rank is not None else "no_rank"

    def to_json(self) -> dict:
        out = {"outcome": self.outcome, "r_max": self.r_max, "sets": list(self.sets)}
        if self.rank is not None:
            out["rank"] = self.rank
            out["witness"] = self.witness
        out["certainty"] = self.certainty.value
        return out


@dataclass
class _Piece:
    """A strong component of ``D - X`` (``cid is None`` stands for ``D`` itself)."""

    X: frozenset[int]
    report: ComponentReport | None
    cid: str | None


@dataclass
class _RankSearch:
    source: Source
    U_list: Sequence[VertexSet]
    sep_bound: int
    depth: int
    memo: dict = field(default_factory=dict)
    certainty: Certainty = Certainty.EXACT

    def __post_init__(self):
        self.depth = self.source.clamp(self.depth)
        self.key_bound = self.source.clamp(self.depth + 2 * self.source.period)

    def oracle(self, X: frozenset[int]) -> ComponentReport:
        rep = self.source.component_oracle([self.source.vertex(i) for i in sorted(X)], window=self.key_bound)
        self.certainty = Certainty.weakest(self.certainty, rep.certainty)
        return rep

    def members(self, piece: _Piece, bound: int) -> list[int]:
        if piece.cid is None:
            return list(range(bound))
        return [i for i in range(bound) if i not in piece.X and piece.report._ext.get(i) == piece.cid]

    def key(self, piece: _Piece):
        # Pieces are identified by their trace on a fixed prefix: for periodic
        # sources two components that agree there agree everywhere.
        size = INF if piece.cid is None else piece.report.sizes[piece.cid]
        return (frozenset(self.members(piece, self.key_bound)), size == INF)

    def finite_set(self, piece: _Piece) -> str | None:
        if piece.cid is None:
            for U in self.U_list:
                counts = []
                for w in (self.key_bound, self.source.clamp(self.key_bound + self.source.period),
                          self.source.clamp(self.key_bound + 2 * self.source.period)):
                    counts.append(sum(1 for i in range(w) if U(self.source.vertex(i))))
                a, b, c = counts
                if not (a < b < c):
                    if a != c:
                        self.certainty = Certainty.PROVISIONAL
                    return U.name
            return None
        if piece.report.sizes[piece.cid] != INF:
            return self.U_list[0].name if self.U_list else None
        for U in self.U_list:
            infinite, cert = piece.report.intersection_infinite(piece.cid, U)
            self.certainty = Certainty.weakest(self.certainty, cert)
            if not infinite:
                return U.name
        return None

    def rank_at_most(self, piece: _Piece, r: int) -> dict | None:
        key = (self.key(piece), r)
        if key in self.memo:
            return self.memo[key]
        self.memo[key] = None  # guards against cycles through identical pieces
        result = self._rank_at_most(piece, r)
        self.memo[key] = result
        return result

    def _rank_at_most(self, piece: _Piece, r: int) -> dict | None:
        name = self.finite_set(piece)
        label = "D" if piece.cid is None else piece.cid
        if name is not None:
            return {"component": label, "rank": 0, "finite_set": name}
        if r == 0:
            return None
        inside = self.members(piece, self.depth)
        forced = [i for i in inside if INF in self.source.degree(self.source.vertex(i))[:2]]
        free = [i for i in inside if i not in forced]
        for size in range(0, self.sep_bound + 1):
            for extra in combinations(free, size):
                X2 = piece.X | frozenset(forced) | frozenset(extra)
                rep = self.oracle(X2)
                subs = []
                for cid, rep_vertex in rep.representatives.items():
                    if piece.cid is not None and piece.report.class_of(rep_vertex) != piece.cid:
                        continue
                    sub = self.rank_at_most(_Piece(X2, rep, cid), r - 1)
                    if sub is None:
                        break
                    subs.append(sub)
                else:
                    added = sorted(frozenset(forced) | frozenset(extra))
                    return {
                        "component": label,
                        "rank": 1 + max((s["rank"] for s in subs), default=-1),
                        "separator": [self.source.vertex(i) for i in added],
                        "components": subs,
                    }
        return None


def rank_search(
    source: Source, U_list: Sequence[VertexSet], r_max: int, sep_bound: int, depth: int
) -> RankResult:
    """Smallest ``r <= r_max`` such that ``D`` has ``U``-rank ``r``, within the search bounds.

    Separators range over subsets of ``X_depth`` inside the component, always
    including the component's vertices of infinite degree, plus at most
    ``sep_bound`` further vertices.
    """
    if r_max < 0 or sep_bound < 0:
        raise BadParams("r_max and sep_bound must be non-negative")
    search = _RankSearch(source, U_list, sep_bound, depth)
    whole = _Piece(frozenset(), None, None)
    for r in range(r_max + 1):
        found = search.rank_at_most(whole, r)
        if found is not None:
            return RankResult(found["rank"], r_max, found, search.certainty, tuple(U.name for U in U_list))
    return RankResult(None, r_max, None, search.certainty, tuple(U.name for U in U_list))


def certify_rank(source: Source, U_list: Sequence[VertexSet], witness: dict, X: Iterable[str] = ()) -> bool:
    """Re-check a rank witness tree produced by ``rank_search``."""
    X = list(X)
    if witness["rank"] == 0:
        U = {u.name: u for u in U_list}.get(witness["finite_set"])
        if U is None:
            return False
        if witness["component"] == "D":
            return False if not X and _grows_whole(source, U) else True
        rep = source.component_oracle(X)
        if witness["component"] not in rep.sizes:
            return False
        return not rep.intersection_infinite(witness["component"], U)[0]
    X2 = X + list(witness["separator"])
    rep = source.component_oracle(X2)
    listed = {w["component"]: w for w in witness["components"]}
    outer = source.component_oracle(X) if witness["component"] != "D" else None
    for cid, v in rep.representatives.items():
        if outer is not None and outer.class_of(v) != witness["component"]:
            continue
        sub = listed.get(cid)
        if sub is None or sub["rank"] >= witness["rank"]:
            return False
        if not certify_rank(source, U_list, sub, X2):
            return False
    return True


def _grows_whole(source: Source, U: VertexSet) -> bool:
    w = 8 * source.period
    counts = [sum(1 for i in range(source.clamp(k)) if U(source.vertex(i))) for k in (w, w + source.period, w + 2 * source.period)]
    return counts[0] < counts[1] < counts[2]


def solidity_sample(source: Source, N: int) -> list:
    """Solidity at every singleton ``{v}`` and every prefix ``X_n`` with ``n <= N``."""
    out = []
    for n in range(N + 1):
        out.append(solidity_check(source, source.prefix(n), N))
    for v in source.prefix(N):
        out.append(solidity_check(source, (v,), N))
    return out


__all__ = [
    "ComponentNode",
    "EndThread",
    "LimitEdgeThread",
    "EndSpace",
    "BasicOpen",
    "NecklacePrefix",
    "RankResult",
    "component_tree",
    "end_threads",
    "limit_edge_threads",
    "thread_nesting",
    "analyse_ends",
    "basic_open",
    "necklace_search",
    "verify_necklace",
    "rank_search",
    "certify_rank",
    "resolve_sets",
    "solidity_sample",
    "NonSolidAtLevel",
    "quotient_edge_id",
]
