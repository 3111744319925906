"""Euler tours and spanning closed walks as compatible threads of level walks.

A topological Euler tour of ``D`` is represented by its shadows: one Euler
tour per quotient level, each projecting onto the previous one once stationary
steps inside contracted classes are erased. Spanning closed walks are handled
the same way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .core import (
    MultiDigraph,
    Verdict,
    Walk,
    closed_spanning_walk,
    cut_sizes,
    euler_tours,
    is_valid_walk,
    shortest_path,
    strong_components,
    unreachable_pair,
)
from .errors import (
    INF,
    BadParams,
    Certainty,
    EmptySide,
    EulerConditionFailed,
    InvariantViolation,
    LevelMismatch,
    NotStronglyConnected,
    SideNotClassAligned,
    UnknownVertex,
    count_json,
)
from .quotient import BondingMap, QuotientLevel, bonding_between, build_chain
from .sources import FiniteSource, Source

FULL_CUT_LIMIT = 12

# --------------------------------------------------------------------------- #
# Euler condition


@dataclass(frozen=True)
class UnbalancedCut:
    side1: tuple[str, ...]
    side2: tuple[str, ...]
    forward: int
    backward: int
    level: int | None = None  # None: a cut of D itself

    def describe(self) -> str:
        where = "in D" if self.level is None else f"at level {self.level}"
        side = ", ".join(self.side1)
        return f"unbalanced cut {where}: {self.forward} edge(s) leave {{{side}}}, {self.backward} enter"

    def to_json(self) -> dict:
        return {"type": "unbalanced_cut", "forward": self.forward, "backward": self.backward}


@dataclass(frozen=True)
class InfiniteDegree:
    vertex: str
    in_degree: float
    out_degree: float

    def describe(self) -> str:
        return f"vertex {self.vertex} has in-degree {count_json(self.in_degree)} and out-degree {count_json(self.out_degree)}"

    def to_json(self) -> dict:
        return {
            "type": "infinite_degree",
            "vertex": self.vertex,
            "in": count_json(self.in_degree),
            "out": count_json(self.out_degree),
        }


@dataclass(frozen=True)
class Disconnected:
    level: int
    pair: tuple[str, str]

    def describe(self) -> str:
        return f"level {self.level} is disconnected: {self.pair[0]} and {self.pair[1]} lie in different parts"

    def to_json(self) -> dict:
        return {"type": "disconnected", "level": self.level, "pair": list(self.pair)}


@dataclass(frozen=True)
class EulerCheck:
    witness: UnbalancedCut | InfiniteDegree | Disconnected | None
    certainty: Certainty

    @property
    def ok(self) -> bool:
        return self.witness is None

    def to_json(self) -> dict:
        if self.ok:
            return {"verdict": "ok", "certainty": self.certainty.value}
        return {"verdict": "witness", "witness": self.witness.to_json(), "certainty": self.certainty.value}


def _underlying_split(g: MultiDigraph) -> tuple[str, str] | None:
    """Two non-isolated vertices in different weak components, if any."""
    active = [v for v in g.vertices if g.out_edges[v] or g.in_edges[v]]
    if len(active) < 2:
        return None
    start = active[0]
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for e in g.out_edges[v] + g.in_edges[v]:
            for w in (e.tail, e.head):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    for v in active:
        if v not in seen:
            return (start, v)
    return None


def condensation_cuts(g: MultiDigraph) -> Iterable[frozenset[str]]:
    """Predecessor-closed unions of strong components, one per component, in topological order."""
    comps = strong_components(g)
    preds: dict[int, set[int]] = {i: set() for i in range(len(comps))}
    for e in g.edges:
        a, b = comps.label[e.tail], comps.label[e.head]
        if a != b:
            preds[b].add(a)
    for k in range(len(comps)):
        closure, stack = {k}, [k]
        while stack:
            for p in preds[stack.pop()]:
                if p not in closure:
                    closure.add(p)
                    stack.append(p)
        side = frozenset(v for i in closure for v in comps.members[i])
        if 0 < len(side) < len(g.vertices):
            yield side


def _level_witness(lv: QuotientLevel) -> UnbalancedCut | Disconnected | None:
    g = lv.graph
    split = _underlying_split(g)
    if split is not None:
        return Disconnected(lv.n, split)
    for side in condensation_cuts(g):
        cut = cut_sizes(g, side)
        if not cut.balanced:
            return _cut_witness(g, cut, lv.n)
    return None


def _cut_witness(g: MultiDigraph, cut, level: int | None) -> UnbalancedCut:
    order = g.order
    return UnbalancedCut(
        tuple(sorted(cut.side1, key=order.__getitem__)),
        tuple(sorted(cut.side2, key=order.__getitem__)),
        cut.forward_size,
        cut.backward_size,
        level,
    )


def check_euler(source: Source, N: int) -> EulerCheck:
    """Euler condition up to depth ``N``: finite degrees and balanced cuts.

    Checked in this order: degrees of the first ``N`` vertices, singleton cuts
    of those vertices, then per level the connectivity of the level graph and
    the predecessor-closed cuts of its condensation. Small finite sources also
    get every bipartition checked.
    """
    certainty = Certainty.EXACT
    prefix = source.prefix(N)
    degrees = []
    for v in prefix:
        din, dout, cert = source.degree(v)
        certainty = Certainty.weakest(certainty, cert)
        if din == INF or dout == INF:
            return EulerCheck(InfiniteDegree(v, din, dout), certainty)
        degrees.append((v, din, dout))
    for v, din, dout in degrees:
        if din != dout:
            rest = tuple(u for u in source.prefix(source.clamp(N + 1)) if u != v)
            return EulerCheck(UnbalancedCut((v,), rest, int(dout), int(din)), certainty)

    if isinstance(source, FiniteSource) and source.size <= FULL_CUT_LIMIT:
        g = source.graph
        rest = g.vertices[1:]
        for r in range(0, len(rest)):
            for extra in combinations(rest, r):
                cut = cut_sizes(g, (g.vertices[0],) + extra)
                if not cut.balanced:
                    return EulerCheck(_cut_witness(g, cut, None), certainty)

    for lv in build_chain(source, N):
        certainty = Certainty.weakest(certainty, lv.certainty)
        witness = _level_witness(lv)
        if witness is not None:
            return EulerCheck(witness, certainty)
    return EulerCheck(None, certainty)


# --------------------------------------------------------------------------- #
# Threads


@dataclass
class Thread:
    """Compatible level walks ``walks[i]`` on ``levels[first + i]``."""

    kind: str  # "tour" or "walk"
    levels: list[QuotientLevel]
    first: int
    walks: list[Walk]
    complete: bool = True
    requested: int = 0

    @property
    def depth(self) -> int:
        return self.first + len(self.walks) - 1

    @property
    def certainty(self) -> Certainty:
        return Certainty.weakest(*(lv.certainty for lv in self.levels[self.first: self.depth + 1]))

    def walk(self, n: int) -> Walk:
        return self.walks[n - self.first]

    def to_json(self) -> dict:
        out_levels = []
        for i, w in enumerate(self.walks):
            n = self.first + i
            lv = self.levels[n]
            certs = {
                "eulerian" if self.kind == "tour" else "spanning": bool(
                    is_valid_walk(lv.graph, w, closed=True, spanning=self.kind == "walk", eulerian=self.kind == "tour")
                ),
            }
            if i > 0:
                proj = project_walk(bonding_between(lv, self.levels[n - 1]), w)
                certs["projects_to_previous"] = proj == self.walks[i - 1]
            out_levels.append({
                "n": n,
                "walk": w.to_list(),
                "certificates": certs,
                "certainty": lv.certainty.value,
            })
        return {
            "kind": self.kind,
            "depth": self.depth,
            "requested_depth": self.requested,
            "complete": self.complete,
            "levels": out_levels,
            "certainty": self.certainty.value,
        }


def project_walk(b: BondingMap, w: Walk) -> Walk:
    """Image of ``w`` under ``b`` with stationary steps erased."""
    vertices = [b.vertex_image(w.vertices[0])]
    edges = []
    for eid, v in zip(w.edges, w.vertices[1:]):
        img = b.edge_image(eid)
        if img is None:
            raise InvariantViolation(f"edge {eid} has no image at level {b.m}")
        kind, target = img
        if kind == "class":
            continue
        edges.append(target)
        vertices.append(b.vertex_image(v))
    return Walk(tuple(vertices), tuple(edges))


def _anchors(source: Source, levels: list[QuotientLevel], anchor: str | None) -> list[str]:
    base = levels[0]
    if anchor is None:
        # an isolated vertex can never carry a tour, so start at the first vertex with an edge
        g = source.truncation(levels[-1].window)
        rep = next((v for v in g.vertices if g.out_edges[v] or g.in_edges[v]), base.classes[0].representative)
    elif anchor in base.class_by_id:
        rep = base.class_by_id[anchor].representative
    else:
        raise UnknownVertex(anchor)
    return [lv.locate(rep) for lv in levels]


def lift_euler(source: Source, N: int, anchor: str | None = None, tour_limit: int = 64) -> Thread:
    """König search for Euler tours of levels ``0..N`` compatible under projection.

    Returns the deepest prefix found when no compatible chain reaches depth
    ``N``; ``complete`` tells the two apart.
    """
    if tour_limit < 1:
        raise BadParams("tour limit must be positive")
    check = check_euler(source, N)
    if not check.ok:
        raise EulerConditionFailed(check.witness)
    levels = build_chain(source, N)
    anchors = _anchors(source, levels, anchor)
    top = len(levels) - 1

    def tours_at(n: int, previous: Walk | None) -> Iterable[Walk]:
        g = levels[n].graph
        if previous is None:
            return euler_tours(g, anchors[n])
        f = bonding_between(levels[n], levels[n - 1])
        target = previous.edges

        def step(e, state):
            if e is None:
                return state if state == len(target) else None
            img = f.edge_map.get(e.id)
            if img is None:
                return None
            if img[0] == "class":
                return state
            if state < len(target) and target[state] == img[1]:
                return state + 1
            return None

        return euler_tours(g, anchors[n], step)

    def search(n: int, previous: Walk | None) -> list[Walk]:
        best: list[Walk] = []
        for tried, tour in enumerate(tours_at(n, previous), start=1):
            if n == top:
                return [tour]
            rest = search(n + 1, tour)
            if len(rest) == top - n:
                return [tour] + rest
            if 1 + len(rest) > len(best):
                best = [tour] + rest
            if tried >= tour_limit:
                break
        return best

    walks = search(0, None)
    return Thread("tour", levels, 0, walks, complete=len(walks) == top + 1, requested=N)


def span_walk(source: Source, N: int) -> Thread:
    """Closed spanning walks ``W_1, ..., W_N`` built by splicing.

    ``W_n`` keeps ``W_{n-1}`` outside the class ``C`` that loses the vertex
    ``v_n``; each visit ``e_i C e_{i+1}`` becomes ``f_i Q_i f_{i+1}`` where
    ``f_i`` are the lowest-ranked lifts and ``Q_i`` walks through every class
    of ``C/P_{v_n}`` before heading to the tail of ``f_{i+1}``.
    """
    if N < 1:
        raise BadParams("span-walk needs depth at least 1")
    levels = build_chain(source, N)
    for lv in levels[1:]:
        pair = unreachable_pair(lv.graph)
        if pair is not None:
            reps = tuple(lv.class_by_id[c].representative for c in pair)
            raise NotStronglyConnected(reps, level=lv.n)
    top = len(levels) - 1
    v0 = levels[1].locate(source.vertex(0))
    walks = [closed_spanning_walk(levels[1].graph, v0)]
    for n in range(2, top + 1):
        walks.append(_splice(levels[n - 1], levels[n], walks[-1], source.vertex(n - 1)))
    return Thread("walk", levels, 1, walks, complete=True, requested=N)


def _splice(coarse: QuotientLevel, fine: QuotientLevel, prev: Walk, v: str) -> Walk:
    f = bonding_between(fine, coarse)
    C = coarse.locate(v)
    inside = [c.id for c in fine.classes if f.vertex_map[c.id] == C]
    sub = fine.graph.induced(inside)
    allowed = set(inside)

    preimages: dict[str, list[str]] = {}
    for e in fine.graph.edges:
        img = f.edge_map[e.id]
        if img is not None and img[0] == "edge":
            preimages.setdefault(img[1], []).append(e.id)

    def lift(eid: str, tail: str | None) -> str:
        for cand in preimages.get(eid, ()):
            if tail is None or fine.graph.edge_by_id[cand].tail == tail:
                return cand
        raise InvariantViolation(f"edge {eid} of level {coarse.n} has no lift starting at {tail}")

    g = fine.graph
    edges: list[str] = []
    # the walk starts at v_0, a singleton class at every level
    start = here = prev.start
    for i, eid in enumerate(prev.edges):
        if prev.vertices[i] == C:
            continue  # the leaving edge was placed together with the entering one
        lifted = lift(eid, here)
        edges.append(lifted)
        here = g.edge_by_id[lifted].head
        if prev.vertices[i + 1] != C:
            continue
        # Q_i: tour the pieces of C, then walk to the tail of the next lift
        q = closed_spanning_walk(sub, here)
        edges.extend(q.edges)
        nxt = prev.edges[i + 1] if i + 1 < len(prev.edges) else prev.edges[0]
        out = next(
            (c for c in preimages.get(nxt, ()) if g.edge_by_id[c].tail in allowed),
            None,
        )
        if out is None:
            raise InvariantViolation(f"edge {nxt} has no lift leaving the pieces of {C}")
        path = shortest_path(sub, here, g.edge_by_id[out].tail)
        if path is None:
            raise NotStronglyConnected((here, g.edge_by_id[out].tail), level=fine.n)
        edges.extend(path)
        edges.append(out)
        here = g.edge_by_id[out].head
    return Walk.from_edges(g, start, edges)


def verify_thread(t: Thread) -> Verdict:
    """Per-level walk checks first, then every projection certificate."""
    for i, w in enumerate(t.walks):
        n = t.first + i
        g = t.levels[n].graph
        v = is_valid_walk(g, w, closed=True, spanning=t.kind == "walk", eulerian=t.kind == "tour")
        if not v:
            return Verdict(False, v.violation, n, {"position": v.index, **v.detail})
    for i in range(1, len(t.walks)):
        n = t.first + i
        f = bonding_between(t.levels[n], t.levels[n - 1])
        try:
            proj = project_walk(f, t.walks[i])
        except (LevelMismatch, InvariantViolation) as exc:
            return Verdict(False, "projection", n, {"message": str(exc)})
        if proj != t.walks[i - 1]:
            return Verdict(False, "projection", n, {"expected": t.walks[i - 1].to_list(), "got": proj.to_list()})
    return Verdict(True)


# --------------------------------------------------------------------------- #
# Jumping arcs


def _side_classes(lv: QuotientLevel, side: Iterable[str], name: str) -> set[str]:
    classes: set[str] = set()
    loose: dict[str, set[str]] = {}
    for x in side:
        if x in lv.class_by_id:
            classes.add(x)
        elif x in lv.class_of:
            loose.setdefault(lv.class_of[x], set()).add(x)
        else:
            raise UnknownVertex(x)
    for cid, verts in loose.items():
        if cid in classes:
            continue
        members = {v for v, c in lv.class_of.items() if c == cid}
        if verts != members or lv.class_by_id[cid].infinite:
            raise SideNotClassAligned(f"{name} cuts through class {cid}")
        classes.add(cid)
    if not classes:
        raise EmptySide(f"{name} is empty")
    return classes


def check_jumping_arc(lv: QuotientLevel, side1: Iterable[str], side2: Iterable[str], w: Walk) -> Verdict:
    """Every stretch of ``w`` from side 1 to side 2 must cross by an edge of the level graph."""
    s1 = _side_classes(lv, side1, "side1")
    s2 = _side_classes(lv, side2, "side2")
    if s1 & s2:
        raise SideNotClassAligned(f"sides share classes {sorted(s1 & s2)}")
    valid = is_valid_walk(lv.graph, w)
    if not valid:
        return valid
    last_in_s1 = None
    for i, v in enumerate(w.vertices):
        if v in s1:
            last_in_s1 = i
        elif v in s2:
            if last_in_s1 is not None:
                if last_in_s1 != i - 1:
                    return Verdict(False, "jump", last_in_s1, {"from": w.vertices[last_in_s1], "to": v})
                e = lv.graph.edge_by_id[w.edges[i - 1]]
                if e.tail not in s1 or e.head not in s2:
                    return Verdict(False, "jump", i - 1, {"edge": e.id})
            last_in_s1 = None
    return Verdict(True)
