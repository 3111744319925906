"""Quotient levels ``D/P_{X_n}`` and the bonding maps between them.

Level ``n`` contracts every strong component of ``D - X_n`` to one vertex and
keeps the vertices of ``X_n`` as singletons. Finite edge bundles between two
classes survive as parallel concrete edges; an infinite bundle becomes a single
quotient edge ``q:A>B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations_with_replacement
from typing import Iterable

from .core import Edge, EdgeKind, MultiDigraph, Verdict
from .errors import (
    INF,
    BoundExceeded,
    Certainty,
    InvariantViolation,
    LevelMismatch,
    NonSolidAtLevel,
    count_json,
)
from .sources import ComponentReport, Source, solidity_check

MAX_BUNDLE = 10_000


@dataclass(frozen=True)
class LevelClass:
    id: str
    kind: str  # "singleton", "component" or "block"
    representative: str  # vertex of smallest index in the class
    size: float = 1  # int or INF

    @property
    def infinite(self) -> bool:
        return self.size == INF

    def to_json(self) -> dict:
        out = {"id": self.id, "kind": self.kind}
        if self.kind == "singleton":
            out["vertex"] = self.representative
        else:
            out["size"] = count_json(self.size)
            out["representative"] = self.representative
        return out


def quotient_edge_id(a: str, b: str) -> str:
    return f"q:{a}>{b}"


@dataclass(frozen=True)
class QuotientLevel:
    n: int
    separator: tuple[str, ...]
    classes: tuple[LevelClass, ...]
    graph: MultiDigraph
    class_of: dict[str, str] = field(compare=False)
    certainty: Certainty
    window: int = 0
    report: ComponentReport | None = field(default=None, compare=False, repr=False)

    @cached_property
    def class_by_id(self) -> dict[str, LevelClass]:
        return {c.id: c for c in self.classes}

    def locate(self, v: str) -> str:
        """Class of an arbitrary vertex of ``D`` (not only those in the window)."""
        c = self.class_of.get(v)
        if c is None:
            c = self.report.class_of(v)
            if c is None:
                raise InvariantViolation(f"vertex {v} has no class at level {self.n}")
        return c

    def quotient_edge(self, a: str, b: str) -> Edge | None:
        e = self.graph.edge_by_id.get(quotient_edge_id(a, b))
        return e if e is not None and e.kind is EdgeKind.QUOTIENT else None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "classes": [c.to_json() for c in self.classes],
            "edges": [
                {"id": e.id, "tail": e.tail, "head": e.head, "kind": e.kind.value}
                for e in self.graph.edges
            ],
            "class_of": dict(self.class_of),
            "certainty": self.certainty.value,
        }

    def without_edge(self, edge_id: str) -> "QuotientLevel":
        """Copy of this level with one edge removed (used to inject faults in tests)."""
        g = self.graph
        edges = tuple(e for e in g.edges if e.id != edge_id)
        return QuotientLevel(
            self.n, self.separator, self.classes, MultiDigraph(g.vertices, edges),
            self.class_of, self.certainty, self.window, self.report,
        )


def level(source: Source, n: int, window: int | None = None, allow_custom: bool = True) -> QuotientLevel:
    """The quotient ``D/P_{X_n}``.

    Falls back to the source's custom admissible chain when ``D - X_n`` has
    infinitely many strong components; without one, raises ``NonSolidAtLevel``.
    """
    n = source.clamp(n)
    X = source.prefix(n)
    report = source.component_oracle(X, window)
    if report.count == INF:
        if not (allow_custom and source.has_custom_chain):
            raise NonSolidAtLevel(solidity_check(source, X, max(n, window or 0)), level=n)
        report = source.block_report(n, window)

    classes = [LevelClass(v, "singleton", v) for v in X]
    classes += [
        LevelClass(cid, report.kind, report.representatives[cid], size)
        for cid, size in report.sizes.items()
    ]
    certainty = report.certainty
    concrete: list[Edge] = []
    quotient: list[Edge] = []
    for (a, b), bundle in source.bundles(report, max_bundle=MAX_BUNDLE).items():
        certainty = Certainty.weakest(certainty, bundle.certainty)
        if bundle.multiplicity == INF:
            quotient.append(Edge(quotient_edge_id(a, b), a, b, EdgeKind.QUOTIENT))
        else:
            concrete.extend(Edge(eid, a, b, EdgeKind.CONCRETE, origin=eid) for eid in bundle.edges)
    if len(concrete) + len(quotient) > MAX_BUNDLE:
        raise BoundExceeded(f"level {n} has more than {MAX_BUNDLE} edges")
    rank = source.truncation(report._windows[2]).rank
    concrete.sort(key=lambda e: rank[e.id])

    class_of = {v: v for v in X}
    class_of.update(report.labels)
    graph = MultiDigraph(tuple(c.id for c in classes), tuple(concrete + quotient))
    return QuotientLevel(n, X, tuple(classes), graph, class_of, certainty, report.window, report)


def build_chain(
    source: Source, N: int, window: int | None = None, allow_custom: bool = True
) -> list[QuotientLevel]:
    """Levels ``0..N`` computed through a common oracle window."""
    N = source.clamp(N)
    w = source.default_window(frozenset(range(N)), window)
    return [level(source, n, w, allow_custom) for n in range(N + 1)]


@dataclass(frozen=True)
class BondingMap:
    """``f`` from level ``n`` to level ``m <= n``.

    ``edge_map`` sends an edge id to ``("edge", id)`` or, when both endpoints
    fall into one coarse class, to ``("class", id)``. ``None`` marks an edge
    whose prescribed image is missing from the coarse level.
    """

    n: int
    m: int
    vertex_map: dict[str, str]
    edge_map: dict[str, tuple[str, str] | None]

    def edge_image(self, edge_id: str) -> tuple[str, str] | None:
        try:
            return self.edge_map[edge_id]
        except KeyError:
            raise LevelMismatch(f"edge {edge_id} is not an edge of level {self.n}") from None

    def vertex_image(self, cid: str) -> str:
        try:
            return self.vertex_map[cid]
        except KeyError:
            raise LevelMismatch(f"class {cid} is not a class of level {self.n}") from None

    def to_json(self) -> dict:
        return {
            "from": self.n,
            "to": self.m,
            "vertex_map": dict(self.vertex_map),
            "edge_map": {
                e: (None if img is None else {img[0]: img[1]}) for e, img in self.edge_map.items()
            },
        }


def bonding_between(fine: QuotientLevel, coarse: QuotientLevel) -> BondingMap:
    if coarse.n > fine.n:
        raise LevelMismatch(f"cannot bond level {fine.n} to the finer level {coarse.n}")
    vmap = {c.id: coarse.locate(c.representative) for c in fine.classes}
    emap: dict[str, tuple[str, str] | None] = {}
    coarse_edges = coarse.graph.edge_by_id
    for e in fine.graph.edges:
        a, b = vmap[e.tail], vmap[e.head]
        if a == b:
            emap[e.id] = ("class", a)
            continue
        q = coarse.quotient_edge(a, b)
        if e.kind is EdgeKind.QUOTIENT or q is not None:
            emap[e.id] = ("edge", q.id) if q is not None else None
            continue
        target = coarse_edges.get(e.id)
        ok = target is not None and target.tail == a and target.head == b
        emap[e.id] = ("edge", e.id) if ok else None
    return BondingMap(fine.n, coarse.n, vmap, emap)


def bonding(source: Source, n: int, m: int, window: int | None = None) -> BondingMap:
    if m > n:
        raise LevelMismatch(f"bonding needs m <= n, got m={m}, n={n}")
    w = source.default_window(frozenset(range(source.clamp(n))), window)
    return bonding_between(level(source, n, w), level(source, m, w))


def _compose_edge(img: tuple[str, str] | None, second: BondingMap) -> tuple[str, str] | None:
    if img is None:
        return None
    kind, target = img
    if kind == "class":
        return ("class", second.vertex_map.get(target))
    return second.edge_map.get(target)


def verify_levels(levels: list[QuotientLevel]) -> Verdict:
    """Identity, composition and surjectivity of all bonding maps among ``levels``."""
    N = len(levels) - 1
    maps: dict[tuple[int, int], BondingMap] = {}
    for n in range(N + 1):
        for m in range(n + 1):
            maps[(n, m)] = bonding_between(levels[n], levels[m])

    for n in range(N + 1):
        f = maps[(n, n)]
        for cid, img in f.vertex_map.items():
            if img != cid:
                return Verdict(False, "identity", n, {"class": cid, "message": f"class {cid} of level {n} maps to {img}"})
        for eid, img in f.edge_map.items():
            if img != ("edge", eid):
                return Verdict(False, "identity", n, {"edge": eid, "message": f"edge {eid} of level {n} maps to {img}"})

    for m, j, n in combinations_with_replacement(range(N + 1), 3):
        direct, first, second = maps[(n, m)], maps[(n, j)], maps[(j, m)]
        for cid, img in direct.vertex_map.items():
            via = second.vertex_map.get(first.vertex_map[cid])
            if img != via:
                return Verdict(False, "composition", n, {"class": cid, "levels": [m, j, n], "message": f"class {cid}: f({n},{m}) gives {img}, f({j},{m})f({n},{j}) gives {via}"})
        for eid, img in direct.edge_map.items():
            via = _compose_edge(first.edge_map[eid], second)
            if img is None or via is None or img != via:
                missing = _expected_target(levels[n], levels[m], direct, eid)
                message = f"edge {eid} of level {n}: f({n},{m}) gives {img}, f({j},{m})f({n},{j}) gives {via}"
                if missing:
                    message += f"; level {m} lacks {missing}"
                return Verdict(
                    False, "composition", n,
                    {"edge": eid, "missing": missing, "levels": [m, j, n], "message": message},
                )

    for (n, m), f in maps.items():
        hit_v = set(f.vertex_map.values())
        for c in levels[m].classes:
            if c.id not in hit_v:
                return Verdict(False, "surjectivity", n, {"class": c.id, "levels": [m, n], "message": f"class {c.id} of level {m} has no preimage in level {n}"})
        hit_e = {img[1] for img in f.edge_map.values() if img is not None and img[0] == "edge"}
        for e in levels[m].graph.edges:
            if e.id not in hit_e:
                return Verdict(False, "surjectivity", n, {"edge": e.id, "levels": [m, n], "message": f"edge {e.id} of level {m} has no preimage in level {n}"})
    return Verdict(True)


def _expected_target(fine: QuotientLevel, coarse: QuotientLevel, f: BondingMap, eid: str) -> str | None:
    e = fine.graph.edge_by_id[eid]
    a, b = f.vertex_map[e.tail], f.vertex_map[e.head]
    if a == b:
        return None
    if e.kind is EdgeKind.QUOTIENT or eid not in coarse.graph.edge_by_id:
        # a concrete edge absent from the coarse level was absorbed into an infinite bundle
        return quotient_edge_id(a, b)
    return eid


def verify_system(source: Source, N: int) -> Verdict:
    return verify_levels(build_chain(source, N))


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(lv: QuotientLevel) -> str:
    """Byte-deterministic DOT rendering of a level."""
    lines = [f"digraph level{lv.n} {{"]
    for c in lv.classes:
        node = _quote(f"{lv.n}:{c.id}")
        lines.append(f"  {node} [shape=doublecircle];" if c.infinite else f"  {node};")
    for e in lv.graph.edges:
        a, b = _quote(f"{lv.n}:{e.tail}"), _quote(f"{lv.n}:{e.head}")
        if e.kind is EdgeKind.QUOTIENT:
            lines.append(f'  {a} -> {b} [style=dashed, label="inf"];')
        else:
            lines.append(f"  {a} -> {b} [label={_quote(e.id)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def levels_to_json(levels: Iterable[QuotientLevel]) -> list[dict]:
    return [lv.to_json() for lv in levels]
