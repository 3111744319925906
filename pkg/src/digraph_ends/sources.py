"""Finite presentations of countable digraphs.

A source enumerates its vertices ``vertex(0), vertex(1), ...`` and lists, for
every index ``i``, the edges whose later endpoint is ``vertex(i)``. The
truncation ``D[X_n]`` is the sub-multi-digraph on the first ``n`` vertices.

Oracles about ``D - X`` (strong components, bundle multiplicities, degrees)
are answered on three nested windows ``W, W+p, W+2p`` (``W`` a multiple of
the source's period ``p``): a quantity is declared infinite when it grows over both
periods and finite when it is constant. Answers that are neither are marked
provisional. For the builtins the window sizes used are large enough for this
to be exact: beyond the separator each builtin is a translate of itself whose
infinite strands are two-way connected (or acyclic), so far-away detours add
no connectivity that the next period does not already show.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, Iterable

from .core import Edge, MultiDigraph, strong_components
from .errors import (
    INF,
    BadParams,
    BoundExceeded,
    Certainty,
    DepthExceeded,
    OracleUnavailable,
    SemanticError,
    SourceSyntaxError,
    UnknownBuiltin,
    UnknownComponent,
    UnknownVertex,
    count_json,
)


@dataclass(frozen=True)
class VertexSet:
    """A possibly infinite vertex set given by a membership test on vertex ids."""

    name: str
    contains: Callable[[str], bool] = field(compare=False)

    def __call__(self, v: str) -> bool:
        return self.contains(v)


def _everything(_v: str) -> bool:
    return True


ALL_VERTICES = VertexSet("V", _everything)


@dataclass(frozen=True)
class Bundle:
    tail: str
    head: str
    multiplicity: float  # int, or INF
    edges: tuple[str, ...]  # listed only for finite multiplicity
    certainty: Certainty


@dataclass
class ComponentReport:
    """Strong components of ``D - X`` (or blocks of a custom partition) seen through a window."""

    separator: tuple[str, ...]
    window: int
    labels: dict[str, str]
    sizes: dict[str, float]
    count: float
    certainty: Certainty
    kind: str = "component"
    representatives: dict[str, str] = field(default_factory=dict)
    _ext: dict[int, str] = field(default_factory=dict, repr=False)
    _windows: tuple[int, int, int] = (0, 0, 0)
    _source: "Source | None" = field(default=None, repr=False)

    @property
    def ids(self) -> list[str]:
        return list(self.sizes)

    def infinite_ids(self) -> list[str]:
        return [c for c, size in self.sizes.items() if size == INF]

    def class_of(self, v: str) -> str | None:
        """Component of ``v``; vertices of ``X`` map to themselves."""
        if v in self.separator:
            return v
        i = self._source.index(v)
        if i >= self._windows[2]:
            raise DepthExceeded(f"vertex {v} lies beyond the oracle window {self._windows[2]}")
        return self._ext.get(i)

    def members(self, cid: str) -> list[str]:
        return [v for v, c in self.labels.items() if c == cid]

    def meets(self, cid: str, vset: VertexSet) -> bool:
        return any(vset(v) for v in self.members(cid))

    def intersection_infinite(self, cid: str, vset: VertexSet) -> tuple[bool, Certainty]:
        """Whether ``vset`` meets component ``cid`` in infinitely many vertices."""
        if cid not in self.sizes:
            raise UnknownComponent(cid)
        if self.sizes[cid] != INF:
            return False, self.certainty
        counts = []
        for w in self._windows:
            counts.append(sum(
                1 for i, c in self._ext.items()
                if c == cid and i < w and vset(self._source.vertex(i))
            ))
        return _grows(counts)

    def to_json(self) -> dict:
        return {
            "separator": list(self.separator),
            "kind": self.kind,
            "components": {c: count_json(s) for c, s in self.sizes.items()},
            "count": count_json(self.count),
            "certainty": self.certainty.value,
        }


def _grows(counts: list[int]) -> tuple[bool, Certainty]:
    a, b, c = counts
    if a == b == c:
        return False, Certainty.EXACT
    if a < b < c:
        return True, Certainty.EXACT
    return c > b, Certainty.PROVISIONAL


@dataclass(frozen=True)
class SolidityReport:
    separator: tuple[str, ...]
    count: float
    solid: bool
    certainty: Certainty
    witness: str = ""

    @property
    def verdict(self) -> str:
        return "solid" if self.solid else "non-solid"

    def describe(self) -> str:
        return f"X={{{', '.join(self.separator)}}} has {count_json(self.count)} strong components ({self.verdict}, {self.certainty.value})"

    def to_json(self) -> dict:
        out = {
            "separator": list(self.separator),
            "count": count_json(self.count),
            "verdict": self.verdict,
            "certainty": self.certainty.value,
        }
        if self.witness:
            out["witness"] = self.witness
        return out


class Source:
    """Abstract presentation of a countable digraph."""

    name = "source"
    period = 1
    exact = True
    size: int | None = None
    supports_components = True
    solid: bool | None = None  # analytic claim for builtins, None when unknown

    def __init__(self):
        self._edges: list[Edge] = []
        self._edges_upto: list[int] = [0]  # _edges_upto[n] = number of edges among first n vertices
        self._lock = threading.Lock()

    # -- enumeration --------------------------------------------------------

    def vertex(self, i: int) -> str:
        raise NotImplementedError

    def index(self, v: str) -> int:
        raise NotImplementedError

    def edges_of(self, i: int) -> list[tuple[str, int, int]]:
        """Edges ``(id, tail index, head index)`` whose later endpoint has index ``i``."""
        raise NotImplementedError

    def designated_sets(self) -> dict[str, VertexSet]:
        return {"V": ALL_VERTICES}

    def custom_block(self, n: int, i: int) -> int | None:
        """Block key of vertex ``i >= n`` in a custom admissible partition at level ``n``.

        ``None`` means the source supplies no custom chain.
        """
        return None

    @property
    def has_custom_chain(self) -> bool:
        return False

    def clamp(self, n: int) -> int:
        return n if self.size is None else min(n, self.size)

    def prefix(self, n: int) -> tuple[str, ...]:
        return tuple(self.vertex(i) for i in range(self.clamp(n)))

    def _grow(self, n: int) -> None:
        with self._lock:
            while len(self._edges_upto) <= n:
                i = len(self._edges_upto) - 1
                for eid, t, h in self.edges_of(i):
                    self._edges.append(Edge(eid, self.vertex(t), self.vertex(h)))
                self._edges_upto.append(len(self._edges))

    @lru_cache(maxsize=512)
    def truncation(self, n: int) -> MultiDigraph:
        n = self.clamp(n)
        self._grow(n)
        return MultiDigraph(self.prefix(n), tuple(self._edges[: self._edges_upto[n]]))

    def _indices(self, X: Iterable[str]) -> frozenset[int]:
        return frozenset(self.index(v) for v in X)

    def default_window(self, X_idx: frozenset[int], window: int | None = None) -> int:
        p = self.period
        top = max(X_idx) + 1 if X_idx else 0
        w = max(window or 0, 4 * p * (len(X_idx) + 1), top + 2 * p)
        return self.clamp(-(-w // p) * p)  # whole periods only

    # -- oracles --------------------------------------------------------------

    def component_oracle(self, X: Iterable[str], window: int | None = None) -> ComponentReport:
        if not self.supports_components:
            raise OracleUnavailable(f"{self.name} has no component oracle")
        X_idx = self._indices(X)
        return self._analyse(X_idx, self.default_window(X_idx, window), None)

    def block_report(self, n: int, window: int | None = None) -> ComponentReport:
        """Custom admissible partition at level ``n``: singletons of ``X_n`` plus blocks."""
        if not self.has_custom_chain:
            raise OracleUnavailable(f"{self.name} supplies no custom chain")
        X_idx = frozenset(range(self.clamp(n)))
        return self._analyse(X_idx, self.default_window(X_idx, window), n)

    @lru_cache(maxsize=4096)
    def _analyse(self, X_idx: frozenset[int], w0: int, block_level: int | None) -> ComponentReport:
        p = self.period
        windows = (w0, self.clamp(w0 + p), self.clamp(w0 + 2 * p))
        partitions: list[dict[int, int]] = []
        for w in windows:
            g = self.truncation(w)
            if block_level is None:
                keep = [v for i, v in enumerate(g.vertices) if i not in X_idx]
                comps = strong_components(g.induced(keep))
                part = {}
                for comp in comps.members:
                    idx = [self.index(v) for v in comp]
                    key = min(idx)
                    for i in idx:
                        part[i] = key
            else:
                part = {i: self.custom_block(block_level, i) for i in range(w) if i not in X_idx}
            partitions.append(part)

        # the last period of a window can be cut off from edges that close it up
        # in the full digraph, so comparisons and counts stay clear of it
        margin = 0 if self.size is not None else p
        settled = max(w0 - margin, 0)
        stable = all(
            partitions[k].get(i) == partitions[2].get(i)
            for k in (0, 1) for i in range(settled) if i not in X_idx
        )
        ext = partitions[2]
        prefix = "C" if block_level is None else "B"
        keys = sorted({ext[i] for i in range(w0) if i not in X_idx})
        sizes: dict[str, float] = {}
        certainty = Certainty.EXACT if stable else Certainty.PROVISIONAL
        for key in keys:
            counts = [sum(1 for c in part.values() if c == key) for part in partitions]
            infinite, cert = _grows(counts)
            certainty = Certainty.weakest(certainty, cert)
            sizes[f"{prefix}{key}"] = INF if infinite else counts[2]
        counts = [
            len({c for i, c in part.items() if i < w - margin})
            for part, w in zip(partitions, windows)
        ]
        infinite, cert = _grows(counts)
        certainty = Certainty.weakest(certainty, cert)
        count = INF if infinite else counts[2]

        ext_named = {i: f"{prefix}{k}" for i, k in ext.items()}
        labels = {self.vertex(i): ext_named[i] for i in range(w0) if i not in X_idx}
        return ComponentReport(
            separator=tuple(self.vertex(i) for i in sorted(X_idx)),
            window=w0,
            labels=labels,
            sizes=sizes,
            count=count,
            certainty=certainty,
            kind="component" if block_level is None else "block",
            representatives={f"{prefix}{k}": self.vertex(k) for k in keys},
            _ext=ext_named,
            _windows=windows,
            _source=self,
        )

    def bundles(self, report: ComponentReport, max_bundle: int | None = None) -> dict[tuple[str, str], Bundle]:
        """All non-empty bundles between classes of ``report`` (vertices of ``X`` are singletons)."""
        sep = set(report.separator)
        known = set(report.sizes) | sep
        tallies: list[dict[tuple[str, str], list[str]]] = []
        for w in report._windows:
            g = self.truncation(w)
            tally: dict[tuple[str, str], list[str]] = {}
            for e in g.edges:
                a = e.tail if e.tail in sep else report._ext.get(self.index(e.tail))
                b = e.head if e.head in sep else report._ext.get(self.index(e.head))
                if a == b or a not in known or b not in known:
                    continue
                tally.setdefault((a, b), []).append(e.id)
            tallies.append(tally)
        out = {}
        base = Certainty.EXACT if self.exact else Certainty.PROVISIONAL
        for pair in sorted(tallies[2], key=lambda ab: (_class_key(self, report, ab[0]), _class_key(self, report, ab[1]))):
            counts = [len(t.get(pair, ())) for t in tallies]
            infinite, cert = _grows(counts)
            cert = Certainty.weakest(base, cert, report.certainty)
            if infinite:
                out[pair] = Bundle(pair[0], pair[1], INF, (), cert)
            else:
                if max_bundle is not None and counts[2] > max_bundle:
                    raise BoundExceeded(f"bundle {pair[0]}->{pair[1]} has {counts[2]} edges, above the bound {max_bundle}")
                out[pair] = Bundle(pair[0], pair[1], counts[2], tuple(tallies[2][pair]), cert)
        return out

    def bundle_multiplicity(self, X: Iterable[str], a: str, b: str, window: int | None = None) -> Bundle:
        report = self.component_oracle(X, window)
        for c in (a, b):
            if c not in report.sizes and c not in report.separator:
                raise UnknownComponent(f"{c!r} is neither a component of D - X nor a vertex of X")
        if a == b:
            raise BadParams("bundle endpoints must differ")
        found = self.bundles(report).get((a, b))
        if found is None:
            cert = Certainty.weakest(report.certainty, Certainty.EXACT if self.exact else Certainty.PROVISIONAL)
            return Bundle(a, b, 0, (), cert)
        return found

    def degree(self, v: str) -> tuple[float, float, Certainty]:
        """``(in-degree, out-degree, certainty)``; degrees may be ``INF``."""
        i = self.index(v)
        w0 = self.clamp(max(4 * self.period, i + 1 + 2 * self.period))
        ins, outs = [], []
        for w in (w0, self.clamp(w0 + self.period), self.clamp(w0 + 2 * self.period)):
            g = self.truncation(w)
            ins.append(len(g.in_edges[v]))
            outs.append(len(g.out_edges[v]))
        inf_in, c1 = _grows(ins)
        inf_out, c2 = _grows(outs)
        base = Certainty.EXACT if self.exact else Certainty.PROVISIONAL
        return (
            INF if inf_in else ins[2],
            INF if inf_out else outs[2],
            Certainty.weakest(base, c1, c2),
        )


def _class_key(source: Source, report: ComponentReport, cid: str) -> int:
    if cid in report.separator:
        return source.index(cid)
    return source.index(report.representatives[cid])


def solidity_check(source: Source, X: Iterable[str], depth: int, bound: int | None = None) -> SolidityReport:
    """Is ``D - X`` split into finitely many strong components?"""
    X = tuple(X)
    if depth < len(X):
        raise BadParams("depth must be at least |X|")
    report = source.component_oracle(X, window=depth)
    if report.count == INF:
        return SolidityReport(report.separator, INF, False, report.certainty, "component count grows with the window")
    if bound is not None and report.count > bound:
        return SolidityReport(report.separator, report.count, False, Certainty.PROVISIONAL, f"count exceeds bound {bound}")
    return SolidityReport(report.separator, report.count, True, report.certainty)


# --------------------------------------------------------------------------- #
# Concrete sources


class FiniteSource(Source):
    """A finite digraph; oracles are exact."""

    solid = True

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple[str, str]], name: str = "finite"):
        super().__init__()
        self.name = name
        self._vertices = tuple(vertices)
        self._order = {v: i for i, v in enumerate(self._vertices)}
        if len(self._order) != len(self._vertices):
            raise BadParams("duplicate vertex")
        self.size = len(self._vertices)
        by_index: dict[int, list[tuple[str, int, int]]] = {}
        seen: dict[tuple[str, str], int] = {}
        for a, b in edges:
            if a == b:
                raise BadParams(f"loop at {a!r}")
            if a not in self._order or b not in self._order:
                raise UnknownVertex(a if a not in self._order else b)
            k = seen.get((a, b), 0)
            seen[(a, b)] = k + 1
            eid = f"{a}>{b}" if k == 0 else f"{a}>{b}#{k}"
            i, j = self._order[a], self._order[b]
            by_index.setdefault(max(i, j), []).append((eid, i, j))
        self._by_index = by_index

    def vertex(self, i: int) -> str:
        if not 0 <= i < self.size:
            raise DepthExceeded(f"{self.name} has only {self.size} vertices")
        return self._vertices[i]

    def index(self, v: str) -> int:
        try:
            return self._order[v]
        except KeyError:
            raise UnknownVertex(v) from None

    def edges_of(self, i: int) -> list[tuple[str, int, int]]:
        return self._by_index.get(i, [])

    def default_window(self, X_idx: frozenset[int], window: int | None = None) -> int:
        # the whole digraph is always in view
        return self.size

    @cached_property
    def graph(self) -> MultiDigraph:
        return self.truncation(self.size)


class StencilSource(Source):
    """Width-``k`` periodic digraph on layers ``t = 0, 1, 2, ...``.

    A stencil triple ``(i, j, d)`` adds an edge ``(t, i) -> (t + d, j)`` for
    every layer ``t >= max(0, -d)``. An optional apex vertex, enumerated
    first, sends an edge to every vertex of the listed strands.
    """

    def __init__(
        self,
        width: int,
        stencil: Iterable[tuple[int, int, int]],
        name: str = "stencil",
        strand_names: list[str] | None = None,
        apex: tuple[str, tuple[int, ...]] | None = None,
        exact: bool = False,
        sets: dict[str, tuple[int, ...]] | None = None,
        tail_blocks: bool = False,
        solid: bool | None = None,
    ):
        super().__init__()
        if width < 1:
            raise BadParams("width must be positive")
        self.name = name
        self.width = width
        self.period = width
        self.exact = exact
        self.stencil = tuple(stencil)
        for i, j, d in self.stencil:
            if not (0 <= i < width and 0 <= j < width) or d not in (-1, 0, 1):
                raise BadParams(f"bad stencil entry {(i, j, d)}")
            if i == j and d == 0:
                raise BadParams(f"stencil entry {(i, j, d)} is a loop")
        self.strand_names = strand_names
        self.apex = apex
        self.offset = 1 if apex else 0
        self._tail_blocks = tail_blocks
        self.solid = solid
        self._sets = sets or {}
        dup: dict[tuple[int, int, int], int] = {}
        self._dup_index = []
        for entry in self.stencil:
            self._dup_index.append(dup.get(entry, 0))
            dup[entry] = dup.get(entry, 0) + 1
        if strand_names:
            alt = "|".join(re.escape(s) for s in strand_names)
            self._pattern = re.compile(rf"^({alt})(\d+)$")
        else:
            self._pattern = re.compile(r"^(\d+)\.(\d+)$")

    def _name(self, t: int, j: int) -> str:
        if self.strand_names:
            return f"{self.strand_names[j]}{t}"
        return f"{t}.{j}"

    def vertex(self, i: int) -> str:
        if i < 0:
            raise UnknownVertex(i)
        if self.apex and i == 0:
            return self.apex[0]
        t, j = divmod(i - self.offset, self.width)
        return self._name(t, j)

    def index(self, v: str) -> int:
        if self.apex and v == self.apex[0]:
            return 0
        m = self._pattern.match(v) if isinstance(v, str) else None
        if not m:
            raise UnknownVertex(v)
        if self.strand_names:
            j, t = self.strand_names.index(m.group(1)), int(m.group(2))
        else:
            t, j = int(m.group(1)), int(m.group(2))
            if j >= self.width:
                raise UnknownVertex(v)
        return self.offset + t * self.width + j

    def layer_strand(self, i: int) -> tuple[int, int]:
        return divmod(i - self.offset, self.width)

    def edges_of(self, i: int) -> list[tuple[str, int, int]]:
        if self.apex and i == 0:
            return []
        t, j = self.layer_strand(i)
        out = []
        if self.apex and j in self.apex[1]:
            out.append((f"{self.apex[0]}>{self._name(t, j)}", 0, i))
        here = self._name(t, j)
        for (a, b, d), k in zip(self.stencil, self._dup_index):
            suffix = f"#{k}" if k else ""
            # (t, j) as tail
            if a == j and t + d >= 0:
                other = self.offset + (t + d) * self.width + b
                if other < i:
                    out.append((f"{here}>{self._name(t + d, b)}{suffix}", i, other))
            # (t, j) as head
            if b == j and t - d >= 0:
                other = self.offset + (t - d) * self.width + a
                if other < i:
                    out.append((f"{self._name(t - d, a)}>{here}{suffix}", other, i))
        return out

    def designated_sets(self) -> dict[str, VertexSet]:
        sets = {"V": ALL_VERTICES}
        for j in range(self.width):
            sets[f"strand:{j}"] = self._strand_set(f"strand:{j}", (j,))
        for name, strands in self._sets.items():
            sets[name] = self._strand_set(name, strands)
        return sets

    def _strand_set(self, name: str, strands: tuple[int, ...]) -> VertexSet:
        def contains(v: str) -> bool:
            if self.apex and v == self.apex[0]:
                return False
            return self.layer_strand(self.index(v))[1] in strands

        return VertexSet(name, contains)

    @property
    def has_custom_chain(self) -> bool:
        return self._tail_blocks

    def custom_block(self, n: int, i: int) -> int | None:
        # Tail partition: X_n as singletons and everything after it as one class.
        return n if self._tail_blocks else None


class ZChainSource(Source):
    """The two-way infinite path on the integers, edges ``n -> n+1``.

    Enumerated ``0, 1, -1, 2, -2, ...``.
    """

    name = "zchain"
    period = 2
    solid = False

    @staticmethod
    def value(i: int) -> int:
        return 0 if i == 0 else ((i + 1) // 2 if i % 2 else -(i // 2))

    @staticmethod
    def position(n: int) -> int:
        return 0 if n == 0 else (2 * n - 1 if n > 0 else -2 * n)

    def vertex(self, i: int) -> str:
        if i < 0:
            raise UnknownVertex(i)
        return str(self.value(i))

    def index(self, v: str) -> int:
        try:
            return self.position(int(v))
        except (TypeError, ValueError):
            raise UnknownVertex(v) from None

    def edges_of(self, i: int) -> list[tuple[str, int, int]]:
        n = self.value(i)
        out = []
        for a, b in ((n - 1, n), (n, n + 1)):
            other = a if b == n else b
            j = self.position(other)
            if j < i:
                out.append((f"{a}>{b}", self.position(a), self.position(b)))
        return out

    def designated_sets(self) -> dict[str, VertexSet]:
        return {
            "V": ALL_VERTICES,
            "positive": VertexSet("positive", lambda v: int(v) > 0),
            "negative": VertexSet("negative", lambda v: int(v) < 0),
        }

    @property
    def has_custom_chain(self) -> bool:
        return True

    def custom_block(self, n: int, i: int) -> int | None:
        # Classes: X_n as singletons, the integers above X_n, the integers below.
        if n == 0:
            return 0
        values = [self.value(k) for k in range(n)]
        lo, hi = min(values), max(values)
        v = self.value(i)
        return self.position(hi + 1) if v > hi else self.position(lo - 1)


BUILTIN_NAMES = (
    "ray",
    "reverse-ray",
    "symmetric-ray",
    "zchain",
    "outstar",
    "twin-rays",
    "dominated-ray",
    "necklace",
)


def _parse_builtin_name(name: str, params: dict | None) -> tuple[str, dict]:
    params = dict(params or {})
    m = re.fullmatch(r"([a-z-]+)(?:\((\d+)\))?", name.strip())
    if not m:
        raise UnknownBuiltin(name)
    base = m.group(1)
    if m.group(2) is not None:
        params.setdefault("k", m.group(2))
    return base, params


def make_builtin(name: str, params: dict | None = None) -> Source:
    """Construct one of the analytic builtin digraphs."""
    base, params = _parse_builtin_name(name, params)
    if base not in BUILTIN_NAMES:
        raise UnknownBuiltin(f"unknown builtin {name!r}; expected one of {', '.join(BUILTIN_NAMES)}")
    allowed = {"k"} if base == "necklace" else set()
    extra = set(params) - allowed
    if extra:
        raise BadParams(f"builtin {base} takes no parameter(s) {sorted(extra)}")

    if base == "ray":
        return StencilSource(1, [(0, 0, 1)], "ray", ["v"], exact=True, tail_blocks=True, solid=False)
    if base == "reverse-ray":
        return StencilSource(1, [(0, 0, -1)], "reverse-ray", ["v"], exact=True, tail_blocks=True, solid=False)
    if base == "symmetric-ray":
        return StencilSource(1, [(0, 0, 1), (0, 0, -1)], "symmetric-ray", ["u"], exact=True, solid=True)
    if base == "zchain":
        return ZChainSource()
    if base == "outstar":
        return StencilSource(1, [], "outstar", ["l"], apex=("c", (0,)), exact=True, solid=False)
    if base == "twin-rays":
        return StencilSource(
            2,
            [(0, 0, 1), (0, 0, -1), (1, 1, 1), (1, 1, -1), (0, 1, 0)],
            "twin-rays",
            ["a", "b"],
            exact=True,
            sets={"A": (0,), "B": (1,)},
            solid=True,
        )
    if base == "dominated-ray":
        return StencilSource(
            1, [(0, 0, 1), (0, 0, -1)], "dominated-ray", ["u"], apex=("x", (0,)), exact=True,
            sets={"ray": (0,)}, solid=True,
        )
    # necklace(k)
    try:
        k = int(params.get("k", 3))
    except (TypeError, ValueError):
        raise BadParams(f"necklace bead size must be an integer, got {params.get('k')!r}") from None
    if k < 1:
        raise BadParams("necklace bead size must be at least 1")
    stencil = [(i, (i + 1) % k, 0) for i in range(k)] if k > 1 else []
    if k == 2:
        stencil = [(0, 1, 0), (1, 0, 0)]
    stencil += [(0, 0, 1), (0, 0, -1)]
    return StencilSource(
        k, stencil, f"necklace({k})", exact=True, sets={"connectors": (0,)}, solid=True,
    )


# --------------------------------------------------------------------------- #
# Source files

_TOKEN = re.compile(r"\S+")


def _tokens(line: str) -> list[tuple[int, str]]:
    return [(m.start() + 1, m.group()) for m in _TOKEN.finditer(line)]


def parse_source(text: str) -> Source:
    """Parse the line-oriented source format (``#`` starts a comment)."""
    header = None
    body: list[tuple[int, list[tuple[int, str]]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        if header is None:
            if toks[0][1] != "source":
                raise SourceSyntaxError(lineno, toks[0][0], "expected 'source <kind>'")
            if len(toks) < 2:
                raise SourceSyntaxError(lineno, len(line) + 1, "missing source kind")
            header = (lineno, toks[1:])
            continue
        body.append((lineno, toks))
    if header is None:
        raise SourceSyntaxError(1, 1, "empty source")

    lineno, kind_toks = header
    kind = kind_toks[0][1]
    if kind == "builtin":
        if len(kind_toks) < 2:
            raise SourceSyntaxError(lineno, kind_toks[0][0] + len(kind), "missing builtin name")
        params = {}
        for col, tok in kind_toks[2:]:
            if "=" not in tok:
                raise SourceSyntaxError(lineno, col, f"expected key=value, got {tok!r}")
            key, value = tok.split("=", 1)
            params[key] = value
        if body:
            raise SourceSyntaxError(body[0][0], 1, "builtin sources take no further lines")
        return make_builtin(kind_toks[1][1], params)
    if kind == "finite":
        return _parse_finite(body)
    if kind == "stencil":
        return _parse_stencil(body)
    raise SourceSyntaxError(lineno, kind_toks[0][0], f"unknown source kind {kind!r}")


def _parse_finite(body) -> FiniteSource:
    vertices: list[str] = []
    seen = set()
    edges = []

    def add(v):
        if v not in seen:
            seen.add(v)
            vertices.append(v)

    for lineno, toks in body:
        word = toks[0][1]
        if word == "edge":
            if len(toks) != 3:
                raise SourceSyntaxError(lineno, toks[0][0], "expected 'edge <tail> <head>'")
            a, b = toks[1][1], toks[2][1]
            if a == b:
                raise SemanticError(lineno, f"loop at {a!r}")
            add(a)
            add(b)
            edges.append((a, b))
        elif word == "vertex":
            if len(toks) != 2:
                raise SourceSyntaxError(lineno, toks[0][0], "expected 'vertex <token>'")
            add(toks[1][1])
        else:
            raise SourceSyntaxError(lineno, toks[0][0], f"unknown directive {word!r}")
    return FiniteSource(vertices, edges)


def _parse_int(lineno: int, col: int, tok: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise SourceSyntaxError(lineno, col, f"expected an integer, got {tok!r}") from None


def _parse_stencil(body) -> StencilSource:
    width = None
    entries = []
    for lineno, toks in body:
        word = toks[0][1]
        if word == "width":
            if len(toks) != 2:
                raise SourceSyntaxError(lineno, toks[0][0], "expected 'width <k>'")
            width = _parse_int(lineno, toks[1][0], toks[1][1])
            if width < 1:
                raise SemanticError(lineno, "width must be positive")
        elif word == "edge":
            if len(toks) != 4:
                raise SourceSyntaxError(lineno, toks[0][0], "expected 'edge <i> <j> <d>'")
            i, j, d = (_parse_int(lineno, c, t) for c, t in toks[1:])
            entries.append((lineno, i, j, d))
        else:
            raise SourceSyntaxError(lineno, toks[0][0], f"unknown directive {word!r}")
    if width is None:
        raise SemanticError(body[0][0] if body else 1, "stencil source needs a 'width' line")
    for lineno, i, j, d in entries:
        if d not in (-1, 0, 1):
            raise SemanticError(lineno, f"stencil offset {d} outside {{-1, 0, +1}}")
        if not (0 <= i < width and 0 <= j < width):
            raise SemanticError(lineno, f"strand index outside [0, {width})")
        if i == j and d == 0:
            raise SemanticError(lineno, "stencil edge would be a loop")
    return StencilSource(width, [(i, j, d) for _, i, j, d in entries])


def load_source(spec: str) -> Source:
    """``builtin:<name>[:key=value,...]`` or a path to a source file."""
    if spec.startswith("builtin:"):
        rest = spec[len("builtin:"):]
        name, _, raw = rest.partition(":")
        params = {}
        if raw:
            for item in raw.split(","):
                if "=" not in item:
                    raise BadParams(f"expected key=value in {spec!r}")
                k, v = item.split("=", 1)
                params[k] = v
        return make_builtin(name, params)
    path = Path(spec)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BadParams(f"cannot read source file {spec!r}: {exc.strerror}") from None
    return parse_source(text)
