from itertools import product

import pytest

import oracles
from digraph_ends.core import (
    Edge,
    EdgeKind,
    MultiDigraph,
    Walk,
    closed_spanning_walk,
    condensation,
    cut_sizes,
    enumerate_euler_tours,
    find_euler_tour,
    is_valid_walk,
    shortest_path,
    strong_components,
    vertex_degrees,
)
from digraph_ends.errors import EmptySide, NotStronglyConnected, UnknownVertex
from digraph_ends.sources import make_builtin

V4 = ("a", "b", "c", "d")
PAIRS4 = [(x, y) for x in V4 for y in V4 if x != y]


def all_graphs_on_4():
    for mask in range(1 << len(PAIRS4)):
        yield [p for i, p in enumerate(PAIRS4) if mask >> i & 1]


def cycle(n):
    vs = [chr(ord("a") + i) for i in range(n)]
    return MultiDigraph.from_pairs(vs, [(vs[i], vs[(i + 1) % n]) for i in range(n)])


PATH = MultiDigraph.from_pairs("abc", [("a", "b"), ("b", "c")])


def test_construction_rejects_loops_and_duplicates():
    with pytest.raises(ValueError):
        MultiDigraph.from_pairs("ab", [("a", "a")])
    with pytest.raises(ValueError):
        MultiDigraph(("a", "a"))
    with pytest.raises(ValueError):
        MultiDigraph(("a", "b"), (Edge("q1", "a", "b", EdgeKind.QUOTIENT), Edge("q2", "a", "b", EdgeKind.QUOTIENT)))


class TestStrongComponents:
    def test_trivial_cases(self):
        assert len(strong_components(MultiDigraph(("a",)))) == 1
        assert strong_components(cycle(3)).members == (("a", "b", "c"),)
        assert strong_components(PATH).members == (("a",), ("b",), ("c",))

    def test_matches_reachability_oracle_on_all_4_vertex_graphs(self):
        for pairs in all_graphs_on_4():
            g = MultiDigraph.from_pairs(V4, pairs)
            comps = strong_components(g)
            expected = oracles.scc_partition(list(V4), pairs)
            assert {frozenset(m) for m in comps.members} == expected
            # topological order: no edge goes from a later component to an earlier one
            assert all(comps.label[a] <= comps.label[b] for a, b in pairs)

    def test_condensation_has_only_singletons(self):
        g = MultiDigraph.from_pairs("abcde", [("a", "b"), ("b", "a"), ("b", "c"), ("c", "d"), ("d", "c"), ("e", "a")])
        cond = condensation(g)
        assert all(len(m) == 1 for m in strong_components(cond).members)


class TestCuts:
    def test_zchain_truncation(self):
        z = make_builtin("zchain").truncation(7)
        side1 = [v for v in z.vertices if int(v) <= 0]
        cut = cut_sizes(z, side1)
        assert (cut.forward_size, cut.backward_size) == (1, 0)
        assert not cut.balanced

    def test_symmetric_ray_rung(self):
        g = make_builtin("symmetric-ray").truncation(6)
        cut = cut_sizes(g, ["u0", "u1"])
        assert (cut.forward_size, cut.backward_size) == (1, 1)

    def test_empty_side(self):
        with pytest.raises(EmptySide):
            cut_sizes(cycle(3), [])
        with pytest.raises(EmptySide):
            cut_sizes(cycle(3), ["a", "b", "c"])
        with pytest.raises(UnknownVertex):
            cut_sizes(cycle(3), ["z"])

    def test_edge_scan_oracle(self):
        import random

        rng = random.Random(7)
        vs = list("abcdef")
        for _ in range(50):
            pairs = [(x, y) for x in vs for y in vs if x != y and rng.random() < 0.3]
            pairs += pairs[: rng.randrange(3)]  # a few parallels
            g = MultiDigraph.from_pairs(vs, pairs)
            side = [v for v in vs if rng.random() < 0.5] or ["a"]
            if len(side) == len(vs):
                side = side[:-1]
            cut = cut_sizes(g, side)
            assert (cut.forward_size, cut.backward_size) == oracles.cut_counts(pairs, side)

    def test_quotient_edge_counts_once(self):
        g = MultiDigraph(("A", "B"), (Edge("q:A>B", "A", "B", EdgeKind.QUOTIENT),))
        assert cut_sizes(g, ["A"]).forward_size == 1


class TestDegrees:
    def test_examples(self):
        assert vertex_degrees(cycle(3), "b") == (1, 1)
        double = MultiDigraph.from_pairs("ab", [("a", "b"), ("a", "b")])
        assert vertex_degrees(double, "a") == (0, 2)
        with pytest.raises(UnknownVertex):
            vertex_degrees(double, "z")

    def test_handshake(self):
        g = MultiDigraph.from_pairs("abcd", [("a", "b"), ("b", "c"), ("c", "a"), ("a", "d"), ("a", "d")])
        ins = sum(vertex_degrees(g, v)[0] for v in g.vertices)
        outs = sum(vertex_degrees(g, v)[1] for v in g.vertices)
        assert ins == outs == len(g.edges)


class TestEuler:
    def test_examples(self):
        tour = find_euler_tour(cycle(3))
        assert len(tour) == 3 and is_valid_walk(cycle(3), tour, closed=True, eulerian=True)
        assert find_euler_tour(PATH) is None

    def test_empty_and_single_vertex(self):
        w = find_euler_tour(MultiDigraph(("x",)))
        assert w == Walk.empty("x")

    def test_existence_matches_brute_force_on_small_graphs(self):
        # all graphs on 3 vertices plus a deterministic slice of those on 4
        V3 = ("a", "b", "c")
        P3 = [(x, y) for x in V3 for y in V3 if x != y]
        cases = [(V3, [p for i, p in enumerate(P3) if m >> i & 1]) for m in range(1 << len(P3))]
        cases += [(V4, pairs) for k, pairs in enumerate(all_graphs_on_4()) if k % 16 == 0]
        for vs, pairs in cases:
            g = MultiDigraph.from_pairs(vs, pairs)
            assert (find_euler_tour(g) is not None) == oracles.euler_tour_exists(list(vs), pairs)

    def test_two_triangles_have_two_anchored_tours(self):
        pairs = [("x", "a"), ("a", "b"), ("b", "x"), ("x", "c"), ("c", "d"), ("d", "x")]
        g = MultiDigraph.from_pairs(["x", "a", "b", "c", "d"], pairs)
        tours, overflow = enumerate_euler_tours(g, "x", 10)
        assert not overflow
        assert len(tours) == len(oracles.euler_tours_by_backtracking(pairs, "x")) == 2
        assert [t.edges for t in tours] == sorted(t.edges for t in tours)

    def test_enumeration_limit_and_path(self):
        pairs = [("x", "a"), ("a", "x")] * 3
        g = MultiDigraph.from_pairs(["x", "a"], pairs)
        tours, overflow = enumerate_euler_tours(g, "x", 2)
        assert len(tours) == 2 and overflow
        assert enumerate_euler_tours(PATH, "a", 5) == ([], False)
        assert len(enumerate_euler_tours(cycle(3), "a", 5)[0]) == 1


class TestSpanningWalk:
    def test_cycle(self):
        w = closed_spanning_walk(cycle(3))
        assert w.vertices == ("a", "b", "c", "a")

    def test_cycle_with_chord(self):
        g = MultiDigraph.from_pairs("abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c")])
        w = closed_spanning_walk(g)
        assert is_valid_walk(g, w, closed=True, spanning=True)

    def test_path_witness(self):
        with pytest.raises(NotStronglyConnected) as info:
            closed_spanning_walk(PATH)
        assert info.value.witness == ("c", "a")

    def test_shortest_path_prefers_low_edge_ids(self):
        g = MultiDigraph.from_pairs("ab", [("a", "b"), ("a", "b")])
        assert shortest_path(g, "a", "b") == ["e0"]


class TestValidWalk:
    def test_cycle_tour_all_flags(self):
        g = cycle(3)
        w = Walk(("a", "b", "c", "a"), ("e0", "e1", "e2"))
        assert is_valid_walk(g, w, closed=True, spanning=True, eulerian=True).ok

    def test_repeated_edge(self):
        g = MultiDigraph.from_pairs("ab", [("a", "b"), ("b", "a")])
        w = Walk(("a", "b", "a", "b", "a"), ("e0", "e1", "e0", "e1"))
        v = is_valid_walk(g, w, eulerian=True)
        assert not v.ok and v.violation == "repeated_edge" and v.index == 2

    def test_random_walks_agree_with_definition(self):
        import random

        rng = random.Random(11)
        vs = list("abcde")
        for _ in range(200):
            pairs = [(x, y) for x, y in product(vs, vs) if x != y and rng.random() < 0.35]
            if not pairs:
                continue
            g = MultiDigraph.from_pairs(vs, pairs)
            by_id = {f"e{i}": p for i, p in enumerate(pairs)}
            length = rng.randrange(1, 6)
            edges = [rng.choice(list(by_id)) for _ in range(length)]
            verts = [by_id[edges[0]][0]] + [by_id[e][1] for e in edges]
            if rng.random() < 0.3:  # perturb a vertex
                verts[rng.randrange(len(verts))] = rng.choice(vs)
            w = Walk(tuple(verts), tuple(edges))
            consistent = all(by_id[e] == (verts[i], verts[i + 1]) for i, e in enumerate(edges))
            assert is_valid_walk(g, w).ok == consistent
            assert is_valid_walk(g, w, closed=True).ok == (consistent and verts[0] == verts[-1])
            assert is_valid_walk(g, w, closed=True).ok == (
                consistent and oracles.is_closed_walk_through(by_id, verts, edges)
            )

    def test_walk_list_round_trip(self):
        w = Walk(("a", "b", "a"), ("e0", "e1"))
        assert Walk.from_list(w.to_list()) == w
