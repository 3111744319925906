from dataclasses import replace

import pytest

import oracles
from digraph_ends import quotient as Q
from digraph_ends import tours as T
from digraph_ends.core import Walk, is_valid_walk
from digraph_ends.errors import (
    Certainty,
    EmptySide,
    EulerConditionFailed,
    NotStronglyConnected,
    SideNotClassAligned,
)
from digraph_ends.sources import FiniteSource, make_builtin, solidity_check

V4 = "abcd"
PAIRS4 = [(x, y) for x in V4 for y in V4 if x != y]


def graph_4(mask):
    return [p for i, p in enumerate(PAIRS4) if mask >> i & 1]


class TestCheckEuler:
    def test_zchain(self):
        check = T.check_euler(make_builtin("zchain"), 20)
        assert check.to_json() == {
            "verdict": "witness",
            "witness": {"type": "unbalanced_cut", "forward": 1, "backward": 0},
            "certainty": "exact",
        }

    @pytest.mark.parametrize("name", ["symmetric-ray", "necklace(3)"])
    def test_ok(self, name):
        check = T.check_euler(make_builtin(name), 12)
        assert check.ok and check.certainty is Certainty.EXACT

    def test_outstar_infinite_degree(self):
        check = T.check_euler(make_builtin("outstar"), 2)
        assert isinstance(check.witness, T.InfiniteDegree) and check.witness.vertex == "c"

    def test_finite_sources_match_classical_condition(self):
        for mask in range(1 << len(PAIRS4)):
            pairs = graph_4(mask)
            ok = T.check_euler(FiniteSource(V4, pairs), 4).ok
            classical = oracles.degrees_balanced(list(V4), pairs) and oracles.weakly_connected_active(list(V4), pairs)
            assert ok == classical, pairs

    def test_degree_cut_bridge(self):
        for mask in range(0, 1 << len(PAIRS4), 5):
            pairs = graph_4(mask)
            singletons = all(oracles.cut_counts(pairs, [v])[0] == oracles.cut_counts(pairs, [v])[1] for v in V4)
            assert singletons == oracles.degrees_balanced(list(V4), pairs)
        z = make_builtin("zchain")
        assert all(z.degree(v)[:2] == (1, 1) for v in z.prefix(20))
        assert not T.check_euler(z, 20).ok

    @pytest.mark.parametrize("name", ["ray", "reverse-ray", "symmetric-ray", "twin-rays", "dominated-ray", "necklace(3)"])
    def test_lemma_shadow(self, name):
        src = make_builtin(name)
        if T.check_euler(src, 12).ok:
            prefix = src.prefix(12)
            for X in [prefix[:n] for n in range(13)] + [(v,) for v in prefix]:
                assert solidity_check(src, X, 12).solid


class TestLiftEuler:
    @pytest.mark.parametrize("name, N", [("symmetric-ray", 8), ("necklace(3)", 6)])
    def test_full_depth(self, name, N):
        t = T.lift_euler(make_builtin(name), N)
        assert t.complete and t.depth == N and t.first == 0
        assert T.verify_thread(t).ok
        assert all(c for lv in t.to_json()["levels"] for c in lv["certificates"].values())

    def test_finite_source_top_level_is_a_tour_of_the_digraph(self):
        pairs = [("a", "b"), ("b", "c"), ("c", "a"), ("a", "c"), ("c", "a")]
        src = FiniteSource("abc", pairs)
        t = T.lift_euler(src, 3)
        assert t.complete
        assert is_valid_walk(src.graph, t.walk(3), closed=True, eulerian=True).ok

    def test_isolated_first_vertex_is_not_the_anchor(self):
        src = FiniteSource("abc", [("b", "c"), ("c", "b")])
        t = T.lift_euler(src, 3)
        assert t.complete and T.verify_thread(t).ok
        assert t.walk(3).start == "b"

    def test_zchain_fails(self):
        with pytest.raises(EulerConditionFailed):
            T.lift_euler(make_builtin("zchain"), 5)

    def test_success_implies_check(self):
        for name in ("symmetric-ray", "necklace(3)"):
            T.lift_euler(make_builtin(name), 4)
            assert T.check_euler(make_builtin(name), 4).ok

    def test_rotation_breaks_projection(self):
        t = T.lift_euler(make_builtin("symmetric-ray"), 6)
        w = t.walk(4)
        k = 1
        rotated = Walk(w.vertices[k:] + w.vertices[1:k + 1], w.edges[k:] + w.edges[:k])
        assert is_valid_walk(t.levels[4].graph, rotated, closed=True, eulerian=True).ok
        walks = list(t.walks)
        walks[4] = rotated
        v = T.verify_thread(replace(t, walks=walks))
        assert not v.ok and v.violation == "projection"


class TestSpanWalk:
    @pytest.mark.parametrize("name", ["symmetric-ray", "necklace(3)"])
    def test_thread(self, name):
        t = T.span_walk(make_builtin(name), 8)
        assert T.verify_thread(t).ok
        for n in range(t.first + 1, t.depth + 1):
            f = Q.bonding_between(t.levels[n], t.levels[n - 1])
            assert T.project_walk(f, t.walk(n)) == t.walk(n - 1)

    def test_finite_strongly_connected(self):
        src = FiniteSource("abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("b", "d")])
        t = T.span_walk(src, 4)
        assert is_valid_walk(src.graph, t.walk(4), closed=True, spanning=True).ok

    def test_twin_rays(self):
        with pytest.raises(NotStronglyConnected) as info:
            T.span_walk(make_builtin("twin-rays"), 3)
        assert info.value.witness == ("b0", "a0")

    def test_non_spanning_level(self):
        t = T.span_walk(make_builtin("symmetric-ray"), 4)
        walks = list(t.walks)
        walks[2 - t.first] = Walk(("u0", "u1", "u0"), ("u0>u1", "u1>u0"))
        v = T.verify_thread(replace(t, walks=walks))
        assert not v.ok and (v.violation, v.index) == ("spanning", 2)


class TestProjection:
    def test_identity(self):
        t = T.lift_euler(make_builtin("symmetric-ray"), 3)
        b = Q.bonding(make_builtin("symmetric-ray"), 3, 3)
        assert T.project_walk(b, t.walk(3)) == t.walk(3)

    def test_recomputation(self):
        src = make_builtin("symmetric-ray")
        t = T.span_walk(src, 3)
        assert T.project_walk(Q.bonding(src, 3, 2), t.walk(3)) == t.walk(2)

    def test_excursion_is_erased(self):
        src = make_builtin("symmetric-ray")
        w = Walk(("u1", "u2", "C3", "u2", "u1"), ("u1>u2", "u2>u3", "u3>u2", "u2>u1"))
        assert is_valid_walk(Q.level(src, 3).graph, w).ok
        assert T.project_walk(Q.bonding(src, 3, 2), w) == Walk(("u1", "C2", "u1"), ("u1>u2", "u2>u1"))


class TestJumpingArc:
    SRC = FiniteSource("abc", [("a", "b"), ("b", "a"), ("b", "c"), ("c", "a")])

    def level(self):
        return Q.level(self.SRC, 3)

    def test_inside_side1(self):
        w = Walk(("a", "b", "a"), ("a>b", "b>a"))
        assert T.check_jumping_arc(self.level(), ["a", "b"], ["c"], w).ok

    def test_crossing_by_the_only_edge(self):
        w = Walk(("a", "b", "c", "a"), ("a>b", "b>c", "c>a"))
        assert T.check_jumping_arc(self.level(), ["a", "b"], ["c"], w).ok
        crossings = [e for e, x, y in zip(w.edges, w.vertices, w.vertices[1:]) if x in "ab" and y == "c"]
        assert crossings == ["b>c"]

    def test_teleport_rejected(self):
        w = Walk(("a", "c"), ("a>b",))
        v = T.check_jumping_arc(self.level(), ["a", "b"], ["c"], w)
        assert not v.ok and v.violation == "incidence"

    def test_indirect_crossing_is_a_jump(self):
        src = FiniteSource("abc", [("a", "b"), ("b", "c"), ("c", "a")])
        lv = Q.level(src, 3)
        w = Walk(("a", "b", "c"), ("a>b", "b>c"))
        v = T.check_jumping_arc(lv, ["a"], ["c"], w)
        assert not v.ok and v.violation == "jump"

    def test_alignment(self):
        lv = Q.level(make_builtin("symmetric-ray"), 2)
        w = Walk.empty("u0")
        with pytest.raises(SideNotClassAligned):
            T.check_jumping_arc(lv, ["u2"], ["u0"], w)
        with pytest.raises(EmptySide):
            T.check_jumping_arc(lv, [], ["u0"], w)
        assert T.check_jumping_arc(lv, ["C2"], ["u0", "u1"], w).ok
