import itertools
import json
import random

import pytest

from liftcsp.errors import FormatError, SignatureMismatchError, ValidationError
from liftcsp.families import k_coloring_family
from liftcsp.hom import find_hom, is_hom
from liftcsp.lifts import (
    ForbFamily,
    Lift,
    family_from_json,
    family_to_json,
    forb_member,
    lift_from_json,
    lift_to_json,
    pullback_lift,
    shadow,
    shadow_member,
)
from liftcsp.structures import (
    DIGRAPH,
    GRAPH,
    Structure,
    enumerate_structures,
)

from oracles import brute_hom_exists, proper_colorings


def digraph(n, arcs):
    return Structure.build(DIGRAPH, n, {"E": arcs})


def graph(n, edges):
    arcs = []
    for (u, v) in edges:
        arcs.append((u, v))
        arcs.append((v, u))
    return Structure.build(GRAPH, n, {"E": arcs})


K2 = graph(2, [(0, 1)])
K3 = graph(3, [(0, 1), (0, 2), (1, 2)])
K4 = graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
THREE_COL = k_coloring_family(3)


class TestLiftBasics:
    def test_shadow_drops_colors(self):
        lift = Lift.build(K2, ("1", "2"), [["1"], ["2"]])
        assert shadow(lift) == K2

    def test_covering_enforced(self):
        with pytest.raises(ValidationError):
            Lift.build(K2, ("1", "2"), [["1"], []])

    def test_unknown_color_rejected(self):
        with pytest.raises(ValidationError):
            Lift.build(K2, ("1",), [["1"], ["9"]])

    def test_monochromatic_edge_shadow(self):
        mono = THREE_COL.members[0]
        assert shadow(mono) == K2

    def test_colors_of(self):
        lift = Lift.build(K2, ("1", "2"), [["1", "2"], ["2"]])
        assert lift.colors_of(0) == ("1", "2")
        assert lift.colors_of(1) == ("2",)


class TestPullback:
    def test_identity_pullback(self):
        b = Lift.build(K2, ("1", "2"), [["1"], ["2"]])
        lifted = pullback_lift((0, 1), K2, b)
        assert lifted == b

    def test_four_cycle_alternates(self):
        c4 = graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        b = Lift.build(K2, ("1", "2"), [["1"], ["2"]])
        f = find_hom(c4, K2).map
        lifted = pullback_lift(f, c4, b)
        cols = [lifted.colors_of(v)[0] for v in range(4)]
        assert cols[0] != cols[1] and cols[1] != cols[2] and cols[2] != cols[3]

    def test_shadow_of_pullback_is_base(self):
        c4 = graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        b = Lift.build(K2, ("1", "2"), [["1"], ["2"]])
        f = find_hom(c4, K2).map
        assert shadow(pullback_lift(f, c4, b)) == c4

    def test_non_hom_rejected(self):
        b = Lift.build(K2, ("1", "2"), [["1"], ["2"]])
        with pytest.raises(ValidationError):
            pullback_lift((0, 0), K2, b)

    def test_randomized_pullbacks_validate(self):
        rng = random.Random(99)
        digraphs = [s for s in enumerate_structures(DIGRAPH, 4) if s.n >= 1]
        done = 0
        tries = 0
        while done < 40 and tries < 4000:
            tries += 1
            a = rng.choice(digraphs)
            base = rng.choice(digraphs)
            gamma = ("1", "2")
            assign = [[rng.choice(gamma)] for _ in range(base.n)]
            b_lift = Lift.build(base, gamma, assign)
            f = find_hom(a, base)
            if f is None:
                continue
            lifted = pullback_lift(f.map, a, b_lift)
            assert shadow(lifted) == a
            assert is_hom(lifted.structure, b_lift.structure, f.map)
            done += 1
        assert done == 40


class TestForbMember:
    def test_bichromatic_edge_avoids_family(self):
        lift = Lift.build(K2, THREE_COL.gamma, [["1"], ["2"]])
        assert forb_member(lift, THREE_COL).member

    def test_monochromatic_edge_caught_with_witness(self):
        lift = Lift.build(K2, THREE_COL.gamma, [["1"], ["1"]])
        out = forb_member(lift, THREE_COL)
        assert not out.member
        assert out.violator == 0  # the color-1 monochromatic edge
        assert is_hom(THREE_COL.members[0].structure, lift.structure,
                      out.witness.map)

    def test_empty_base_relations(self):
        base = graph(2, [])
        lift = Lift.build(base, THREE_COL.gamma, [["1"], ["1"]])
        assert forb_member(lift, THREE_COL).member

    def test_gamma_mismatch(self):
        lift = Lift.build(K2, ("1",), [["1"], ["1"]])
        with pytest.raises(SignatureMismatchError):
            forb_member(lift, THREE_COL)


class TestShadowMember:
    def test_k3_three_colorable(self):
        witness = shadow_member(K3, THREE_COL)
        assert witness is not None
        assert sorted(witness) == ["1", "2", "3"]

    def test_k4_not_three_colorable(self):
        # oracle: 3^4 colorings all fail
        edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
        assert not list(proper_colorings(edges, 4, 3))
        assert shadow_member(K4, THREE_COL) is None

    def test_single_vertex(self):
        assert shadow_member(graph(1, []), THREE_COL) == ["1"]

    def test_witness_lift_passes_forb(self):
        for g in [K3, graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])]:
            witness = shadow_member(g, THREE_COL)
            lift = Lift.build(g, THREE_COL.gamma, [[c] for c in witness])
            assert forb_member(lift, THREE_COL).member

    def test_agrees_with_proper_coloring_oracle(self):
        for g in enumerate_structures(GRAPH, 4):
            edges = [(u, v) for (u, v) in g.relation("E") if u <= v]
            want = any(True for _ in proper_colorings(edges, g.n, 3))
            got = shadow_member(g, THREE_COL) is not None
            assert got == want, g


class TestSingletonReduction:
    """Exhaustive covering-subset assignments agree with the singleton
    search, for one family per variant, on all digraphs up to 4 vertices."""

    @staticmethod
    def _families():
        arc = digraph(2, [(0, 1)])
        gamma = ("1", "2")
        mono = Lift.build(arc, gamma, [["1"], ["1"]])
        bichrome = Lift.build(arc, gamma, [["1"], ["2"]])
        return [
            ForbFamily(gamma, (mono,), "standard"),
            ForbFamily(gamma, (bichrome,), "injective"),
            ForbFamily(gamma, (mono,), "full"),
        ]

    @staticmethod
    def _subset_search(g, family):
        gamma = family.gamma
        nonempty = [c for r in range(1, len(gamma) + 1)
                    for c in itertools.combinations(gamma, r)]
        for assign in itertools.product(nonempty, repeat=g.n):
            lift = Lift.build(g, gamma, [list(cs) for cs in assign])
            if forb_member(lift, family).member:
                return True
        if g.n == 0:
            return forb_member(Lift.build(g, gamma, []), family).member
        return False

    @pytest.mark.parametrize("family_index", [0, 1, 2])
    def test_singleton_search_equals_subset_search(self, family_index):
        family = self._families()[family_index]
        mismatches = 0
        for g in enumerate_structures(DIGRAPH, 4):
            got = shadow_member(g, family) is not None
            want = self._subset_search(g, family)
            if got != want:
                mismatches += 1
        assert mismatches == 0


class TestFunctoriality:
    def test_lift_homs_project_to_shadow_homs(self):
        rng = random.Random(21)
        digraphs = [s for s in enumerate_structures(DIGRAPH, 3) if s.n >= 1]
        gamma = ("1", "2")
        checked = 0
        for _ in range(600):
            a = rng.choice(digraphs)
            b = rng.choice(digraphs)
            la = Lift.build(a, gamma, [[rng.choice(gamma)] for _ in range(a.n)])
            lb = Lift.build(b, gamma, [[rng.choice(gamma)] for _ in range(b.n)])
            h = find_hom(la.structure, lb.structure)
            if h is None:
                continue
            assert is_hom(a, b, h.map)
            checked += 1
        assert checked > 50


class TestUpwardClosure:
    def test_dropping_hom_above_member_is_noop(self):
        # if one member maps into another, dropping the larger changes nothing
        gamma = ("1",)
        arc = digraph(2, [(0, 1)])
        path = digraph(3, [(0, 1), (1, 2)])
        m_arc = Lift.build(arc, gamma, [["1"], ["1"]])
        m_path = Lift.build(path, gamma, [["1"], ["1"], ["1"]])
        both = ForbFamily(gamma, (m_arc, m_path), "standard")
        only = ForbFamily(gamma, (m_arc,), "standard")
        assert find_hom(m_arc.structure, m_path.structure) is not None
        for g in enumerate_structures(DIGRAPH, 4):
            la = shadow_member(g, both) is not None
            lb = shadow_member(g, only) is not None
            assert la == lb


class TestSerialization:
    def test_lift_json_roundtrip(self):
        lift = Lift.build(K2, ("1", "2"), [["1", "2"], ["2"]])
        assert lift_from_json(lift_to_json(lift)) == lift

    def test_lift_json_shape(self):
        lift = Lift.build(K2, ("1", "2"), [["1"], ["2"]])
        obj = lift_to_json(lift)
        assert set(obj) == {"signature", "universe", "relations", "colors"}
        assert obj["colors"]["gamma"] == ["1", "2"]
        assert obj["colors"]["assign"] == [["1"], ["2"]]

    def test_lift_json_rejects_unknown(self):
        obj = lift_to_json(Lift.build(K2, ("1",), [["1"], ["1"]]))
        obj["weird"] = 0
        with pytest.raises(FormatError):
            lift_from_json(obj)

    def test_family_json_roundtrip(self):
        fam2 = family_from_json(family_to_json(THREE_COL))
        assert fam2.members == THREE_COL.members
        assert fam2.gamma == THREE_COL.gamma
