import json
import math

import pytest

from liftcsp.errors import FormatError, SignatureMismatchError, ValidationError
from liftcsp.structures import (
    DIGRAPH,
    GRAPH,
    RelationSpec,
    Signature,
    Structure,
    canonical_form,
    canonical_key,
    components,
    empty_structure,
    enumerate_structures,
    incidence_analysis,
    incidence_multigraph,
    isomorphic,
    parse_structure,
    product,
    serialize_structure,
    terminal_structure,
)

from oracles import (
    brute_girth,
    brute_hom_exists,
    brute_iso_classes,
    brute_isomorphic,
)


def digraph(n, arcs):
    return Structure.build(DIGRAPH, n, {"E": arcs})


def graph(n, edges):
    arcs = []
    for (u, v) in edges:
        arcs.append((u, v))
        arcs.append((v, u))
    return Structure.build(GRAPH, n, {"E": arcs})


class TestParsing:
    def test_arclist_roundtrip(self):
        s = parse_structure("3; 0 1; 1 2", "arclist")
        assert s.n == 3
        assert s.relation("E") == ((0, 1), (1, 2))
        assert parse_structure(serialize_structure(s, "arclist"), "arclist") == s

    def test_arclist_whitespace_insensitive(self):
        assert parse_structure(" 3 ;0   1;  1 2 ", "arclist") == \
            parse_structure("3; 0 1; 1 2", "arclist")

    def test_arclist_index_out_of_range(self):
        with pytest.raises(FormatError):
            parse_structure("2; 0 2", "arclist")

    def test_json_roundtrip_symmetric(self):
        k2 = graph(2, [(0, 1)])
        text = serialize_structure(k2, "json")
        assert parse_structure(text, "json") == k2
        mg = incidence_multigraph(k2)
        assert len(mg.blocks) == 1  # symmetric pair merged into one block

    def test_json_rejects_unknown_fields(self):
        obj = json.loads(serialize_structure(digraph(1, []), "json"))
        obj["extra"] = 1
        with pytest.raises(FormatError):
            parse_structure(json.dumps(obj), "json")
        obj = json.loads(serialize_structure(digraph(1, []), "json"))
        obj["signature"][0]["bogus"] = True
        with pytest.raises(FormatError):
            parse_structure(json.dumps(obj), "json")

    def test_json_symmetric_flag_violation(self):
        text = json.dumps({
            "signature": [{"name": "E", "arity": 2, "symmetric": True}],
            "universe": 2,
            "relations": {"E": [[0, 1]]},
        })
        with pytest.raises(FormatError):
            parse_structure(text, "json")

    def test_bytes_input(self):
        assert parse_structure(b"2; 0 1", "arclist") == digraph(2, [(0, 1)])

    def test_roundtrip_canonical_forms_enumerated(self):
        for s in enumerate_structures(DIGRAPH, 3):
            assert parse_structure(serialize_structure(s, "json"), "json") == s
            assert parse_structure(serialize_structure(s, "arclist"),
                                   "arclist") == s


class TestValidation:
    def test_duplicate_relation_names(self):
        with pytest.raises(ValidationError):
            Signature((RelationSpec("E", 2), RelationSpec("E", 1)))

    def test_arity_at_least_one(self):
        with pytest.raises(ValidationError):
            Signature((RelationSpec("E", 0),))

    def test_tuple_out_of_range(self):
        with pytest.raises(ValidationError):
            Structure.build(DIGRAPH, 2, {"E": [(0, 2)]})

    def test_symmetric_closure_enforced(self):
        with pytest.raises(ValidationError):
            Structure.build(GRAPH, 2, {"E": [(0, 1)]})


class TestCanonicalForm:
    def test_relabelling_invariance(self):
        a = digraph(2, [(1, 0)])
        b = digraph(2, [(0, 1)])
        assert canonical_form(a) == canonical_form(b)

    def test_idempotence(self):
        for s in enumerate_structures(DIGRAPH, 3):
            assert canonical_form(canonical_form(s)) == canonical_form(s)

    def test_two_vertex_digraph_classes(self):
        # oracle: all 16 labelled digraphs on 2 vertices, classes by orbit
        labelled = list(enumerate_structures(DIGRAPH, 2, up_to_iso=False))
        two = [s for s in labelled if s.n == 2]
        assert len(two) == 16
        reps = brute_iso_classes(two)
        assert len(reps) == 10
        keys = {canonical_key(s) for s in two}
        assert len(keys) == 10

    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
    def test_complete_invariant_against_permutation_orbits(self, n):
        labelled = [s for s in enumerate_structures(DIGRAPH, n, up_to_iso=False)
                    if s.n == n]
        if n > 3:
            labelled = labelled[::37]  # sample; full set is large
        for i, s in enumerate(labelled[:120]):
            for t in labelled[i:i + 4]:
                assert (canonical_key(s) == canonical_key(t)) == \
                    brute_isomorphic(s, t)

    def test_isomorphic_helper(self):
        assert isomorphic(digraph(2, [(1, 0)]), digraph(2, [(0, 1)]))
        assert not isomorphic(digraph(2, [(1, 0)]), digraph(2, []))


class TestEnumeration:
    def test_single_vertex_classes(self):
        classes = [s for s in enumerate_structures(DIGRAPH, 1)]
        # empty universe, one vertex, one looped vertex
        assert len(classes) == 3

    def test_digraph_counts(self):
        assert len(list(enumerate_structures(DIGRAPH, 2))) == 13

    def test_zero_max(self):
        assert list(enumerate_structures(DIGRAPH, 0)) == [empty_structure(DIGRAPH)]

    @pytest.mark.parametrize("sig,n,expected", [
        (DIGRAPH, 3, 104),   # binary relations on 3 points up to iso
        (GRAPH, 3, 20),      # symmetric relations on 3 points up to iso
        (GRAPH, 4, 90),
    ])
    def test_counts_against_labelled_orbits(self, sig, n, expected):
        classes = [s for s in enumerate_structures(sig, n) if s.n == n]
        assert len(classes) == expected
        labelled = [s for s in enumerate_structures(sig, n, up_to_iso=False)
                    if s.n == n]
        assert len(brute_iso_classes(labelled)) == expected

    def test_deterministic_order(self):
        a = list(enumerate_structures(DIGRAPH, 3))
        b = list(enumerate_structures(DIGRAPH, 3))
        assert a == b
        sizes = [s.n for s in a]
        assert sizes == sorted(sizes)


class TestProduct:
    def test_signature_mismatch(self):
        with pytest.raises(SignatureMismatchError):
            product(digraph(1, []), graph(1, []))

    def test_loop_is_identity_up_to_iso(self):
        loop = digraph(1, [(0, 0)])
        for b in enumerate_structures(DIGRAPH, 3):
            p = product(loop, b)
            assert isomorphic(p, b)

    def test_k2_times_k2_checkerboard(self):
        k2 = graph(2, [(0, 1)])
        p = product(k2, k2)
        assert p.n == 4
        # two disjoint symmetric edges: (0,0)-(1,1) and (0,1)-(1,0)
        assert len(p.relation("E")) == 4
        assert isomorphic(p, graph(4, [(0, 3), (1, 2)]))

    def test_hom_product_property(self):
        # hom(A,X) and hom(A,Y) iff hom(A, X*Y), by the exhaustive oracle
        pool = [s for s in enumerate_structures(DIGRAPH, 2)]
        tri = [s for s in enumerate_structures(DIGRAPH, 3) if s.n == 3]
        pool3 = pool + tri[::11]
        for a in pool3[:10]:
            for x in pool:
                for y in pool:
                    lhs = brute_hom_exists(a, x) and brute_hom_exists(a, y)
                    rhs = brute_hom_exists(a, product(x, y))
                    assert lhs == rhs


class TestIncidence:
    def test_directed_path_is_tree(self):
        rep = incidence_analysis(digraph(3, [(0, 1), (1, 2)]))
        assert rep.girth is math.inf
        assert rep.is_forest and rep.is_tree

    def test_directed_three_cycle(self):
        rep = incidence_analysis(digraph(3, [(0, 1), (1, 2), (2, 0)]))
        assert rep.girth == 3
        assert not rep.is_forest

    def test_symmetric_flag_changes_blocks(self):
        flagged = graph(2, [(0, 1)])
        assert incidence_analysis(flagged).girth is math.inf
        assert incidence_analysis(flagged).is_tree
        unflagged = digraph(2, [(0, 1), (1, 0)])
        assert incidence_analysis(unflagged).girth == 2

    def test_loop_girth_one(self):
        assert incidence_analysis(digraph(1, [(0, 0)])).girth == 1

    def test_block_multiplicity_equals_arity(self):
        sig = Signature((RelationSpec("R", 3),))
        s = Structure.build(sig, 2, {"R": [(0, 1, 0)]})
        mg = incidence_multigraph(s)
        assert len(mg.incidences[0]) == 3

    @pytest.mark.parametrize("sig", [DIGRAPH, GRAPH])
    def test_girth_matches_oracle(self, sig):
        for s in enumerate_structures(sig, 4):
            got = incidence_analysis(s).girth
            want = brute_girth(s)
            assert got == want, (s, got, want)

    def test_forest_iff_infinite_girth(self):
        for s in enumerate_structures(DIGRAPH, 4):
            rep = incidence_analysis(s)
            assert rep.is_forest == (rep.girth is math.inf)

    def test_components(self):
        s = digraph(4, [(0, 1)])
        assert components(s) == [(0, 1), (2,), (3,)]

    def test_empty_structure_not_tree(self):
        rep = incidence_analysis(empty_structure(DIGRAPH))
        assert rep.is_forest and not rep.is_tree

    def test_single_vertex_is_tree(self):
        rep = incidence_analysis(digraph(1, []))
        assert rep.is_tree


class TestHelpers:
    def test_terminal_structure_receives_everything(self):
        t = terminal_structure(DIGRAPH)
        for s in enumerate_structures(DIGRAPH, 3):
            assert brute_hom_exists(s, t)
