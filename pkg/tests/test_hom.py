import itertools
import random

import pytest

from liftcsp.errors import BudgetExceededError, SignatureMismatchError
from liftcsp.hom import Hom, core, find_hom, fold_dominated, hom_equivalent, is_core, is_hom
from liftcsp.structures import (
    DIGRAPH,
    GRAPH,
    Structure,
    canonical_form,
    enumerate_structures,
    isomorphic,
)

from oracles import brute_core_size, brute_hom_exists, brute_hom_maps, brute_retracts


def digraph(n, arcs):
    return Structure.build(DIGRAPH, n, {"E": arcs})


def graph(n, edges):
    arcs = []
    for (u, v) in edges:
        arcs.append((u, v))
        arcs.append((v, u))
    return Structure.build(GRAPH, n, {"E": arcs})


P2 = digraph(3, [(0, 1), (1, 2)])
ARC = digraph(2, [(0, 1)])
K2 = graph(2, [(0, 1)])
K3 = graph(3, [(0, 1), (0, 2), (1, 2)])
C6 = graph(6, [(i, (i + 1) % 6) for i in range(6)])


class TestFindHom:
    def test_two_arc_path_into_single_arc(self):
        # oracle: all 8 maps fail
        assert not brute_hom_exists(P2, ARC)
        assert find_hom(P2, ARC) is None

    def test_identity_always_found(self):
        for s in [P2, ARC, K2, K3]:
            h = find_hom(s, s)
            assert h is not None
            assert is_hom(s, s, h.map)

    def test_injective_k2_into_k3(self):
        h = find_hom(K2, K3, "injective")
        assert h is not None
        assert len(set(h.map)) == 2

    def test_signature_mismatch(self):
        with pytest.raises(SignatureMismatchError):
            find_hom(P2, K2)

    def test_empty_source(self):
        h = find_hom(digraph(0, []), ARC)
        assert h is not None and h.map == ()

    def test_nonempty_into_empty(self):
        assert find_hom(ARC, digraph(0, [])) is None

    def test_budget_exceeded_distinct_from_none(self):
        big = graph(7, [(i, j) for i in range(7) for j in range(i + 1, 7)])
        with pytest.raises(BudgetExceededError):
            find_hom(big, big, "standard", budget=3)

    @pytest.mark.parametrize("variant", ["standard", "injective", "full"])
    def test_oracle_agreement_all_pairs_up_to_three(self, variant):
        pool = list(enumerate_structures(DIGRAPH, 3))
        for a in pool:
            for b in pool[::7]:
                got = find_hom(a, b, variant) is not None
                want = brute_hom_exists(a, b, variant)
                assert got == want, (a, b, variant)

    @pytest.mark.parametrize("variant", ["standard", "injective", "full"])
    def test_oracle_agreement_sampled_pairs_size_four(self, variant):
        rng = random.Random(5)
        pool = [s for s in enumerate_structures(DIGRAPH, 4) if s.n == 4]
        pairs = [(rng.choice(pool), rng.choice(pool)) for _ in range(60)]
        for a, b in pairs:
            got = find_hom(a, b, variant) is not None
            want = brute_hom_exists(a, b, variant)
            assert got == want

    def test_witness_satisfies_variant_invariants(self):
        pool = list(enumerate_structures(DIGRAPH, 3))
        for a in pool[::5]:
            for b in pool[::9]:
                for variant in ("standard", "injective", "full"):
                    h = find_hom(a, b, variant)
                    if h is not None:
                        assert is_hom(a, b, h.map, variant)
                        # every injective/full witness is a standard hom
                        assert is_hom(a, b, h.map, "standard")


class TestComposition:
    def test_composition_closure(self):
        rng = random.Random(11)
        pool = [s for s in enumerate_structures(DIGRAPH, 3)]
        count = 0
        for _ in range(300):
            a, b, c = (rng.choice(pool) for _ in range(3))
            f = find_hom(a, b)
            g = find_hom(b, c)
            if f is None or g is None:
                continue
            composed = g.compose(f)
            assert is_hom(a, c, composed.map)
            count += 1
        assert count > 20


class TestCore:
    def test_core_of_even_cycle_is_k2(self):
        res = core(C6)
        assert isomorphic(res.core, K2)

    def test_core_of_k3_is_k3(self):
        # oracle: all 27 self-maps; the non-bijective ones break an edge
        assert brute_core_size(K3) == 3
        res = core(K3)
        assert res.core.n == 3

    def test_directed_two_arc_path_is_rigid(self):
        # oracle via exhaustive retracts: the only endomorphism is the
        # identity, so the path is its own core
        assert brute_retracts(P2) == []
        res = core(P2)
        assert res.core.n == 3
        assert isomorphic(res.core, P2)

    def test_undirected_path_folds_to_edge(self):
        path = graph(3, [(0, 1), (1, 2)])
        assert brute_core_size(path) == 2
        assert isomorphic(core(path).core, K2)

    def test_retraction_fixes_retract_pointwise(self):
        for s in [C6, K3, P2, graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])]:
            res = core(s)
            for v in res.vertices:
                assert res.retraction_map[v] == v
            hom = res.retraction_hom(s)
            assert is_hom(s, hom.target, hom.map)

    def test_core_size_matches_oracle(self):
        for s in enumerate_structures(DIGRAPH, 3):
            assert core(s).core.n == brute_core_size(s), s

    def test_core_idempotence_small(self):
        for s in enumerate_structures(DIGRAPH, 3):
            c = core(s).core
            assert isomorphic(core(c).core, c)

    def test_core_idempotence_sampled_four(self):
        rng = random.Random(3)
        pool = [s for s in enumerate_structures(DIGRAPH, 4) if s.n == 4]
        for s in rng.sample(pool, 40):
            c = core(s).core
            assert isomorphic(core(c).core, c)

    def test_hom_equivalent_to_core(self):
        for s in enumerate_structures(DIGRAPH, 3):
            assert hom_equivalent(s, core(s).core)

    def test_every_core_endomorphism_is_automorphism(self):
        for s in list(enumerate_structures(DIGRAPH, 3))[::3]:
            c = core(s).core
            for m in brute_hom_maps(c, c):
                assert len(set(m)) == c.n

    def test_core_returned_canonical(self):
        for s in list(enumerate_structures(DIGRAPH, 3))[::9]:
            c = core(s).core
            assert c == canonical_form(c)


class TestFold:
    def test_fold_result_hom_equivalent(self):
        for s in [C6, K3, graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])]:
            folded, fmap, sel = fold_dominated(s)
            assert hom_equivalent(s, folded)
            assert is_hom(s, folded, fmap)
            assert s.induced(sel) == folded


class TestHomEquivalent:
    def test_even_cycle_and_k2(self):
        c4 = graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        assert hom_equivalent(c4, K2)

    def test_k2_vs_k3(self):
        assert not hom_equivalent(K2, K3)

    def test_reflexive(self):
        assert hom_equivalent(K3, K3)


class TestIsCore:
    def test_is_core_examples(self):
        assert is_core(K3)
        assert is_core(P2)
        assert not is_core(C6)
