"""Homomorphism search (standard / injective / full), cores and
homomorphism equivalence.

The search itself is a backtracking kernel with forward checking and
unit propagation (see kernels); this module builds the flat arrays,
caches results and independently validates every witness before
returning it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct
from typing import Dict, List, Optional, Sequence, Tuple

from liftcsp import kernels
from liftcsp.errors import BudgetExceededError, ValidationError
from liftcsp.structures import (
    Structure,
    canonical_form,
    require_same_signature,
)

DEFAULT_BUDGET = 10 ** 7

VARIANTS = ("standard", "injective", "full")


@dataclass(frozen=True)
class Hom:
    source: Structure
    target: Structure
    map: Tuple[int, ...]
    variant: str = "standard"

    def __call__(self, v: int) -> int:
        return self.map[v]

    def compose(self, other: "Hom") -> "Hom":
        """self after other: other.source -> self.target."""
        if other.target != self.source:
            raise ValidationError("composition mismatch")
        return Hom(other.source, self.target,
                   tuple(self.map[x] for x in other.map), "standard")


def is_hom(a: Structure, b: Structure, mapping: Sequence[int],
           variant: str = "standard") -> bool:
    """Direct check of the homomorphism conditions, independent of search."""
    require_same_signature(a, b)
    if len(mapping) != a.n:
        return False
    if any(not (0 <= x < b.n) for x in mapping):
        return False
    for spec, ra, rb in zip(a.signature.relations, a.tuples, b.tuples):
        rbset = set(rb)
        for t in ra:
            if tuple(mapping[x] for x in t) not in rbset:
                return False
    if variant == "injective":
        if len(set(mapping)) != a.n:
            return False
    elif variant == "full":
        # Preimages of tuples must be tuples, for every non-unary relation.
        for spec, ra, rb in zip(a.signature.relations, a.tuples, b.tuples):
            if spec.arity < 2:
                continue
            raset = set(ra)
            rbset = set(rb)
            for comb in iproduct(range(a.n), repeat=spec.arity):
                if tuple(mapping[x] for x in comb) in rbset and comb not in raset:
                    return False
    elif variant != "standard":
        raise ValidationError(f"unknown variant {variant!r}")
    return True


@lru_cache(maxsize=1 << 17)
def _flat(s: Structure):
    arities = tuple(spec.arity for spec in s.signature.relations)
    flats = []
    for rel in s.tuples:
        f: List[int] = []
        for t in rel:
            f.extend(t)
        flats.append(tuple(f))
    return arities, tuple(flats)


_HOM_CACHE: Dict[Tuple[Structure, Structure, str], Optional[Tuple[int, ...]]] = {}


def find_hom(a: Structure, b: Structure, variant: str = "standard",
             budget: int = DEFAULT_BUDGET,
             domains: Optional[Sequence[Sequence[int]]] = None,
             nodes_out: Optional[List[int]] = None) -> Optional[Hom]:
    """First homomorphism a -> b in deterministic search order, or None.

    Raises BudgetExceededError when the node budget runs out, which is
    reported distinctly from a negative answer.  ``domains`` optionally
    restricts candidate images per source element.
    """
    require_same_signature(a, b)
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    cache_key = None
    if domains is None and budget == DEFAULT_BUDGET and nodes_out is None:
        cache_key = (a, b, variant)
        if cache_key in _HOM_CACHE:
            m = _HOM_CACHE[cache_key]
            return None if m is None else Hom(a, b, m, variant)
    ar_a, fl_a = _flat(a)
    _, fl_b = _flat(b)
    status, mapping, nodes = kernels.hom_search(
        a.n, b.n, list(ar_a), [list(f) for f in fl_a], [list(f) for f in fl_b],
        kernels.VARIANT_CODES[variant], budget,
        None if domains is None else [list(d) for d in domains])
    if nodes_out is not None:
        nodes_out.append(nodes)
    if status == kernels.BUDGET:
        raise BudgetExceededError(
            f"homomorphism search exceeded {budget} assignments", nodes=nodes)
    if status == kernels.NONE:
        if cache_key is not None:
            _HOM_CACHE[cache_key] = None
        return None
    mt = tuple(mapping)
    if not is_hom(a, b, mt, variant):
        raise AssertionError("search returned an invalid witness")
    if cache_key is not None:
        _HOM_CACHE[cache_key] = mt
    return Hom(a, b, mt, variant)


def hom_equivalent(a: Structure, b: Structure,
                   budget: int = DEFAULT_BUDGET) -> bool:
    """True iff homomorphisms exist both ways."""
    require_same_signature(a, b)
    return (find_hom(a, b, "standard", budget) is not None
            and find_hom(b, a, "standard", budget) is not None)


# ---------------------------------------------------------------------------
# Retracts and cores
# ---------------------------------------------------------------------------

def fold_dominated(s: Structure) -> Tuple[Structure, List[int], List[int]]:
    """Fold dominated elements (u folds onto v when substituting v for u
    keeps every tuple present).  Returns the folded structure, the
    retraction map from s onto it, and the kept element subset of s.
    Cheap pre-reduction for core search."""
    cur = s
    total_map = list(range(s.n))
    sel = list(range(s.n))
    while True:
        tup_sets = [set(rel) for rel in cur.tuples]
        by_elem: List[List[Tuple[int, Tuple[int, ...]]]] = [[] for _ in range(cur.n)]
        for ri, rel in enumerate(cur.tuples):
            for t in rel:
                for e in set(t):
                    by_elem[e].append((ri, t))
        fold_to = -1
        fold_from = -1
        for u in range(cur.n):
            for v in range(cur.n):
                if u == v:
                    continue
                ok = True
                for ri, t in by_elem[u]:
                    sub = tuple(v if x == u else x for x in t)
                    if sub not in tup_sets[ri]:
                        ok = False
                        break
                if ok:
                    fold_from, fold_to = u, v
                    break
            if fold_to != -1:
                break
        if fold_to == -1:
            return cur, total_map, sel
        keep = [x for x in range(cur.n) if x != fold_from]
        idx = {x: i for i, x in enumerate(keep)}
        step = [idx[fold_to] if x == fold_from else idx[x] for x in range(cur.n)]
        cur = cur.induced(keep)
        total_map = [step[x] for x in total_map]
        sel = [sel[x] for x in keep]


@dataclass(frozen=True)
class CoreResult:
    core: Structure                 # canonical form of the retract
    vertices: Tuple[int, ...]       # retract element set inside the input
    retraction_map: Tuple[int, ...]  # input element -> element of `vertices`

    def retraction_hom(self, source: Structure) -> Hom:
        """The retraction as a Hom onto the induced substructure."""
        sub = source.induced(self.vertices)
        idx = {v: i for i, v in enumerate(sorted(self.vertices))}
        return Hom(source, sub, tuple(idx[x] for x in self.retraction_map))


def core(a: Structure, budget: int = DEFAULT_BUDGET) -> CoreResult:
    """Compute the core: repeatedly retract until every endomorphism is an
    automorphism.  The retract is unique up to isomorphism; the `core`
    field is returned in canonical form."""
    cur, cur_map, sel = fold_dominated(a)
    while cur.n > 0:
        found = None
        # Search for a non-surjective endomorphism, trying to avoid each
        # element in canonical (ascending) order.
        for v in range(cur.n):
            dom = [x for x in range(cur.n) if x != v]
            h = find_hom(cur, cur, "standard", budget,
                         domains=[dom] * cur.n)
            if h is not None:
                found = h
                break
        if found is None:
            break
        image = sorted(set(found.map))
        idx = {x: i for i, x in enumerate(image)}
        step = [idx[found.map[x]] for x in range(cur.n)]
        cur = cur.induced(image)
        cur_map = [step[x] for x in cur_map]
        sel = [sel[x] for x in image]

    # sel is ascending, and a.induced(sel) equals cur element for element.
    # cur_map restricted to the copy of the retract is an endomorphism of
    # the core, hence an automorphism sigma; composing with its inverse
    # makes the retraction fix the retract pointwise.
    vertices = tuple(sel)
    sigma = [cur_map[sel[c]] for c in range(cur.n)]
    inv = [0] * cur.n
    for x in range(cur.n):
        inv[sigma[x]] = x
    retraction = tuple(sel[inv[cur_map[v]]] for v in range(a.n))
    for v in vertices:
        if retraction[v] != v:
            raise AssertionError("retraction does not fix the retract")
    sub = a.induced(vertices)
    idx = {u: i for i, u in enumerate(vertices)}
    if not is_hom(a, sub, tuple(idx[retraction[v]] for v in range(a.n))):
        raise AssertionError("retraction is not a homomorphism")
    return CoreResult(canonical_form(sub), vertices, retraction)


def is_core(a: Structure, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff every endomorphism is an automorphism (no proper retract)."""
    for v in range(a.n):
        dom = [x for x in range(a.n) if x != v]
        if find_hom(a, a, "standard", budget, domains=[dom] * a.n) is not None:
            return False
    return True
