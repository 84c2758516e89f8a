"""Finite dualities: duals of trees, dual sets of forest families via
products, and exhaustive small-instance verification of dualities and
shadow dualities.

Every dual emitted here is certificate-backed: the necessary condition
(no forbidden structure maps into the dual) is always re-checked, and an
exhaustive sweep over all structures up to ``verified_to`` elements
confirms the duality.  Nothing is claimed beyond the verified bound.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from liftcsp.errors import (
    BudgetExceededError,
    ConstructionError,
    SearchBoundsError,
    SignatureMismatchError,
    ValidationError,
)
from liftcsp.hom import DEFAULT_BUDGET, Hom, core, find_hom, fold_dominated, hom_equivalent
from liftcsp.lifts import ForbFamily, shadow_member
from liftcsp.structures import (
    Signature,
    Structure,
    canonical_form,
    canonical_key,
    components,
    enumerate_structures,
    incidence_analysis,
    incidence_multigraph,
    product,
    require_same_signature,
    structure_from_json,
    structure_to_json,
    terminal_structure,
)


@dataclass(frozen=True)
class DualityReport:
    status: str                     # verified | counterexample | budget_exceeded
    verified_to: int
    counterexample: Optional[Structure] = None
    side: Optional[str] = None      # in_forb_not_csp | in_csp_not_forb

    def to_json(self):
        return {
            "status": self.status,
            "verified_to": self.verified_to,
            "counterexample": (None if self.counterexample is None
                               else structure_to_json(self.counterexample)),
            "side": self.side,
        }


@dataclass(frozen=True)
class DualCandidate:
    duals: Tuple[Structure, ...]
    verified_to: int
    provenance: str                 # constructed | searched

    def to_json(self):
        return {
            "duals": [structure_to_json(d) for d in self.duals],
            "verified_to": self.verified_to,
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class DualBounds:
    n_max: int = 4               # exhaustive verification bound
    max_m: int = 5               # hom-maximality evidence bound (searched mode)
    max_candidate_size: int = 4  # candidate universe bound (searched mode)
    max_dual_universe: int = 200000  # constructed-dual universe guard
    budget: int = DEFAULT_BUDGET


@dataclass(frozen=True)
class CspOutcome:
    member: bool
    index: Optional[int] = None
    witness: Optional[Hom] = None


def csp_member(a: Structure, duals: Sequence[Structure],
               budget: int = DEFAULT_BUDGET) -> CspOutcome:
    """True iff `a` maps into some dual; the witness is returned."""
    for i, d in enumerate(duals):
        require_same_signature(a, d)
        h = find_hom(a, d, "standard", budget)
        if h is not None:
            return CspOutcome(True, i, h)
    return CspOutcome(False)


# ---------------------------------------------------------------------------
# Verification sweeps
# ---------------------------------------------------------------------------

def verify_duality(forbidden: Sequence[Structure], duals: Sequence[Structure],
                   n_max: int, budget: int = DEFAULT_BUDGET,
                   jobs: int = 1) -> DualityReport:
    """Check Forb(forbidden) = CSP(duals) over every structure with at most
    n_max elements up to isomorphism; first discrepancy in enumeration
    order is reported."""
    sig = _common_signature(list(forbidden) + list(duals))
    verified = -1
    for n in range(n_max + 1):
        batch = [s for s in enumerate_structures(sig, n) if s.n == n]
        try:
            results = _sweep(batch, forbidden, duals, None, budget, jobs)
        except BudgetExceededError:
            return DualityReport("budget_exceeded", verified)
        for g, in_forb, in_csp in results:
            if in_forb != in_csp:
                side = "in_forb_not_csp" if in_forb else "in_csp_not_forb"
                return DualityReport("counterexample", verified, g, side)
        verified = n
    return DualityReport("verified", verified)


def verify_shadow_duality(family: ForbFamily, duals: Sequence[Structure],
                          n_max: int, budget: int = DEFAULT_BUDGET,
                          jobs: int = 1) -> DualityReport:
    """Check that shadow membership for the family coincides with CSP
    membership for the duals, over all base structures up to n_max."""
    base_sig = family.base_signature()
    dual_sig = _common_signature(list(duals)) if duals else None
    if base_sig is not None and dual_sig is not None and base_sig != dual_sig:
        raise SignatureMismatchError("shadow and dual signatures differ")
    sig = base_sig if base_sig is not None else dual_sig
    if sig is None:
        raise ValidationError("cannot infer signature (empty family and duals)")
    verified = -1
    for n in range(n_max + 1):
        batch = [s for s in enumerate_structures(sig, n) if s.n == n]
        try:
            results = _sweep(batch, None, duals, family, budget, jobs)
        except BudgetExceededError:
            return DualityReport("budget_exceeded", verified)
        for g, in_forb, in_csp in results:
            if in_forb != in_csp:
                side = "in_forb_not_csp" if in_forb else "in_csp_not_forb"
                return DualityReport("counterexample", verified, g, side)
        verified = n
    return DualityReport("verified", verified)


def _common_signature(structs: Sequence[Structure]) -> Optional[Signature]:
    sig = None
    for s in structs:
        if sig is None:
            sig = s.signature
        elif s.signature != sig:
            raise SignatureMismatchError("signatures differ")
    return sig


def _membership(g: Structure, forbidden, duals, family, budget):
    if family is not None:
        in_forb = shadow_member(g, family, budget) is not None
    else:
        in_forb = all(find_hom(f, g, "standard", budget) is None
                      for f in forbidden)
    in_csp = csp_member(g, duals, budget).member
    return (g, in_forb, in_csp)


def _sweep(batch, forbidden, duals, family, budget, jobs):
    if jobs > 1 and len(batch) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(
                lambda g: _membership(g, forbidden, duals, family, budget),
                batch))
    return [_membership(g, forbidden, duals, family, budget) for g in batch]


# ---------------------------------------------------------------------------
# Dual of a tree: explicit construction
# ---------------------------------------------------------------------------

def tree_dual_construction(tree: Structure,
                           max_universe: int = 200000) -> Structure:
    """Explicit dual of a tree, before reduction.

    Elements of the dual are "types": for each tree element t, a proper
    subset of the incidence blocks at t (a full set would let the whole
    tree map in).  A relation tuple of types is admitted when it is closed
    under the one-step inference its blocks enable: whenever, for some
    block and coordinate, every other endpoint already carries all of its
    branches away from the block, the endpoint's branch through the block
    must be carried too.  Mapping each vertex of a tree-avoiding structure
    to the set of rooted branches that reach it is then a homomorphism
    into the dual, while the tree itself cannot map anywhere.
    """
    rep = incidence_analysis(tree)
    if not rep.is_tree:
        raise ValidationError("dual construction requires a tree")
    mg = incidence_multigraph(tree)
    n = tree.n
    inc: List[List[int]] = [[] for _ in range(n)]
    for bi, block in enumerate(mg.blocks):
        for e in sorted(set(block.rep)):
            inc[e].append(bi)

    per_elem_options: List[List[frozenset]] = []
    size = 1
    for t in range(n):
        blocks = inc[t]
        opts = []
        for mask in range(1 << len(blocks)):
            if mask == (1 << len(blocks)) - 1:
                continue  # all branches present would admit the whole tree
            opts.append(frozenset(blocks[i] for i in range(len(blocks))
                                  if mask & (1 << i)))
        opts.sort(key=lambda fs: (len(fs), sorted(fs)))
        per_elem_options.append(opts)
        size *= len(opts)
        if size > max_universe:
            raise SearchBoundsError(
                f"tree dual universe exceeds {max_universe} elements")

    universe = [tuple(choice) for choice in itertools.product(*per_elem_options)]
    # type of vertex d at element t: universe[d][t]

    def closed(dtuple: Tuple[int, ...], block_id: int) -> bool:
        block = mg.blocks[block_id]
        for t in block.orbit:
            for i in range(len(t)):
                e_i = t[i]
                premise = True
                for j in range(len(t)):
                    if j == i:
                        continue
                    e_j = t[j]
                    tau_j = universe[dtuple[j]][e_j]
                    for b2 in inc[e_j]:
                        if b2 != block_id and b2 not in tau_j:
                            premise = False
                            break
                    if not premise:
                        break
                if premise and block_id not in universe[dtuple[i]][e_i]:
                    return False
        return True

    blocks_by_rel: Dict[int, List[int]] = {}
    for bi, block in enumerate(mg.blocks):
        blocks_by_rel.setdefault(block.rel, []).append(bi)

    rels: Dict[str, List[Tuple[int, ...]]] = {}
    for ri, spec in enumerate(tree.signature.relations):
        out = []
        for dtuple in itertools.product(range(len(universe)), repeat=spec.arity):
            if all(closed(dtuple, bi) for bi in blocks_by_rel.get(ri, [])):
                out.append(dtuple)
        rels[spec.name] = out
    return Structure.build(tree.signature, len(universe), rels)


def reduce_structure(s: Structure, budget: int = DEFAULT_BUDGET) -> Structure:
    """Canonical core, with dominated-vertex folding as a pre-pass."""
    folded, _, _ = fold_dominated(s)
    return core(folded, budget).core


# ---------------------------------------------------------------------------
# dual_of_tree: constructed or searched, always oracle-verified
# ---------------------------------------------------------------------------

def _constructed_tree_dual(tree: Structure, bounds: DualBounds) -> Structure:
    raw = tree_dual_construction(tree, bounds.max_dual_universe)
    return reduce_structure(raw, bounds.budget)


def _searched_tree_dual(tree: Structure, bounds: DualBounds) -> Tuple[Structure, int]:
    """Certified search: enumerate candidate duals by increasing size, keep
    the first that is hom-maximum among all tree-avoiding structures with
    at most m elements, grow m until stable twice, then verify exhaustively."""
    sig = tree.signature
    prev_key = None
    m = 1
    while m <= bounds.max_m:
        forb_m = [g for g in enumerate_structures(sig, m)
                  if find_hom(tree, g, "standard", bounds.budget) is None]
        cand = None
        for d in enumerate_structures(sig, bounds.max_candidate_size):
            if find_hom(tree, d, "standard", bounds.budget) is not None:
                continue
            if all(find_hom(g, d, "standard", bounds.budget) is not None
                   for g in forb_m):
                cand = d
                break
        if cand is None:
            raise SearchBoundsError(
                "no hom-maximum candidate within the size bound")
        key = canonical_key(cand)
        if key == prev_key:
            rep = verify_duality([tree], [cand], bounds.n_max, bounds.budget)
            if rep.status == "verified":
                return cand, rep.verified_to
            if rep.status == "budget_exceeded":
                raise BudgetExceededError("dual verification ran out of budget")
            # The counterexample lies in Forb and misses the candidate
            # (the other side is impossible while the tree avoids it),
            # so raising m past it discards the candidate.
            m = max(m + 1, rep.counterexample.n)
            prev_key = None
            continue
        prev_key = key
        m += 1
    raise SearchBoundsError("certified dual search exhausted its bounds")


def dual_of_tree(tree: Structure, bounds: DualBounds = DualBounds(),
                 mode: str = "auto") -> DualCandidate:
    """Dual of a single tree with exhaustive verification to bounds.n_max.

    mode 'construct' uses the explicit construction, 'search' the certified
    search, 'auto' tries the construction and falls back to search.
    """
    rep = incidence_analysis(tree)
    if not rep.is_tree:
        raise ValidationError("dual_of_tree requires a tree")
    if mode not in ("auto", "construct", "search"):
        raise ValidationError(f"unknown mode {mode!r}")
    if mode in ("auto", "construct"):
        try:
            d = canonical_form(_constructed_tree_dual(tree, bounds))
            if find_hom(tree, d, "standard", bounds.budget) is not None:
                raise ConstructionError("tree maps into its constructed dual")
            report = verify_duality([tree], [d], bounds.n_max, bounds.budget)
            if report.status == "verified":
                return DualCandidate((d,), report.verified_to, "constructed")
            if mode == "construct":
                raise ConstructionError(
                    f"constructed dual failed verification: {report}")
        except (SearchBoundsError, ConstructionError):
            if mode == "construct":
                raise
    d, verified_to = _searched_tree_dual(tree, bounds)
    return DualCandidate((canonical_form(d),), verified_to, "searched")


# ---------------------------------------------------------------------------
# Dual sets for forest families
# ---------------------------------------------------------------------------

def dual_set_of_family(forests: Sequence[Structure],
                       bounds: DualBounds = DualBounds(),
                       mode: str = "auto",
                       signature: Optional[Signature] = None) -> DualCandidate:
    """Dual set of a family of forests.

    Per forest, the duals of its tree components form the forest's dual
    set (avoiding the forest means avoiding some component); the family's
    dual set consists of the products of one choice per forest (membership
    in every Forb means a homomorphism into every chosen dual, i.e. into
    their product).  Deduplicated by hom-equivalence of cores and verified
    exhaustively to bounds.n_max.
    """
    if not forests:
        if signature is None:
            raise ValidationError("an empty family needs an explicit signature")
        # No constraints: everything is a member, the terminal structure
        # (one element with every constant tuple) receives it all.
        dual = canonical_form(terminal_structure(signature))
        return DualCandidate((dual,), bounds.n_max, "constructed")
    sig = _common_signature(forests)
    provenance = "constructed" if mode in ("auto", "construct") else "searched"
    per_forest: List[List[Structure]] = []
    for f in forests:
        if not incidence_analysis(f).is_forest:
            raise ValidationError("dual_set_of_family requires forests")
        comp_duals: List[Structure] = []
        seen = set()
        for comp in components(f):
            t = f.induced(comp)
            d = _tree_dual_cached(t, bounds, mode)
            k = canonical_key(d)
            if k not in seen:
                seen.add(k)
                comp_duals.append(d)
        per_forest.append(comp_duals)

    family_duals: List[Structure] = []
    seen_keys = set()
    for choice in itertools.product(*per_forest):
        acc: Optional[Structure] = None
        for d in sorted(choice, key=lambda s: s.n):
            acc = d if acc is None else reduce_structure(product(acc, d),
                                                         bounds.budget)
        assert acc is not None
        acc = canonical_form(reduce_structure(acc, bounds.budget))
        k = canonical_key(acc)
        if k not in seen_keys:
            seen_keys.add(k)
            family_duals.append(acc)

    # Drop hom-equivalent duplicates (keep first in canonical order).
    family_duals.sort(key=canonical_key)
    kept: List[Structure] = []
    for d in family_duals:
        if not any(hom_equivalent(d, e, bounds.budget) for e in kept):
            kept.append(d)

    # Necessary condition, always enforced.
    for d in kept:
        for f in forests:
            if find_hom(f, d, "standard", bounds.budget) is not None:
                raise ConstructionError("a forbidden forest maps into a dual")

    report = verify_duality(list(forests), kept, bounds.n_max, bounds.budget)
    if report.status != "verified":
        raise ConstructionError(f"family dual set failed verification: {report}")
    return DualCandidate(tuple(kept), report.verified_to, provenance)


_TREE_DUAL_CACHE: Dict[Tuple[Tuple[int, ...], DualBounds, str], Structure] = {}


def _tree_dual_cached(tree: Structure, bounds: DualBounds, mode: str) -> Structure:
    key = (canonical_key(tree), tree.signature, bounds, mode)
    if key not in _TREE_DUAL_CACHE:
        _TREE_DUAL_CACHE[key] = dual_of_tree(tree, bounds, mode).duals[0]
    return _TREE_DUAL_CACHE[key]


# ---------------------------------------------------------------------------
# Report parsing
# ---------------------------------------------------------------------------

def duality_report_from_json(obj) -> DualityReport:
    cex = obj.get("counterexample")
    return DualityReport(
        obj["status"], int(obj["verified_to"]),
        None if cex is None else structure_from_json(cex),
        obj.get("side"))


def dual_candidate_from_json(obj) -> DualCandidate:
    return DualCandidate(
        tuple(structure_from_json(d) for d in obj["duals"]),
        int(obj["verified_to"]), obj["provenance"])
