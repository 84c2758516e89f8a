"""Deciding whether a forbidden-lift language is a CSP.

A family is normalized to the hom-minimal cores of its members.  If every
minimal core is a forest (on the extended signature; unary color blocks
have a single incidence and never lie on cycles), the shadow class is a
CSP and dual templates are produced by transferring the lifted dual set
to shadows.  If some minimal core contains a cycle, the shadow class is
not a finite union of CSP languages; the cycle is reported as a witness.
Budget overruns yield 'inconclusive', never a wrong verdict.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from liftcsp.errors import BudgetExceededError, ValidationError
from liftcsp.hom import DEFAULT_BUDGET, core, find_hom, hom_equivalent
from liftcsp.lifts import (
    ForbFamily,
    Lift,
    family_from_json,
    family_to_json,
    lift_to_json,
    shadow,
    shadow_member,
)
from liftcsp.duality import (
    DualBounds,
    DualCandidate,
    csp_member,
    dual_candidate_from_json,
    dual_set_of_family,
    verify_shadow_duality,
)
from liftcsp.sparse import SparseRequest, sparsify
from liftcsp.duality import reduce_structure
from liftcsp.structures import (
    Structure,
    canonical_form,
    canonical_key,
    enumerate_structures,
    incidence_analysis,
    incidence_multigraph,
    shortest_incidence_cycle,
    structure_from_json,
    structure_to_json,
)


@dataclass(frozen=True)
class ClassifyBounds:
    n_max_shadow: int = 4        # exhaustive shadow-duality verification
    n_max_lifted: int = 3        # exhaustive lifted verification inside dual search
    dual: DualBounds = DualBounds()
    budget: int = DEFAULT_BUDGET


@dataclass(frozen=True)
class CyclicWitness:
    member: int                          # index into the minimal family
    cycle_elements: Tuple[int, ...]      # element nodes on the cycle
    cycle_blocks: Tuple[Tuple[str, Tuple[int, ...]], ...]  # (relation, tuple)

    def to_json(self):
        return {
            "member": self.member,
            "cycle_elements": list(self.cycle_elements),
            "cycle_blocks": [[name, list(t)] for name, t in self.cycle_blocks],
        }


@dataclass(frozen=True)
class ClassificationReport:
    outcome: str                         # csp | not_finite_union_csp | inconclusive
    minimal_family: Tuple[Lift, ...]
    duals: Optional[DualCandidate] = None
    cyclic_witness: Optional[CyclicWitness] = None
    detail: Optional[str] = None

    def to_json(self):
        return {
            "outcome": self.outcome,
            "minimal_family": [lift_to_json(m) for m in self.minimal_family],
            "duals": None if self.duals is None else self.duals.to_json(),
            "cyclic_witness": (None if self.cyclic_witness is None
                               else self.cyclic_witness.to_json()),
            "detail": self.detail,
        }


def normalize_family(family: ForbFamily,
                     budget: int = DEFAULT_BUDGET) -> List[Lift]:
    """Replace members by their cores, drop members that another
    inequivalent member maps into, deduplicate hom-equivalent members,
    return in canonical order.  Membership in Forb is unchanged."""
    if family.variant != "standard":
        raise ValidationError("normalization is defined for the standard variant")
    cores: List[Lift] = []
    seen = set()
    for m in family.members:
        c = core(m.structure, budget).core
        key = canonical_key(c)
        if key not in seen:
            seen.add(key)
            cores.append(Lift(c, family.gamma))
    cores.sort(key=lambda l: canonical_key(l.structure))
    keep: List[Lift] = []
    for i, m in enumerate(cores):
        dominated = False
        for j, other in enumerate(cores):
            if i == j:
                continue
            if find_hom(other.structure, m.structure, "standard", budget) is None:
                continue
            if find_hom(m.structure, other.structure, "standard", budget) is not None:
                # hom-equivalent: keep the canonically first
                if j < i:
                    dominated = True
                    break
                continue
            dominated = True
            break
        if not dominated:
            keep.append(m)
    return keep


def _restrict_to_colored(lift_structure: Structure, gamma: Sequence[str]) -> Structure:
    """Induced substructure on elements carrying at least one color."""
    n_base = len(lift_structure.signature.relations) - len(gamma)
    colored = set()
    for rel in lift_structure.tuples[n_base:]:
        for (v,) in rel:
            colored.add(v)
    return lift_structure.induced(sorted(colored))


def classify(family: ForbFamily,
             bounds: ClassifyBounds = ClassifyBounds()) -> ClassificationReport:
    """The tree/cycle dichotomy decision for a forbidden-lift family."""
    try:
        minimal = normalize_family(family, bounds.budget)
    except BudgetExceededError as exc:
        return ClassificationReport("inconclusive", (), detail=str(exc))
    minimal_t = tuple(minimal)

    cyclic_index = -1
    for i, m in enumerate(minimal):
        if not incidence_analysis(m.structure).is_forest:
            cyclic_index = i
            break

    if cyclic_index >= 0:
        m = minimal[cyclic_index]
        cycle = shortest_incidence_cycle(m.structure)
        assert cycle is not None
        mg = incidence_multigraph(m.structure)
        elems = tuple(x for x in cycle if x < m.structure.n)
        blocks = []
        for x in cycle:
            if x >= m.structure.n:
                b = mg.blocks[x - m.structure.n]
                name = m.structure.signature.relations[b.rel].name
                blocks.append((name, b.rep))
        witness = CyclicWitness(cyclic_index, elems, tuple(blocks))
        return ClassificationReport("not_finite_union_csp", minimal_t,
                                    cyclic_witness=witness)

    if not minimal:
        raise ValidationError("classify needs a family with at least one member")

    # All minimal cores are forests: lifted dual set, then shadow transfer.
    try:
        lifted = dual_set_of_family(
            [m.structure for m in minimal],
            replace(bounds.dual, n_max=bounds.n_max_lifted))
    except BudgetExceededError as exc:
        return ClassificationReport("inconclusive", minimal_t, detail=str(exc))

    shadow_duals: List[Structure] = []
    seen = set()
    for d in lifted.duals:
        covered = _restrict_to_colored(d, family.gamma)
        sh = shadow(Lift(covered, family.gamma))
        reduced = canonical_form(reduce_structure(sh, bounds.budget))
        key = canonical_key(reduced)
        if key not in seen:
            seen.add(key)
            shadow_duals.append(reduced)
    shadow_duals.sort(key=canonical_key)
    kept: List[Structure] = []
    for d in shadow_duals:
        if not any(hom_equivalent(d, e, bounds.budget) for e in kept):
            kept.append(d)

    try:
        report = verify_shadow_duality(family, kept, bounds.n_max_shadow,
                                       bounds.budget)
    except BudgetExceededError as exc:
        return ClassificationReport("inconclusive", minimal_t, detail=str(exc))
    if report.status == "budget_exceeded":
        return ClassificationReport("inconclusive", minimal_t,
                                    detail="shadow verification budget exceeded")
    if report.status != "verified":
        raise AssertionError(
            f"forest family failed shadow duality verification: {report}")
    return ClassificationReport(
        "csp", minimal_t,
        duals=DualCandidate(tuple(kept), report.verified_to, lifted.provenance))


# ---------------------------------------------------------------------------
# Refuting proposed dual sets for non-CSP languages
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RefutationResult:
    status: str                      # found | inconclusive
    counterexample: Optional[Structure] = None
    side: Optional[str] = None       # in_shadow_not_csp | in_csp_not_shadow

    def to_json(self):
        return {
            "status": self.status,
            "counterexample": (None if self.counterexample is None
                               else structure_to_json(self.counterexample)),
            "side": self.side,
        }


@dataclass(frozen=True)
class RefuteBounds:
    n_max: int = 6
    sparse_seed: int = 0
    budget: int = DEFAULT_BUDGET


def refute_dual(family: ForbFamily, duals: Sequence[Structure],
                bounds: RefuteBounds = RefuteBounds()) -> RefutationResult:
    """Best-effort counterexample separating the shadow class from
    CSP(duals); requires a family whose minimal cores contain a cycle.

    First sweeps all base structures up to n_max; if that fails, follows
    the transfer proof: pick a structure in the class of the family minus
    a cyclic member but outside CSP(duals), replace it by a high-girth
    equivalent, and re-test."""
    minimal = normalize_family(family, bounds.budget)
    cyclic = [i for i, m in enumerate(minimal)
              if not incidence_analysis(m.structure).is_forest]
    if not cyclic:
        raise ValidationError(
            "refute_dual requires a family classified not_finite_union_csp")
    base_sig = family.base_signature()

    def test(g: Structure) -> Optional[str]:
        in_shadow = shadow_member(g, family, bounds.budget) is not None
        in_csp = csp_member(g, duals, bounds.budget).member
        if in_shadow and not in_csp:
            return "in_shadow_not_csp"
        if in_csp and not in_shadow:
            return "in_csp_not_shadow"
        return None

    try:
        for g in enumerate_structures(base_sig, bounds.n_max):
            side = test(g)
            if side is not None:
                return RefutationResult("found", g, side)

        # Proof recipe: drop the cyclic member, find S in the difference,
        # sparsify S beyond the member's size and the duals' scale.
        f0 = minimal[cyclic[0]]
        reduced_members = tuple(m for i, m in enumerate(minimal)
                                if i != cyclic[0])
        s_found = None
        if reduced_members:
            reduced = ForbFamily(family.gamma, reduced_members, family.variant)
            member_of_reduced = lambda g: shadow_member(
                g, reduced, bounds.budget) is not None
        else:
            member_of_reduced = lambda g: True
        for g in enumerate_structures(base_sig, bounds.n_max):
            if member_of_reduced(g) and not csp_member(g, duals,
                                                       bounds.budget).member:
                s_found = g
                break
        if s_found is None:
            return RefutationResult("inconclusive")
        k = max((d.n for d in duals), default=1)
        if k > 4:
            return RefutationResult("inconclusive")
        girth_bound = f0.structure.n + 1
        req = SparseRequest(s_found, k=max(k, 1), girth=max(girth_bound, 2),
                            seed=bounds.sparse_seed)
        s0 = sparsify(req).structure
        side = test(s0)
        if side is not None:
            return RefutationResult("found", s0, side)
        return RefutationResult("inconclusive")
    except BudgetExceededError:
        return RefutationResult("inconclusive")


def classification_report_from_json(obj) -> ClassificationReport:
    minimal = tuple(family_from_json(obj["minimal_family"]).members) \
        if obj["minimal_family"] else ()
    duals = (None if obj.get("duals") is None
             else dual_candidate_from_json(obj["duals"]))
    cw = obj.get("cyclic_witness")
    witness = None
    if cw is not None:
        witness = CyclicWitness(
            int(cw["member"]), tuple(cw["cycle_elements"]),
            tuple((name, tuple(t)) for name, t in cw["cycle_blocks"]))
    return ClassificationReport(obj["outcome"], minimal, duals, witness,
                                obj.get("detail"))
