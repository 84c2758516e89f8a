"""Monadic lifts, the shadow functor, the lifting lemma, and membership
testing for forbidden-lift classes and their shadows.

A lift is stored as a plain structure over the base signature extended
with one unary relation per color, so the homomorphism engine is reused
verbatim for lift-homomorphisms.  Color classes must cover the universe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from liftcsp import kernels
from liftcsp.errors import (
    BudgetExceededError,
    FormatError,
    SignatureMismatchError,
    ValidationError,
)
from liftcsp.hom import DEFAULT_BUDGET, Hom, _flat, find_hom, is_hom
from liftcsp.structures import (
    RelationSpec,
    Signature,
    Structure,
    structure_from_json,
    structure_to_json,
)

COLOR_PREFIX = "color:"


def color_relation_name(color: str) -> str:
    return COLOR_PREFIX + color


def extended_signature(base: Signature, gamma: Sequence[str]) -> Signature:
    if len(set(gamma)) != len(gamma) or not gamma:
        raise ValidationError("color set must be nonempty without duplicates")
    for spec in base.relations:
        if spec.name.startswith(COLOR_PREFIX):
            raise ValidationError(
                f"base relation name {spec.name!r} collides with color relations")
    extra = tuple(RelationSpec(color_relation_name(c), 1) for c in gamma)
    return Signature(base.relations + extra)


@dataclass(frozen=True)
class Lift:
    """A colored structure: base structure plus covering unary color classes."""

    structure: Structure          # over the extended signature
    gamma: Tuple[str, ...]

    def __post_init__(self):
        n_base = len(self.structure.signature.relations) - len(self.gamma)
        if n_base < 0:
            raise ValidationError("more colors than relations")
        for c, spec in zip(self.gamma, self.structure.signature.relations[n_base:]):
            if spec.name != color_relation_name(c) or spec.arity != 1:
                raise ValidationError("extended signature does not match colors")
        covered = set()
        for rel in self.structure.tuples[n_base:]:
            for (v,) in rel:
                covered.add(v)
        if covered != set(range(self.structure.n)):
            raise ValidationError("color classes must cover the universe")

    @property
    def base_signature(self) -> Signature:
        n_base = len(self.structure.signature.relations) - len(self.gamma)
        return Signature(self.structure.signature.relations[:n_base])

    @staticmethod
    def build(base: Structure, gamma: Sequence[str],
              assign: Sequence[Iterable[str]]) -> "Lift":
        """Make a lift from a base structure and per-vertex color lists."""
        gamma = tuple(gamma)
        if len(assign) != base.n:
            raise ValidationError("one color list per vertex is required")
        sig = extended_signature(base.signature, gamma)
        rels: Dict[str, List[Tuple[int, ...]]] = {
            spec.name: list(rel)
            for spec, rel in zip(base.signature.relations, base.tuples)}
        for c in gamma:
            rels[color_relation_name(c)] = []
        for v, colors in enumerate(assign):
            cs = list(colors)
            if not cs:
                raise ValidationError(f"vertex {v} has no color (covering fails)")
            for c in cs:
                if c not in gamma:
                    raise ValidationError(f"unknown color {c!r} at vertex {v}")
                rels[color_relation_name(c)].append((v,))
        return Lift(Structure.build(sig, base.n, rels), gamma)

    def colors_of(self, v: int) -> Tuple[str, ...]:
        n_base = len(self.structure.signature.relations) - len(self.gamma)
        out = []
        for c, rel in zip(self.gamma, self.structure.tuples[n_base:]):
            if (v,) in rel:
                out.append(c)
        return tuple(out)


def shadow(lift: Lift) -> Structure:
    """Forget the color relations."""
    n_base = len(lift.structure.signature.relations) - len(lift.gamma)
    return Structure(lift.base_signature, lift.structure.n,
                     lift.structure.tuples[:n_base])


def pullback_lift(f: Sequence[int], a: Structure, b_lift: Lift) -> Lift:
    """Lift a along a homomorphism f: a -> shadow(b_lift); vertex v gets
    exactly the colors of f(v), making f a lift-homomorphism."""
    b = shadow(b_lift)
    if not is_hom(a, b, f):
        raise ValidationError("f is not a homomorphism into the shadow")
    assign = [b_lift.colors_of(f[v]) for v in range(a.n)]
    lifted = Lift.build(a, b_lift.gamma, assign)
    if not is_hom(lifted.structure, b_lift.structure, f):
        raise AssertionError("pullback failed to make f a lift-homomorphism")
    return lifted


@dataclass(frozen=True)
class ForbFamily:
    """Finite list of forbidden lifts plus the homomorphism variant that
    defines membership in Forb."""

    gamma: Tuple[str, ...]
    members: Tuple[Lift, ...]
    variant: str = "standard"

    def __post_init__(self):
        if self.variant not in ("standard", "injective", "full"):
            raise ValidationError(f"unknown variant {self.variant!r}")
        for m in self.members:
            if m.gamma != self.gamma:
                raise ValidationError("family members disagree on colors")
        if self.members:
            sig = self.members[0].structure.signature
            for m in self.members:
                if m.structure.signature != sig:
                    raise ValidationError("family members disagree on signature")

    def base_signature(self) -> Optional[Signature]:
        if not self.members:
            return None
        return self.members[0].base_signature

    def extended(self) -> Optional[Signature]:
        if not self.members:
            return None
        return self.members[0].structure.signature


@dataclass(frozen=True)
class ForbOutcome:
    member: bool
    violator: Optional[int] = None
    witness: Optional[Hom] = None


def forb_member(a_lift: Lift, family: ForbFamily,
                budget: int = DEFAULT_BUDGET) -> ForbOutcome:
    """True iff no family member maps into the lift (under the family's
    variant); on failure returns the violating member and witness."""
    if a_lift.gamma != family.gamma:
        raise SignatureMismatchError("lift and family use different colors")
    for i, m in enumerate(family.members):
        if m.structure.signature != a_lift.structure.signature:
            raise SignatureMismatchError("lift and family signatures differ")
        h = find_hom(m.structure, a_lift.structure, family.variant, budget)
        if h is not None:
            return ForbOutcome(False, i, h)
    return ForbOutcome(True)


def _member_arrays(family: ForbFamily):
    out = []
    for m in family.members:
        ar, fl = _flat(m.structure)
        out.append((m.structure.n, list(ar), [list(f) for f in fl]))
    return out


def shadow_member(a: Structure, family: ForbFamily,
                  budget: int = DEFAULT_BUDGET) -> Optional[List[str]]:
    """Search for a coloring of `a` whose lift avoids every family member.

    Returns one color per vertex (first witness in deterministic order) or
    None.  Covering lifts with several colors per vertex cannot help: colors
    are preserved forward, so any member homomorphism into a single-color
    sub-lift is one into the larger lift, and conversely restricting color
    sets only removes member homomorphisms.  Hence the singleton search is
    exhaustive for the covering-lift class.
    """
    if family.members:
        base_sig = family.base_signature()
        if base_sig != a.signature:
            raise SignatureMismatchError("structure and family signatures differ")
    k = len(family.gamma)
    if k == 0:
        raise ValidationError("family has an empty color set")
    variant = kernels.VARIANT_CODES[family.variant]
    members = _member_arrays(family)
    ar_a, fl_a = _flat(a)
    base_flats = [list(f) for f in fl_a]
    arities_ext = list(ar_a) + [1] * k
    color_lists: List[List[int]] = [[] for _ in range(k)]

    def blocked() -> bool:
        target_flats = base_flats + [list(cl) for cl in color_lists]
        for (mn, mar, mfl) in members:
            status, _, _ = kernels.hom_search(
                mn, a.n, arities_ext, mfl, target_flats, variant, budget)
            if status == kernels.BUDGET:
                raise BudgetExceededError(
                    "shadow membership search exceeded budget")
            if status == kernels.FOUND:
                return True
        return False

    if a.n == 0:
        return None if blocked() else []

    choice = [0] * a.n
    nodes = 0
    v = 0
    while True:
        if choice[v] >= k:
            choice[v] = 0
            v -= 1
            if v < 0:
                return None
            color_lists[choice[v]].pop()
            choice[v] += 1
            continue
        c = choice[v]
        nodes += 1
        if nodes > budget:
            raise BudgetExceededError("shadow membership search exceeded budget",
                                      nodes=nodes)
        color_lists[c].append(v)
        if blocked():
            color_lists[c].pop()
            choice[v] += 1
            continue
        if v == a.n - 1:
            return [family.gamma[choice[u]] for u in range(a.n)]
        v += 1


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_LIFT_KEYS = {"signature", "universe", "relations", "colors"}
_COLOR_KEYS = {"gamma", "assign"}


def lift_from_json(obj) -> Lift:
    if not isinstance(obj, dict):
        raise FormatError("lift JSON must be an object")
    unknown = set(obj) - _LIFT_KEYS
    if unknown:
        raise FormatError(f"unknown lift fields: {sorted(unknown)}")
    if "colors" not in obj:
        raise FormatError("lift JSON needs a 'colors' field")
    colors = obj["colors"]
    if not isinstance(colors, dict) or set(colors) - _COLOR_KEYS:
        raise FormatError("'colors' must be an object with gamma and assign")
    base = structure_from_json({k: v for k, v in obj.items() if k != "colors"})
    gamma = [str(c) for c in colors.get("gamma", [])]
    assign = colors.get("assign", [])
    if not isinstance(assign, list):
        raise FormatError("'assign' must be a list of per-vertex color lists")
    try:
        return Lift.build(base, gamma, [[str(c) for c in cs] for cs in assign])
    except ValidationError as exc:
        raise FormatError(str(exc)) from exc


def lift_to_json(lift: Lift):
    obj = structure_to_json(shadow(lift))
    obj["colors"] = {
        "gamma": list(lift.gamma),
        "assign": [list(lift.colors_of(v)) for v in range(lift.structure.n)],
    }
    return obj


def family_from_json(obj, variant: str = "standard") -> ForbFamily:
    if not isinstance(obj, list):
        raise FormatError("family JSON must be an array of lifts")
    members = tuple(lift_from_json(item) for item in obj)
    if not members:
        raise FormatError("family JSON must contain at least one lift")
    try:
        return ForbFamily(members[0].gamma, members, variant)
    except ValidationError as exc:
        raise FormatError(str(exc)) from exc


def family_to_json(family: ForbFamily):
    return [lift_to_json(m) for m in family.members]


def parse_lift(text) -> Lift:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return lift_from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad JSON: {exc}") from exc


def parse_family(text, variant: str = "standard") -> ForbFamily:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return family_from_json(json.loads(text), variant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad JSON: {exc}") from exc
