"""High-girth replacement structures: given A, k and a girth bound, build
B mapping onto A that agrees with A on homomorphisms into every structure
with at most k elements.

Probabilistic blow-up construction with deterministic short-cycle removal
and full certificate checking; a returned result always re-validates, and
failures retry with fresh randomness (doubling the blow-up every third of
the retry budget).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from liftcsp.errors import BudgetExceededError, SparsificationError, ValidationError
from liftcsp.hom import DEFAULT_BUDGET, Hom, find_hom, is_hom
from liftcsp.structures import (
    Structure,
    enumerate_structures,
    incidence_analysis,
    incidence_multigraph,
    shortest_incidence_cycle,
    structure_to_json,
)


@dataclass(frozen=True)
class SparseRequest:
    structure: Structure            # A
    k: int                          # max target size to preserve
    girth: int                      # girth lower bound
    copies: Optional[int] = None    # N; default max(8, |A| * girth)
    tuple_probability: Optional[float] = None  # p; default per-arity regime
    max_retries: int = 30
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be at least 1")
        if self.girth < 2:
            raise ValidationError("girth bound must be at least 2")
        if self.copies is not None and self.copies < 1:
            raise ValidationError("copies must be at least 1")
        if self.tuple_probability is not None and not (
                0 < self.tuple_probability <= 1):
            raise ValidationError("tuple probability must be in (0, 1]")


@dataclass(frozen=True)
class SparseResult:
    structure: Structure            # B
    projection: Hom                 # B -> A
    girth_achieved: float           # int or math.inf
    targets_checked: int
    retries_used: int
    seed: int
    copies_used: int

    def to_json(self):
        return {
            "structure": structure_to_json(self.structure),
            "projection": list(self.projection.map),
            "girth_achieved": (None if math.isinf(self.girth_achieved)
                               else int(self.girth_achieved)),
            "targets_checked": self.targets_checked,
            "retries_used": self.retries_used,
            "seed": self.seed,
            "copies_used": self.copies_used,
        }


def _blow_up(a: Structure, n_copies: int, probs: Sequence[float],
             rng: random.Random) -> Tuple[Structure, List[int]]:
    """Universe = elements of A times copy indices; every tuple of A spawns
    candidate tuples over its copy classes, kept independently with the
    relation's probability."""
    n = a.n * n_copies

    def vid(elem, copy):
        return elem * n_copies + copy

    rels: Dict[str, List[Tuple[int, ...]]] = {}
    for spec, rel, p in zip(a.signature.relations, a.tuples, probs):
        out = set()
        arity = spec.arity
        for t in rel:
            if spec.symmetric and t[::-1] < t:
                continue  # sample each symmetric orbit once
            combos = [0] * arity
            while True:
                if rng.random() < p:
                    cand = tuple(vid(t[i], combos[i]) for i in range(arity))
                    out.add(cand)
                    if spec.symmetric:
                        out.add(cand[::-1])
                i = arity - 1
                while i >= 0:
                    combos[i] += 1
                    if combos[i] < n_copies:
                        break
                    combos[i] = 0
                    i -= 1
                if i < 0:
                    break
        rels[spec.name] = sorted(out)
    b = Structure.build(a.signature, n, rels)
    projection = [v // n_copies for v in range(n)]
    return b, projection


def _remove_short_cycles(b: Structure, girth: int) -> Structure:
    """Delete one whole tuple block on a shortest incidence cycle until no
    cycle has fewer than `girth` blocks; lexicographically least tuple on
    the cycle breaks ties, so the result is deterministic."""
    while True:
        cycle = shortest_incidence_cycle(b)
        if cycle is None:
            return b
        blocks_on_cycle = [x - b.n for x in cycle if x >= b.n]
        if len(blocks_on_cycle) >= girth:
            return b
        mg = incidence_multigraph(b)
        choice = min((mg.blocks[bi].rel, mg.blocks[bi].rep)
                     for bi in blocks_on_cycle)
        ri, rep = choice
        orbit = next(blk.orbit for bi in blocks_on_cycle
                     if (blk := mg.blocks[bi]).rel == ri and blk.rep == rep)
        new_rels = list(b.tuples)
        new_rels[ri] = tuple(t for t in b.tuples[ri] if t not in orbit)
        b = Structure(b.signature, b.n, tuple(new_rels))


def sparsify(req: SparseRequest) -> SparseResult:
    """Run the blow-up / cycle-removal / verification loop and return a
    certificate-backed result, or raise SparsificationError with
    per-condition failure counts."""
    a = req.structure
    targets = list(enumerate_structures(a.signature, req.k))
    maps_to: List[Optional[Hom]] = [
        find_hom(a, c, "standard", req.budget) for c in targets]

    base_n = req.copies if req.copies is not None else max(8, a.n * req.girth)
    double_every = max(1, math.ceil(req.max_retries / 3))
    failures = {"projection": 0, "targets": 0, "girth": 0, "budget": 0}

    for attempt in range(req.max_retries + 1):
        n_copies = base_n * (2 ** (attempt // double_every))
        probs = []
        for spec in a.signature.relations:
            if req.tuple_probability is not None:
                probs.append(req.tuple_probability)
            else:
                probs.append(min(1.0, n_copies ** (1.0 - spec.arity + 1.0 / req.girth)))
        rng = random.Random((req.seed << 20) ^ attempt)
        b, projection = _blow_up(a, n_copies, probs, rng)
        b = _remove_short_cycles(b, req.girth)

        if not is_hom(b, a, projection):
            failures["projection"] += 1
            continue
        report = incidence_analysis(b)
        if report.girth < req.girth:
            failures["girth"] += 1
            continue
        ok = True
        try:
            for c, ha in zip(targets, maps_to):
                if ha is not None:
                    # Composing through the projection must already work.
                    comp = tuple(ha.map[projection[v]] for v in range(b.n))
                    if not is_hom(b, c, comp):
                        ok = False
                        failures["targets"] += 1
                        break
                else:
                    if find_hom(b, c, "standard", req.budget) is not None:
                        ok = False
                        failures["targets"] += 1
                        break
        except BudgetExceededError:
            failures["budget"] += 1
            ok = False
        if not ok:
            continue
        return SparseResult(
            structure=b,
            projection=Hom(b, a, tuple(projection)),
            girth_achieved=report.girth,
            targets_checked=len(targets),
            retries_used=attempt,
            seed=req.seed,
            copies_used=n_copies,
        )
    raise SparsificationError(
        f"sparsify exhausted {req.max_retries} retries "
        f"(failure counts: {failures})", diagnostics=failures)
