"""Generators for the worked forbidden-lift families: proper k-coloring
and local (a,b)-coloring."""

from __future__ import annotations

from itertools import combinations
from typing import List, Tuple

from liftcsp.errors import ValidationError
from liftcsp.lifts import ForbFamily, Lift
from liftcsp.structures import GRAPH, Structure, canonical_key


def _sym_edge() -> Structure:
    return Structure.build(GRAPH, 2, {"E": [(0, 1), (1, 0)]})


def _star(leaves: int) -> Structure:
    arcs = []
    for i in range(1, leaves + 1):
        arcs.append((0, i))
        arcs.append((i, 0))
    return Structure.build(GRAPH, leaves + 1, {"E": arcs})


def k_coloring_family(k: int) -> ForbFamily:
    """Forbidden lifts whose shadow class is the properly k-colorable
    graphs: one monochromatic edge per color."""
    if k < 1:
        raise ValidationError("k must be at least 1")
    gamma = tuple(str(i) for i in range(1, k + 1))
    edge = _sym_edge()
    members = tuple(Lift.build(edge, gamma, [[c], [c]]) for c in gamma)
    return ForbFamily(gamma, members, "standard")


def local_coloring_family(a: int, b: int) -> ForbFamily:
    """Forbidden lifts whose shadow class is the locally (a,b)-colorable
    graphs: all monochromatic edges, plus every star on a+1 vertices whose
    vertices carry a+1 distinct colors (the closed neighborhood of the
    center would otherwise see more than a colors).

    Stars are generated up to leaf permutation; center and leaf color
    roles are distinguished, then lift-isomorphic duplicates are dropped.
    """
    if not (1 <= a <= b):
        raise ValidationError("need 1 <= a <= b")
    gamma = tuple(str(i) for i in range(1, b + 1))
    edge = _sym_edge()
    members: List[Lift] = [Lift.build(edge, gamma, [[c], [c]]) for c in gamma]
    star = _star(a)
    seen = set()
    for center in gamma:
        others = [c for c in gamma if c != center]
        for leaf_colors in combinations(others, a):
            assign = [[center]] + [[c] for c in leaf_colors]
            lift = Lift.build(star, gamma, assign)
            key = canonical_key(lift.structure)
            if key not in seen:
                seen.add(key)
                members.append(lift)
    return ForbFamily(gamma, tuple(members), "standard")
