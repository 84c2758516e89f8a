"""Finite relational structures: data model, serialization, canonical
forms, isomorphism-reduced enumeration, products and incidence analytics.

Digraphs are the one-binary-relation case.  Undirected graphs are
symmetric digraphs carrying a per-relation ``symmetric`` flag; the flag
pairs reversed tuples into a single incidence block (so an undirected
edge is not a girth-2 digon) and is enforced on construction, but never
changes homomorphism semantics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from liftcsp import kernels
from liftcsp.errors import (
    BudgetExceededError,
    FormatError,
    SignatureMismatchError,
    ValidationError,
)


@dataclass(frozen=True)
class RelationSpec:
    name: str
    arity: int
    symmetric: bool = False


@dataclass(frozen=True)
class Signature:
    relations: Tuple[RelationSpec, ...]

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate relation names in signature")
        for r in self.relations:
            if r.arity < 1:
                raise ValidationError(f"relation {r.name!r} has arity < 1")
            if r.symmetric and r.arity != 2:
                raise ValidationError(
                    f"symmetric flag requires arity 2 (relation {r.name!r})")

    def index(self, name: str) -> int:
        for i, r in enumerate(self.relations):
            if r.name == name:
                return i
        raise KeyError(name)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(r.name for r in self.relations)


DIGRAPH = Signature((RelationSpec("E", 2),))
GRAPH = Signature((RelationSpec("E", 2, symmetric=True),))


@dataclass(frozen=True)
class Structure:
    """Immutable finite relational structure with universe 0..n-1."""

    signature: Signature
    n: int
    tuples: Tuple[Tuple[Tuple[int, ...], ...], ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("universe size must be non-negative")
        if len(self.tuples) != len(self.signature.relations):
            raise ValidationError("tuple sets do not match signature")
        for spec, ts in zip(self.signature.relations, self.tuples):
            seen = set()
            for t in ts:
                if len(t) != spec.arity:
                    raise ValidationError(
                        f"tuple {t} has wrong arity for {spec.name!r}")
                for x in t:
                    if not (0 <= x < self.n):
                        raise ValidationError(
                            f"tuple entry {x} outside universe of size {self.n}")
                if t in seen:
                    raise ValidationError(f"duplicate tuple {t} in {spec.name!r}")
                seen.add(t)
            if spec.symmetric:
                for t in ts:
                    if t[::-1] not in seen:
                        raise ValidationError(
                            f"relation {spec.name!r} is flagged symmetric but "
                            f"misses the reversal of {t}")
        object.__setattr__(self, "_hash", hash((self.signature, self.n, self.tuples)))

    def __hash__(self):
        return self._hash

    @staticmethod
    def build(signature: Signature, n: int,
              relations: Optional[Dict[str, Iterable[Sequence[int]]]] = None
              ) -> "Structure":
        relations = relations or {}
        unknown = set(relations) - set(signature.names)
        if unknown:
            raise ValidationError(f"unknown relation names: {sorted(unknown)}")
        ts = []
        for spec in signature.relations:
            given = relations.get(spec.name, ())
            ts.append(tuple(sorted({tuple(int(x) for x in t) for t in given})))
        return Structure(signature, n, tuple(ts))

    def relation(self, name: str) -> Tuple[Tuple[int, ...], ...]:
        return self.tuples[self.signature.index(name)]

    def total_tuples(self) -> int:
        return sum(len(ts) for ts in self.tuples)

    def apply_perm(self, perm: Sequence[int]) -> "Structure":
        """Relabel: element v becomes perm[v]."""
        ts = tuple(tuple(sorted(tuple(perm[x] for x in t) for t in rel))
                   for rel in self.tuples)
        return Structure(self.signature, self.n, ts)

    def induced(self, vertices: Sequence[int]) -> "Structure":
        """Induced substructure on the given vertices, relabelled 0..k-1."""
        vs = sorted(set(vertices))
        idx = {v: i for i, v in enumerate(vs)}
        ts = []
        for rel in self.tuples:
            kept = [tuple(idx[x] for x in t) for t in rel
                    if all(x in idx for x in t)]
            ts.append(tuple(sorted(set(kept))))
        return Structure(self.signature, len(vs), tuple(ts))


def empty_structure(signature: Signature) -> Structure:
    return Structure.build(signature, 0)


def single_vertex(signature: Signature) -> Structure:
    return Structure.build(signature, 1)


def terminal_structure(signature: Signature) -> Structure:
    """One element carrying every constant tuple; everything maps to it."""
    rels = {spec.name: [(0,) * spec.arity] for spec in signature.relations}
    return Structure.build(signature, 1, rels)


def require_same_signature(a: Structure, b: Structure):
    if a.signature != b.signature:
        raise SignatureMismatchError("structures have different signatures")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_SIG_KEYS = {"name", "arity", "symmetric"}
_STRUCT_KEYS = {"signature", "universe", "relations"}


def signature_from_json(items) -> Signature:
    if not isinstance(items, list):
        raise FormatError("signature must be a list")
    specs = []
    for item in items:
        if not isinstance(item, dict):
            raise FormatError("signature entries must be objects")
        unknown = set(item) - _SIG_KEYS
        if unknown:
            raise FormatError(f"unknown signature fields: {sorted(unknown)}")
        if "name" not in item or "arity" not in item:
            raise FormatError("signature entries need 'name' and 'arity'")
        specs.append(RelationSpec(str(item["name"]), int(item["arity"]),
                                  bool(item.get("symmetric", False))))
    try:
        return Signature(tuple(specs))
    except ValidationError as exc:
        raise FormatError(str(exc)) from exc


def signature_to_json(sig: Signature):
    return [{"name": r.name, "arity": r.arity, "symmetric": r.symmetric}
            for r in sig.relations]


def structure_from_json(obj) -> Structure:
    if not isinstance(obj, dict):
        raise FormatError("structure JSON must be an object")
    unknown = set(obj) - _STRUCT_KEYS
    if unknown:
        raise FormatError(f"unknown structure fields: {sorted(unknown)}")
    if "signature" not in obj or "universe" not in obj:
        raise FormatError("structure JSON needs 'signature' and 'universe'")
    sig = signature_from_json(obj["signature"])
    rels = obj.get("relations", {})
    if not isinstance(rels, dict):
        raise FormatError("'relations' must be an object")
    try:
        return Structure.build(sig, int(obj["universe"]), rels)
    except ValidationError as exc:
        raise FormatError(str(exc)) from exc


def structure_to_json(s: Structure):
    return {
        "signature": signature_to_json(s.signature),
        "universe": s.n,
        "relations": {spec.name: [list(t) for t in rel]
                      for spec, rel in zip(s.signature.relations, s.tuples)},
    }


def parse_structure(text, fmt: str = "json") -> Structure:
    """Parse a structure from bytes or text in 'json' or 'arclist' format."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if fmt == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad JSON: {exc}") from exc
        return structure_from_json(obj)
    if fmt == "arclist":
        parts = [p.strip() for p in text.split(";")]
        parts = [p for p in parts if p]
        if not parts:
            raise FormatError("empty arclist")
        head = parts[0].split()
        if len(head) != 1:
            raise FormatError("arclist must start with the universe size")
        try:
            n = int(head[0])
        except ValueError as exc:
            raise FormatError("universe size is not an integer") from exc
        arcs = []
        for seg in parts[1:]:
            toks = seg.split()
            if len(toks) != 2:
                raise FormatError(f"arc segment {seg!r} is not two integers")
            try:
                arcs.append((int(toks[0]), int(toks[1])))
            except ValueError as exc:
                raise FormatError(f"arc segment {seg!r} is not two integers") from exc
        try:
            return Structure.build(DIGRAPH, n, {"E": arcs})
        except ValidationError as exc:
            raise FormatError(str(exc)) from exc
    raise FormatError(f"unknown format {fmt!r}")


def serialize_structure(s: Structure, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(structure_to_json(s))
    if fmt == "arclist":
        if s.signature != DIGRAPH:
            raise FormatError("arclist format supports plain digraphs only")
        parts = [str(s.n)]
        for (u, v) in s.tuples[0]:
            parts.append(f"{u} {v}")
        return "; ".join(parts)
    raise FormatError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# Product
# ---------------------------------------------------------------------------

def product(a: Structure, b: Structure) -> Structure:
    """Categorical product: tuples present iff both projections are tuples."""
    require_same_signature(a, b)
    n = a.n * b.n

    def pair(x, y):
        return x * b.n + y

    ts = []
    for spec, ra, rb in zip(a.signature.relations, a.tuples, b.tuples):
        k = spec.arity
        out = set()
        for ta in ra:
            for tb in rb:
                out.add(tuple(pair(ta[i], tb[i]) for i in range(k)))
        ts.append(tuple(sorted(out)))
    return Structure(a.signature, n, tuple(ts))


def product_projections(a: Structure, b: Structure) -> Tuple[List[int], List[int]]:
    """Projection maps of product(a, b) onto a and b."""
    pa = [x // b.n for x in range(a.n * b.n)]
    pb = [x % b.n for x in range(a.n * b.n)]
    return pa, pb


# ---------------------------------------------------------------------------
# Canonical form
# ---------------------------------------------------------------------------

MAX_CANON_N = 24


def _flat_tuples(s: Structure) -> Tuple[Tuple[int, ...], ...]:
    out = []
    for rel in s.tuples:
        flat = []
        for t in rel:
            flat.extend(t)
        out.append(tuple(flat))
    return tuple(out)


@lru_cache(maxsize=1 << 17)
def _canon(s: Structure) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    if s.n > MAX_CANON_N:
        raise ValidationError(
            f"canonical_form is exact permutation search, capped at "
            f"{MAX_CANON_N} elements (got {s.n})")
    arities = [spec.arity for spec in s.signature.relations]
    perm, key = kernels.canon_search(s.n, arities, [list(f) for f in _flat_tuples(s)])
    # perm[new] = old; apply_perm wants old -> new
    inv = [0] * s.n
    for new, old in enumerate(perm):
        inv[old] = new
    return tuple(inv), key


def canonical_form(s: Structure) -> Structure:
    """Isomorphism-invariant relabelling; identical output for isomorphic inputs."""
    inv, _ = _canon(s)
    return s.apply_perm(inv)


def canonical_key(s: Structure) -> Tuple[int, ...]:
    """Hashable complete isomorphism invariant (within a fixed signature)."""
    _, key = _canon(s)
    return (s.n,) + key


def isomorphic(a: Structure, b: Structure) -> bool:
    require_same_signature(a, b)
    return a.n == b.n and canonical_key(a) == canonical_key(b)


# ---------------------------------------------------------------------------
# Enumeration up to isomorphism
# ---------------------------------------------------------------------------

def _labelled_extensions(s: Structure) -> Iterator[Structure]:
    """All structures on s.n+1 elements whose restriction to 0..n-1 is s."""
    n = s.n + 1
    v = s.n
    sig = s.signature
    # Eligible new tuples (those involving v), grouped into symmetric orbits.
    orbit_sets: List[List[Tuple[int, Tuple[Tuple[int, ...], ...]]]] = []
    for ri, spec in enumerate(sig.relations):
        k = spec.arity
        orbits = set()
        for t in _tuples_over(n, k):
            if v not in t:
                continue
            if spec.symmetric:
                orbits.add(tuple(sorted((t, t[::-1]))))
            else:
                orbits.add((t,))
        orbit_sets.append([(ri, o) for o in sorted(orbits)])
    flat_orbits = [x for lst in orbit_sets for x in lst]
    m = len(flat_orbits)
    for mask in range(1 << m):
        rels = [list(rel) for rel in s.tuples]
        for i in range(m):
            if mask & (1 << i):
                ri, orbit = flat_orbits[i]
                rels[ri].extend(orbit)
        yield Structure(sig, n, tuple(tuple(sorted(set(r))) for r in rels))


def _tuples_over(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    for t in _tuples_over(n, k - 1):
        for x in range(n):
            yield t + (x,)


_ENUM_CACHE: Dict[Tuple[Signature, int], Tuple[Structure, ...]] = {}


def _classes_of_size(sig: Signature, n: int, counter: Optional[List[int]],
                     budget: Optional[int]) -> Tuple[Structure, ...]:
    key = (sig, n)
    cached = _ENUM_CACHE.get(key)
    if cached is not None:
        return cached
    if n == 0:
        out: Tuple[Structure, ...] = (empty_structure(sig),)
    else:
        seen = {}
        for base in _classes_of_size(sig, n - 1, counter, budget):
            for cand in _labelled_extensions(base):
                if counter is not None:
                    counter[0] += 1
                    if budget is not None and counter[0] > budget:
                        raise BudgetExceededError(
                            "enumeration budget exceeded", nodes=counter[0])
                k = canonical_key(cand)
                if k not in seen:
                    seen[k] = canonical_form(cand)
        out = tuple(s for _, s in sorted(seen.items()))
    _ENUM_CACHE[key] = out
    return out


def enumerate_structures(sig: Signature, n_max: int, up_to_iso: bool = True,
                         budget: Optional[int] = None) -> Iterator[Structure]:
    """Yield structures with universe size 0..n_max in deterministic order.

    With up_to_iso, one canonical representative per isomorphism class,
    ordered by size then canonical encoding.  Augments size-(n-1) classes
    by one fresh element, so successive calls share a per-signature cache.
    """
    counter = [0] if budget is not None else None
    for n in range(n_max + 1):
        if up_to_iso:
            yield from _classes_of_size(sig, n, counter, budget)
        else:
            if n == 0:
                yield empty_structure(sig)
                continue
            yield from _all_labelled(sig, n, counter, budget)


def _all_labelled(sig: Signature, n: int, counter, budget) -> Iterator[Structure]:
    orbit_sets = []
    for ri, spec in enumerate(sig.relations):
        orbits = set()
        for t in _tuples_over(n, spec.arity):
            if spec.symmetric:
                orbits.add(tuple(sorted((t, t[::-1]))))
            else:
                orbits.add((t,))
        orbit_sets.append(sorted(orbits))
    flat = [(ri, o) for ri, os_ in enumerate(orbit_sets) for o in os_]
    m = len(flat)
    for mask in range(1 << m):
        if counter is not None:
            counter[0] += 1
            if budget is not None and counter[0] > budget:
                raise BudgetExceededError("enumeration budget exceeded",
                                          nodes=counter[0])
        rels: List[List[Tuple[int, ...]]] = [[] for _ in sig.relations]
        for i in range(m):
            if mask & (1 << i):
                ri, orbit = flat[i]
                rels[ri].extend(orbit)
        yield Structure(sig, n, tuple(tuple(sorted(set(r))) for r in rels))


# ---------------------------------------------------------------------------
# Incidence multigraph, girth, forests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    """One incidence block: a tuple, with symmetric pairs merged."""
    rel: int
    rep: Tuple[int, ...]
    orbit: Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class IncidenceMultigraph:
    n_elements: int
    blocks: Tuple[Block, ...]
    # incidences[b] lists the elements of block b with multiplicity
    incidences: Tuple[Tuple[int, ...], ...] = field(default=())


def incidence_multigraph(s: Structure) -> IncidenceMultigraph:
    blocks = []
    for ri, (spec, rel) in enumerate(zip(s.signature.relations, s.tuples)):
        if spec.symmetric:
            done = set()
            for t in rel:
                if t in done:
                    continue
                rev = t[::-1]
                done.add(t)
                done.add(rev)
                orbit = (t,) if rev == t else tuple(sorted((t, rev)))
                blocks.append(Block(ri, min(orbit), orbit))
        else:
            for t in rel:
                blocks.append(Block(ri, t, (t,)))
    inc = tuple(b.rep for b in blocks)
    return IncidenceMultigraph(s.n, tuple(blocks), inc)


@dataclass(frozen=True)
class IncidenceReport:
    girth: float  # int or math.inf
    is_forest: bool
    is_tree: bool


def _incidence_adjacency(mg: IncidenceMultigraph):
    """Simple bipartite adjacency (element nodes 0..n-1, block nodes n..)."""
    n = mg.n_elements
    adj: List[List[int]] = [[] for _ in range(n + len(mg.blocks))]
    for bi, elems in enumerate(mg.incidences):
        bnode = n + bi
        for e in sorted(set(elems)):
            adj[e].append(bnode)
            adj[bnode].append(e)
    return adj


def shortest_incidence_cycle(s: Structure) -> Optional[List[int]]:
    """Nodes of one shortest incidence cycle (elements < n, blocks >= n),
    or None if the incidence multigraph is acyclic.  Deterministic."""
    mg = incidence_multigraph(s)
    n = mg.n_elements
    # A block touching an element twice is a one-block cycle.
    for bi, elems in enumerate(mg.incidences):
        if len(set(elems)) < len(elems):
            e = min(x for x in elems if elems.count(x) > 1)
            return [e, n + bi]
    adj = _incidence_adjacency(mg)
    nn = len(adj)
    best: Optional[List[int]] = None
    # For each incidence edge (e, b): remove it, BFS from e to b.
    for bi, elems in enumerate(mg.incidences):
        bnode = n + bi
        for e in sorted(set(elems)):
            prev = [-1] * nn
            seen = [False] * nn
            seen[e] = True
            frontier = [e]
            found = False
            while frontier and not found:
                nxt = []
                for u in frontier:
                    for w in adj[u]:
                        if u == e and w == bnode:
                            continue  # the removed edge
                        if not seen[w]:
                            seen[w] = True
                            prev[w] = u
                            if w == bnode:
                                found = True
                                break
                            nxt.append(w)
                    if found:
                        break
                frontier = nxt
            if not found:
                continue
            path = [bnode]
            while path[-1] != e:
                path.append(prev[path[-1]])
            cycle = path[::-1]  # e ... bnode, closed by the removed edge
            if best is None or len(cycle) < len(best):
                best = cycle
    return best


def incidence_analysis(s: Structure) -> IncidenceReport:
    """Girth (block count of the shortest incidence cycle, inf if acyclic),
    forest and tree tests."""
    cycle = shortest_incidence_cycle(s)
    if cycle is None:
        girth: float = math.inf
    else:
        girth = sum(1 for x in cycle if x >= s.n)
    is_forest = cycle is None
    is_tree = is_forest and s.n >= 1 and len(components(s)) == 1
    return IncidenceReport(girth, is_forest, is_tree)


def components(s: Structure) -> List[Tuple[int, ...]]:
    """Connected components of the incidence multigraph, as element sets."""
    mg = incidence_multigraph(s)
    parent = list(range(s.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for elems in mg.incidences:
        es = sorted(set(elems))
        for other in es[1:]:
            ra, rb = find(es[0]), find(other)
            if ra != rb:
                parent[rb] = ra
    groups: Dict[int, List[int]] = {}
    for v in range(s.n):
        groups.setdefault(find(v), []).append(v)
    return [tuple(sorted(g)) for g in sorted(groups.values())]
