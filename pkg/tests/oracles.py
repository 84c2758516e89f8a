"""Independent brute-force oracles used by the tests.

Everything here is deliberately naive (exhaustive maps, labelled
enumeration with permutation orbits, BFS cycle search) and shares no code
with the search paths it checks.
"""

import math
from itertools import permutations, product

from liftcsp.structures import Structure


def brute_hom_maps(a: Structure, b: Structure, variant="standard"):
    """All homomorphism maps a -> b by checking every |b|^|a| function."""
    if a.n == 0:
        yield ()
        return
    for mapping in product(range(b.n), repeat=a.n):
        if variant == "injective" and len(set(mapping)) != a.n:
            continue
        ok = True
        for spec, ra, rb in zip(a.signature.relations, a.tuples, b.tuples):
            rbset = set(rb)
            for t in ra:
                if tuple(mapping[x] for x in t) not in rbset:
                    ok = False
                    break
            if not ok:
                break
        if ok and variant == "full":
            for spec, ra, rb in zip(a.signature.relations, a.tuples, b.tuples):
                if spec.arity < 2:
                    continue
                raset = set(ra)
                rbset = set(rb)
                for comb in product(range(a.n), repeat=spec.arity):
                    if tuple(mapping[x] for x in comb) in rbset \
                            and comb not in raset:
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            yield mapping


def brute_hom_exists(a, b, variant="standard"):
    for _ in brute_hom_maps(a, b, variant):
        return True
    return False


def brute_iso_classes(structures):
    """Group labelled structures into isomorphism classes by permutation
    orbits; returns one representative per class."""
    seen = set()
    reps = []
    for s in structures:
        key = _orbit_key(s)
        if key not in seen:
            seen.add(key)
            reps.append(s)
    return reps


def _orbit_key(s: Structure):
    best = None
    for perm in permutations(range(s.n)):
        enc = tuple(
            tuple(sorted(tuple(perm[x] for x in t) for t in rel))
            for rel in s.tuples)
        if best is None or enc < best:
            best = enc
    return (s.n, best)


def brute_isomorphic(a: Structure, b: Structure) -> bool:
    return a.n == b.n and _orbit_key(a) == _orbit_key(b)


def incidence_edges(s: Structure):
    """Bipartite incidence edges (element, block-index) with blocks merged
    for symmetric relations; parallel incidences kept."""
    blocks = []
    for ri, (spec, rel) in enumerate(zip(s.signature.relations, s.tuples)):
        if spec.symmetric:
            done = set()
            for t in rel:
                if t in done:
                    continue
                done.add(t)
                done.add(t[::-1])
                blocks.append(min(t, t[::-1]))
        else:
            blocks.extend(rel)
    edges = []
    for bi, rep in enumerate(blocks):
        for e in rep:
            edges.append((e, bi))
    return len(blocks), edges


def brute_girth(s: Structure):
    """Shortest incidence cycle measured in blocks, via BFS from every
    element node with branch tracking (a different algorithm from the
    library's per-edge removal search)."""
    nblocks, edges = incidence_edges(s)
    # multi-incidence: one block meeting an element twice is a 1-block cycle
    from collections import Counter
    cnt = Counter(edges)
    if any(c > 1 for c in cnt.values()):
        return 1
    n = s.n
    adj = [[] for _ in range(n + nblocks)]
    for e, bi in set(edges):
        adj[e].append(n + bi)
        adj[n + bi].append(e)
    best = math.inf
    for root in range(n + nblocks):
        dist = {root: 0}
        branch = {root: -1}
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        branch[w] = w if u == root else branch[u]
                        nxt.append(w)
                    else:
                        if dist[w] >= dist[u] and branch.get(u) != branch.get(w) \
                                and w != root:
                            best = min(best, dist[u] + dist[w] + 1)
            frontier = nxt
    if best is math.inf:
        return math.inf
    return best // 2  # cycle alternates element and block nodes


def brute_is_forest(s: Structure) -> bool:
    return brute_girth(s) is math.inf


def brute_retracts(s: Structure):
    """All proper subsets that are retracts (image of an idempotent
    endomorphism), by exhaustive search over maps."""
    out = []
    for mapping in brute_hom_maps(s, s):
        image = sorted(set(mapping))
        if len(image) == s.n:
            continue
        if all(mapping[v] == v for v in image):
            out.append(tuple(image))
    return out


def brute_core_size(s: Structure) -> int:
    """Smallest retract size, computed by shrinking greedily with the
    exhaustive retract search."""
    cur = s
    while True:
        retracts = brute_retracts(cur)
        if not retracts:
            return cur.n
        smallest = min(retracts, key=len)
        cur = cur.induced(smallest)


def proper_colorings(edges, n, k):
    """All proper k-colorings of an undirected edge list (loops make a
    vertex uncolorable)."""
    for combo in product(range(k), repeat=n):
        ok = True
        for (u, v) in edges:
            if combo[u] == combo[v]:
                ok = False
                break
        if ok:
            yield combo


def is_bipartite(s: Structure) -> bool:
    """Underlying undirected 2-colorability, loops excluded."""
    edges = set()
    for rel, spec in zip(s.tuples, s.signature.relations):
        for t in rel:
            if len(t) == 2:
                if t[0] == t[1]:
                    return False
                edges.add((min(t), max(t)))
    color = [-1] * s.n
    for start in range(s.n):
        if color[start] != -1:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for (x, y) in edges:
                if x == u or y == u:
                    w = y if x == u else x
                    if color[w] == -1:
                        color[w] = 1 - color[u]
                        stack.append(w)
                    elif color[w] == color[u]:
                        return False
    return True
