"""Search kernels, pure-Python backend.

Two kernels live here: a backtracking homomorphism search with
forward-checking and unit propagation, and a minimum-encoding
canonical-labelling search.  The compiled backend in ``_speedups.pyx``
mirrors both step for step; the two must return identical witnesses,
identical node counts and identical canonical encodings, so any change
here has to be replicated there.
"""

STANDARD = 0
INJECTIVE = 1
FULL = 2

FOUND = 0
NONE = 1
BUDGET = 2


def hom_search(n_src, n_dst, arities, src_tuples, dst_tuples, variant, budget,
               init_domains=None):
    """Search for a homomorphism between two relational structures.

    ``src_tuples[r]`` / ``dst_tuples[r]`` are flat integer lists holding the
    tuples of relation ``r`` (arity ``arities[r]``) back to back.  Returns
    ``(status, mapping_or_None, nodes)`` where nodes counts assignments
    (decisions plus propagated ones) performed before termination.
    """
    if n_src == 0:
        return (FOUND, [], 0)

    nrel = len(arities)

    # Initial domains: optional caller restriction, then unary relations
    # (colors) restrict forward: a source element in a unary relation may
    # only map to destination elements in that relation.
    base_dom = []
    for a in range(n_src):
        if init_domains is not None:
            allowed = set(init_domains[a])
            base_dom.append([b for b in range(n_dst) if b in allowed])
        else:
            base_dom.append(list(range(n_dst)))
    for r in range(nrel):
        if arities[r] != 1:
            continue
        in_dst = [False] * n_dst
        for b in dst_tuples[r]:
            in_dst[b] = True
        for a in set(src_tuples[r]):
            base_dom[a] = [b for b in base_dom[a] if in_dst[b]]

    # Constraints: one per source tuple of arity >= 2.
    cons = []
    occ = [[] for _ in range(n_src)]
    for r in range(nrel):
        k = arities[r]
        if k < 2:
            continue
        flat = src_tuples[r]
        for ti in range(len(flat) // k):
            elems = tuple(flat[ti * k:(ti + 1) * k])
            cid = len(cons)
            cons.append((r, elems))
            seen = []
            for e in elems:
                if e not in seen:
                    seen.append(e)
                    occ[e].append(cid)

    # Static variable order: descending tuple-degree, then index.
    deg = [0] * n_src
    for r in range(nrel):
        for e in src_tuples[r]:
            deg[e] += 1
    order = sorted(range(n_src), key=lambda a: (-deg[a], a))

    # Tuple-set membership is needed only for the fullness check.
    src_sets = [None] * nrel
    dst_sets = [None] * nrel
    if variant == FULL:
        for r in range(nrel):
            k = arities[r]
            if k < 2:
                continue
            flat = src_tuples[r]
            src_sets[r] = {tuple(flat[i * k:(i + 1) * k])
                           for i in range(len(flat) // k)}
            flat = dst_tuples[r]
            dst_sets[r] = {tuple(flat[i * k:(i + 1) * k])
                           for i in range(len(flat) // k)}

    # Domains with swap-removal and position index for O(1) membership.
    dom = [sorted(base_dom[a]) for a in range(n_src)]
    pos = []
    for a in range(n_src):
        p = [len(dom[a])] * n_dst
        for i, v in enumerate(dom[a]):
            p[v] = i
        pos.append(p)
    dom_size = [len(dom[a]) for a in range(n_src)]
    for a in range(n_src):
        if dom_size[a] == 0:
            return (NONE, None, 0)

    assign = [-1] * n_src
    trail = []           # one entry (the variable) per pruned value
    assigned_stack = []  # assignment order, for undo
    nodes = 0

    def prune_value(a, v):
        # v must currently be active in dom[a]
        i = pos[a][v]
        last = dom_size[a] - 1
        w = dom[a][last]
        dom[a][i] = w
        dom[a][last] = v
        pos[a][w] = i
        pos[a][v] = last
        dom_size[a] = last
        trail.append(a)

    def fullness_ok(a):
        nassigned = len(assigned_stack)
        for r in range(nrel):
            k = arities[r]
            if k < 2:
                continue
            dset = dst_sets[r]
            sset = src_sets[r]
            if not dset:
                continue
            # All k-tuples over assigned elements using `a` at least once.
            combo = [0] * k

            def rec(slot, used_a):
                if slot == k:
                    if not used_a:
                        return True
                    img = tuple(assign[e] for e in combo)
                    if img in dset and tuple(combo) not in sset:
                        return False
                    return True
                for idx in range(nassigned):
                    combo[slot] = assigned_stack[idx]
                    if not rec(slot + 1, used_a or combo[slot] == a):
                        return False
                return True

            if not rec(0, False):
                return False
        return True

    def propagate(a0, v0):
        """Assign a0:=v0 and run the forward-checking cascade.

        Returns 1 on success, 0 on conflict, -1 on budget exhaustion.
        """
        nonlocal nodes
        queue = [(a0, v0)]
        qi = 0
        while qi < len(queue):
            a, v = queue[qi]
            qi += 1
            if assign[a] != -1:
                continue
            nodes += 1
            if nodes > budget:
                return -1
            assign[a] = v
            assigned_stack.append(a)
            if variant == INJECTIVE:
                for w in range(n_src):
                    if w == a or assign[w] != -1:
                        continue
                    if pos[w][v] < dom_size[w]:
                        prune_value(w, v)
                        if dom_size[w] == 0:
                            return 0
                        if dom_size[w] == 1:
                            queue.append((w, dom[w][0]))
            if variant == FULL:
                if not fullness_ok(a):
                    return 0
            for cid in occ[a]:
                r, elems = cons[cid]
                k = arities[r]
                # Unique unassigned elements of this tuple.
                uniq = []
                for e in elems:
                    if assign[e] == -1 and e not in uniq:
                        uniq.append(e)
                supported = {e: set() for e in uniq}
                any_match = False
                flat = dst_tuples[r]
                for ti in range(len(flat) // k):
                    okm = True
                    # element -> value consistency across repeated positions
                    val = {}
                    for i in range(k):
                        e = elems[i]
                        s = flat[ti * k + i]
                        if assign[e] != -1:
                            if s != assign[e]:
                                okm = False
                                break
                        else:
                            if pos[e][s] >= dom_size[e]:
                                okm = False
                                break
                            if e in val:
                                if val[e] != s:
                                    okm = False
                                    break
                            else:
                                val[e] = s
                    if okm:
                        any_match = True
                        for e in uniq:
                            supported[e].add(val[e])
                if not any_match:
                    return 0
                for e in uniq:
                    sup = supported[e]
                    i = 0
                    while i < dom_size[e]:
                        x = dom[e][i]
                        if x not in sup:
                            prune_value(e, x)
                        else:
                            i += 1
                    if dom_size[e] == 0:
                        return 0
                    if dom_size[e] == 1 and assign[e] == -1:
                        queue.append((e, dom[e][0]))
        return 1

    def undo(trail_mark, assigned_mark):
        while len(trail) > trail_mark:
            a = trail.pop()
            dom_size[a] += 1
        while len(assigned_stack) > assigned_mark:
            a = assigned_stack.pop()
            assign[a] = -1

    # Iterative backtracking over decision frames.
    frames = []
    while True:
        var = -1
        for a in order:
            if assign[a] == -1:
                var = a
                break
        if var == -1:
            return (FOUND, list(assign), nodes)
        values = sorted(dom[var][:dom_size[var]])
        frames.append([var, values, 0, len(trail), len(assigned_stack)])
        descended = False
        while frames:
            frame = frames[-1]
            _, values, vi, tmark, amark = frame
            if vi >= len(values):
                frames.pop()
                if not frames:
                    return (NONE, None, nodes)
                undo(frames[-1][3], frames[-1][4])
                continue
            frame[2] = vi + 1
            res = propagate(frame[0], values[vi])
            if res == -1:
                return (BUDGET, None, nodes)
            if res == 1:
                descended = True
                break
            undo(tmark, amark)
        if not descended and not frames:
            return (NONE, None, nodes)


def canon_search(n, arities, rel_tuples):
    """Minimum-encoding canonical labelling by branch-and-bound.

    Encodes a structure as the per-step blocks of tuples that become fully
    labelled as each element is placed, and minimises that encoding over
    all placements.  Returns ``(perm, key)`` where ``perm[new] = old`` and
    ``key`` is the flattened minimal encoding (a tuple of ints including
    per-step block lengths), identical for isomorphic inputs.
    """
    if n == 0:
        return ([], ())
    nrel = len(arities)
    max_ar = 1
    for k in arities:
        if k > max_ar:
            max_ar = k
    base = n + 2

    # Tuples attached to each element (dedup per element).
    elem_cons = [[] for _ in range(n)]
    all_cons = []
    for r in range(nrel):
        k = arities[r]
        flat = rel_tuples[r]
        for ti in range(len(flat) // k):
            elems = tuple(flat[ti * k:(ti + 1) * k])
            cid = len(all_cons)
            all_cons.append((r, elems))
            seen = []
            for e in elems:
                if e not in seen:
                    seen.append(e)
                    elem_cons[e].append(cid)

    newpos = [-1] * n
    placed = [False] * n
    path = [None] * n

    def make_block(v):
        items = []
        for cid in elem_cons[v]:
            r, elems = all_cons[cid]
            code = r
            complete = True
            for i in range(max_ar):
                if i < len(elems):
                    p = newpos[elems[i]]
                    if p == -1:
                        complete = False
                        break
                    code = code * base + (p + 1)
                else:
                    code = code * base
            if complete:
                items.append(code)
        items.sort()
        return [len(items)] + items

    best = {"blocks": None, "perm": None}

    def cmp_block(b1, b2):
        ln = min(len(b1), len(b2))
        for i in range(ln):
            if b1[i] != b2[i]:
                return -1 if b1[i] < b2[i] else 1
        if len(b1) != len(b2):
            return -1 if len(b1) < len(b2) else 1
        return 0

    def dfs(k, equal):
        if k == n:
            if best["blocks"] is None or not equal:
                best["blocks"] = [list(b) for b in path]
                best["perm"] = [0] * n
                for old in range(n):
                    best["perm"][newpos[old]] = old
                return True
            return False
        upd_any = False
        for cand in range(n):
            if placed[cand]:
                continue
            placed[cand] = True
            newpos[cand] = k
            block = make_block(cand)
            skip = False
            child_equal = False
            if best["blocks"] is not None and equal:
                c = cmp_block(block, best["blocks"][k])
                if c > 0:
                    skip = True
                else:
                    child_equal = (c == 0)
            if not skip:
                path[k] = block
                if dfs(k + 1, child_equal):
                    upd_any = True
                    equal = True
            placed[cand] = False
            newpos[cand] = -1
        return upd_any

    dfs(0, False)
    key = []
    for b in best["blocks"]:
        key.extend(b)
    return (best["perm"], tuple(key))
