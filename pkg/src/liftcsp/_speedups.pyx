# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Search kernels, compiled backend.

Step-for-step transliteration of _kernels_py.py: identical witnesses,
identical node counts, identical canonical encodings.  Any semantic
change must be made in both files.
"""

from libc.stdlib cimport calloc, free, malloc, realloc
from libc.string cimport memset

STANDARD = 0
INJECTIVE = 1
FULL = 2

FOUND = 0
NONE = 1
BUDGET = 2

MAX_ARITY = 12


cdef struct IntBuf:
    long long *data
    size_t size
    size_t cap


cdef int buf_init(IntBuf *b, size_t cap) except -1:
    b.data = <long long *> malloc(cap * sizeof(long long))
    if b.data == NULL:
        raise MemoryError()
    b.size = 0
    b.cap = cap
    return 0


cdef int buf_push(IntBuf *b, long long v) except -1:
    cdef long long *nd
    if b.size == b.cap:
        b.cap = b.cap * 2 + 8
        nd = <long long *> realloc(b.data, b.cap * sizeof(long long))
        if nd == NULL:
            raise MemoryError()
        b.data = nd
    b.data[b.size] = v
    b.size += 1
    return 0


cdef void buf_free(IntBuf *b):
    if b.data != NULL:
        free(b.data)
        b.data = NULL


cdef long long _bsearch(long long *arr, long long n, long long key) nogil:
    cdef long long lo = 0, hi = n - 1, mid
    while lo <= hi:
        mid = (lo + hi) >> 1
        if arr[mid] == key:
            return mid
        if arr[mid] < key:
            lo = mid + 1
        else:
            hi = mid - 1
    return -1


cdef void _sort_ll(long long *arr, long long n):
    cdef long long i, j, key
    for i in range(1, n):
        key = arr[i]
        j = i - 1
        while j >= 0 and arr[j] > key:
            arr[j + 1] = arr[j]
            j -= 1
        arr[j + 1] = key


cdef void _sort_int(int *arr, int n):
    cdef int i, j, key
    for i in range(1, n):
        key = arr[i]
        j = i - 1
        while j >= 0 and arr[j] > key:
            arr[j + 1] = arr[j]
            j -= 1
        arr[j + 1] = key


cdef struct HS:
    int n_src
    int n_dst
    int nrel
    int *ar
    long long **sflat
    long long **dflat
    long long *scnt
    long long *dcnt
    int *c_rel
    long long *c_off
    long long *occ_start
    long long *occ_list
    int *order
    long long **skeys
    long long **dkeys
    int *dom
    int *pos
    int *dom_size
    int *assign


cdef void _hs_free(HS *hs):
    cdef int r
    if hs.sflat != NULL:
        for r in range(hs.nrel):
            if hs.sflat[r] != NULL:
                free(hs.sflat[r])
        free(hs.sflat)
    if hs.dflat != NULL:
        for r in range(hs.nrel):
            if hs.dflat[r] != NULL:
                free(hs.dflat[r])
        free(hs.dflat)
    if hs.skeys != NULL:
        for r in range(hs.nrel):
            if hs.skeys[r] != NULL:
                free(hs.skeys[r])
        free(hs.skeys)
    if hs.dkeys != NULL:
        for r in range(hs.nrel):
            if hs.dkeys[r] != NULL:
                free(hs.dkeys[r])
        free(hs.dkeys)
    if hs.ar != NULL:
        free(hs.ar)
    if hs.scnt != NULL:
        free(hs.scnt)
    if hs.dcnt != NULL:
        free(hs.dcnt)
    if hs.c_rel != NULL:
        free(hs.c_rel)
    if hs.c_off != NULL:
        free(hs.c_off)
    if hs.occ_start != NULL:
        free(hs.occ_start)
    if hs.occ_list != NULL:
        free(hs.occ_list)
    if hs.order != NULL:
        free(hs.order)
    if hs.dom != NULL:
        free(hs.dom)
    if hs.pos != NULL:
        free(hs.pos)
    if hs.dom_size != NULL:
        free(hs.dom_size)
    if hs.assign != NULL:
        free(hs.assign)


cdef void _prune(HS *hs, IntBuf *trail, int a, int v):
    cdef int n_dst = hs.n_dst
    cdef int i = hs.pos[a * n_dst + v]
    cdef int last = hs.dom_size[a] - 1
    cdef int w = hs.dom[a * n_dst + last]
    hs.dom[a * n_dst + i] = w
    hs.dom[a * n_dst + last] = v
    hs.pos[a * n_dst + w] = i
    hs.pos[a * n_dst + v] = last
    hs.dom_size[a] = last
    buf_push(trail, a)


cdef void _undo(HS *hs, IntBuf *trail, IntBuf *astack, long long tmark,
                long long amark):
    cdef int a
    while <long long> trail.size > tmark:
        trail.size -= 1
        a = <int> trail.data[trail.size]
        hs.dom_size[a] += 1
    while <long long> astack.size > amark:
        astack.size -= 1
        a = <int> astack.data[astack.size]
        hs.assign[a] = -1


cdef int _fullness_ok(HS *hs, IntBuf *astack, int a, long long base):
    cdef int r, k, i, done, used_a
    cdef long long nassigned = astack.size
    cdef long long img_code, src_code
    cdef int idxs[16]
    for r in range(hs.nrel):
        k = hs.ar[r]
        if k < 2 or hs.dkeys[r] == NULL or hs.dcnt[r] == 0:
            continue
        for i in range(k):
            idxs[i] = 0
        while True:
            used_a = 0
            for i in range(k):
                if astack.data[idxs[i]] == a:
                    used_a = 1
                    break
            if used_a:
                img_code = 0
                src_code = 0
                for i in range(k):
                    img_code = img_code * base + \
                        hs.assign[<int> astack.data[idxs[i]]]
                    src_code = src_code * base + astack.data[idxs[i]]
                if _bsearch(hs.dkeys[r], hs.dcnt[r], img_code) >= 0 and \
                        _bsearch(hs.skeys[r], hs.scnt[r], src_code) < 0:
                    return 0
            done = 1
            i = k - 1
            while i >= 0:
                idxs[i] += 1
                if idxs[i] < nassigned:
                    done = 0
                    break
                idxs[i] = 0
                i -= 1
            if done:
                break
    return 1


def hom_search(int n_src, int n_dst, arities, src_tuples, dst_tuples,
               int variant, long long budget, init_domains=None):
    """See _kernels_py.hom_search."""
    if n_src == 0:
        return (FOUND, [], 0)

    cdef int nrel = len(arities)
    cdef int r, k, a, b, i, j, e, w, x, v, sz, tmp, dup
    cdef long long ti, cid, off, m_ti, qi
    cdef long long nodes = 0

    for r in range(nrel):
        if arities[r] > MAX_ARITY:
            from liftcsp import _kernels_py
            return _kernels_py.hom_search(
                n_src, n_dst, list(arities), [list(t) for t in src_tuples],
                [list(t) for t in dst_tuples], variant, budget, init_domains)

    cdef HS hs
    memset(&hs, 0, sizeof(HS))
    hs.n_src = n_src
    hs.n_dst = n_dst
    hs.nrel = nrel

    hs.ar = <int *> malloc(nrel * sizeof(int))
    hs.sflat = <long long **> calloc(nrel, sizeof(long long *))
    hs.dflat = <long long **> calloc(nrel, sizeof(long long *))
    hs.scnt = <long long *> malloc(nrel * sizeof(long long))
    hs.dcnt = <long long *> malloc(nrel * sizeof(long long))
    cdef list py_list
    for r in range(nrel):
        hs.ar[r] = arities[r]
        py_list = list(src_tuples[r])
        hs.scnt[r] = len(py_list) // hs.ar[r]
        hs.sflat[r] = <long long *> malloc((len(py_list) + 1) * sizeof(long long))
        for i in range(len(py_list)):
            hs.sflat[r][i] = py_list[i]
        py_list = list(dst_tuples[r])
        hs.dcnt[r] = len(py_list) // hs.ar[r]
        hs.dflat[r] = <long long *> malloc((len(py_list) + 1) * sizeof(long long))
        for i in range(len(py_list)):
            hs.dflat[r][i] = py_list[i]

    # Initial domains (caller restriction, then unary forward restriction).
    cdef unsigned char *dom_ok = <unsigned char *> malloc(n_src * n_dst + 1)
    memset(dom_ok, 1, n_src * n_dst + 1)
    cdef unsigned char *mark = <unsigned char *> malloc(n_dst + 1)
    if init_domains is not None:
        for a in range(n_src):
            memset(mark, 0, n_dst + 1)
            for x_py in init_domains[a]:
                mark[<int> x_py] = 1
            for b in range(n_dst):
                if not mark[b]:
                    dom_ok[a * n_dst + b] = 0
    for r in range(nrel):
        if hs.ar[r] != 1:
            continue
        memset(mark, 0, n_dst + 1)
        for ti in range(hs.dcnt[r]):
            mark[<int> hs.dflat[r][ti]] = 1
        for ti in range(hs.scnt[r]):
            a = <int> hs.sflat[r][ti]
            for b in range(n_dst):
                if not mark[b]:
                    dom_ok[a * n_dst + b] = 0
    free(mark)

    # Constraints (arity >= 2) and occurrence lists in (rel, tuple) order.
    cdef long long ncons = 0
    for r in range(nrel):
        if hs.ar[r] >= 2:
            ncons += hs.scnt[r]
    hs.c_rel = <int *> malloc((ncons + 1) * sizeof(int))
    hs.c_off = <long long *> malloc((ncons + 1) * sizeof(long long))
    cdef long long *occ_cnt = <long long *> calloc(n_src + 1, sizeof(long long))
    cdef int seen[16]
    cdef int seen_n
    cdef long long cc = 0
    for r in range(nrel):
        k = hs.ar[r]
        if k < 2:
            continue
        for ti in range(hs.scnt[r]):
            hs.c_rel[cc] = r
            hs.c_off[cc] = ti * k
            seen_n = 0
            for i in range(k):
                e = <int> hs.sflat[r][ti * k + i]
                dup = 0
                for j in range(seen_n):
                    if seen[j] == e:
                        dup = 1
                        break
                if not dup:
                    seen[seen_n] = e
                    seen_n += 1
                    occ_cnt[e] += 1
            cc += 1
    hs.occ_start = <long long *> malloc((n_src + 1) * sizeof(long long))
    cdef long long total_occ = 0
    for a in range(n_src):
        hs.occ_start[a] = total_occ
        total_occ += occ_cnt[a]
    hs.occ_start[n_src] = total_occ
    hs.occ_list = <long long *> malloc((total_occ + 1) * sizeof(long long))
    cdef long long *occ_fill = <long long *> calloc(n_src + 1, sizeof(long long))
    cc = 0
    for r in range(nrel):
        k = hs.ar[r]
        if k < 2:
            continue
        for ti in range(hs.scnt[r]):
            seen_n = 0
            for i in range(k):
                e = <int> hs.sflat[r][ti * k + i]
                dup = 0
                for j in range(seen_n):
                    if seen[j] == e:
                        dup = 1
                        break
                if not dup:
                    seen[seen_n] = e
                    seen_n += 1
                    hs.occ_list[hs.occ_start[e] + occ_fill[e]] = cc
                    occ_fill[e] += 1
            cc += 1
    free(occ_fill)
    free(occ_cnt)

    # Static order: descending tuple-degree, then index.
    cdef long long *deg = <long long *> calloc(n_src + 1, sizeof(long long))
    for r in range(nrel):
        for ti in range(hs.scnt[r] * hs.ar[r]):
            deg[<int> hs.sflat[r][ti]] += 1
    hs.order = <int *> malloc(n_src * sizeof(int))
    for a in range(n_src):
        hs.order[a] = a
    for i in range(1, n_src):
        tmp = hs.order[i]
        j = i - 1
        while j >= 0 and (deg[hs.order[j]] < deg[tmp] or
                          (deg[hs.order[j]] == deg[tmp] and hs.order[j] > tmp)):
            hs.order[j + 1] = hs.order[j]
            j -= 1
        hs.order[j + 1] = tmp
    free(deg)

    # Fullness membership tables.
    cdef long long base = n_dst + 2 if n_dst + 2 > n_src + 2 else n_src + 2
    cdef long long base_pow, code
    cdef int overflow = 0
    if variant == FULL:
        hs.skeys = <long long **> calloc(nrel, sizeof(long long *))
        hs.dkeys = <long long **> calloc(nrel, sizeof(long long *))
        for r in range(nrel):
            k = hs.ar[r]
            if k < 2:
                continue
            base_pow = 1
            for i in range(k):
                if base_pow > (<long long> 1 << 60) // base:
                    overflow = 1
                    break
                base_pow *= base
            if overflow:
                break
            hs.skeys[r] = <long long *> malloc((hs.scnt[r] + 1) * sizeof(long long))
            for ti in range(hs.scnt[r]):
                code = 0
                for i in range(k):
                    code = code * base + hs.sflat[r][ti * k + i]
                hs.skeys[r][ti] = code
            _sort_ll(hs.skeys[r], hs.scnt[r])
            hs.dkeys[r] = <long long *> malloc((hs.dcnt[r] + 1) * sizeof(long long))
            for ti in range(hs.dcnt[r]):
                code = 0
                for i in range(k):
                    code = code * base + hs.dflat[r][ti * k + i]
                hs.dkeys[r][ti] = code
            _sort_ll(hs.dkeys[r], hs.dcnt[r])
    if overflow:
        free(dom_ok)
        _hs_free(&hs)
        from liftcsp import _kernels_py
        return _kernels_py.hom_search(
            n_src, n_dst, list(arities), [list(t) for t in src_tuples],
            [list(t) for t in dst_tuples], variant, budget, init_domains)

    # Domains with positions.
    hs.dom = <int *> malloc((n_src * n_dst + 1) * sizeof(int))
    hs.pos = <int *> malloc((n_src * n_dst + 1) * sizeof(int))
    hs.dom_size = <int *> malloc(n_src * sizeof(int))
    for a in range(n_src):
        sz = 0
        for b in range(n_dst):
            if dom_ok[a * n_dst + b]:
                hs.dom[a * n_dst + sz] = b
                hs.pos[a * n_dst + b] = sz
                sz += 1
            else:
                hs.pos[a * n_dst + b] = n_dst
        hs.dom_size[a] = sz
    free(dom_ok)
    for a in range(n_src):
        if hs.dom_size[a] == 0:
            _hs_free(&hs)
            return (NONE, None, 0)

    hs.assign = <int *> malloc(n_src * sizeof(int))
    for a in range(n_src):
        hs.assign[a] = -1

    cdef IntBuf trail
    cdef IntBuf astack
    cdef IntBuf queue
    buf_init(&trail, 64)
    buf_init(&astack, 64)
    buf_init(&queue, 64)

    cdef long long *sup_stamp = <long long *> calloc(n_src * n_dst + 1,
                                                     sizeof(long long))
    cdef long long stamp_ctr = 0
    cdef int uniq[16]
    cdef long long ustamp[16]
    cdef int tval_elem[16]
    cdef int tval_val[16]

    cdef int *f_var = <int *> malloc((n_src + 1) * sizeof(int))
    cdef long long *f_vi = <long long *> malloc((n_src + 1) * sizeof(long long))
    cdef long long *f_nval = <long long *> malloc((n_src + 1) * sizeof(long long))
    cdef long long *f_tmark = <long long *> malloc((n_src + 1) * sizeof(long long))
    cdef long long *f_amark = <long long *> malloc((n_src + 1) * sizeof(long long))
    cdef int *f_values = <int *> malloc(((n_src + 1) * n_dst + 1) * sizeof(int))
    cdef int nframes = 0

    cdef int res, var, uq_n, nn, okm, any_match, s_val, matched

    try:
        while True:
            var = -1
            for i in range(n_src):
                if hs.assign[hs.order[i]] == -1:
                    var = hs.order[i]
                    break
            if var == -1:
                return (FOUND, [hs.assign[a] for a in range(n_src)], nodes)
            sz = hs.dom_size[var]
            for i in range(sz):
                f_values[nframes * n_dst + i] = hs.dom[var * n_dst + i]
            _sort_int(&f_values[nframes * n_dst], sz)
            f_var[nframes] = var
            f_vi[nframes] = 0
            f_nval[nframes] = sz
            f_tmark[nframes] = trail.size
            f_amark[nframes] = astack.size
            nframes += 1
            while nframes > 0:
                var = f_var[nframes - 1]
                if f_vi[nframes - 1] >= f_nval[nframes - 1]:
                    nframes -= 1
                    if nframes == 0:
                        return (NONE, None, nodes)
                    _undo(&hs, &trail, &astack, f_tmark[nframes - 1],
                          f_amark[nframes - 1])
                    continue
                v = f_values[(nframes - 1) * n_dst + f_vi[nframes - 1]]
                f_vi[nframes - 1] += 1

                # ---- propagate(var, v) ----
                queue.size = 0
                buf_push(&queue, var)
                buf_push(&queue, v)
                qi = 0
                res = 1
                while qi < <long long> queue.size:
                    a = <int> queue.data[qi]
                    b = <int> queue.data[qi + 1]
                    qi += 2
                    if hs.assign[a] != -1:
                        continue
                    nodes += 1
                    if nodes > budget:
                        res = -1
                        break
                    hs.assign[a] = b
                    buf_push(&astack, a)
                    if variant == INJECTIVE:
                        for w in range(n_src):
                            if w == a or hs.assign[w] != -1:
                                continue
                            if hs.pos[w * n_dst + b] < hs.dom_size[w]:
                                _prune(&hs, &trail, w, b)
                                if hs.dom_size[w] == 0:
                                    res = 0
                                    break
                                if hs.dom_size[w] == 1:
                                    buf_push(&queue, w)
                                    buf_push(&queue, hs.dom[w * n_dst])
                        if res == 0:
                            break
                    if variant == FULL:
                        if not _fullness_ok(&hs, &astack, a, base):
                            res = 0
                            break
                    for off in range(hs.occ_start[a], hs.occ_start[a + 1]):
                        cid = hs.occ_list[off]
                        r = hs.c_rel[cid]
                        k = hs.ar[r]
                        uq_n = 0
                        for i in range(k):
                            e = <int> hs.sflat[r][hs.c_off[cid] + i]
                            if hs.assign[e] == -1:
                                dup = 0
                                for j in range(uq_n):
                                    if uniq[j] == e:
                                        dup = 1
                                        break
                                if not dup:
                                    uniq[uq_n] = e
                                    stamp_ctr += 1
                                    ustamp[uq_n] = stamp_ctr
                                    uq_n += 1
                        any_match = 0
                        for m_ti in range(hs.dcnt[r]):
                            okm = 1
                            nn = 0
                            for i in range(k):
                                e = <int> hs.sflat[r][hs.c_off[cid] + i]
                                s_val = <int> hs.dflat[r][m_ti * k + i]
                                if hs.assign[e] != -1:
                                    if s_val != hs.assign[e]:
                                        okm = 0
                                        break
                                else:
                                    if hs.pos[e * n_dst + s_val] >= hs.dom_size[e]:
                                        okm = 0
                                        break
                                    matched = 0
                                    for j in range(nn):
                                        if tval_elem[j] == e:
                                            matched = 1
                                            if tval_val[j] != s_val:
                                                okm = 0
                                            break
                                    if not okm:
                                        break
                                    if not matched:
                                        tval_elem[nn] = e
                                        tval_val[nn] = s_val
                                        nn += 1
                            if okm:
                                any_match = 1
                                for j in range(nn):
                                    for i in range(uq_n):
                                        if uniq[i] == tval_elem[j]:
                                            sup_stamp[uniq[i] * n_dst +
                                                      tval_val[j]] = ustamp[i]
                                            break
                        if not any_match:
                            res = 0
                            break
                        for i in range(uq_n):
                            e = uniq[i]
                            j = 0
                            while j < hs.dom_size[e]:
                                x = hs.dom[e * n_dst + j]
                                if sup_stamp[e * n_dst + x] != ustamp[i]:
                                    _prune(&hs, &trail, e, x)
                                else:
                                    j += 1
                            if hs.dom_size[e] == 0:
                                res = 0
                                break
                            if hs.dom_size[e] == 1 and hs.assign[e] == -1:
                                buf_push(&queue, e)
                                buf_push(&queue, hs.dom[e * n_dst])
                        if res == 0:
                            break
                    if res == 0:
                        break
                # ---- end propagate ----

                if res == -1:
                    return (BUDGET, None, nodes)
                if res == 1:
                    break
                _undo(&hs, &trail, &astack, f_tmark[nframes - 1],
                      f_amark[nframes - 1])
            if nframes == 0:
                return (NONE, None, nodes)
    finally:
        buf_free(&trail)
        buf_free(&astack)
        buf_free(&queue)
        free(sup_stamp)
        free(f_var)
        free(f_vi)
        free(f_nval)
        free(f_tmark)
        free(f_amark)
        free(f_values)
        _hs_free(&hs)


# ---------------------------------------------------------------------------
# Canonical labelling
# ---------------------------------------------------------------------------

cdef struct CanonCtx:
    int n
    int max_ar
    long long base
    long long ncons
    int *c_rel
    int *c_len
    long long *c_elems
    long long *c_start
    long long *ec_start
    long long *ec_list
    int *newpos
    unsigned char *placed
    long long *path
    long long *path_start
    long long *best
    long long *best_start
    int has_best
    int *best_perm


cdef int _make_block(CanonCtx *ctx, int v, long long *out):
    cdef int cnt = 0
    cdef long long off, cid, code
    cdef int i, complete, p
    for off in range(ctx.ec_start[v], ctx.ec_start[v + 1]):
        cid = ctx.ec_list[off]
        code = ctx.c_rel[cid]
        complete = 1
        for i in range(ctx.max_ar):
            if i < ctx.c_len[cid]:
                p = ctx.newpos[ctx.c_elems[ctx.c_start[cid] + i]]
                if p == -1:
                    complete = 0
                    break
                code = code * ctx.base + (p + 1)
            else:
                code = code * ctx.base
        if complete:
            out[1 + cnt] = code
            cnt += 1
    _sort_ll(&out[1], cnt)
    out[0] = cnt
    return cnt


cdef int _cmp_block(long long *b1, long long *b2):
    # blocks are [count, items...]; compare elementwise like the pure tuples
    cdef long long i
    if b1[0] != b2[0]:
        return -1 if b1[0] < b2[0] else 1
    for i in range(1, b1[0] + 1):
        if b1[i] != b2[i]:
            return -1 if b1[i] < b2[i] else 1
    return 0


cdef int _canon_leaf_or_descend(CanonCtx *ctx, int k, int child_equal):
    # mirrors the pure code: at a leaf, replace best unless the full
    # encoding ties it (equal prefix all the way down)
    cdef int i
    cdef long long total
    if k + 1 == ctx.n:
        if ctx.has_best == 0 or child_equal == 0:
            for i in range(ctx.n):
                ctx.best_start[i] = ctx.path_start[i]
            total = ctx.path_start[ctx.n - 1] + \
                ctx.path[ctx.path_start[ctx.n - 1]] + 1
            for i in range(<int> total):
                ctx.best[i] = ctx.path[i]
            ctx.has_best = 1
            for i in range(ctx.n):
                ctx.best_perm[ctx.newpos[i]] = i
            return 1
        return 0
    return _canon_dfs_inner(ctx, k + 1, child_equal)


cdef int _canon_dfs_inner(CanonCtx *ctx, int k, int equal):
    cdef int upd_any = 0, cand, skip, child_equal, c
    cdef long long *block
    for cand in range(ctx.n):
        if ctx.placed[cand]:
            continue
        ctx.placed[cand] = 1
        ctx.newpos[cand] = k
        block = &ctx.path[ctx.path_start[k]]
        _make_block(ctx, cand, block)
        skip = 0
        child_equal = 0
        if ctx.has_best and equal:
            c = _cmp_block(block, &ctx.best[ctx.best_start[k]])
            if c > 0:
                skip = 1
            else:
                child_equal = 1 if c == 0 else 0
        if not skip:
            if k + 1 < ctx.n:
                ctx.path_start[k + 1] = ctx.path_start[k] + block[0] + 1
            if _canon_leaf_or_descend(ctx, k, child_equal):
                upd_any = 1
                equal = 1
        ctx.placed[cand] = 0
        ctx.newpos[cand] = -1
    return upd_any


def canon_search(int n, arities, rel_tuples):
    """See _kernels_py.canon_search."""
    if n == 0:
        return ([], ())
    cdef int nrel = len(arities)
    cdef int max_ar = 1
    cdef int r, k, i, j, e, dup, seen_n
    cdef long long cc, ee, ti, tot, cnt_
    for r in range(nrel):
        if arities[r] > max_ar:
            max_ar = arities[r]
    if max_ar > MAX_ARITY or n > 60:
        from liftcsp import _kernels_py
        return _kernels_py.canon_search(n, list(arities),
                                        [list(t) for t in rel_tuples])

    cdef CanonCtx ctx
    memset(&ctx, 0, sizeof(CanonCtx))
    ctx.n = n
    ctx.base = n + 2
    ctx.max_ar = max_ar

    flats = [list(t) for t in rel_tuples]
    cdef long long ncons = 0
    cdef long long total_elems = 0
    for r in range(nrel):
        ncons += len(flats[r]) // arities[r]
        total_elems += len(flats[r])
    ctx.ncons = ncons
    ctx.c_rel = <int *> malloc((ncons + 1) * sizeof(int))
    ctx.c_len = <int *> malloc((ncons + 1) * sizeof(int))
    ctx.c_start = <long long *> malloc((ncons + 1) * sizeof(long long))
    ctx.c_elems = <long long *> malloc((total_elems + 1) * sizeof(long long))

    cdef long long *ecnt = <long long *> calloc(n + 1, sizeof(long long))
    cdef int seen_buf[16]
    cc = 0
    ee = 0
    for r in range(nrel):
        k = arities[r]
        flat = flats[r]
        for ti in range(len(flat) // k):
            ctx.c_rel[cc] = r
            ctx.c_len[cc] = k
            ctx.c_start[cc] = ee
            seen_n = 0
            for i in range(k):
                e = flat[ti * k + i]
                ctx.c_elems[ee] = e
                ee += 1
                dup = 0
                for j in range(seen_n):
                    if seen_buf[j] == e:
                        dup = 1
                        break
                if not dup:
                    seen_buf[seen_n] = e
                    seen_n += 1
                    ecnt[e] += 1
            cc += 1
    ctx.ec_start = <long long *> malloc((n + 1) * sizeof(long long))
    tot = 0
    for i in range(n):
        ctx.ec_start[i] = tot
        tot += ecnt[i]
    ctx.ec_start[n] = tot
    ctx.ec_list = <long long *> malloc((tot + 1) * sizeof(long long))
    cdef long long *efill = <long long *> calloc(n + 1, sizeof(long long))
    cc = 0
    for r in range(nrel):
        k = arities[r]
        flat = flats[r]
        for ti in range(len(flat) // k):
            seen_n = 0
            for i in range(k):
                e = flat[ti * k + i]
                dup = 0
                for j in range(seen_n):
                    if seen_buf[j] == e:
                        dup = 1
                        break
                if not dup:
                    seen_buf[seen_n] = e
                    seen_n += 1
                    ctx.ec_list[ctx.ec_start[e] + efill[e]] = cc
                    efill[e] += 1
            cc += 1
    free(efill)
    free(ecnt)

    ctx.newpos = <int *> malloc(n * sizeof(int))
    ctx.placed = <unsigned char *> calloc(n + 1, 1)
    for i in range(n):
        ctx.newpos[i] = -1
    ctx.path = <long long *> malloc((ncons + n + 1) * sizeof(long long))
    ctx.path_start = <long long *> malloc((n + 1) * sizeof(long long))
    ctx.path_start[0] = 0
    ctx.best = <long long *> malloc((ncons + n + 1) * sizeof(long long))
    ctx.best_start = <long long *> malloc((n + 1) * sizeof(long long))
    ctx.best_perm = <int *> malloc(n * sizeof(int))
    ctx.has_best = 0

    try:
        _canon_dfs_inner(&ctx, 0, 0)
        perm = [ctx.best_perm[i] for i in range(n)]
        key = []
        for i in range(n):
            cnt_ = ctx.best[ctx.best_start[i]]
            for j in range(<int> (cnt_ + 1)):
                key.append(ctx.best[ctx.best_start[i] + j])
        return (perm, tuple(key))
    finally:
        free(ctx.c_rel)
        free(ctx.c_len)
        free(ctx.c_start)
        free(ctx.c_elems)
        free(ctx.ec_start)
        free(ctx.ec_list)
        free(ctx.newpos)
        free(ctx.placed)
        free(ctx.path)
        free(ctx.path_start)
        free(ctx.best)
        free(ctx.best_start)
        free(ctx.best_perm)
