# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``corrfilter._pycore``."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, calloc, free

cnp.import_array()

BACKEND = "cython"


cdef struct LR:
    int n
    int m
    int *height
    int *parent_edge
    int *src
    int *dst
    int *lowpt
    int *lowpt_edge
    int *ref
    int *stack_bottom
    # conflict-pair stack
    int *ll
    int *lh
    int *rl
    int *rh
    int *pid
    int top
    int next_id


cdef inline int _top_id(LR *s) noexcept nogil:
    if s.top == 0:
        return -1
    return s.pid[s.top - 1]


cdef inline void _push(LR *s, int ll, int lh, int rl, int rh, int pid) noexcept nogil:
    cdef int t = s.top
    s.ll[t] = ll
    s.lh[t] = lh
    s.rl[t] = rl
    s.rh[t] = rh
    s.pid[t] = pid
    s.top = t + 1


cdef inline bint _conflicting(LR *s, int low, int high, int b) noexcept nogil:
    return not (low == -1 and high == -1) and s.lowpt[high] > s.lowpt[b]


cdef inline int _lowest(LR *s, int t) noexcept nogil:
    if s.ll[t] == -1 and s.lh[t] == -1:
        return s.lowpt[s.rl[t]]
    if s.rl[t] == -1 and s.rh[t] == -1:
        return s.lowpt[s.ll[t]]
    if s.lowpt[s.ll[t]] < s.lowpt[s.rl[t]]:
        return s.lowpt[s.ll[t]]
    return s.lowpt[s.rl[t]]


cdef bint _add_constraints(LR *s, int ei, int e) noexcept nogil:
    cdef int pll = -1, plh = -1, prl = -1, prh = -1
    cdef int pid
    cdef int qll, qlh, qrl, qrh, t, tmp
    s.next_id += 1
    pid = s.next_id
    while True:
        s.top -= 1
        t = s.top
        qll = s.ll[t]; qlh = s.lh[t]; qrl = s.rl[t]; qrh = s.rh[t]
        if not (qll == -1 and qlh == -1):
            tmp = qll; qll = qrl; qrl = tmp
            tmp = qlh; qlh = qrh; qrh = tmp
        if not (qll == -1 and qlh == -1):
            return False
        if s.lowpt[qrl] > s.lowpt[e]:
            if prl == -1 and prh == -1:
                prh = qrh
            else:
                s.ref[prl] = qrh
            prl = qrl
        else:
            s.ref[qrl] = s.lowpt_edge[e]
        if _top_id(s) == s.stack_bottom[ei]:
            break
    while s.top > 0:
        t = s.top - 1
        if not (_conflicting(s, s.ll[t], s.lh[t], ei) or _conflicting(s, s.rl[t], s.rh[t], ei)):
            break
        s.top -= 1
        qll = s.ll[t]; qlh = s.lh[t]; qrl = s.rl[t]; qrh = s.rh[t]
        if _conflicting(s, qrl, qrh, ei):
            tmp = qll; qll = qrl; qrl = tmp
            tmp = qlh; qlh = qrh; qrh = tmp
        if _conflicting(s, qrl, qrh, ei):
            return False
        if prl != -1:
            s.ref[prl] = qrh
        if qrl != -1:
            prl = qrl
        if pll == -1 and plh == -1:
            plh = qlh
        else:
            s.ref[pll] = qlh
        pll = qll
    if not (pll == -1 and plh == -1 and prl == -1 and prh == -1):
        _push(s, pll, plh, prl, prh, pid)
    return True


cdef void _remove_back_edges(LR *s, int e) noexcept nogil:
    cdef int u = s.src[e]
    cdef int hu = s.height[u]
    cdef int t, hl, hr
    while s.top > 0 and _lowest(s, s.top - 1) == hu:
        s.top -= 1
    if s.top > 0:
        t = s.top - 1
        while s.lh[t] != -1 and s.dst[s.lh[t]] == u:
            s.lh[t] = s.ref[s.lh[t]]
        if s.lh[t] == -1 and s.ll[t] != -1:
            s.ref[s.ll[t]] = s.rl[t]
            s.ll[t] = -1
        while s.rh[t] != -1 and s.dst[s.rh[t]] == u:
            s.rh[t] = s.ref[s.rh[t]]
        if s.rh[t] == -1 and s.rl[t] != -1:
            s.ref[s.rl[t]] = s.ll[t]
            s.rl[t] = -1
    if s.lowpt[e] < hu:
        t = s.top - 1
        hl = s.lh[t]
        hr = s.rh[t]
        if hl != -1 and (hr == -1 or s.lowpt[hl] > s.lowpt[hr]):
            s.ref[e] = hl
        else:
            s.ref[e] = hr


cdef bint _lr_planar(int n, int m, const int *us, const int *vs) noexcept nogil:
    cdef int i, e, v, w, u, pe, sp, root, k, key
    cdef bint result = True
    if n > 2 and m > 3 * n - 6:
        return False
    if m < 9:
        return True

    cdef int *deg = <int *> calloc(n + 1, sizeof(int))
    cdef int *adj_to = <int *> malloc(2 * m * sizeof(int))
    cdef int *adj_e = <int *> malloc(2 * m * sizeof(int))
    cdef int *fill = <int *> malloc((n + 1) * sizeof(int))
    cdef int *ptr = <int *> calloc(n, sizeof(int))
    cdef int *lowpt2 = <int *> malloc(m * sizeof(int))
    cdef int *nesting = <int *> malloc(m * sizeof(int))
    cdef int *order = <int *> malloc(m * sizeof(int))
    cdef int *roots = <int *> malloc(n * sizeof(int))
    cdef int *stack = <int *> malloc((2 * n + 2) * sizeof(int))
    cdef int *bucket = <int *> calloc(2 * n + 3, sizeof(int))
    cdef int *sorted_e = <int *> malloc(m * sizeof(int))
    cdef int *out_start = <int *> calloc(n + 1, sizeof(int))
    cdef int *out_e = <int *> malloc(m * sizeof(int))
    cdef int *idx = <int *> calloc(n, sizeof(int))
    cdef char *seen = <char *> calloc(m, sizeof(char))
    cdef int n_roots = 0, n_oriented = 0
    cdef LR s
    s.n = n
    s.m = m
    s.height = <int *> malloc(n * sizeof(int))
    s.parent_edge = <int *> malloc(n * sizeof(int))
    s.src = <int *> malloc(m * sizeof(int))
    s.dst = <int *> malloc(m * sizeof(int))
    s.lowpt = <int *> malloc(m * sizeof(int))
    s.lowpt_edge = <int *> malloc(m * sizeof(int))
    s.ref = <int *> malloc(m * sizeof(int))
    s.stack_bottom = <int *> malloc(m * sizeof(int))
    s.ll = <int *> malloc((2 * m + 4) * sizeof(int))
    s.lh = <int *> malloc((2 * m + 4) * sizeof(int))
    s.rl = <int *> malloc((2 * m + 4) * sizeof(int))
    s.rh = <int *> malloc((2 * m + 4) * sizeof(int))
    s.pid = <int *> malloc((2 * m + 4) * sizeof(int))
    s.top = 0
    s.next_id = 0

    # adjacency in CSR form, neighbors in edge order
    for e in range(m):
        deg[us[e] + 1] += 1
        deg[vs[e] + 1] += 1
    for i in range(n):
        deg[i + 1] += deg[i]
    for i in range(n + 1):
        fill[i] = deg[i]
    for e in range(m):
        u = us[e]
        v = vs[e]
        adj_to[fill[u]] = v
        adj_e[fill[u]] = e
        fill[u] += 1
        adj_to[fill[v]] = u
        adj_e[fill[v]] = e
        fill[v] += 1

    for i in range(n):
        s.height[i] = -1
        s.parent_edge[i] = -1
    for e in range(m):
        s.src[e] = -1
        s.dst[e] = -1
        s.lowpt_edge[e] = -1
        s.ref[e] = -1
        s.stack_bottom[e] = -1

    # orientation
    for root in range(n):
        if s.height[root] != -1:
            continue
        s.height[root] = 0
        roots[n_roots] = root
        n_roots += 1
        sp = 0
        stack[sp] = root
        sp += 1
        while sp > 0:
            v = stack[sp - 1]
            if ptr[v] < deg[v + 1] - deg[v]:
                k = deg[v] + ptr[v]
                w = adj_to[k]
                e = adj_e[k]
                if s.src[e] != -1:
                    ptr[v] += 1
                    continue
                s.src[e] = v
                s.dst[e] = w
                order[n_oriented] = e
                n_oriented += 1
                s.lowpt[e] = s.height[v]
                lowpt2[e] = s.height[v]
                if s.height[w] == -1:
                    s.parent_edge[w] = e
                    s.height[w] = s.height[v] + 1
                    stack[sp] = w
                    sp += 1
                    continue
                s.lowpt[e] = s.height[w]
                _finish_edge(&s, lowpt2, nesting, e, v)
                ptr[v] += 1
            else:
                sp -= 1
                pe = s.parent_edge[v]
                if pe != -1:
                    u = s.src[pe]
                    _finish_edge(&s, lowpt2, nesting, pe, u)
                    ptr[u] += 1

    # stable counting sort by nesting depth, then stable bucketing by source
    for k in range(m):
        bucket[nesting[order[k]] + 1] += 1
    for i in range(2 * n + 2):
        bucket[i + 1] += bucket[i]
    for k in range(m):
        e = order[k]
        key = nesting[e]
        sorted_e[bucket[key]] = e
        bucket[key] += 1
    for e in range(m):
        out_start[s.src[e] + 1] += 1
    for i in range(n):
        out_start[i + 1] += out_start[i]
    for i in range(n + 1):
        fill[i] = out_start[i]
    for k in range(m):
        e = sorted_e[k]
        u = s.src[e]
        out_e[fill[u]] = e
        fill[u] += 1

    # testing
    cdef int r, ei, pos, e_par, cnt
    cdef bint descend
    for r in range(n_roots):
        if not result:
            break
        sp = 0
        stack[sp] = roots[r]
        sp += 1
        while sp > 0 and result:
            sp -= 1
            v = stack[sp]
            e_par = s.parent_edge[v]
            descend = False
            pos = idx[v]
            cnt = out_start[v + 1] - out_start[v]
            while pos < cnt:
                ei = out_e[out_start[v] + pos]
                w = s.dst[ei]
                if not seen[ei]:
                    s.stack_bottom[ei] = _top_id(&s)
                    if ei == s.parent_edge[w]:
                        seen[ei] = 1
                        idx[v] = pos
                        stack[sp] = v
                        stack[sp + 1] = w
                        sp += 2
                        descend = True
                        break
                    s.lowpt_edge[ei] = ei
                    s.next_id += 1
                    _push(&s, -1, -1, ei, ei, s.next_id)
                if s.lowpt[ei] < s.height[v]:
                    if pos == 0:
                        s.lowpt_edge[e_par] = s.lowpt_edge[ei]
                    elif not _add_constraints(&s, ei, e_par):
                        result = False
                        break
                pos += 1
            if descend or not result:
                continue
            idx[v] = pos
            if e_par != -1:
                _remove_back_edges(&s, e_par)

    free(deg); free(adj_to); free(adj_e); free(fill); free(ptr); free(lowpt2)
    free(nesting); free(order); free(roots); free(stack); free(bucket)
    free(sorted_e); free(out_start); free(out_e); free(idx); free(seen)
    free(s.height); free(s.parent_edge); free(s.src); free(s.dst); free(s.lowpt)
    free(s.lowpt_edge); free(s.ref); free(s.stack_bottom)
    free(s.ll); free(s.lh); free(s.rl); free(s.rh); free(s.pid)
    return result


cdef inline void _finish_edge(LR *s, int *lowpt2, int *nesting, int e, int v) noexcept nogil:
    cdef int pe
    nesting[e] = 2 * s.lowpt[e]
    if lowpt2[e] < s.height[v]:
        nesting[e] += 1
    pe = s.parent_edge[v]
    if pe == -1:
        return
    if s.lowpt[e] < s.lowpt[pe]:
        lowpt2[pe] = s.lowpt[pe] if s.lowpt[pe] < lowpt2[e] else lowpt2[e]
        s.lowpt[pe] = s.lowpt[e]
    elif s.lowpt[e] > s.lowpt[pe]:
        if s.lowpt[e] < lowpt2[pe]:
            lowpt2[pe] = s.lowpt[e]
    else:
        if lowpt2[e] < lowpt2[pe]:
            lowpt2[pe] = lowpt2[e]


def lr_is_planar(int n, us, vs):
    """Return True iff the simple undirected graph ``(n, zip(us, vs))`` is planar."""
    cdef const int[::1] u = np.ascontiguousarray(us, dtype=np.intc)
    cdef const int[::1] v = np.ascontiguousarray(vs, dtype=np.intc)
    cdef int m = u.shape[0]
    cdef bint res
    if m == 0:
        return True
    with nogil:
        res = _lr_planar(n, m, &u[0], &v[0])
    return bool(res)


cdef inline int _find(int *parent, int x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def pmfg_greedy(int n, us, vs, int target):
    """Scan the presorted edges and keep each one whose addition leaves the
    graph planar, stopping at ``target`` edges. Returns (kept positions,
    number of planarity tests)."""
    cdef const int[::1] u = np.ascontiguousarray(us, dtype=np.intc)
    cdef const int[::1] v = np.ascontiguousarray(vs, dtype=np.intc)
    cdef Py_ssize_t total = u.shape[0]
    keep_arr = np.empty(max(target, 1), dtype=np.intp)
    cdef cnp.intp_t[::1] keep = keep_arr
    cdef int *ku = <int *> malloc((target + 1) * sizeof(int))
    cdef int *kv = <int *> malloc((target + 1) * sizeof(int))
    cdef int *comp = <int *> malloc(n * sizeof(int))
    cdef int nk = 0, tests = 0, a, b, ra, rb, i
    cdef Py_ssize_t k
    cdef bint ok
    for i in range(n):
        comp[i] = i
    with nogil:
        for k in range(total):
            if nk >= target:
                break
            a = u[k]
            b = v[k]
            ra = _find(comp, a)
            rb = _find(comp, b)
            if ra != rb:
                comp[ra] = rb
            else:
                ku[nk] = a
                kv[nk] = b
                tests += 1
                ok = _lr_planar(n, nk + 1, ku, kv)
                if not ok:
                    continue
            ku[nk] = a
            kv[nk] = b
            keep[nk] = k
            nk += 1
    free(ku)
    free(kv)
    free(comp)
    return keep_arr[:nk].copy(), tests


def pam_swap(dist, medoids, int max_iter):
    """Best-improvement PAM from the initial ``medoids``; returns
    ``(sorted medoids, sweeps)``."""
    cdef const double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    med_arr = np.sort(np.asarray(medoids, dtype=np.intp))
    cdef cnp.intp_t[::1] med = med_arr
    cdef Py_ssize_t k = med.shape[0]
    if k == n:
        return med_arr, 0
    near_arr = np.empty(n, dtype=np.intp)
    d1_arr = np.empty(n)
    d2_arr = np.empty(n)
    per_arr = np.empty(k)
    ismed_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.intp_t[::1] near = near_arr
    cdef double[::1] d1 = d1_arr
    cdef double[::1] d2 = d2_arr
    cdef double[::1] per = per_arr
    cdef unsigned char[::1] ismed = ismed_arr
    cdef Py_ssize_t j, a, x, best_x, best_m, tmp_i
    cdef double dj, shared, best, g, total, thresh, dxj, rem
    cdef int sweeps = 0
    cdef double inf = float("inf")
    with nogil:
        while sweeps < max_iter:
            sweeps += 1
            total = 0.0
            for j in range(n):
                d1[j] = inf
                d2[j] = inf
                near[j] = 0
                for a in range(k):
                    dj = d[med[a], j]
                    if dj < d1[j]:
                        d2[j] = d1[j]
                        d1[j] = dj
                        near[j] = a
                    elif dj < d2[j]:
                        d2[j] = dj
                total += d1[j]
            for j in range(n):
                ismed[j] = 0
            for a in range(k):
                ismed[med[a]] = 1
            best = inf
            best_x = -1
            best_m = -1
            for x in range(n):
                if ismed[x]:
                    continue
                shared = 0.0
                for a in range(k):
                    per[a] = 0.0
                for j in range(n):
                    dxj = d[x, j]
                    g = dxj - d1[j]
                    if g > 0.0:
                        g = 0.0
                    shared += g
                    rem = dxj if dxj < d2[j] else d2[j]
                    per[near[j]] += rem - d1[j] - g
                for a in range(k):
                    if shared + per[a] < best:
                        best = shared + per[a]
                        best_x = x
                        best_m = a
            thresh = total if total > 1.0 else 1.0
            if not best < -1e-12 * thresh:
                break
            med[best_m] = best_x
            # keep medoids sorted (insertion)
            a = best_m
            while a > 0 and med[a - 1] > med[a]:
                tmp_i = med[a - 1]; med[a - 1] = med[a]; med[a] = tmp_i
                a -= 1
            while a < k - 1 and med[a + 1] < med[a]:
                tmp_i = med[a + 1]; med[a + 1] = med[a]; med[a] = tmp_i
                a += 1
    return med_arr, sweeps
