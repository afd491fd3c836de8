"""Pure-Python kernels. ``_core.pyx`` mirrors these line for line.

Kernels
-------
lr_is_planar
    Left-right planarity test (test only, no embedding).
pmfg_greedy
    Greedy planar filtering over a presorted edge sequence.
pam_swap
    Best-improvement swap search for k-medoids.
"""
import numpy as np

BACKEND = "python"


def lr_is_planar(n, us, vs):
    """Return True iff the simple undirected graph ``(n, zip(us, vs))`` is planar."""
    m = len(us)
    if n > 2 and m > 3 * n - 6:
        return False
    if m < 9:
        return True
    adj = [[] for _ in range(n)]
    for e in range(m):
        u = int(us[e])
        v = int(vs[e])
        adj[u].append((v, e))
        adj[v].append((u, e))

    height = [-1] * n
    parent_edge = [-1] * n
    src = [-1] * m
    dst = [-1] * m
    lowpt = [0] * m
    lowpt2 = [0] * m
    nesting = [0] * m
    out = [[] for _ in range(n)]
    roots = []
    ptr = [0] * n

    # orientation
    for root in range(n):
        if height[root] != -1:
            continue
        height[root] = 0
        roots.append(root)
        stack = [root]
        while stack:
            v = stack[-1]
            av = adj[v]
            if ptr[v] < len(av):
                w, e = av[ptr[v]]
                if src[e] != -1:
                    ptr[v] += 1
                    continue
                src[e] = v
                dst[e] = w
                out[v].append(e)
                lowpt[e] = height[v]
                lowpt2[e] = height[v]
                if height[w] == -1:
                    parent_edge[w] = e
                    height[w] = height[v] + 1
                    stack.append(w)
                    continue
                lowpt[e] = height[w]
                _finish_edge(e, v, height, parent_edge, lowpt, lowpt2, nesting)
                ptr[v] += 1
            else:
                stack.pop()
                pe = parent_edge[v]
                if pe != -1:
                    u = src[pe]
                    _finish_edge(pe, u, height, parent_edge, lowpt, lowpt2, nesting)
                    ptr[u] += 1

    for v in range(n):
        out[v].sort(key=nesting.__getitem__)

    # testing
    state = _LRState(m, height, parent_edge, src, dst, lowpt)
    for root in roots:
        if not state.run(root, out):
            return False
    return True


def _finish_edge(e, v, height, parent_edge, lowpt, lowpt2, nesting):
    nesting[e] = 2 * lowpt[e] + (1 if lowpt2[e] < height[v] else 0)
    pe = parent_edge[v]
    if pe == -1:
        return
    if lowpt[e] < lowpt[pe]:
        lowpt2[pe] = min(lowpt[pe], lowpt2[e])
        lowpt[pe] = lowpt[e]
    elif lowpt[e] > lowpt[pe]:
        lowpt2[pe] = min(lowpt2[pe], lowpt[e])
    else:
        lowpt2[pe] = min(lowpt2[pe], lowpt2[e])


class _LRState:
    # conflict pair = [left.low, left.high, right.low, right.high, pair id]
    __slots__ = ("height", "parent_edge", "src", "dst", "lowpt", "lowpt_edge", "ref",
                 "stack_bottom", "S", "next_id")

    def __init__(self, m, height, parent_edge, src, dst, lowpt):
        self.height = height
        self.parent_edge = parent_edge
        self.src = src
        self.dst = dst
        self.lowpt = lowpt
        self.lowpt_edge = [-1] * m
        self.ref = [-1] * m
        self.stack_bottom = [-1] * m
        self.S = []
        self.next_id = 0

    def _new_pair(self, ll, lh, rl, rh):
        self.next_id += 1
        return [ll, lh, rl, rh, self.next_id]

    def _top_id(self):
        return self.S[-1][4] if self.S else -1

    def run(self, root, out):
        height = self.height
        parent_edge = self.parent_edge
        dst = self.dst
        lowpt = self.lowpt
        idx = {}
        seen = set()
        dfs = [root]
        while dfs:
            v = dfs.pop()
            e = parent_edge[v]
            descend = False
            ov = out[v]
            i = idx.get(v, 0)
            while i < len(ov):
                ei = ov[i]
                w = dst[ei]
                if ei not in seen:
                    self.stack_bottom[ei] = self._top_id()
                    if ei == parent_edge[w]:
                        seen.add(ei)
                        idx[v] = i
                        dfs.append(v)
                        dfs.append(w)
                        descend = True
                        break
                    self.lowpt_edge[ei] = ei
                    self.S.append(self._new_pair(-1, -1, ei, ei))
                if lowpt[ei] < height[v]:
                    if i == 0:
                        self.lowpt_edge[e] = self.lowpt_edge[ei]
                    elif not self._add_constraints(ei, e):
                        return False
                i += 1
            if descend:
                continue
            idx[v] = i
            if e != -1:
                self._remove_back_edges(e)
        return True

    def _conflicting(self, low, high, b):
        return not (low == -1 and high == -1) and self.lowpt[high] > self.lowpt[b]

    def _add_constraints(self, ei, e):
        lowpt = self.lowpt
        ref = self.ref
        S = self.S
        P = self._new_pair(-1, -1, -1, -1)
        while True:
            Q = S.pop()
            if not (Q[0] == -1 and Q[1] == -1):
                Q[0], Q[1], Q[2], Q[3] = Q[2], Q[3], Q[0], Q[1]
            if not (Q[0] == -1 and Q[1] == -1):
                return False
            if lowpt[Q[2]] > lowpt[e]:
                if P[2] == -1 and P[3] == -1:
                    P[3] = Q[3]
                else:
                    ref[P[2]] = Q[3]
                P[2] = Q[2]
            else:
                ref[Q[2]] = self.lowpt_edge[e]
            if self._top_id() == self.stack_bottom[ei]:
                break
        while S and (self._conflicting(S[-1][0], S[-1][1], ei)
                     or self._conflicting(S[-1][2], S[-1][3], ei)):
            Q = S.pop()
            if self._conflicting(Q[2], Q[3], ei):
                Q[0], Q[1], Q[2], Q[3] = Q[2], Q[3], Q[0], Q[1]
            if self._conflicting(Q[2], Q[3], ei):
                return False
            if P[2] != -1:
                ref[P[2]] = Q[3]
            if Q[2] != -1:
                P[2] = Q[2]
            if P[0] == -1 and P[1] == -1:
                P[1] = Q[1]
            else:
                ref[P[0]] = Q[1]
            P[0] = Q[0]
        if not (P[0] == -1 and P[1] == -1 and P[2] == -1 and P[3] == -1):
            S.append(P)
        return True

    def _lowest(self, P):
        lowpt = self.lowpt
        if P[0] == -1 and P[1] == -1:
            return lowpt[P[2]]
        if P[2] == -1 and P[3] == -1:
            return lowpt[P[0]]
        return min(lowpt[P[0]], lowpt[P[2]])

    def _remove_back_edges(self, e):
        S = self.S
        ref = self.ref
        dst = self.dst
        lowpt = self.lowpt
        u = self.src[e]
        hu = self.height[u]
        while S and self._lowest(S[-1]) == hu:
            S.pop()
        if S:
            P = S.pop()
            while P[1] != -1 and dst[P[1]] == u:
                P[1] = ref[P[1]]
            if P[1] == -1 and P[0] != -1:
                ref[P[0]] = P[2]
                P[0] = -1
            while P[3] != -1 and dst[P[3]] == u:
                P[3] = ref[P[3]]
            if P[3] == -1 and P[2] != -1:
                ref[P[2]] = P[0]
                P[2] = -1
            S.append(P)
        if lowpt[e] < hu:
            hl = S[-1][1]
            hr = S[-1][3]
            if hl != -1 and (hr == -1 or lowpt[hl] > lowpt[hr]):
                ref[e] = hl
            else:
                ref[e] = hr


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def pmfg_greedy(n, us, vs, target):
    """Scan the presorted edges ``(us[k], vs[k])`` and keep each one whose
    addition leaves the graph planar, stopping at ``target`` edges.

    Returns the positions (into ``us``/``vs``) of the kept edges and the
    number of planarity tests run.
    """
    keep = []
    ku = []
    kv = []
    comp = list(range(n))
    tests = 0
    for k in range(len(us)):
        if len(keep) >= target:
            break
        u = int(us[k])
        v = int(vs[k])
        ru = _find(comp, u)
        rv = _find(comp, v)
        if ru != rv:
            # joining two components never breaks planarity
            comp[ru] = rv
        else:
            ku.append(u)
            kv.append(v)
            tests += 1
            ok = lr_is_planar(n, ku, kv)
            ku.pop()
            kv.pop()
            if not ok:
                continue
        keep.append(k)
        ku.append(u)
        kv.append(v)
    return np.asarray(keep, dtype=np.intp), tests


def pam_swap(dist, medoids, max_iter):
    """Best-improvement PAM from the initial ``medoids``.

    Every (medoid, non-medoid) exchange is scored per sweep and the one
    lowering total cost most is applied; stops when none improves or after
    ``max_iter`` sweeps. Returns ``(sorted medoids, sweeps)``.
    """
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]
    med = np.sort(np.asarray(medoids, dtype=np.intp))
    k = len(med)
    if k == n:
        return med, 0
    sweeps = 0
    while sweeps < max_iter:
        sweeps += 1
        dm = d[med]  # (k, n)
        near = np.argmin(dm, axis=0)
        d1 = dm[near, np.arange(n)]
        if k > 1:
            part = np.partition(dm, 1, axis=0)
            d2 = part[1]
        else:
            d2 = np.full(n, np.inf)
        is_med = np.zeros(n, dtype=bool)
        is_med[med] = True
        cand = np.flatnonzero(~is_med)
        dx = d[cand]  # (c, n)
        gain = np.minimum(dx - d1, 0.0)
        shared = gain.sum(axis=1)
        removal = np.minimum(dx, d2) - d1 - gain
        order = np.argsort(near, kind="stable")
        counts = np.bincount(near, minlength=k)
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        per = np.zeros((len(cand), k))
        cols = removal[:, order]
        nz = counts > 0
        per[:, nz] = np.add.reduceat(cols, starts[nz], axis=1)
        delta = shared[:, None] + per  # (c, k)
        flat = int(np.argmin(delta))
        best = delta.flat[flat]
        if not best < -1e-12 * max(1.0, float(d1.sum())):
            break
        ci, mi = divmod(flat, k)
        med[mi] = cand[ci]
        med.sort()
    return med, sweeps
