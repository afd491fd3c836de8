"""Directed bubble hierarchical tree (DBHT) clustering on the PMFG.

The bubble tree of the PMFG is directed edge by edge, bubbles with no
outgoing edge (converging bubbles) seed the clusters, every vertex is
assigned to one converging bubble, and a complete-linkage hierarchy is
built inside bubbles, then inside clusters, then across clusters.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .correlation import CorrelationMatrix, DistanceMatrix
from .errors import DataError, InconsistentInputs
from .filtergraph import BubbleTree, PlanarGraph, bubble_tree, pmfg
from .linkage import Dendrogram, Partition, linkage

__all__ = [
    "DirectedBubbleTree",
    "DbhtResult",
    "attachment",
    "direct_bubble_tree",
    "dbht_partition",
    "bubble_assignment",
    "dbht_hierarchy",
    "dbht",
]

CONVERGING, DIVERGING, PASSAGE = "converging", "diverging", "passage"


def _values(x):
    return x.values if isinstance(x, (CorrelationMatrix, DistanceMatrix)) else np.asarray(x, dtype=float)


@dataclass(frozen=True)
class DirectedBubbleTree:
    """Bubble tree with each edge oriented ``(from bubble, to bubble)``.

    ``directions[k]`` orients ``tree.tree_edges[k]``.
    """

    tree: BubbleTree
    directions: tuple
    flags: tuple

    @property
    def converging(self) -> tuple:
        return tuple(b for b, f in enumerate(self.flags) if f == CONVERGING)

    def out_neighbors(self, b) -> list:
        return [dst for src, dst in self.directions if src == b]

    def reachable_converging(self, b) -> tuple:
        """Converging bubbles reached from ``b`` along directed edges."""
        succ = [[] for _ in self.flags]
        for src, dst in self.directions:
            succ[src].append(dst)
        seen, stack, out = {b}, [b], set()
        while stack:
            x = stack.pop()
            if self.flags[x] == CONVERGING:
                out.add(x)
            for y in succ[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return tuple(sorted(out))


@dataclass(frozen=True)
class DbhtResult:
    partition: Partition
    dendrogram: Dendrogram
    graph: PlanarGraph
    directed: DirectedBubbleTree

    @property
    def n_cl(self) -> int:
        return self.partition.n_cl

    def to_dict(self) -> dict:
        return {
            "n_cl": self.n_cl,
            "labels": self.partition.labels.tolist(),
            "merges": [[a, b, float(h), s] for a, b, h, s in self.dendrogram.merges],
            "bubbles": [
                {"vertices": list(vs), "flag": f}
                for vs, f in zip(self.directed.tree.bubbles, self.directed.flags)
            ],
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")


def attachment(rho: np.ndarray, g: PlanarGraph, v: int, targets, exclude=()) -> float:
    """Sum of ``rho[v, u]`` over PMFG neighbors ``u`` of ``v`` in ``targets``,
    skipping ``v`` itself and anything in ``exclude``."""
    skip = set(exclude)
    skip.add(v)
    return float(sum(rho[v, u] for u in g.adjacency[v] if u in targets and u not in skip))


def _branch_vertices(bt: BubbleTree, k: int) -> tuple:
    """Vertex sets of the two branches left by cutting tree edge ``k``."""
    adj = [[] for _ in range(bt.n_bubbles)]
    for j, (x, y, _) in enumerate(bt.tree_edges):
        if j != k:
            adj[x].append(y)
            adj[y].append(x)
    out = []
    for root in bt.tree_edges[k][:2]:
        seen, stack = {root}, [root]
        while stack:
            for y in adj[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        out.append(frozenset().union(*(bt.bubbles[b] for b in seen)))
    return tuple(out)


def direct_bubble_tree(bt: BubbleTree, corr, g: PlanarGraph) -> DirectedBubbleTree:
    """Orient each tree edge toward the side more strongly attached to the
    separating triangle between its two bubbles.

    Cutting the edge splits the bubble tree into two branches. A branch's
    attachment to triangle ``t`` is the sum of ``rho`` over PMFG edges
    joining a vertex of ``t`` to a branch vertex outside ``t``. Equal
    attachments point the edge toward the bubble whose smallest
    non-triangle vertex is smaller.
    """
    rho = _values(corr)
    sets = [frozenset(b) for b in bt.bubbles]
    directions = []
    for k, (a, b, tri) in enumerate(bt.tree_edges):
        strength = []
        for side in _branch_vertices(bt, k):
            inner = side - set(tri)
            strength.append(sum(attachment(rho, g, v, inner) for v in tri))
        if strength[0] != strength[1]:
            toward_a = strength[0] > strength[1]
        else:
            toward_a = min(sets[a] - set(tri)) < min(sets[b] - set(tri))
        directions.append((b, a) if toward_a else (a, b))
    n_in = np.zeros(bt.n_bubbles, dtype=int)
    n_out = np.zeros(bt.n_bubbles, dtype=int)
    for src, dst in directions:
        n_out[src] += 1
        n_in[dst] += 1
    flags = tuple(
        CONVERGING if n_out[k] == 0 else DIVERGING if n_in[k] == 0 else PASSAGE
        for k in range(bt.n_bubbles)
    )
    return DirectedBubbleTree(bt, tuple(directions), flags)


def _best(v, candidates, rho, dist, g, sets):
    """Candidate bubble with the largest attachment of ``v``; ties by the
    smaller mean distance from ``v``, then by bubble index."""
    def key(c):
        members = sets[c] - {v}
        mean_d = float(np.mean([dist[v, u] for u in members])) if members else np.inf
        return (-attachment(rho, g, v, sets[c]), mean_d, c)

    return min(candidates, key=key)


def dbht_partition(dbt: DirectedBubbleTree, corr, g: PlanarGraph, dist=None) -> Partition:
    """One cluster per converging bubble.

    A vertex lying in converging bubbles picks among them; any other vertex
    picks among the converging bubbles reachable from its own bubbles along
    directed edges. The pick maximises attachment (see :func:`_best`). A
    converging bubble left empty takes its most attached vertex from a
    cluster that can spare one.
    """
    rho = _values(corr)
    d = np.sqrt(np.clip(2.0 * (1.0 - rho), 0.0, None)) if dist is None else _values(dist)
    bt = dbt.tree
    conv = dbt.converging
    sets = [frozenset(b) for b in bt.bubbles]
    if len(conv) == 1:
        return Partition(np.zeros(g.n, dtype=np.intp))
    reach = [dbt.reachable_converging(b) for b in range(bt.n_bubbles)]
    conv_set = set(conv)
    choice = np.empty(g.n, dtype=np.intp)
    for v in range(g.n):
        own = [b for b in bt.membership[v] if b in conv_set]
        if not own:
            own = sorted({c for b in bt.membership[v] for c in reach[b]})
        choice[v] = _best(v, own, rho, d, g, sets)
    # repair: every converging bubble keeps at least one vertex
    for c in conv:
        if np.any(choice == c):
            continue
        counts = {k: int(np.sum(choice == k)) for k in conv}
        donors = [v for v in sorted(sets[c]) if counts[int(choice[v])] > 1]
        if not donors:
            donors = [v for v in range(g.n) if counts[int(choice[v])] > 1]
        v = max(donors, key=lambda u: (attachment(rho, g, u, sets[c]), -u))
        choice[v] = c
    rank = {c: k for k, c in enumerate(conv)}
    return Partition(np.array([rank[int(c)] for c in choice]))


def bubble_assignment(partition: Partition, dbt: DirectedBubbleTree, corr, g: PlanarGraph) -> np.ndarray:
    """Home bubble per vertex: among the bubbles holding the vertex, the one
    with the largest attachment (ties by bubble index)."""
    rho = _values(corr)
    sets = [frozenset(b) for b in dbt.tree.bubbles]
    return np.array([
        min(dbt.tree.membership[v], key=lambda b: (-attachment(rho, g, v, sets[b]), b))
        for v in range(g.n)
    ], dtype=np.intp)


def dbht_hierarchy(partition: Partition, dist, home_bubble=None) -> Dendrogram:
    """Complete-linkage hierarchy that first merges within home bubbles
    (restricted to one cluster), then within clusters, then across clusters.

    Cutting the result at ``partition.n_cl`` returns ``partition``.
    """
    d = _values(dist)
    labels = partition.labels
    if home_bubble is None:
        return linkage(d, "complete", groups=labels)
    fine = Partition(labels * (int(np.max(home_bubble)) + 1) + np.asarray(home_bubble)).labels
    return linkage(d, "complete", groups=[fine, labels])


def check_consistent(dist, corr, tol: float = 1e-9) -> None:
    d, r = _values(dist), _values(corr)
    if d.shape != r.shape or d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InconsistentInputs(f"shape mismatch {d.shape} vs {r.shape}")
    expect = np.sqrt(np.clip(2.0 * (1.0 - r), 0.0, None))
    err = float(np.max(np.abs(d - expect)))
    if not err <= tol:
        raise InconsistentInputs(f"distance and correlation disagree by {err:.3g}")


def dbht(dist, corr) -> DbhtResult:
    """Full DBHT: PMFG, bubble tree, orientation, partition, hierarchy.

    Raises
    ------
    InconsistentInputs
        If ``dist`` is not ``sqrt(2 (1 - corr))``.
    """
    check_consistent(dist, corr)
    d = _values(dist)
    if d.shape[0] < 3:
        raise DataError("DBHT needs N >= 3")
    g = pmfg(d)
    bt = bubble_tree(g)
    dbt = direct_bubble_tree(bt, corr, g)
    part = dbht_partition(dbt, corr, g, d)
    home = bubble_assignment(part, dbt, corr, g)
    dendro = dbht_hierarchy(part, d, home)
    return DbhtResult(part, dendro, g, dbt)
