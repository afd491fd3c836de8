"""Filtered graphs over a distance matrix: MST, PMFG, three-cliques and the
bubble-tree decomposition of a maximal planar graph."""
from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from . import _kernels
from .correlation import DistanceMatrix
from .errors import DataError, NotMaximalPlanar

__all__ = [
    "EdgeList",
    "SpanningTree",
    "PlanarGraph",
    "BubbleTree",
    "sorted_edges",
    "mst",
    "pmfg",
    "is_planar",
    "three_cliques",
    "separating_cliques",
    "bubble_tree",
    "write_edges",
    "graph_document",
]


def _values(dist):
    return dist.values if isinstance(dist, DistanceMatrix) else np.asarray(dist, dtype=float)


@dataclass(frozen=True)
class EdgeList:
    """Edges ``(i, j, distance)`` with ``i < j``, in scan order."""

    i: np.ndarray
    j: np.ndarray
    d: np.ndarray

    def __len__(self):
        return len(self.i)

    def __iter__(self):
        for a, b, w in zip(self.i.tolist(), self.j.tolist(), self.d.tolist()):
            yield a, b, w


@dataclass(frozen=True)
class SpanningTree:
    n: int
    edges: tuple  # ((i, j, d), ...)

    def edge_set(self) -> set:
        return {(i, j) for i, j, _ in self.edges}


@dataclass(frozen=True)
class PlanarGraph:
    n: int
    edges: tuple  # ((i, j, d), ...) in insertion order
    _adj: tuple = field(default=(), repr=False, compare=False)
    _embedding: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        adj = [set() for _ in range(self.n)]
        for i, j, _ in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))

    @property
    def adjacency(self) -> tuple:
        return self._adj

    def edge_set(self) -> set:
        return {(i, j) for i, j, _ in self.edges}

    def has_edge(self, i, j) -> bool:
        return j in self._adj[i]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.edges, weight="distance")
        return g

    @property
    def embedding(self) -> dict:
        """Clockwise neighbor order per vertex (computed on first use)."""
        if not self._embedding:
            ok, emb = nx.check_planarity(self.to_networkx())
            if not ok:
                raise NotMaximalPlanar("graph is not planar")
            self._embedding.update({v: list(emb.neighbors_cw_order(v)) for v in range(self.n)})
        return self._embedding


@dataclass(frozen=True)
class BubbleTree:
    bubbles: tuple  # sorted vertex tuples
    tree_edges: tuple  # ((bubble a, bubble b, separating triangle), ...)
    membership: tuple  # per vertex: tuple of bubble ids

    @property
    def n_bubbles(self) -> int:
        return len(self.bubbles)

    def neighbors(self, b) -> list:
        out = []
        for a, c, t in self.tree_edges:
            if a == b:
                out.append((c, t))
            elif c == b:
                out.append((a, t))
        return out


def sorted_edges(dist) -> EdgeList:
    """All pairs ascending by distance; ties by ``(i, j)``."""
    d = _values(dist)
    n = d.shape[0]
    if n < 2:
        raise DataError("need at least two vertices")
    iu, ju = np.triu_indices(n, k=1)
    w = d[iu, ju]
    order = np.lexsort((ju, iu, w))
    return EdgeList(iu[order], ju[order], w[order])


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def mst(dist) -> SpanningTree:
    """Kruskal's algorithm over :func:`sorted_edges`."""
    el = sorted_edges(dist)
    n = _values(dist).shape[0]
    parent = list(range(n))
    edges = []
    for i, j, w in el:
        ri, rj = _find(parent, i), _find(parent, j)
        if ri == rj:
            continue
        parent[ri] = rj
        edges.append((i, j, w))
        if len(edges) == n - 1:
            break
    return SpanningTree(n, tuple(edges))


def pmfg(dist, verify: bool = False) -> PlanarGraph:
    """Planar maximally filtered graph.

    Edges are scanned in :func:`sorted_edges` order and kept whenever the
    graph stays planar, until ``3 (N - 2)`` edges are reached. With
    ``verify=True`` the result is re-checked by networkx's planarity test,
    which shares no code with the kernel used during construction.
    """
    d = _values(dist)
    n = d.shape[0]
    if n < 3:
        raise DataError("PMFG needs N >= 3")
    el = sorted_edges(d)
    keep, _ = _kernels.pmfg_greedy(n, el.i, el.j, 3 * (n - 2))
    edges = tuple(zip(el.i[keep].tolist(), el.j[keep].tolist(), el.d[keep].tolist()))
    g = PlanarGraph(n, edges)
    if verify and not is_planar(g, independent=True):
        raise NotMaximalPlanar("constructed PMFG failed independent planarity check")
    return g


def is_planar(g, independent: bool = True) -> bool:
    """Planarity of ``g`` (a :class:`PlanarGraph` or an ``(n, edges)`` pair).

    ``independent=True`` uses networkx; otherwise the package kernel.
    """
    if isinstance(g, PlanarGraph):
        n, edges = g.n, g.edges
    else:
        n, edges = g
    if independent:
        h = nx.Graph()
        h.add_nodes_from(range(n))
        h.add_edges_from((e[0], e[1]) for e in edges)
        return nx.check_planarity(h)[0]
    us = np.array([e[0] for e in edges], dtype=np.intc)
    vs = np.array([e[1] for e in edges], dtype=np.intc)
    return bool(_kernels.lr_is_planar(n, us, vs))


def three_cliques(g: PlanarGraph) -> list:
    """All triangles ``(i, j, k)`` with ``i < j < k``, sorted."""
    adj = g.adjacency
    out = []
    for i in range(g.n):
        hi = sorted(x for x in adj[i] if x > i)
        for a, j in enumerate(hi):
            aj = adj[j]
            for k in hi[a + 1:]:
                if k in aj:
                    out.append((i, j, k))
    out.sort()
    return out


def _components_without(adj, vertices, removed):
    """Connected components of the subgraph induced by ``vertices - removed``."""
    left = set(vertices) - set(removed)
    comps = []
    while left:
        start = min(left)
        left.discard(start)
        comp = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w in left:
                    left.discard(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def separating_cliques(g: PlanarGraph, cliques=None) -> list:
    """Triangles whose removal disconnects ``g``."""
    cliques = three_cliques(g) if cliques is None else cliques
    verts = range(g.n)
    return [t for t in cliques if len(_components_without(g.adjacency, verts, t)) > 1]


def bubble_tree(g: PlanarGraph) -> BubbleTree:
    """Split a maximal planar graph along its separating triangles.

    The pieces left when no separating triangle remains are the bubbles;
    two bubbles are joined in the tree when they were split apart by the
    same separating triangle.
    """
    n = g.n
    if n < 3 or len(g.edges) != 3 * (n - 2):
        raise NotMaximalPlanar(f"expected {3 * (n - 2)} edges, got {len(g.edges)}")
    adj = g.adjacency
    seps = separating_cliques(g)
    pieces = [frozenset(range(n))]
    links = []  # (piece a, piece b, triangle)
    for t in seps:
        ts = frozenset(t)
        host = next(p for p, vs in enumerate(pieces) if ts <= vs)
        comps = _components_without(adj, pieces[host], t)
        if len(comps) != 2:
            raise NotMaximalPlanar(f"triangle {t} splits a piece into {len(comps)} parts")
        a = frozenset(comps[0]) | ts
        b = frozenset(comps[1]) | ts
        pieces[host] = a
        pieces.append(b)
        new = len(pieces) - 1
        for k, (p, q, tri) in enumerate(links):
            if host in (p, q) and not set(tri) <= a:
                links[k] = (new if p == host else p, new if q == host else q, tri)
        links.append((host, new, t))

    order = sorted(range(len(pieces)), key=lambda p: tuple(sorted(pieces[p])))
    rank = {p: r for r, p in enumerate(order)}
    bubbles = tuple(tuple(sorted(pieces[p])) for p in order)
    tree_edges = tuple(sorted(
        (min(rank[p], rank[q]), max(rank[p], rank[q]), tuple(tri)) for p, q, tri in links
    ))
    member = [[] for _ in range(n)]
    for b, vs in enumerate(bubbles):
        for v in vs:
            member[v].append(b)
    return BubbleTree(bubbles, tree_edges, tuple(tuple(m) for m in member))


def write_edges(path, edges) -> None:
    """Edge-list CSV ``i,j,distance``; ``edges`` is any graph/tree or iterable."""
    rows = edges.edges if hasattr(edges, "edges") else edges
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "distance"])
        for i, j, d in rows:
            w.writerow([i, j, repr(float(d))])


def graph_document(g: PlanarGraph, bt: BubbleTree | None = None, tickers=None) -> dict:
    """JSON-serialisable description of a PMFG with embedding and bubbles."""
    doc = {
        "n": g.n,
        "tickers": list(tickers) if tickers is not None else None,
        "edges": [[i, j, float(d)] for i, j, d in g.edges],
        "embedding": {str(v): g.embedding[v] for v in range(g.n)},
    }
    if bt is not None:
        doc["bubbles"] = [list(b) for b in bt.bubbles]
        doc["bubble_tree"] = [[a, b, list(t)] for a, b, t in bt.tree_edges]
    return doc


def dump_graph_json(path, g: PlanarGraph, bt: BubbleTree | None = None, tickers=None) -> None:
    Path(path).write_text(json.dumps(graph_document(g, bt, tickers), indent=1) + "\n", encoding="utf-8")
