"""Agglomerative clustering (single, average, complete linkage), dendrogram
cutting and the Partition type shared by every clustering method."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .correlation import DistanceMatrix
from .errors import DataError, InvalidClusterCount

__all__ = ["Partition", "Dendrogram", "linkage", "cut", "write_dendrogram", "RULES"]

RULES = ("single", "average", "complete")


@dataclass(frozen=True)
class Partition:
    """Cluster label per item; labels are ``0..n_cl-1`` numbered in order of
    each cluster's smallest member."""

    labels: np.ndarray

    def __post_init__(self):
        lab = canonical_labels(self.labels)
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_cl(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_cl)

    def clusters(self) -> list:
        return [np.flatnonzero(self.labels == c).tolist() for c in range(self.n_cl)]

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())


def canonical_labels(labels) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise DataError("labels must be one-dimensional")
    _, first, inv = np.unique(lab, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.intp)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inv.reshape(-1)].astype(np.intp)


@dataclass(frozen=True)
class Dendrogram:
    """``merges[k] = (left id, right id, height, size)``; leaves are
    ``0..n-1`` and merge ``k`` creates node ``n + k``."""

    n: int
    merges: tuple

    def as_array(self) -> np.ndarray:
        """Linkage matrix in the usual ``(n-1, 4)`` layout."""
        return np.array([[a, b, h, s] for a, b, h, s in self.merges], dtype=float).reshape(-1, 4)

    @property
    def heights(self) -> np.ndarray:
        return np.array([m[2] for m in self.merges])


def _values(dist):
    return dist.values if isinstance(dist, DistanceMatrix) else np.asarray(dist, dtype=float)


def linkage(dist, rule: str = "single", groups=None) -> Dendrogram:
    """Agglomerate singletons by repeatedly merging the closest pair.

    Inter-cluster distance is the minimum (``single``), unweighted mean
    (``average``) or maximum (``complete``) over cross pairs. Exact ties go
    to the lexicographically smallest ``(left id, right id)``.

    ``groups`` (optional labels, or a list of nested labelings ordered
    finest first) restricts merges to pairs inside the same group until
    each group is a single cluster, level by level; the remaining merges
    are unconstrained. Each level must refine the next.
    """
    if rule not in RULES:
        raise ValueError(f"unknown linkage rule {rule!r}")
    d = np.array(_values(dist), dtype=float)
    n = d.shape[0]
    if n < 2:
        raise DataError("linkage needs N >= 2")
    d = np.triu(d, 1)
    d = d + d.T  # the upper triangle is authoritative
    np.fill_diagonal(d, np.inf)
    node = np.arange(n)  # dendrogram id held by each slot
    size = np.ones(n)
    levels = _group_levels(groups, n)
    merges = []
    for step in range(n - 1):
        work = d
        for stop, same in levels:
            if step < stop:
                work = np.where(same, d, np.inf)
                break
        best = work.min()
        ii, jj = np.nonzero(np.triu(work == best, k=1))
        ids = np.stack([np.minimum(node[ii], node[jj]), np.maximum(node[ii], node[jj])], axis=1)
        pick = np.lexsort((ids[:, 1], ids[:, 0]))[0]
        a, b = int(ii[pick]), int(jj[pick])
        left, right = int(ids[pick, 0]), int(ids[pick, 1])
        na, nb = size[a], size[b]
        merges.append((left, right, float(d[a, b]), int(na + nb)))
        if rule == "single":
            row = np.minimum(d[a], d[b])
        elif rule == "complete":
            row = np.maximum(d[a], d[b])
        else:
            row = (na * d[a] + nb * d[b]) / (na + nb)
        d[a, :] = row
        d[:, a] = row
        d[a, a] = np.inf
        d[b, :] = np.inf
        d[:, b] = np.inf
        size[a] = na + nb
        node[a] = n + step
    return Dendrogram(n, tuple(merges))


def _group_levels(groups, n):
    """``[(steps covered, same-group mask)]`` for each constraint level."""
    if groups is None:
        return []
    arr = np.asarray(groups)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != n:
        raise DataError("groups must label every item")
    levels = []
    prev = None
    for g in arr:
        if prev is not None and len(np.unique(np.stack([prev, g]), axis=1)[0]) != len(np.unique(prev)):
            raise DataError("each group level must refine the next")
        levels.append((n - len(np.unique(g)), g[:, None] == g[None, :]))
        prev = g
    return levels


def cut(dendro: Dendrogram, n_cl: int) -> Partition:
    """Undo the last ``n_cl - 1`` merges and label the resulting groups."""
    n = dendro.n
    if not 1 <= n_cl <= n:
        raise InvalidClusterCount(f"n_cl must be in [1, {n}], got {n_cl}")
    parent = list(range(2 * n - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k, (a, b, _, _) in enumerate(dendro.merges[: n - n_cl]):
        parent[find(int(a))] = n + k
        parent[find(int(b))] = n + k
    roots = [find(i) for i in range(n)]
    return Partition(np.array(roots))


def write_dendrogram(path, dendro: Dendrogram) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["left", "right", "height", "size"])
        for a, b, h, s in dendro.merges:
            w.writerow([a, b, repr(float(h)), s])
