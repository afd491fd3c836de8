"""k-medoids clustering by Partitioning Around Medoids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .correlation import DistanceMatrix
from .errors import InvalidClusterCount
from .linkage import Partition

__all__ = ["PamConfig", "PamResult", "kmedoids", "assign", "total_cost"]

MAX_ITER = 300


@dataclass(frozen=True)
class PamConfig:
    n_cl: int
    restarts: int = 10
    rng_seed: int = 0
    max_iter: int = MAX_ITER

    def __post_init__(self):
        if self.n_cl < 1:
            raise InvalidClusterCount(f"n_cl must be >= 1, got {self.n_cl}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class PamResult:
    partition: Partition
    medoids: tuple
    cost: float
    restart: int  # index of the winning restart

    def __iter__(self):
        # unpacks as (partition, medoids, cost)
        return iter((self.partition, self.medoids, self.cost))


def assign(dist: np.ndarray, medoids) -> np.ndarray:
    """Index (into ``medoids``) of each point's nearest medoid; ties go to
    the lower medoid index."""
    med = np.sort(np.asarray(medoids, dtype=np.intp))
    return np.argmin(dist[med], axis=0)


def total_cost(dist: np.ndarray, medoids) -> float:
    med = np.sort(np.asarray(medoids, dtype=np.intp))
    return float(dist[med].min(axis=0).sum())


def kmedoids(dist, cfg: PamConfig) -> PamResult:
    """Best of ``cfg.restarts`` PAM runs, each from random initial medoids.

    A run assigns points to their nearest medoid, scores every exchange of
    a medoid with a non-medoid, applies the cheapest one, and repeats until
    no exchange lowers the total point-to-medoid distance. Restart seeds
    derive from ``cfg.rng_seed``; the winner is the lowest cost, then the
    lowest restart index.
    """
    d = np.ascontiguousarray(dist.values if isinstance(dist, DistanceMatrix) else dist, dtype=float)
    n = d.shape[0]
    if not 1 <= cfg.n_cl <= n:
        raise InvalidClusterCount(f"n_cl must be in [1, {n}], got {cfg.n_cl}")
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.restarts)
    best = None
    for r, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        init = rng.choice(n, size=cfg.n_cl, replace=False)
        med, _ = _kernels.pam_swap(d, init, cfg.max_iter)
        cost = total_cost(d, med)
        if best is None or cost < best[0]:
            best = (cost, r, np.asarray(med))
        if cfg.n_cl == n:
            break
    cost, r, med = best
    labels = med[assign(d, med)]
    return PamResult(Partition(labels), tuple(int(m) for m in np.sort(med)), cost, r)
