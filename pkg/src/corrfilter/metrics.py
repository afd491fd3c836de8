"""Partition statistics and partition-vs-taxonomy agreement: disparity,
contingency tables, adjusted Rand index and hypergeometric overexpression."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import DegenerateDenominator, DomainError, UndefinedForSingleCluster, UniverseMismatch
from .linkage import Partition

__all__ = [
    "ContingencyTable",
    "OverexpressionRow",
    "OverexpressionReport",
    "disparity",
    "contingency",
    "adjusted_rand",
    "log_binom",
    "hypergeom_pmf",
    "hypergeom_sf",
    "bonferroni_level",
    "overexpression_scan",
]

# exact big-integer binomials are cheap up to here; lgamma beyond
_EXACT_LIMIT = 2000


def _labels(p) -> np.ndarray:
    return p.labels if isinstance(p, Partition) else Partition(p).labels


def disparity(p) -> float:
    """Coefficient of variation of cluster sizes, using the sample (``ddof=1``)
    standard deviation.

    Raises
    ------
    UndefinedForSingleCluster
        If the partition has fewer than two clusters.
    """
    sizes = np.bincount(_labels(p)).astype(float)
    if len(sizes) < 2:
        raise UndefinedForSingleCluster("disparity needs at least two clusters")
    return float(sizes.std(ddof=1) / sizes.mean())


@dataclass(frozen=True)
class ContingencyTable:
    """``m[i, j]`` = number of items in cluster ``i`` of the first partition
    and cluster ``j`` of the second."""

    m: np.ndarray

    @property
    def n(self) -> int:
        return int(self.m.sum())

    @property
    def rows(self) -> np.ndarray:
        return self.m.sum(axis=1)

    @property
    def cols(self) -> np.ndarray:
        return self.m.sum(axis=0)


def contingency(p, q) -> ContingencyTable:
    a, b = _labels(p), _labels(q)
    if len(a) != len(b):
        raise UniverseMismatch(f"partitions cover {len(a)} and {len(b)} items")
    m = np.zeros((a.max() + 1, b.max() + 1), dtype=np.int64)
    np.add.at(m, (a, b), 1)
    return ContingencyTable(m)


def _pairs(x) -> int:
    return sum(int(v) * (int(v) - 1) // 2 for v in np.ravel(x))


def adjusted_rand(p, q) -> float:
    """Adjusted Rand index between two partitions of the same items.

    With ``t1``, ``t2`` the same-cluster pair counts of each partition,
    ``idx`` the pairs together in both and ``M = N (N - 1) / 2``,
    ``ARI = (idx - t1 t2 / M) / ((t1 + t2) / 2 - t1 t2 / M)``. All counts are
    integers and the ratio is evaluated exactly before a single rounding.

    Raises
    ------
    UniverseMismatch
        Different item counts.
    DegenerateDenominator
        Zero denominator on non-identical partitions.
    """
    tab = contingency(p, q)
    n = tab.n
    if n < 2:
        raise DomainError("adjusted_rand needs N >= 2")
    big_m = n * (n - 1) // 2
    t1, t2, idx = _pairs(tab.rows), _pairs(tab.cols), _pairs(tab.m)
    num = 2 * (idx * big_m - t1 * t2)
    den = (t1 + t2) * big_m - 2 * t1 * t2
    if den == 0:
        if np.array_equal(_labels(p), _labels(q)):
            return 1.0
        raise DegenerateDenominator("adjusted_rand denominator is zero")
    return num / den  # int / int rounds once, correctly


@lru_cache(maxsize=1 << 16)
def log_binom(n: int, k: int) -> float:
    if n <= _EXACT_LIMIT:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _check(N, K, n, k=None):
    if min(N, K, n) < 0 or K > N or n > N:
        raise DomainError(f"invalid hypergeometric parameters N={N}, K={K}, n={n}")
    if k is not None and not (0 <= k <= min(K, n)):
        raise DomainError(f"k={k} outside [0, min(K, n)]")


def hypergeom_pmf(N: int, K: int, n: int, k: int) -> float:
    """``P(X = k)`` for ``k`` successes in ``n`` draws without replacement
    from ``N`` items of which ``K`` are successes. Evaluated in log space.

    ``k`` values the support cannot reach (``n - k > N - K``) give 0.
    """
    _check(N, K, n, k)
    if n - k > N - K:
        return 0.0
    return math.exp(log_binom(K, k) + log_binom(N - K, n - k) - log_binom(N, n))


def hypergeom_sf(N: int, K: int, n: int, k: int) -> float:
    """Upper tail ``P(X >= k)``."""
    _check(N, K, n)
    support_lo = max(0, n - (N - K))
    lo = max(k, support_lo)
    hi = min(K, n)
    if lo > hi:
        return 0.0
    if lo == support_lo:
        return 1.0
    # successive terms via pmf(j + 1) / pmf(j)
    term = hypergeom_pmf(N, K, n, lo)
    terms = [term]
    for j in range(lo, hi):
        term *= (K - j) * (n - j) / ((j + 1) * (N - K - n + j + 1))
        terms.append(term)
        if term < terms[0] * 1e-18:
            break
    return min(1.0, math.fsum(terms))


def bonferroni_level(alpha: float, n_cl: int, n_sectors: int, strict: bool = False) -> float:
    """Per-test level: ``alpha / (0.5 n_cl n_sectors)``, or
    ``alpha / (n_cl n_sectors)`` with ``strict``."""
    return alpha / ((1.0 if strict else 0.5) * n_cl * n_sectors)


@dataclass(frozen=True)
class OverexpressionRow:
    cluster: int
    sector: str
    k: int
    cluster_size: int
    sector_size: int
    p: float
    rejected: bool


@dataclass(frozen=True)
class OverexpressionReport:
    rows: tuple
    alpha: float
    level: float  # per-test threshold after correction
    divisor: float
    tail: str
    n_cl: int
    n_sectors: int
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def n_rejected(self) -> int:
        return sum(r.rejected for r in self.rows)

    @property
    def normalized(self) -> float:
        """Rejections per (cluster, sector) pair, scaled by 2."""
        return 2.0 * self.n_rejected / (self.n_cl * self.n_sectors)

    @property
    def rejection_fraction(self) -> float:
        return self.n_rejected / len(self.rows) if self.rows else 0.0

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "level": self.level,
            "divisor": self.divisor,
            "tail": self.tail,
            "n_cl": self.n_cl,
            "n_sectors": self.n_sectors,
            "n_rejected": self.n_rejected,
            "normalized": self.normalized,
            "rows": [
                {"cluster": r.cluster, "sector": r.sector, "k": r.k, "cluster_size": r.cluster_size,
                 "sector_size": r.sector_size, "p": r.p, "rejected": r.rejected}
                for r in self.rows
            ],
        }

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cluster", "sector", "k", "p", "rejected"])
            for r in self.rows:
                w.writerow([r.cluster, r.sector, r.k, repr(r.p), int(r.rejected)])

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")


def overexpression_scan(p, sectors, alpha: float = 0.01, sector_names=None,
                        tail: str = "upper", strict: bool = False) -> OverexpressionReport:
    """Hypergeometric test of every (cluster, sector) pair.

    Parameters
    ----------
    p : Partition
    sectors : array of int
        Sector id per item (e.g. ``Taxonomy.labels``).
    alpha : float
        Family significance level.
    sector_names : sequence of str, optional
    tail : {"upper", "point"}
        ``upper`` tests ``P(X >= k)``; ``point`` uses ``P(X = k)``.
    strict : bool
        Divide ``alpha`` by the full number of tests instead of half of it.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if tail not in ("upper", "point"):
        raise ValueError(f"unknown tail {tail!r}")
    lab = _labels(p)
    sec = np.asarray(sectors, dtype=np.intp)
    if len(sec) != len(lab):
        raise UniverseMismatch("taxonomy and partition cover different items")
    n_sec = int(sec.max()) + 1
    names = list(sector_names) if sector_names is not None else [str(s) for s in range(n_sec)]
    tab = contingency(lab, sec).m
    if tab.shape[1] < n_sec:
        tab = np.pad(tab, ((0, 0), (0, n_sec - tab.shape[1])))
    n = len(lab)
    n_cl = tab.shape[0]
    level = bonferroni_level(alpha, n_cl, n_sec, strict)
    csize, ssize = tab.sum(axis=1), tab.sum(axis=0)
    rows = []
    for i in range(n_cl):
        for j in range(n_sec):
            k = int(tab[i, j])
            args = (n, int(ssize[j]), int(csize[i]), k)
            pv = hypergeom_sf(*args) if tail == "upper" else hypergeom_pmf(*args)
            rows.append(OverexpressionRow(i, names[j], k, int(csize[i]), int(ssize[j]), pv, pv < level))
    return OverexpressionReport(tuple(rows), alpha, level, alpha / level, tail, n_cl, n_sec)
