"""Pearson and exponentially weighted Pearson correlation, and the
correlation-to-distance map ``D = sqrt(2 (1 - rho))``."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, OutOfRangeCorrelation, ZeroVariance
from .ingest import ReturnsPanel

__all__ = [
    "WeightScheme",
    "CorrelationMatrix",
    "DistanceMatrix",
    "time_weights",
    "pearson",
    "to_distance",
    "mean_offdiagonal",
    "write_matrix",
]


@dataclass(frozen=True)
class WeightScheme:
    """``kind`` is ``"uniform"`` or ``"exponential"``; ``theta`` is the
    decay time in trading days (exponential only)."""

    kind: str = "uniform"
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "exponential"):
            raise ValueError(f"unknown weight scheme {self.kind!r}")
        if self.kind == "exponential" and not (self.theta is not None and self.theta > 0):
            raise ValueError("exponential weights need theta > 0")

    @classmethod
    def uniform(cls) -> "WeightScheme":
        return cls("uniform")

    @classmethod
    def exponential(cls, theta: float) -> "WeightScheme":
        return cls("exponential", float(theta))

    @classmethod
    def for_window(cls, length: int) -> "WeightScheme":
        """Exponential smoothing with ``theta = length / 3``."""
        return cls("exponential", length / 3.0)


def _square(values, name):
    v = np.array(values, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise DataError(f"{name} must be a square matrix")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class CorrelationMatrix:
    values: np.ndarray
    tickers: tuple = ()

    def __post_init__(self):
        v = _square(self.values, "correlation matrix")
        object.__setattr__(self, "values", v)
        if not self.tickers:
            object.__setattr__(self, "tickers", tuple(str(i) for i in range(len(v))))
        else:
            object.__setattr__(self, "tickers", tuple(self.tickers))
        if len(self.tickers) != len(v):
            raise DataError("ticker count does not match matrix size")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray
    tickers: tuple = ()

    def __post_init__(self):
        v = _square(self.values, "distance matrix")
        object.__setattr__(self, "values", v)
        if not self.tickers:
            object.__setattr__(self, "tickers", tuple(str(i) for i in range(len(v))))
        else:
            object.__setattr__(self, "tickers", tuple(self.tickers))
        if len(self.tickers) != len(v):
            raise DataError("ticker count does not match matrix size")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def time_weights(length: int, scheme: WeightScheme) -> np.ndarray:
    """Normalized weights for a window of ``length`` observations, the last
    one being the most recent."""
    if scheme.kind == "uniform" or math.isinf(scheme.theta):
        w = np.ones(length)
    else:
        t = np.arange(length, dtype=float)
        w = np.exp((t - (length - 1)) / scheme.theta)
    return w / w.sum()


def pearson(returns, weights: WeightScheme = WeightScheme()) -> CorrelationMatrix:
    """(Weighted) Pearson correlation of the rows of ``returns``.

    ``returns`` is a :class:`ReturnsPanel` or an ``(N, T)`` array. All
    moments (means, variances, covariances) use the same weights.
    """
    if isinstance(returns, ReturnsPanel):
        x, tickers = returns.returns, returns.tickers
    else:
        x = np.asarray(returns, dtype=float)
        tickers = tuple(str(i) for i in range(x.shape[0]))
    n, t = x.shape
    if t < 3:
        raise DataError(f"need at least 3 observations, got {t}")
    w = time_weights(t, weights)
    mu = x @ w
    xc = x - mu[:, None]
    xw = xc * w
    cov = xw @ xc.T
    var = np.diag(cov).copy()
    scale = (x * x) @ w
    for i in range(n):
        if var[i] <= 1e-28 * scale[i] or var[i] <= 0.0:
            raise ZeroVariance(tickers[i])
    sd = np.sqrt(var)
    rho = cov / np.outer(sd, sd)
    rho = 0.5 * (rho + rho.T)
    np.clip(rho, -1.0, 1.0, out=rho)
    np.fill_diagonal(rho, 1.0)
    return CorrelationMatrix(rho, tickers)


def to_distance(corr: CorrelationMatrix) -> DistanceMatrix:
    rho = corr.values
    if np.any(np.abs(rho) > 1.0 + 1e-12):
        raise OutOfRangeCorrelation("correlation entries outside [-1, 1]")
    rad = 2.0 * (1.0 - rho)
    rad[(rad < 0) & (rad >= -1e-12)] = 0.0
    d = np.sqrt(rad)
    np.fill_diagonal(d, 0.0)
    d = 0.5 * (d + d.T)
    return DistanceMatrix(d, corr.tickers)


def mean_offdiagonal(corr: CorrelationMatrix) -> float:
    n = corr.n
    if n < 2:
        raise DataError("mean off-diagonal correlation needs N >= 2")
    iu = np.triu_indices(n, k=1)
    return float(corr.values[iu].mean())


def write_matrix(path, matrix) -> None:
    """Dense CSV with a ticker header row and a ticker first column."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["", *matrix.tickers])
        for tk, row in zip(matrix.tickers, matrix.values):
            w.writerow([tk, *(repr(float(x)) for x in row)])
