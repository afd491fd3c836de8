"""Synthetic return panels with a planted market mode and sector factors.

Each ticker follows ``r_i(t) = scale * (beta_i M(t) + gamma_i F_s(i)(t) + e_i(t))``
with independent unit-variance factors ``M`` and ``F_s`` and idiosyncratic
noise ``e_i`` of standard deviation ``idio_vol``. Tickers are dealt to
sectors round-robin.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import PricePanel, ReturnsPanel, Taxonomy

__all__ = ["SynthSpec", "generate", "to_prices", "trading_dates"]


@dataclass(frozen=True)
class SynthSpec:
    n: int = 100
    t: int = 2000
    n_sectors: int = 10
    market_loading: tuple = (1.0, 2.2)
    sector_loading: tuple = (0.15, 0.55)
    idio_vol: float = 0.5
    seed: int = 0
    noise: str = "gaussian"  # or "student"
    df: float = 4.0
    scale: float = 0.01  # daily return units

    def __post_init__(self):
        if self.n < 1 or self.t < 2 or not 1 <= self.n_sectors <= self.n:
            raise ValueError("need n >= 1, t >= 2 and 1 <= n_sectors <= n")
        for name in ("market_loading", "sector_loading"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} must be an ordered (low, high) pair")
        if not self.idio_vol > 0 or not self.scale > 0:
            raise ValueError("volatilities must be positive")
        if self.noise not in ("gaussian", "student"):
            raise ValueError(f"unknown noise {self.noise!r}")
        if self.noise == "student" and not self.df > 2:
            raise ValueError("student noise needs df > 2 for finite variance")

    @property
    def sectors(self) -> np.ndarray:
        return np.arange(self.n) % self.n_sectors


def trading_dates(t: int, start: str = "2000-01-03") -> list:
    """``t`` consecutive weekdays as ISO strings."""
    days = np.busday_offset(np.datetime64(start), np.arange(t), roll="forward")
    return [str(d) for d in days]


def _noise(rng, spec: SynthSpec) -> np.ndarray:
    if spec.noise == "gaussian":
        return rng.standard_normal(spec.t)
    return rng.standard_t(spec.df, spec.t) * np.sqrt((spec.df - 2.0) / spec.df)


def generate(spec: SynthSpec):
    """Draw a panel and its planted taxonomy.

    Returns
    -------
    ReturnsPanel, Taxonomy
        Tickers ``S000..``; sector ``k`` is named ``SEC<k>`` with a single
        industry ``SEC<k>-I``.
    """
    root = np.random.SeedSequence(spec.seed)
    factor_ss, *ticker_ss = root.spawn(spec.n + 1)
    frng = np.random.default_rng(factor_ss)
    market = frng.standard_normal(spec.t)
    sector_f = frng.standard_normal((spec.n_sectors, spec.t))
    sec = spec.sectors
    out = np.empty((spec.n, spec.t))
    for i, ss in enumerate(ticker_ss):
        rng = np.random.default_rng(ss)
        beta = rng.uniform(*spec.market_loading)
        gamma = rng.uniform(*spec.sector_loading)
        out[i] = beta * market + gamma * sector_f[sec[i]] + spec.idio_vol * _noise(rng, spec)
    width = len(str(spec.n - 1))
    tickers = [f"S{i:0{max(3, width)}d}" for i in range(spec.n)]
    sw = len(str(spec.n_sectors - 1))
    names = [f"SEC{k:0{max(2, sw)}d}" for k in range(spec.n_sectors)]
    tax = Taxonomy({tk: (names[s], names[s] + "-I") for tk, s in zip(tickers, sec)})
    return ReturnsPanel(tickers, trading_dates(spec.t), spec.scale * out), tax


def to_prices(returns: ReturnsPanel, start_price: float = 100.0) -> PricePanel:
    """Price panel whose log-returns are ``returns`` (one extra leading date)."""
    first = np.busday_offset(np.datetime64(returns.dates[0]), -1, roll="backward")
    levels = np.concatenate(
        [np.zeros((returns.n, 1)), np.cumsum(returns.returns, axis=1)], axis=1
    )
    return PricePanel(returns.tickers, [str(first)] + list(returns.dates), start_price * np.exp(levels))
