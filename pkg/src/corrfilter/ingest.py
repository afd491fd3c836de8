"""Price and taxonomy loading, log-returns and market-mode detrending."""
from __future__ import annotations

import csv
import datetime as _dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DataError,
    DegenerateMarketIndex,
    DuplicateTicker,
    EmptyLabel,
    MissingCell,
    NonPositivePrice,
    UnknownTicker,
    UnparsableDate,
)

__all__ = [
    "PricePanel",
    "ReturnsPanel",
    "FactorFit",
    "Taxonomy",
    "load_prices",
    "log_returns",
    "detrend_market_mode",
    "load_taxonomy",
    "write_prices",
    "write_taxonomy",
]


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PricePanel:
    tickers: tuple
    dates: tuple
    prices: np.ndarray  # (N, T+1)

    def __post_init__(self):
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "prices", _frozen(self.prices))
        n, t1 = self.prices.shape
        if n != len(self.tickers) or t1 != len(self.dates):
            raise DataError("price matrix shape does not match tickers/dates")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DataError("dates must be strictly increasing")
        if not np.all(np.isfinite(self.prices)):
            raise MissingCell("non-finite price")
        bad = np.argwhere(self.prices <= 0)
        if len(bad):
            i, t = bad[0]
            raise NonPositivePrice(
                f"{self.tickers[i]} has non-positive price {self.prices[i, t]!r} on {self.dates[t]}"
            )


@dataclass(frozen=True)
class ReturnsPanel:
    tickers: tuple
    dates: tuple
    returns: np.ndarray  # (N, T)

    def __post_init__(self):
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "returns", _frozen(self.returns))
        if self.returns.ndim != 2 or self.returns.shape != (len(self.tickers), len(self.dates)):
            raise DataError("returns shape does not match tickers/dates")
        if not np.all(np.isfinite(self.returns)):
            raise DataError("returns contain non-finite values")

    @property
    def n(self) -> int:
        return self.returns.shape[0]

    @property
    def t(self) -> int:
        return self.returns.shape[1]

    def window(self, start: int, stop: int) -> "ReturnsPanel":
        return ReturnsPanel(self.tickers, self.dates[start:stop], self.returns[:, start:stop])


@dataclass(frozen=True)
class FactorFit:
    alpha: np.ndarray
    beta: np.ndarray
    market_index: np.ndarray


@dataclass(frozen=True)
class Taxonomy:
    """Reference classification: ticker -> (supersector, industry)."""

    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))

    def __len__(self):
        return len(self.entries)

    def __contains__(self, ticker):
        return ticker in self.entries

    @property
    def supersectors(self) -> list:
        return sorted({s for s, _ in self.entries.values()})

    @property
    def industries(self) -> list:
        return sorted({i for _, i in self.entries.values()})

    @property
    def n_supersectors(self) -> int:
        return len(self.supersectors)

    def validate(self, tickers: Sequence[str]) -> None:
        missing = [t for t in tickers if t not in self.entries]
        if missing:
            head = ", ".join(missing[:5])
            raise UnknownTicker(f"{len(missing)} ticker(s) missing from taxonomy: {head}")

    def labels(self, tickers: Sequence[str], level: str = "supersector") -> np.ndarray:
        """Integer labels for ``tickers``, numbered by sorted label name."""
        self.validate(tickers)
        idx = 0 if level == "supersector" else 1
        names = sorted({self.entries[t][idx] for t in tickers})
        code = {name: k for k, name in enumerate(names)}
        return np.array([code[self.entries[t][idx]] for t in tickers], dtype=np.intp)

    def label_names(self, tickers: Sequence[str], level: str = "supersector") -> list:
        idx = 0 if level == "supersector" else 1
        return sorted({self.entries[t][idx] for t in tickers})


def _parse_date(s: str, where: str) -> _dt.date:
    try:
        return _dt.date.fromisoformat(s.strip())
    except ValueError:
        raise UnparsableDate(f"{where}: cannot parse date {s!r} (expected YYYY-MM-DD)") from None


def _parse_price(s: str, where: str) -> float:
    s = s.strip()
    if s == "":
        raise MissingCell(f"{where}: empty price cell")
    try:
        return float(s)
    except ValueError:
        raise DataError(f"{where}: cannot parse price {s!r}") from None


def _sniff_layout(header: list) -> str:
    cols = [h.strip().lower() for h in header]
    if cols[:3] == ["date", "ticker", "close"] and len(cols) == 3:
        return "long"
    return "wide"


def load_prices(path, format: str = "auto") -> PricePanel:
    """Read a price panel from CSV.

    Two layouts are accepted: ``long`` (``date,ticker,close`` rows) and
    ``wide`` (a ``date`` column followed by one column per ticker). With
    ``format="auto"`` the layout is inferred from the header. Tickers are
    sorted lexicographically; dates are sorted ascending.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if any(c.strip() for c in r)]
    layout = _sniff_layout(header) if format == "auto" else format
    if layout == "long":
        return _load_long(path, body)
    if layout == "wide":
        return _load_wide(path, header, body)
    raise DataError(f"unknown price layout {format!r}")


def _load_long(path, body) -> PricePanel:
    cells: dict = {}
    for lineno, row in enumerate(body, start=2):
        where = f"{path}:{lineno}"
        if len(row) != 3:
            raise DataError(f"{where}: expected 3 columns, got {len(row)}")
        date = _parse_date(row[0], where)
        ticker = row[1].strip()
        if not ticker:
            raise DataError(f"{where}: empty ticker")
        per = cells.setdefault(ticker, {})
        if date in per:
            raise DataError(f"{where}: duplicate row for {ticker} on {date}")
        per[date] = _parse_price(row[2], where)
    if not cells:
        raise DataError(f"{path}: no data rows")
    dates = sorted({d for per in cells.values() for d in per})
    tickers = sorted(cells)
    prices = np.empty((len(tickers), len(dates)))
    for i, tk in enumerate(tickers):
        per = cells[tk]
        for t, d in enumerate(dates):
            if d not in per:
                raise MissingCell(f"{tk} has no price on {d.isoformat()}")
            prices[i, t] = per[d]
    return PricePanel(tickers, [d.isoformat() for d in dates], prices)


def _load_wide(path, header, body) -> PricePanel:
    if not header or header[0].strip().lower() != "date":
        raise DataError(f"{path}: wide layout needs 'date' as first column")
    names = [h.strip() for h in header[1:]]
    if any(not n for n in names):
        raise DataError(f"{path}: empty ticker name in header")
    if len(set(names)) != len(names):
        raise DuplicateTicker(f"{path}: duplicated ticker column")
    records = []
    for lineno, row in enumerate(body, start=2):
        where = f"{path}:{lineno}"
        if len(row) < len(header):
            raise MissingCell(f"{where}: row has {len(row)} cells, expected {len(header)}")
        date = _parse_date(row[0], where)
        records.append((date, [_parse_price(c, f"{where} ({n})") for n, c in zip(names, row[1:])]))
    records.sort(key=lambda r: r[0])
    dates = [d for d, _ in records]
    if len(set(dates)) != len(dates):
        raise DataError(f"{path}: duplicated date row")
    values = np.array([v for _, v in records], dtype=float).T
    order = sorted(range(len(names)), key=lambda k: names[k])
    return PricePanel([names[k] for k in order], [d.isoformat() for d in dates], values[order])


def write_prices(path, panel: PricePanel) -> None:
    """Write ``panel`` as a wide CSV readable by :func:`load_prices`."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *panel.tickers])
        for t, d in enumerate(panel.dates):
            w.writerow([d, *(repr(float(x)) for x in panel.prices[:, t])])


def log_returns(panel: PricePanel) -> ReturnsPanel:
    if panel.prices.shape[1] < 2:
        raise DataError("need at least two dates to form returns")
    r = np.diff(np.log(panel.prices), axis=1)
    return ReturnsPanel(panel.tickers, panel.dates[1:], r)


def detrend_market_mode(returns: ReturnsPanel):
    """Regress every series on the equal-weight market return.

    Returns the residual panel and the fitted :class:`FactorFit`.
    """
    r = returns.returns
    n, t = r.shape
    if n < 2 or t < 3:
        raise DataError(f"detrending needs N >= 2 and T >= 3 (got N={n}, T={t})")
    market = r.mean(axis=0)
    m_c = market - market.mean()
    var = m_c @ m_c
    if var == 0.0 or var <= 1e-20 * (market @ market):
        raise DegenerateMarketIndex("market index has zero variance; regression undefined")
    r_mean = r.mean(axis=1)
    beta = (r - r_mean[:, None]) @ m_c / var
    alpha = r_mean - beta * market.mean()
    resid = r - alpha[:, None] - beta[:, None] * market[None, :]
    fit = FactorFit(_frozen(alpha), _frozen(beta), _frozen(market))
    return ReturnsPanel(returns.tickers, returns.dates, resid), fit


def load_taxonomy(path) -> Taxonomy:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty taxonomy file")
    header = [h.strip().lower() for h in rows[0]]
    if header[:3] != ["ticker", "supersector", "industry"]:
        raise DataError(f"{path}: header must be ticker,supersector,industry")
    entries: dict = {}
    parent: dict = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not any(c.strip() for c in row):
            continue
        if len(row) < 3:
            raise EmptyLabel(f"{path}:{lineno}: expected 3 fields")
        ticker, sup, ind = (c.strip() for c in row[:3])
        if not ticker or not sup or not ind:
            raise EmptyLabel(f"{path}:{lineno}: empty field")
        if ticker in entries:
            raise DuplicateTicker(f"{path}:{lineno}: ticker {ticker!r} listed twice")
        if parent.setdefault(sup, ind) != ind:
            raise DataError(f"{path}:{lineno}: supersector {sup!r} mapped to two industries")
        entries[ticker] = (sup, ind)
    return Taxonomy(entries)


def write_taxonomy(path, tax: Taxonomy) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", "supersector", "industry"])
        for tk in sorted(tax.entries):
            w.writerow([tk, *tax.entries[tk]])
