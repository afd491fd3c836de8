"""Window-level analysis, rolling windows and bootstrap robustness of the
DBHT cluster count."""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .correlation import WeightScheme, mean_offdiagonal, pearson, to_distance
from .dbht import dbht
from .errors import DegenerateReplica, UndefinedForSingleCluster, UsageError, WindowTooLong, ZeroVariance
from .ingest import ReturnsPanel, Taxonomy, detrend_market_mode
from .kmedoids import PamConfig, kmedoids
from .linkage import Partition, cut, linkage
from .metrics import adjusted_rand, disparity

__all__ = [
    "METHODS",
    "MODES",
    "WindowSpec",
    "MethodSummary",
    "WindowRecord",
    "WindowSeries",
    "make_windows",
    "analyze",
    "rolling_analysis",
    "BootstrapResult",
    "bootstrap_nclusters",
]

log = logging.getLogger(__name__)

METHODS = ("sl", "al", "cl", "dbht", "kmedoids")
MODES = ("raw", "detrended")
MAX_SWEEP = 342
_LINKAGE = {"sl": "single", "al": "average", "cl": "complete"}


@dataclass(frozen=True)
class WindowSpec:
    """Rolling-window geometry; ``smoothing=None`` means exponential weights
    with ``theta = length / 3``."""

    length: int
    shift: int
    smoothing: WeightScheme | None = None

    def __post_init__(self):
        if not 1 <= self.shift <= self.length:
            raise UsageError(f"need 1 <= shift <= length (got shift={self.shift}, length={self.length})")

    @property
    def scheme(self) -> WeightScheme:
        return self.smoothing if self.smoothing is not None else WeightScheme.for_window(self.length)


def make_windows(t_total: int, spec: WindowSpec, max_windows: int | None = None) -> list:
    """Half-open ranges ``(s, s + L)`` for ``s = 0, shift, 2 shift, ...``
    while the window fits, optionally capped at ``max_windows``."""
    if spec.length > t_total:
        raise WindowTooLong(f"window length {spec.length} exceeds series length {t_total}")
    count = (t_total - spec.length) // spec.shift + 1
    if max_windows is not None:
        if max_windows < 1:
            raise UsageError("max_windows must be >= 1")
        count = min(count, max_windows)
    return [(k * spec.shift, k * spec.shift + spec.length) for k in range(count)]


@dataclass(frozen=True)
class MethodSummary:
    """``n_cl`` is the emergent DBHT count for ``dbht``; for the other
    methods it is the matched count (DBHT's when DBHT ran in the same
    window, otherwise the ARI-maximising one)."""

    n_cl: int
    disparity: float
    ari_at_ncl: float
    max_ari: float
    argmax_ncl: int
    partition: Partition = field(repr=False, compare=False)
    ari_curve: np.ndarray | None = field(default=None, repr=False, compare=False)
    disparity_curve: np.ndarray | None = field(default=None, repr=False, compare=False)
    partitions: dict | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class ModeResult:
    mean_corr: float
    methods: dict  # name -> MethodSummary
    dbht: object | None = field(default=None, repr=False, compare=False)
    corr: object | None = field(default=None, repr=False, compare=False)
    dist: object | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class WindowRecord:
    index: int
    start: int
    stop: int
    end_date: str
    modes: dict  # mode -> ModeResult
    cross_ari: dict = field(default_factory=dict)  # method -> ARI(raw, detrended)


def _safe_disparity(p: Partition) -> float:
    try:
        return disparity(p)
    except UndefinedForSingleCluster:
        return math.nan


def _partition_at(method, k, d, dendro, pam_restarts, pam_seed):
    if method == "kmedoids":
        return kmedoids(d, PamConfig(k, pam_restarts, pam_seed)).partition
    return cut(dendro, k)


def analyze(returns: ReturnsPanel, sectors, methods=METHODS, scheme: WeightScheme = WeightScheme(),
            modes=("raw",), max_ncl: int | None = None, pam_restarts: int = 10, pam_seed: int = 0,
            keep_curves: bool = False) -> dict:
    """Run the full pipeline on one window for each requested mode.

    For every method the ARI against ``sectors`` is swept over
    ``N_cl = 2 .. min(N, 342, max_ncl)``. Returns ``{mode: ModeResult}``.
    """
    sectors = np.asarray(sectors)
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise UsageError(f"unknown method(s): {sorted(unknown)}")
    out = {}
    for mode in modes:
        r = detrend_market_mode(returns)[0] if mode == "detrended" else returns
        c = pearson(r, scheme)
        dm = to_distance(c)
        d = dm.values
        n = d.shape[0]
        top = min(n, MAX_SWEEP, max_ncl or n)
        ks = list(range(2, top + 1))
        res = dbht(dm, c) if "dbht" in methods else None
        summaries = {}
        for m in METHODS:
            if m not in methods:
                continue
            dendro = None
            if m == "dbht":
                dendro = res.dendrogram
            elif m in _LINKAGE:
                dendro = linkage(d, _LINKAGE[m])
            parts = {k: _partition_at(m, k, d, dendro, pam_restarts, pam_seed) for k in ks}
            ari = np.array([adjusted_rand(parts[k], sectors) for k in ks])
            best = int(np.argmax(ari)) if ks else 0
            argmax = ks[best] if ks else 1
            max_ari = float(ari[best]) if ks else math.nan
            if m == "dbht":
                part = res.partition
            else:
                k = res.n_cl if res is not None else argmax
                part = parts.get(k) or _partition_at(m, k, d, dendro, pam_restarts, pam_seed)
            summaries[m] = MethodSummary(
                n_cl=part.n_cl,
                disparity=_safe_disparity(part),
                ari_at_ncl=adjusted_rand(part, sectors),
                max_ari=max_ari,
                argmax_ncl=argmax,
                partition=part,
                ari_curve=ari if keep_curves else None,
                disparity_curve=np.array([_safe_disparity(parts[k]) for k in ks]) if keep_curves else None,
                partitions=parts if keep_curves else None,
            )
        out[mode] = ModeResult(mean_offdiagonal(c), summaries, res if keep_curves else None,
                               c if keep_curves else None, dm if keep_curves else None)
    return out


def _cross(modes: dict) -> dict:
    if not all(m in modes for m in MODES):
        return {}
    raw, det = modes["raw"].methods, modes["detrended"].methods
    return {m: adjusted_rand(raw[m].partition, det[m].partition) for m in raw}


def _window_job(args):
    idx, (s, e), returns, sectors, methods, scheme, modes, max_ncl, pam_restarts, pam_seed = args
    win = returns.window(s, e)
    res = analyze(win, sectors, methods, scheme, modes, max_ncl, pam_restarts, pam_seed)
    return WindowRecord(idx, s, e, win.dates[-1], res, _cross(res))


@dataclass(frozen=True)
class WindowSeries:
    records: tuple
    methods: tuple
    modes: tuple

    def __len__(self):
        return len(self.records)

    def _columns(self):
        return [(mode, m) for mode in self.modes for m in self.methods]

    def tables(self) -> dict:
        """``{file stem: (header, rows)}`` with one table per metric family."""
        cols = self._columns()
        head = ["window", "start", "stop", "end_date"]
        base = [[r.index, r.start, r.stop, r.end_date] for r in self.records]
        tabs = {
            "windows": (head + [f"mean_corr_{mode}" for mode in self.modes],
                        [b + [r.modes[mode].mean_corr for mode in self.modes]
                         for b, r in zip(base, self.records)]),
        }
        for fam in ("n_cl", "disparity", "ari_at_ncl", "max_ari", "argmax_ncl"):
            tabs[fam] = (
                head + [f"{mode}_{m}" for mode, m in cols],
                [b + [getattr(r.modes[mode].methods[m], fam) for mode, m in cols]
                 for b, r in zip(base, self.records)],
            )
        if all(r.cross_ari for r in self.records) and self.records:
            tabs["cross_ari"] = (head + list(self.methods),
                                 [b + [r.cross_ari[m] for m in self.methods] for b, r in zip(base, self.records)])
        return tabs

    def write(self, outdir) -> list:
        outdir = Path(outdir)
        written = []
        doc = {}
        for stem, (header, rows) in self.tables().items():
            path = outdir / f"{stem}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows([[_fmt(v) for v in row] for row in rows])
            written.append(path)
            doc[stem] = [dict(zip(header, (_jsonable(v) for v in row))) for row in rows]
        path = outdir / "series.json"
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        written.append(path)
        return written


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(v):
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def _pool_map(fn, jobs, workers):
    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))  # map keeps submission order


def rolling_analysis(returns: ReturnsPanel, tax: Taxonomy | np.ndarray, spec: WindowSpec,
                     methods=METHODS, modes=("raw",), max_windows: int | None = None,
                     max_ncl: int | None = None, pam_restarts: int = 10, pam_seed: int = 0,
                     workers: int = 1) -> WindowSeries:
    """Analyse every window from :func:`make_windows`; detrending, when
    requested, is fitted inside each window."""
    sectors = tax.labels(returns.tickers) if isinstance(tax, Taxonomy) else np.asarray(tax)
    methods = tuple(m for m in METHODS if m in set(methods))
    wins = make_windows(returns.t, spec, max_windows)
    jobs = [(k, w, returns, sectors, methods, spec.scheme, tuple(modes), max_ncl, pam_restarts, pam_seed)
            for k, w in enumerate(wins)]
    return WindowSeries(tuple(_pool_map(_window_job, jobs, workers)), methods, tuple(modes))


@dataclass(frozen=True)
class BootstrapResult:
    empirical: int
    mean: float
    std: float
    replicas: tuple
    redraws: int

    @property
    def within_one_std(self) -> bool:
        return abs(self.empirical - self.mean) <= self.std


def _replica_job(args):
    x, ss, mode = args
    rng = np.random.default_rng(ss)
    n, length = x.shape
    redraws = 0
    while True:
        if mode == "time":
            sample = x[:, rng.integers(0, length, length)]
        else:
            sample = x[rng.integers(0, n, n)]
        try:
            c = pearson(sample)
        except ZeroVariance:
            redraws += 1
            if redraws > 1000:
                raise DegenerateReplica("could not draw a non-degenerate replica")
            continue
        return dbht(to_distance(c), c).n_cl, redraws


def bootstrap_nclusters(window, n_boot: int, rng_seed: int = 0, mode: str = "time",
                        workers: int = 1) -> BootstrapResult:
    """Resample a window ``n_boot`` times and record the DBHT cluster count
    of each replica (unweighted Pearson correlations throughout).

    ``mode="time"`` resamples the ``L`` time columns with replacement;
    ``mode="rows"`` resamples the ``N`` series instead. Replicas with a
    zero-variance series are redrawn and counted in ``redraws``.
    """
    x = window.returns if isinstance(window, ReturnsPanel) else np.asarray(window, dtype=float)
    if n_boot < 2:
        raise UsageError("n_boot must be >= 2 for a replica standard deviation")
    if mode not in ("time", "rows"):
        raise UsageError(f"unknown bootstrap mode {mode!r}")
    c = pearson(x)
    empirical = dbht(to_distance(c), c).n_cl
    root = rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)
    seeds = root.spawn(n_boot)
    res = _pool_map(_replica_job, [(x, ss, mode) for ss in seeds], workers)
    counts = np.array([k for k, _ in res], dtype=float)
    redraws = sum(r for _, r in res)
    if redraws:
        log.info("bootstrap redrew %d degenerate replica(s)", redraws)
    return BootstrapResult(empirical, float(counts.mean()), float(counts.std(ddof=1)),
                           tuple(int(k) for k in counts), redraws)
