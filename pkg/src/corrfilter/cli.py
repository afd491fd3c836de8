"""Command-line interface.

Subcommands ``static``, ``rolling``, ``bootstrap``, ``synth`` and
``validate``. Exit codes: 0 success, 1 usage error, 2 data error,
3 numeric error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import platform
import shutil
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .correlation import WeightScheme
from .dynamics import METHODS, WindowSeries, WindowSpec, analyze, bootstrap_nclusters, make_windows, rolling_analysis, _cross
from .dynamics import WindowRecord
from .errors import CorrFilterError, DataError, NumericError, UsageError
from .filtergraph import dump_graph_json, write_edges
from .ingest import detrend_market_mode, load_prices, load_taxonomy, log_returns, write_prices, write_taxonomy
from .metrics import contingency, overexpression_scan
from .synth import SynthSpec, generate, to_prices

log = logging.getLogger("corrfilter")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "CORRFILTER_THREADS"


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageExit(f"{self.prog}: error: {message}")


# --------------------------------------------------------------------- parsing


def _methods(text: str) -> tuple:
    items = tuple(m.strip().lower() for m in text.split(",") if m.strip())
    if items == ("all",):
        return METHODS
    bad = [m for m in items if m not in METHODS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"methods must be 'all' or a subset of {','.join(METHODS)}")
    return tuple(m for m in METHODS if m in items)


def _pair(text: str) -> tuple:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LOW,HIGH") from None
    return lo, hi


def _modes(text: str) -> tuple:
    return {"raw": ("raw",), "detrended": ("detrended",), "both": ("raw", "detrended")}[text]


def _common(p, need_taxonomy=True):
    p.add_argument("--config", type=Path, help="key=value file; command-line flags take precedence")
    p.add_argument("--prices", type=Path, required=True, help="price CSV (long or wide layout)")
    if need_taxonomy:
        p.add_argument("--taxonomy", type=Path, required=True, help="CSV ticker,supersector,industry")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None, help=f"worker processes (fallback ${THREADS_ENV})")
    p.add_argument("-v", "--verbose", action="store_true")


def _analysis_flags(p, smoothing_default):
    p.add_argument("--methods", type=_methods, default=METHODS, help="comma list or 'all'")
    p.add_argument("--detrend", choices=("raw", "detrended", "both"), default="raw")
    p.add_argument("--smoothing", choices=("uniform", "exponential"), default=smoothing_default)
    p.add_argument("--theta", type=float, default=None, help="exponential decay time (default L/3)")
    p.add_argument("--max-ncl", type=int, default=None, help="upper end of the N_cl sweep")
    p.add_argument("--pam-restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="k-medoids initialisation seed")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="corrfilter", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("static", help="whole-panel clustering, curves and overexpression")
    _common(p)
    _analysis_flags(p, "uniform")
    p.add_argument("--n-cl", type=int, default=None, help="cluster count for composition tables")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--tail", choices=("upper", "point"), default="upper")
    p.add_argument("--strict-bonferroni", action="store_true")
    p.set_defaults(func=cmd_static)

    p = sub.add_parser("rolling", help="rolling-window analysis")
    _common(p)
    _analysis_flags(p, "exponential")
    p.add_argument("--length", type=int, default=1000)
    p.add_argument("--shift", type=int, default=30)
    p.add_argument("--max-windows", type=int, default=None)
    p.set_defaults(func=cmd_rolling)

    p = sub.add_parser("bootstrap", help="bootstrap the DBHT cluster count per window")
    _common(p, need_taxonomy=False)
    p.add_argument("--length", type=int, default=1000)
    p.add_argument("--shift", type=int, default=30)
    p.add_argument("--max-windows", type=int, default=None)
    p.add_argument("--windows", default="all", help="'all' or comma list of window indices")
    p.add_argument("--n-boot", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("time", "rows"), default="time")
    p.add_argument("--detrend", choices=("raw", "detrended"), default="raw")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("synth", help="write a synthetic price panel and taxonomy")
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--t", type=int, default=2000, help="number of returns")
    p.add_argument("--sectors", type=int, default=10)
    p.add_argument("--market-loading", type=_pair, default=SynthSpec.market_loading)
    p.add_argument("--sector-loading", type=_pair, default=SynthSpec.sector_loading)
    p.add_argument("--idio-vol", type=float, default=SynthSpec.idio_vol)
    p.add_argument("--noise", choices=("gaussian", "student"), default="gaussian")
    p.add_argument("--df", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="check input files and report their shape")
    p.add_argument("--config", type=Path)
    p.add_argument("--prices", type=Path, required=True)
    p.add_argument("--taxonomy", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None, help="also write validation.json here")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_validate)
    return ap


def _subparsers(ap) -> dict:
    return next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction)).choices


def read_config(path: Path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names
    with or without leading dashes."""
    out = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(sp, values: dict) -> None:
    acts = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, raw in values.items():
        act = acts.get(key)
        if act is None or key in ("config", "help", "func"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            continue
        val = act.type(raw) if act.type else raw
        if act.choices is not None and val not in act.choices:
            raise UsageError(f"config {key}={raw!r} not in {sorted(act.choices)}")
        defaults[key] = val
    for act in sp._actions:
        if act.dest in defaults:
            act.required = False
    sp.set_defaults(**defaults)


def _peek_config(argv):
    """(subcommand, config path) found in ``argv`` without enforcing the
    subcommand's required flags, which the config may supply."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, rest = pre.parse_known_args(argv)
    command = next((a for a in rest if not a.startswith("-")), None)
    return command, known.config


def parse_args(argv):
    ap = build_parser()
    command, config = _peek_config(argv)
    choices = _subparsers(ap)
    if config is not None and command in choices:
        try:
            _apply_config(choices[command], read_config(config))
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from None
    return ap.parse_args(argv)


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        n = args.threads
    else:
        env = os.environ.get(THREADS_ENV, "").strip()
        try:
            n = int(env) if env else 1
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if n < 1:
        raise UsageError("thread count must be >= 1")
    return n


# --------------------------------------------------------------------- outputs


class _Staging:
    """Collect outputs in a scratch directory; publish them only on success."""

    def __init__(self, out: Path):
        self.out = Path(out)
        self.out.parent.mkdir(parents=True, exist_ok=True)
        self.dir = Path(tempfile.mkdtemp(prefix=".corrfilter-", dir=self.out.parent))

    def path(self, name: str) -> Path:
        return self.dir / name

    def publish(self) -> list:
        self.out.mkdir(parents=True, exist_ok=True)
        names = sorted(p.name for p in self.dir.iterdir())
        for name in names:
            os.replace(self.dir / name, self.out / name)
        self.discard()
        return names

    def discard(self) -> None:
        shutil.rmtree(self.dir, ignore_errors=True)


def _write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _manifest(stage: _Staging, args, seeds: dict) -> None:
    flags = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "out", "verbose", "threads", "config"):
            continue
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, tuple):
            v = list(v)
        flags[k] = v
    files = {}
    for p in sorted(stage.dir.iterdir(), key=lambda q: q.name):
        files[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    doc = {
        "command": args.command,
        "versions": {
            "corrfilter": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "kernel_backend": _kernels.BACKEND,
        },
        "flags": flags,
        "seeds": seeds,
        "files": files,
    }
    stage.path("manifest.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _load(args, need_taxonomy=True):
    panel = load_prices(args.prices)
    returns = log_returns(panel)
    tax = None
    if need_taxonomy:
        tax = load_taxonomy(args.taxonomy)
        tax.validate(returns.tickers)
    return returns, tax


def _scheme(args, length) -> WeightScheme:
    if args.smoothing == "uniform":
        return WeightScheme.uniform()
    return WeightScheme.exponential(args.theta if args.theta is not None else length / 3.0)


# --------------------------------------------------------------------- commands


def cmd_static(args, stage: _Staging) -> dict:
    returns, tax = _load(args)
    modes = _modes(args.detrend)
    if args.n_cl is not None and "dbht" in args.methods:
        warnings.warn("DBHT determines its own number of clusters; --n-cl applies to the other methods only",
                      stacklevel=1)
    sectors = tax.labels(returns.tickers)
    names = tax.label_names(returns.tickers)
    scheme = _scheme(args, returns.t)
    res = analyze(returns, sectors, args.methods, scheme, modes, args.max_ncl, args.pam_restarts,
                  args.seed, keep_curves=True)
    record = WindowRecord(0, 0, returns.t, returns.dates[-1], res, _cross(res))
    WindowSeries((record,), args.methods, modes).write(stage.dir)

    cols = [(mode, m) for mode in modes for m in args.methods]
    first = res[modes[0]].methods[args.methods[0]]
    ks = sorted(first.partitions)
    _write_rows(stage.path("ari_curve.csv"), ["n_cl"] + [f"{mo}_{m}" for mo, m in cols],
                [[k] + [res[mo].methods[m].ari_curve[i] for mo, m in cols] for i, k in enumerate(ks)])
    _write_rows(stage.path("disparity_curve.csv"), ["n_cl"] + [f"{mo}_{m}" for mo, m in cols],
                [[k] + [res[mo].methods[m].disparity_curve[i] for mo, m in cols] for i, k in enumerate(ks)])

    over_rows = []
    for k in ks:
        row = [k]
        for mo, m in cols:
            rep = overexpression_scan(res[mo].methods[m].partitions[k], sectors, args.alpha, names,
                                      args.tail, args.strict_bonferroni)
            row += [rep.n_rejected, rep.normalized]
        over_rows.append(row)
    over_head = ["n_cl"]
    for mo, m in cols:
        over_head += [f"{mo}_{m}_rejected", f"{mo}_{m}_normalized"]
    _write_rows(stage.path("overexpression_curve.csv"), over_head, over_rows)

    for mo, m in cols:
        summary = res[mo].methods[m]
        part = summary.partition
        if m != "dbht" and args.n_cl is not None:
            part = summary.partitions.get(args.n_cl)
            if part is None:
                raise UsageError(f"--n-cl must lie in [{ks[0]}, {ks[-1]}]")
        tab = contingency(part, sectors).m
        _write_rows(stage.path(f"composition_{mo}_{m}.csv"), ["cluster"] + names,
                    [[i] + tab[i].tolist() for i in range(tab.shape[0])])
        rep = overexpression_scan(part, sectors, args.alpha, names, args.tail, args.strict_bonferroni)
        rep.write_csv(stage.path(f"overexpression_{mo}_{m}.csv"))
        _write_rows(stage.path(f"labels_{mo}_{m}.csv"), ["ticker", "cluster"],
                    zip(returns.tickers, part.labels.tolist()))

    for mo in modes:
        r = res[mo]
        if r.dbht is None:
            continue
        write_edges(stage.path(f"pmfg_{mo}.csv"), r.dbht.graph)
        dump_graph_json(stage.path(f"pmfg_{mo}.json"), r.dbht.graph, r.dbht.directed.tree, returns.tickers)
        r.dbht.write_json(stage.path(f"dbht_{mo}.json"))
    return {"kmedoids": args.seed}


def cmd_rolling(args, stage: _Staging) -> dict:
    returns, tax = _load(args)
    spec = WindowSpec(args.length, args.shift, _scheme(args, args.length))
    series = rolling_analysis(returns, tax, spec, args.methods, _modes(args.detrend), args.max_windows,
                              args.max_ncl, args.pam_restarts, args.seed, workers=_threads(args))
    series.write(stage.dir)
    log.info("analysed %d window(s)", len(series))
    return {"kmedoids": args.seed}


def _select(text: str, count: int) -> list:
    if text.strip().lower() == "all":
        return list(range(count))
    try:
        idx = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise UsageError(f"bad window selector {text!r}") from None
    if not idx or idx[0] < 0 or idx[-1] >= count:
        raise UsageError(f"window indices must lie in [0, {count - 1}]")
    return idx


def cmd_bootstrap(args, stage: _Staging) -> dict:
    returns, _ = _load(args, need_taxonomy=False)
    if args.n_boot < 2:
        raise UsageError("--n-boot must be >= 2")
    spec = WindowSpec(args.length, args.shift, WeightScheme.uniform())
    wins = make_windows(returns.t, spec, args.max_windows)
    chosen = _select(args.windows, len(wins))
    children = np.random.SeedSequence(args.seed).spawn(len(wins))
    workers = _threads(args)
    rows, reps = [], []
    for k in chosen:
        s, e = wins[k]
        win = returns.window(s, e)
        if args.detrend == "detrended":
            win = detrend_market_mode(win)[0]
        b = bootstrap_nclusters(win, args.n_boot, children[k], args.mode, workers)
        rows.append([k, s, e, win.dates[-1], b.empirical, b.mean, b.std, int(b.within_one_std), b.redraws])
        reps += [[k, i, n] for i, n in enumerate(b.replicas)]
        log.info("window %d: empirical %d, replicas %.2f +/- %.2f", k, b.empirical, b.mean, b.std)
    _write_rows(stage.path("bootstrap.csv"),
                ["window", "start", "stop", "end_date", "empirical_n_cl", "mean_n_cl", "std_n_cl",
                 "within_one_std", "redraws"], rows)
    _write_rows(stage.path("replicas.csv"), ["window", "replica", "n_cl"], reps)
    return {"bootstrap": args.seed}


def cmd_synth(args, stage: _Staging) -> dict:
    try:
        spec = SynthSpec(args.n, args.t, args.sectors, args.market_loading, args.sector_loading,
                         args.idio_vol, args.seed, args.noise, args.df)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    returns, tax = generate(spec)
    write_prices(stage.path("prices.csv"), to_prices(returns))
    write_taxonomy(stage.path("taxonomy.csv"), tax)
    return {"synth": args.seed}


def cmd_validate(args, stage: _Staging | None) -> dict:
    panel = load_prices(args.prices)
    returns = log_returns(panel)
    report = {
        "n_tickers": len(panel.tickers),
        "n_dates": len(panel.dates),
        "n_returns": returns.t,
        "first_date": panel.dates[0],
        "last_date": panel.dates[-1],
    }
    if args.taxonomy is not None:
        tax = load_taxonomy(args.taxonomy)
        tax.validate(panel.tickers)
        names = tax.label_names(panel.tickers)
        sizes = np.bincount(tax.labels(panel.tickers), minlength=len(names))
        report["n_supersectors"] = len(names)
        report["supersector_sizes"] = dict(zip(names, sizes.tolist()))
        report["extra_taxonomy_entries"] = len(tax) - len(panel.tickers)
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if stage is not None:
        stage.path("validation.json").write_text(text, encoding="utf-8")
    return {}


# --------------------------------------------------------------------- entry


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return EXIT_DATA


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except _UsageExit as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except CorrFilterError as exc:
        print(f"corrfilter: error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    stage = None
    try:
        _threads(args)
        if getattr(args, "out", None) is not None:
            stage = _Staging(args.out)
        seeds = args.func(args, stage)
        if stage is not None:
            _manifest(stage, args, seeds)
            stage.publish()
    except CorrFilterError as exc:
        print(f"corrfilter: error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        print(f"corrfilter: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"corrfilter: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        if stage is not None:
            stage.discard()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
