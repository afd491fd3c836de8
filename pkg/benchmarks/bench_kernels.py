"""Compare the compiled and pure-Python kernels on identical inputs.

Usage: python3 benchmarks/bench_kernels.py [--sizes 50,100,200] [--repeat 3]

For each size the script times PMFG construction (greedy scan with
planarity tests) and one PAM run, checks that both backends return the
same result, and prints the speedup.
"""
import argparse
import time

import numpy as np

from corrfilter._kernels import backends
from corrfilter.filtergraph import sorted_edges


def _distances(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 4 * n)) + 0.3 * rng.standard_normal(4 * n)
    c = np.corrcoef(x)
    return np.sqrt(np.clip(2.0 * (1.0 - c), 0.0, None))


def _best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="50,100,200")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--k", type=int, default=10, help="medoids for the PAM benchmark")
    args = ap.parse_args(argv)
    impls = backends()
    if "cython" not in impls:
        print("compiled extension not available; only the Python backend can be timed")
    print(f"{'kernel':<8}{'N':>6}" + "".join(f"{name + ' s':>12}" for name in impls) + f"{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        d = _distances(n, n)
        el = sorted_edges(d)
        init = np.random.default_rng(0).choice(n, size=min(args.k, n), replace=False)
        jobs = {
            "pmfg": lambda m: m.pmfg_greedy(n, el.i, el.j, 3 * (n - 2))[0].tolist(),
            "pam": lambda m: m.pam_swap(d, init, 300)[0].tolist(),
        }
        for name, job in jobs.items():
            times, results = {}, []
            for label, mod in impls.items():
                times[label], out = _best_of(lambda: job(mod), args.repeat)
                results.append(out)
            assert all(r == results[0] for r in results), f"backends disagree on {name} N={n}"
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<8}{n:>6}" + "".join(f"{times[k]:>12.4f}" for k in impls) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
