"""Regenerate tests/data/oracle_values.json from tests/oracles.py.

Run from the repository root: ``python tests/freeze_oracles.py``.
"""
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402


def main():
    rng = random.Random(20240611)
    out = {}
    hyper = []
    for _ in range(300):
        N = rng.randint(1, 30)
        K = rng.randint(0, N)
        n = rng.randint(0, N)
        k = rng.randint(max(0, n - (N - K)), min(K, n))
        f = oracles.hypergeom_exact(N, K, n, k)
        hyper.append([N, K, n, k, f.numerator, f.denominator])
    out["hypergeom"] = hyper
    ari = []
    for _ in range(200):
        n = rng.randint(2, 12)
        p = [rng.randint(0, rng.randint(0, 4)) for _ in range(n)]
        q = [rng.randint(0, rng.randint(0, 4)) for _ in range(n)]
        f = oracles.ari_pairs(p, q)
        ari.append([p, q, f.numerator, f.denominator])
    out["ari"] = ari
    out["disparity"] = [[s, oracles.disparity_direct(s)] for s in ([2, 2, 2], [1, 3], [1, 1, 4], [5, 1, 7, 3])]
    tail = oracles.upper_tail_exact(100, 10, 10, 10)
    out["sector_tail"] = [100, 10, 10, 10, tail.numerator, tail.denominator]
    d3 = [[0, 0.1, 0.5], [0.1, 0, 0.9], [0.5, 0.9, 0]]
    out["three_point"] = {r: oracles.naive_linkage_heights(d3, r) for r in ("single", "average", "complete")}
    path = Path(__file__).parent / "data" / "oracle_values.json"
    path.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
