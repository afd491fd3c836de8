import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrfilter.errors import DomainError, UndefinedForSingleCluster, UniverseMismatch
from corrfilter.linkage import Partition
from corrfilter.metrics import (
    adjusted_rand, bonferroni_level, contingency, disparity, hypergeom_pmf, hypergeom_sf, overexpression_scan,
)
from oracles import ari_pairs, disparity_direct, hypergeom_exact, upper_tail_exact


def sizes_to_partition(sizes):
    return Partition(np.repeat(np.arange(len(sizes)), sizes))


def test_disparity_examples(frozen):
    for sizes, y in frozen["disparity"]:
        assert disparity(sizes_to_partition(sizes)) == pytest.approx(y, abs=1e-12)
    assert disparity(sizes_to_partition([1, 3])) == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    assert disparity(sizes_to_partition([1, 1, 4])) == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
    with pytest.raises(UndefinedForSingleCluster):
        disparity(Partition([0, 0, 0]))


def test_disparity_random_sizes():
    rng = np.random.default_rng(0)
    for _ in range(100):
        sizes = rng.integers(1, 50, size=int(rng.integers(2, 20))).tolist()
        assert disparity(sizes_to_partition(sizes)) == pytest.approx(disparity_direct(sizes), abs=1e-12)


@given(st.lists(st.integers(1, 30), min_size=2, max_size=10), st.integers(2, 5))
def test_disparity_scale_invariant(sizes, c):
    assert disparity(sizes_to_partition([c * s for s in sizes])) == pytest.approx(
        disparity(sizes_to_partition(sizes)), abs=1e-12)


def test_contingency_examples():
    t = contingency([0, 0, 1, 1], [0, 1, 0, 1])
    assert t.m.tolist() == [[1, 1], [1, 1]] and t.n == 4
    t = contingency([0] * 4, [0, 1, 2, 3])
    assert t.m.tolist() == [[1, 1, 1, 1]]
    with pytest.raises(UniverseMismatch):
        contingency([0, 1], [0, 1, 2])


def test_ari_examples():
    assert adjusted_rand([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5
    assert adjusted_rand([0, 0, 1, 2], [3, 3, 7, 5]) == 1.0
    assert adjusted_rand([0, 0, 0], [0, 0, 0]) == 1.0
    assert adjusted_rand([0, 1, 2], [0, 1, 2]) == 1.0


def test_ari_frozen_oracle(frozen):
    for p, q, num, den in frozen["ari"]:
        assert ari_pairs(p, q) == Fraction(num, den)
        assert adjusted_rand(p, q) == float(Fraction(num, den))


def test_ari_random_exact():
    rng = np.random.default_rng(1)
    for _ in range(500):
        n = int(rng.integers(2, 13))
        p = rng.integers(0, int(rng.integers(1, 6)), n)
        q = rng.integers(0, int(rng.integers(1, 6)), n)
        assert adjusted_rand(p, q) == float(ari_pairs(p.tolist(), q.tolist()))


labels = st.lists(st.integers(0, 4), min_size=2, max_size=25)


@given(st.data())
def test_ari_symmetric_and_relabel_invariant(data):
    p = data.draw(labels)
    q = data.draw(st.lists(st.integers(0, 4), min_size=len(p), max_size=len(p)))
    a = adjusted_rand(p, q)
    assert a == adjusted_rand(q, p)
    perm = data.draw(st.permutations(range(5)))
    assert a == adjusted_rand([perm[x] for x in p], q)
    assert -1.0 <= a <= 1.0


def test_ari_null_mean():
    rng = np.random.default_rng(2)
    vals = [adjusted_rand(rng.integers(0, 10, 1000), rng.integers(0, 10, 1000)) for _ in range(200)]
    assert abs(np.mean(vals)) <= 0.02


def test_hypergeom_examples():
    assert hypergeom_pmf(10, 5, 4, 2) == pytest.approx(100 / 210, abs=1e-15)
    assert hypergeom_pmf(7, 7, 7, 7) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        hypergeom_pmf(10, 11, 2, 1)
    with pytest.raises(DomainError):
        hypergeom_pmf(10, 3, 2, 3)


def test_hypergeom_frozen_exact(frozen):
    for N, K, n, k, num, den in frozen["hypergeom"]:
        assert hypergeom_exact(N, K, n, k) == Fraction(num, den)
        assert abs(hypergeom_pmf(N, K, n, k) - num / den) <= 1e-12


def test_hypergeom_normalised():
    rng = np.random.default_rng(3)
    for N in list(range(1, 40)) + [100, 250, 500]:
        for _ in range(5):
            K, n = int(rng.integers(0, N + 1)), int(rng.integers(0, N + 1))
            ks = range(max(0, n - (N - K)), min(K, n) + 1)
            assert abs(math.fsum(hypergeom_pmf(N, K, n, k) for k in ks) - 1.0) <= 1e-12


def test_hypergeom_large_n_finite():
    p = hypergeom_pmf(10_000, 5000, 5000, 2500)
    assert 0 < p < 1


def test_upper_tail(frozen):
    N, K, n, k, num, den = frozen["sector_tail"]
    assert hypergeom_sf(N, K, n, k) == pytest.approx(num / den, rel=1e-10)
    assert hypergeom_sf(N, K, n, k) == pytest.approx(5.8e-14, rel=0.01)
    for args in [(30, 10, 12, 5), (20, 4, 6, 1), (50, 25, 25, 20)]:
        assert hypergeom_sf(*args) == pytest.approx(float(upper_tail_exact(*args)), rel=1e-10)
    assert hypergeom_sf(30, 10, 12, 0) == 1.0


@given(st.integers(2, 60), st.data())
def test_upper_tail_monotone(N, data):
    K = data.draw(st.integers(0, N))
    n = data.draw(st.integers(0, N))
    ks = range(max(0, n - (N - K)), min(K, n) + 1)
    ps = [hypergeom_sf(N, K, n, k) for k in ks]
    assert all(a >= b for a, b in zip(ps, ps[1:]))


def test_bonferroni_level():
    assert bonferroni_level(0.01, 23, 19) == pytest.approx(0.01 / 218.5)
    assert bonferroni_level(0.01, 23, 19) == pytest.approx(4.577e-5, rel=1e-3)
    assert bonferroni_level(0.01, 23, 19, strict=True) == pytest.approx(0.01 / 437)


def test_overexpression_planted_sector(tmp_path):
    sectors = np.arange(100) // 10
    rep = overexpression_scan(Partition(sectors), sectors, 0.01)
    assert rep.n_cl == 10 and rep.n_sectors == 10 and len(rep.rows) == 100
    assert rep.n_rejected == 10
    assert rep.normalized == pytest.approx(0.2)
    hit = [r for r in rep.rows if r.rejected]
    assert all(r.k == 10 and r.p == pytest.approx(5.8e-14, rel=0.01) for r in hit)
    for r in rep.rows:
        assert r.rejected == (r.p < rep.level)
    rep.write_csv(tmp_path / "o.csv")
    rep.write_json(tmp_path / "o.json")
    assert (tmp_path / "o.csv").read_text().splitlines()[0] == "cluster,sector,k,p,rejected"


def test_overexpression_point_mode_and_validation():
    sectors = np.arange(40) % 4
    part = Partition(np.arange(40) % 4)
    up = overexpression_scan(part, sectors, tail="upper")
    pt = overexpression_scan(part, sectors, tail="point")
    assert [r.p <= s.p for r, s in zip(pt.rows, up.rows)]
    with pytest.raises(DomainError):
        overexpression_scan(part, sectors, alpha=1.5)
    with pytest.raises(UniverseMismatch):
        overexpression_scan(part, sectors[:-1])


def test_overexpression_null_calibration():
    rng = np.random.default_rng(4)
    rejected = tests = 0
    for _ in range(500):
        rep = overexpression_scan(Partition(rng.integers(0, 8, 100)), rng.integers(0, 10, 100), 0.01)
        rejected += rep.n_rejected
        tests += len(rep.rows)
    assert rejected / tests <= 0.01
