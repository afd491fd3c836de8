import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrfilter.correlation import (
    CorrelationMatrix, WeightScheme, mean_offdiagonal, pearson, time_weights, to_distance,
)
from corrfilter.errors import DataError, OutOfRangeCorrelation, ZeroVariance


def test_uniform_matches_numpy():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((6, 200))
    np.testing.assert_allclose(pearson(x).values, np.corrcoef(x), atol=1e-12)


def test_exponential_weights_normalised():
    w = time_weights(300, WeightScheme.exponential(100))
    assert abs(w.sum() - 1) < 1e-12
    np.testing.assert_allclose(w[-1] / w[-2], np.exp(1 / 100))
    assert WeightScheme.for_window(1000).theta == pytest.approx(1000 / 3)


def test_weighted_pearson_by_definition():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((3, 50))
    w = time_weights(50, WeightScheme.exponential(10))
    mu = x @ w
    xc = x - mu[:, None]
    cov = (xc * w) @ xc.T
    ref = cov / np.sqrt(np.outer(np.diag(cov), np.diag(cov)))
    np.testing.assert_allclose(pearson(x, WeightScheme.exponential(10)).values, ref, atol=1e-12)


def test_zero_variance():
    x = np.vstack([np.ones(10), np.arange(10.0)])
    with pytest.raises(ZeroVariance):
        pearson(x)


def test_too_short():
    with pytest.raises(DataError):
        pearson(np.random.default_rng(0).standard_normal((2, 2)))


def test_distance_values():
    c = CorrelationMatrix(np.array([[1.0, -1.0], [-1.0, 1.0]]), ("A", "B"))
    d = to_distance(c).values
    assert d[0, 1] == pytest.approx(2.0)
    assert d[0, 0] == 0.0


def test_out_of_range():
    with pytest.raises(OutOfRangeCorrelation):
        to_distance(CorrelationMatrix(np.array([[1.0, 1.5], [1.5, 1.0]]), ("A", "B")))


@given(st.integers(0, 10_000))
def test_distance_is_metric(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((5, 20))
    d = to_distance(pearson(x)).values
    assert np.all(d >= 0) and np.allclose(d, d.T)
    for i in range(5):
        for j in range(5):
            assert np.all(d[i, j] <= d[i] + d[:, j] + 1e-12)


def test_mean_offdiagonal():
    c = CorrelationMatrix(np.array([[1, 0.2, 0.4], [0.2, 1, 0.6], [0.4, 0.6, 1.0]]), ("A", "B", "C"))
    assert mean_offdiagonal(c) == pytest.approx(0.4)
