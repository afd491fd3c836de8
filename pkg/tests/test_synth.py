import numpy as np
import pytest

from corrfilter.correlation import mean_offdiagonal, pearson
from corrfilter.ingest import detrend_market_mode, log_returns
from corrfilter.synth import SynthSpec, generate, to_prices, trading_dates


def test_shapes_and_taxonomy():
    ret, tax = generate(SynthSpec(n=30, t=200, n_sectors=5, seed=1))
    assert ret.returns.shape == (30, 200)
    assert ret.tickers[0] == "S000" and len(tax) == 30
    assert tax.supersectors == [f"SEC0{k}" for k in range(5)]
    assert tax.labels(ret.tickers).tolist() == (np.arange(30) % 5).tolist()
    assert tax.entries["S003"] == ("SEC03", "SEC03-I")


def test_deterministic():
    a, _ = generate(SynthSpec(n=20, t=100, seed=4))
    b, _ = generate(SynthSpec(n=20, t=100, seed=4))
    c, _ = generate(SynthSpec(n=20, t=100, seed=5))
    assert np.array_equal(a.returns, b.returns)
    assert not np.array_equal(a.returns, c.returns)


def test_null_panel_uncorrelated():
    spec = SynthSpec(n=60, t=2000, market_loading=(0.0, 0.0), sector_loading=(0.0, 0.0), seed=2)
    ret, _ = generate(spec)
    assert abs(mean_offdiagonal(pearson(ret))) <= 0.02


@pytest.mark.parametrize("noise", ["gaussian", "student"])
def test_detrending_removes_market_mode(noise):
    ret, _ = generate(SynthSpec(seed=3, noise=noise))
    before = mean_offdiagonal(pearson(ret))
    after = mean_offdiagonal(pearson(detrend_market_mode(ret)[0]))
    assert before > 0.5
    assert after <= 0.6 * before


def test_price_round_trip():
    ret, _ = generate(SynthSpec(n=5, t=50, n_sectors=2, seed=0))
    prices = to_prices(ret)
    assert prices.dates[1:] == ret.dates and prices.dates[0] < ret.dates[0]
    back = log_returns(prices)
    np.testing.assert_allclose(back.returns, ret.returns, atol=1e-12)


def test_trading_dates_skip_weekends():
    days = trading_dates(6, "2021-01-01")
    assert days == ["2021-01-01", "2021-01-04", "2021-01-05", "2021-01-06", "2021-01-07", "2021-01-08"]


def test_invalid_specs():
    for bad in (dict(n=0), dict(n_sectors=0), dict(market_loading=(2, 1)), dict(idio_vol=0),
                dict(noise="cauchy"), dict(noise="student", df=2)):
        with pytest.raises(ValueError):
            SynthSpec(**bad)
