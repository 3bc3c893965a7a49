import numpy as np
import pytest

from oracles import finite_difference_grad, max_relative_error
from prbshare.forecast import ForecastError, fit_mlp, predict_mlp, predict_sliding
from prbshare.forecast.mlp import init_params, lag_pairs, loss_and_grad


def test_lag_pairs():
    X, y = lag_pairs([1, 2, 3, 4], 2)
    assert X.tolist() == [[1, 2], [2, 3]]
    assert y.tolist() == [3, 4]


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    params = init_params(3, 7, rng)
    params["b1"] = rng.normal(size=7)
    params["b2"] = rng.normal(size=1)
    X, y = rng.normal(size=(16, 3)), rng.normal(size=16)
    _, g = loss_and_grad(params, X, y)
    num = finite_difference_grad(lambda p: loss_and_grad(p, X, y)[0], params)
    assert max_relative_error(g, num) < 1e-4


def test_identity_map():
    # slow signal: the next value is nearly the current one
    data = 5 + 3 * np.sin(2 * np.pi * np.arange(600) / 100)
    st = fit_mlp(data[:500], 1, 20, 200, 32, seed=0)
    preds = predict_sliding(st, data, 500)
    err = np.sqrt(np.mean((preds - data[500:]) ** 2))
    assert err < 0.1 * np.std(data)


def test_seed_determinism():
    x = np.sin(np.arange(120) / 5)
    a = fit_mlp(x, 3, 8, 5, 16, seed=9)
    b = fit_mlp(x, 3, 8, 5, 16, seed=9)
    assert np.array_equal(a.w1, b.w1) and np.array_equal(a.w2, b.w2) and a.b2 == b.b2


def test_sliding_matches_single():
    x = np.cos(np.arange(80) / 3) + 2
    st = fit_mlp(x[:60], 4, 6, 3, 8, seed=2)
    slid = predict_sliding(st, x, 60)
    single = [predict_mlp(st, x[:i]) for i in range(60, 80)]
    assert np.allclose(slid, single, rtol=1e-12)


def test_errors():
    with pytest.raises(ForecastError):
        fit_mlp([1.0, 2.0], 2, 3, 1, 1, 0)
    with pytest.raises(ForecastError):
        fit_mlp(np.arange(20.0), 2, 0, 1, 1, 0)
