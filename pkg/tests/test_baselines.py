import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prbshare.forecast import ForecastError, predict_ma, predict_mm, predict_naive, rmse

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_rmse_example():
    assert rmse([1, 2, 3], [2, 2, 2]) == pytest.approx(math.sqrt(2 / 3))
    with pytest.raises(ForecastError):
        rmse([1], [1, 2])
    with pytest.raises(ForecastError):
        rmse([], [])


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=1, max_size=30), st.data())
def test_rmse_properties(x, data):
    e = data.draw(st.lists(st.floats(-100, 100), min_size=len(x), max_size=len(x)))
    x, e = np.array(x), np.array(e)
    assert rmse(x, x) == 0
    assert rmse(x, x + e) == pytest.approx(rmse(x, x - e), rel=1e-9, abs=1e-9)


def test_predictors():
    h = [1, 2, 3, 4]
    assert predict_naive(h) == 4
    assert predict_naive(h, 2) == 3
    assert predict_ma(h, 2) == 3.5
    assert predict_ma(h, 1) == 4
    assert predict_mm([1, 9, 2], 3) == 2
    assert predict_mm(h, 2) == 3.5
    assert predict_ma([1, 2, 3, 4, 5, 6], 2, offset=2) == 4.0
    with pytest.raises(ForecastError):
        predict_ma(h, 5)
    with pytest.raises(ForecastError):
        predict_naive([], 1)


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=1, max_size=20))
def test_window_one_is_naive(h):
    assert predict_ma(h, 1) == predict_naive(h, 1) == predict_mm(h, 1)
