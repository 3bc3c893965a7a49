"""Persistence, moving-average and moving-median forecasts plus RMSE."""

from __future__ import annotations

import math

import numpy as np


class ForecastError(ValueError):
    """Invalid model input or a fit that cannot produce a usable forecast."""


def rmse(observed, predicted) -> float:
    f = np.asarray(observed, dtype=float)
    fh = np.asarray(predicted, dtype=float)
    if f.shape != fh.shape:
        raise ForecastError(f"length mismatch: {f.shape} vs {fh.shape}")
    if f.size == 0:
        raise ForecastError("rmse of empty sequences")
    return math.sqrt(float(np.mean((f - fh) ** 2)))


def _lagged(history, window: int, offset: int) -> np.ndarray:
    # values at history[-offset], history[-2*offset], ... (window of them)
    if window < 1 or offset < 1:
        raise ForecastError("window and offset must be >= 1")
    h = np.asarray(history, dtype=float)
    need = window * offset
    if len(h) < need:
        raise ForecastError(f"need {need} past values, have {len(h)}")
    return h[len(h) - need::offset] if offset > 1 else h[len(h) - window:]


def predict_naive(history, offset: int = 1) -> float:
    """Persistence forecast: the value ``offset`` steps back."""
    if offset < 1:
        raise ForecastError("offset must be >= 1")
    if len(history) < offset:
        raise ForecastError(f"need {offset} past values, have {len(history)}")
    return float(history[len(history) - offset])


def predict_ma(history, window: int, offset: int = 1) -> float:
    vals = _lagged(history, window, offset)
    if window == 1:
        return float(vals[0])
    return float(np.mean(vals))


def predict_mm(history, window: int, offset: int = 1) -> float:
    # np.median averages the two middle order statistics for even windows
    vals = _lagged(history, window, offset)
    if window == 1:
        return float(vals[0])
    return float(np.median(vals))
