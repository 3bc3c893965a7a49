"""Holt-family exponential smoothing with grid-fitted smoothing parameters.

All candidate (alpha, beta, phi) combinations are run side by side as numpy
vectors.  Because the in-sample SSE accumulates one step at a time, a single
pass also yields the refit-at-every-step forecasts used in walk-forward
validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .baselines import ForecastError

ALPHAS = np.round(np.arange(0.01, 1.0, 0.02), 2)
BETAS = ALPHAS
PHIS = np.round(np.arange(0.80, 0.99, 0.02), 2)

_TREND_ALIASES = {None: None, "none": None, "None": None,
                  "add": "add", "additive": "add",
                  "mul": "mul", "multiplicative": "mul"}


def normalize_trend(trend):
    try:
        return _TREND_ALIASES[trend]
    except (KeyError, TypeError):
        raise ForecastError(f"unknown ETS trend {trend!r}") from None


@dataclass(frozen=True)
class EtsState:
    trend: Optional[str]
    damped: bool
    alpha: float
    beta: float
    phi: float
    level: float
    slope: float
    sse: float


def _candidates(trend, damped, alpha=None, beta=None, phi=None):
    alphas = ALPHAS if alpha is None else np.array([alpha], dtype=float)
    if trend is None:
        betas = np.array([0.0])
        phis = np.array([1.0])
    else:
        betas = BETAS if beta is None else np.array([beta], dtype=float)
        if damped:
            phis = PHIS if phi is None else np.array([phi], dtype=float)
        else:
            phis = np.array([1.0])
    a, b, f = np.meshgrid(alphas, betas, phis, indexing="ij")
    return a.ravel(), b.ravel(), f.ravel()


class _Grid:
    """Parallel recursions for every candidate parameter triple."""

    def __init__(self, y0, y1, trend, damped, **fixed):
        self.trend = trend
        self.alpha, self.beta, self.phi = _candidates(trend, damped, **fixed)
        n = self.alpha.size
        self.level = np.full(n, float(y0))
        if trend == "add":
            self.slope = np.full(n, float(y1 - y0))
        elif trend == "mul":
            self.slope = np.full(n, float(y1 / y0))
        else:
            self.slope = np.zeros(n)
        self.sse = np.zeros(n)

    def forecasts(self) -> np.ndarray:
        if self.trend == "add":
            return self.level + self.phi * self.slope
        if self.trend == "mul":
            return self.level * self.slope ** self.phi
        return self.level.copy()

    def best(self) -> int:
        sse = np.where(np.isfinite(self.sse), self.sse, np.inf)
        i = int(np.argmin(sse))
        if not math.isfinite(sse[i]):
            raise ForecastError("ETS fit diverged for every parameter candidate")
        return i

    def update(self, y: float) -> None:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            yhat = self.forecasts()
            self.sse += (y - yhat) ** 2
            a, b, f = self.alpha, self.beta, self.phi
            new_level = a * y + (1 - a) * yhat
            if self.trend == "add":
                self.slope = b * (new_level - self.level) + (1 - b) * f * self.slope
            elif self.trend == "mul":
                self.slope = b * (new_level / self.level) + (1 - b) * self.slope ** f
            self.level = new_level


def _check(y, trend):
    if len(y) < 10:
        raise ForecastError(f"ETS needs at least 10 points, have {len(y)}")
    if not np.all(np.isfinite(y)):
        raise ForecastError("ETS input contains non-finite values")
    if trend == "mul" and np.any(y <= 0):
        raise ForecastError("multiplicative trend requires strictly positive data")


def fit_ets(train, trend=None, damped: bool = False, alpha: Optional[float] = None,
            beta: Optional[float] = None, phi: Optional[float] = None) -> EtsState:
    """Pick (alpha, beta, phi) minimising in-sample one-step SSE over a fixed grid.

    Passing ``alpha``/``beta``/``phi`` pins that parameter instead of searching.
    """
    trend = normalize_trend(trend)
    y = np.asarray(train, dtype=float)
    _check(y, trend)
    grid = _Grid(y[0], y[1], trend, damped, alpha=alpha, beta=beta, phi=phi)
    for v in y[1:]:
        grid.update(v)
    i = grid.best()
    return EtsState(trend=trend, damped=bool(damped and trend is not None),
                    alpha=float(grid.alpha[i]), beta=float(grid.beta[i]), phi=float(grid.phi[i]),
                    level=float(grid.level[i]), slope=float(grid.slope[i]), sse=float(grid.sse[i]))


def forecast_ets(state: EtsState) -> float:
    """One-step forecast from the end of the fitted sample."""
    if state.trend == "add":
        out = state.level + state.phi * state.slope
    elif state.trend == "mul":
        out = state.level * state.slope ** state.phi
    else:
        out = state.level
    if not math.isfinite(out):
        raise ForecastError("non-finite ETS forecast")
    return float(out)


def walk_forward_ets(y, split: int, trend=None, damped: bool = False) -> np.ndarray:
    """Forecasts for y[split:], each from a grid refit on y[:i].

    Equivalent to calling ``fit_ets(y[:i])`` then ``forecast_ets`` for each i.
    """
    trend = normalize_trend(trend)
    y = np.asarray(y, dtype=float)
    _check(y[:split], trend)
    if trend == "mul" and np.any(y <= 0):
        raise ForecastError("multiplicative trend requires strictly positive data")
    grid = _Grid(y[0], y[1], trend, damped)
    for v in y[1:split]:
        grid.update(v)
    out = np.empty(len(y) - split)
    for k, i in enumerate(range(split, len(y))):
        out[k] = grid.forecasts()[grid.best()]
        grid.update(y[i])
    if not np.all(np.isfinite(out)):
        raise ForecastError("non-finite ETS forecast")
    return out
