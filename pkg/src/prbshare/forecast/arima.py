"""ARIMA(p, d, q) fitted by conditional sum of squares.

Residuals before the first ``p`` differenced observations are taken as zero.
The residual recursion and its parameter derivatives are all linear filters
through ``1 + theta(B)``, so the CSS gradient is exact and cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .baselines import ForecastError

_MA_BOUND = 0.99
TRENDS = {"c": True, "constant": True, "n": False, "none": False, None: False}


@dataclass(frozen=True)
class ArimaState:
    p: int
    d: int
    q: int
    constant: float
    ar: tuple
    ma: tuple
    with_constant: bool
    css: float
    residuals: tuple  # last max(q, 1) residuals of the training fit

    @property
    def params(self) -> np.ndarray:
        head = [self.constant] if self.with_constant else []
        return np.array(head + list(self.ar) + list(self.ma), dtype=float)


def _split(theta, p, q, with_constant):
    i = 0
    c = 0.0
    if with_constant:
        c = theta[0]
        i = 1
    return c, theta[i:i + p], theta[i + p:i + p + q]


def _residuals(w: np.ndarray, c, phi, theta_ma) -> np.ndarray:
    """One-step residuals of the differenced series from index p onward."""
    p = len(phi)
    r = w[p:] - c
    for i, ph in enumerate(phi, start=1):
        r = r - ph * w[p - i:len(w) - i]
    if len(theta_ma):
        return lfilter([1.0], np.r_[1.0, theta_ma], r)
    return r


def _css_and_grad(theta, w, p, q, with_constant):
    c, phi, ma = _split(theta, p, q, with_constant)
    e = _residuals(w, c, phi, ma)
    css = float(e @ e)
    a = np.r_[1.0, ma]
    filt = (lambda s: lfilter([1.0], a, s)) if q else (lambda s: s)
    grads = []
    if with_constant:
        grads.append(filt(-np.ones_like(e)))
    for i in range(1, p + 1):
        grads.append(filt(-w[p - i:len(w) - i]))
    for j in range(1, q + 1):
        shifted = np.r_[np.zeros(j), e[:-j]] if j < len(e) else np.zeros_like(e)
        grads.append(filt(-shifted))
    g = np.array([2.0 * float(e @ de) for de in grads])
    return css, g


def fit_arima(train, p: int, d: int, q: int, trend="c", start: Optional[np.ndarray] = None) -> ArimaState:
    """Fit by minimising the CSS; ``start`` warm-starts the optimizer."""
    if min(p, d, q) < 0:
        raise ForecastError("ARIMA orders must be >= 0")
    if trend not in TRENDS:
        raise ForecastError(f"unknown trend {trend!r}")
    with_constant = TRENDS[trend]
    y = np.asarray(train, dtype=float)
    if len(y) <= p + d + q + 5:
        raise ForecastError(f"ARIMA({p},{d},{q}) needs more than {p + d + q + 5} points, have {len(y)}")
    w = np.diff(y, n=d) if d else y
    n_par = int(with_constant) + p + q
    if n_par == 0:
        theta = np.zeros(0)
        e0 = _residuals(w, 0.0, (), ())
        css = float(e0 @ e0)
    else:
        if start is not None and len(start) == n_par:
            x0 = np.asarray(start, dtype=float)
        else:
            x0 = np.zeros(n_par)
            if with_constant:
                x0[0] = float(np.mean(w))
        bounds = [(None, None)] * (int(with_constant) + p) + [(-_MA_BOUND, _MA_BOUND)] * q
        with np.errstate(over="ignore", invalid="ignore"):
            res = minimize(_css_and_grad, x0, args=(w, p, q, with_constant), jac=True,
                           method="L-BFGS-B", bounds=bounds)
        theta, css = res.x, float(res.fun)
    if not math.isfinite(css) or not np.all(np.isfinite(theta)):
        raise ForecastError("non-finite CSS objective during ARIMA fit")
    c, phi, ma = _split(theta, p, q, with_constant)
    e = _residuals(w, c, phi, ma)
    tail = e[-max(q, 1):] if len(e) else np.zeros(max(q, 1))
    return ArimaState(p=p, d=d, q=q, constant=float(c), ar=tuple(map(float, phi)),
                      ma=tuple(map(float, ma)), with_constant=with_constant, css=css,
                      residuals=tuple(map(float, tail)))


def forecast_arima(state: ArimaState, history) -> float:
    """One-step forecast after ``history`` using the fitted coefficients."""
    y = np.asarray(history, dtype=float)
    p, d, q = state.p, state.d, state.q
    if len(y) < max(p + d, 1):
        raise ForecastError(f"need at least {max(p + d, 1)} points of history, have {len(y)}")
    diffs = [y]
    for _ in range(d):
        diffs.append(np.diff(diffs[-1]))
    w = diffs[-1]
    e = _residuals(w, state.constant, state.ar, state.ma) if q else np.zeros(0)
    nxt = state.constant
    for i, ph in enumerate(state.ar, start=1):
        nxt += ph * w[-i]
    for j, th in enumerate(state.ma, start=1):
        if j <= len(e):
            nxt += th * e[-j]
    # undo differencing: each level adds its own last value
    for k in range(d - 1, -1, -1):
        nxt = nxt + diffs[k][-1]
    if not math.isfinite(nxt):
        raise ForecastError("non-finite ARIMA forecast")
    return float(nxt)
