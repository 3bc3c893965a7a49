"""One-hidden-layer ReLU network trained with Adam, in plain numpy.

Inputs and targets are z-scored with the training mean and std before
training; forecasts are mapped back to PRB units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import ForecastError

ADAM_LR = 1e-3
ADAM_B1 = 0.9
ADAM_B2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class MlpState:
    w1: np.ndarray  # (n_inputs, n_nodes)
    b1: np.ndarray  # (n_nodes,)
    w2: np.ndarray  # (n_nodes,)
    b2: float
    n_inputs: int
    loc: float
    scale: float


def lag_pairs(x, n_inputs: int):
    """Supervised pairs: previous ``n_inputs`` values -> next value."""
    x = np.asarray(x, dtype=float)
    if len(x) < n_inputs + 1:
        raise ForecastError(f"need more than {n_inputs} points for lag pairs, have {len(x)}")
    idx = np.arange(n_inputs)[None, :] + np.arange(len(x) - n_inputs)[:, None]
    return x[idx], x[n_inputs:]


def init_params(n_inputs: int, n_nodes: int, rng: np.random.Generator):
    # He-uniform: U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases
    lim1 = np.sqrt(6.0 / n_inputs)
    lim2 = np.sqrt(6.0 / n_nodes)
    return {
        "w1": rng.uniform(-lim1, lim1, size=(n_inputs, n_nodes)),
        "b1": np.zeros(n_nodes),
        "w2": rng.uniform(-lim2, lim2, size=n_nodes),
        "b2": np.zeros(1),
    }


def forward(params, X):
    z = X @ params["w1"] + params["b1"]
    h = np.maximum(z, 0.0)
    return h @ params["w2"] + params["b2"][0], (z, h)


def loss_and_grad(params, X, y):
    """Mean squared error and its gradient by backpropagation."""
    out, (z, h) = forward(params, X)
    err = out - y
    n = len(y)
    loss = float(np.mean(err ** 2))
    dout = 2.0 * err / n
    grads = {
        "w2": h.T @ dout,
        "b2": np.array([dout.sum()]),
    }
    dz = np.outer(dout, params["w2"]) * (z > 0)
    grads["w1"] = X.T @ dz
    grads["b1"] = dz.sum(axis=0)
    return loss, grads


def fit_mlp(train, n_inputs: int, n_nodes: int, epochs: int, batch_size: int, seed: int) -> MlpState:
    if min(n_inputs, n_nodes, epochs, batch_size) < 1:
        raise ForecastError("MLP sizes must all be >= 1")
    x = np.asarray(train, dtype=float)
    if len(x) <= n_inputs + 1:
        raise ForecastError(f"MLP with {n_inputs} inputs needs more than {n_inputs + 1} points")
    loc = float(x.mean())
    scale = float(x.std()) or 1.0
    X, y = lag_pairs((x - loc) / scale, n_inputs)
    rng = np.random.default_rng(seed)
    params = init_params(n_inputs, n_nodes, rng)
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(v) for k, v in params.items()}
    t = 0
    for _ in range(epochs):
        order = rng.permutation(len(y))
        for start in range(0, len(y), batch_size):
            batch = order[start:start + batch_size]
            _, g = loss_and_grad(params, X[batch], y[batch])
            t += 1
            for k in params:
                m[k] = ADAM_B1 * m[k] + (1 - ADAM_B1) * g[k]
                v[k] = ADAM_B2 * v[k] + (1 - ADAM_B2) * g[k] ** 2
                mhat = m[k] / (1 - ADAM_B1 ** t)
                vhat = v[k] / (1 - ADAM_B2 ** t)
                params[k] = params[k] - ADAM_LR * mhat / (np.sqrt(vhat) + ADAM_EPS)
    if not all(np.all(np.isfinite(p)) for p in params.values()):
        raise ForecastError("MLP weights became non-finite")
    return MlpState(w1=params["w1"], b1=params["b1"], w2=params["w2"], b2=float(params["b2"][0]),
                    n_inputs=n_inputs, loc=loc, scale=scale)


def predict_mlp(state: MlpState, history) -> float:
    h = np.asarray(history, dtype=float)
    if len(h) < state.n_inputs:
        raise ForecastError(f"need {state.n_inputs} past values, have {len(h)}")
    x = (h[len(h) - state.n_inputs:] - state.loc) / state.scale
    params = {"w1": state.w1, "b1": state.b1, "w2": state.w2, "b2": np.array([state.b2])}
    out, _ = forward(params, x[None, :])
    return float(out[0] * state.scale + state.loc)


def predict_sliding(state: MlpState, series, start: int) -> np.ndarray:
    """One-step forecasts for series[start:], each from the values before it."""
    x = (np.asarray(series, dtype=float) - state.loc) / state.scale
    if start < state.n_inputs:
        raise ForecastError("not enough history before the first forecast")
    X, _ = lag_pairs(x, state.n_inputs)
    X = X[start - state.n_inputs:]
    params = {"w1": state.w1, "b1": state.b1, "w2": state.w2, "b2": np.array([state.b2])}
    out, _ = forward(params, X)
    return out * state.scale + state.loc
