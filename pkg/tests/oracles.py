"""Independent reference computations used by the tests.

Nothing here calls into the package's solver or optimizer code paths.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def coeffs(variant, sa, sb):
    """(m_a, k_a, m_b, k_b) written out from the closed-form definitions."""
    if variant == "max":
        return 1 / sa[2], 1 / sa[2] ** 2, 1 / sb[2], 1 / sb[2] ** 2
    (mu_a, v_a, _), (mu_b, v_b, _) = sa, sb
    return (1 / mu_a + v_a / mu_a ** 3, 1 / mu_a ** 2 + 3 * v_a / mu_a ** 4,
            1 / mu_b + v_b / mu_b ** 3, 1 / mu_b ** 2 + 3 * v_b / mu_b ** 4)


def objective(variant, gamma, sa, sb, n_a, n_b):
    if variant == "max":
        ma, mb = sa[2], sb[2]
        return gamma * ((n_a - ma) / ma) ** 2 + (1 - gamma) * ((n_b - mb) / mb) ** 2
    m_a, k_a, m_b, k_b = coeffs(variant, sa, sb)
    c_a = n_a * k_a - 2 * m_a
    c_b = n_b * k_b - 2 * m_b
    return 1 + gamma * n_a * c_a + (1 - gamma) * n_b * c_b


def grid_minimum(variant, gamma, sa, sb, pool, step=0.01):
    """Minimum over the step-grid of feasible (n_a, n_b), exploiting separability."""
    g = np.arange(0.0, pool + 1e-12, step)
    fa = objective(variant, gamma, sa, sb, g, 0.0) - objective(variant, gamma, sa, sb, 0.0, 0.0)
    fb = objective(variant, gamma, sa, sb, 0.0, g)
    prefix = np.minimum.accumulate(fb)
    cap = np.floor((pool - g) / step + 1e-9).astype(int)
    cap = np.clip(cap, 0, len(g) - 1)
    return float(np.min(fa + prefix[cap]))


def integer_argmin(variant, gamma, sa, sb, pool, rel_tie=1e-12):
    """Exhaustive search over integer pairs with n_a + n_b <= pool.

    Ties (within ``rel_tie``) go to larger n_a, then larger n_b.
    """
    budget = int(np.floor(pool + 1e-9))
    a, b = np.meshgrid(np.arange(budget + 1), np.arange(budget + 1), indexing="ij")
    ok = a + b <= budget
    a, b = a[ok].astype(float), b[ok].astype(float)
    vals = objective(variant, gamma, sa, sb, a, b)
    best = vals.min()
    tied = np.flatnonzero(vals <= best + rel_tie * max(1.0, abs(best)))
    order = sorted(tied, key=lambda i: (-a[i], -b[i]))
    i = order[0]
    return int(a[i]), int(b[i]), float(vals[i])


def finite_difference_grad(loss_fn, params, h=1e-5):
    """Central differences for every entry of every array in ``params``."""
    grads = {}
    for k, arr in params.items():
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + h
            up = loss_fn(params)
            arr[idx] = orig - h
            down = loss_fn(params)
            arr[idx] = orig
            g[idx] = (up - down) / (2 * h)
        grads[k] = g
    return grads


def max_relative_error(analytic: dict, numeric: dict, floor=1e-8) -> float:
    worst = 0.0
    for k in analytic:
        a, n = np.asarray(analytic[k]), np.asarray(numeric[k])
        rel = np.abs(a - n) / np.maximum(np.abs(a) + np.abs(n), floor)
        worst = max(worst, float(rel.max()))
    return worst


def simulate_ar1(phi, n, seed, sigma=1.0):
    rng = np.random.default_rng(seed)
    x = np.zeros(n)
    eps = rng.normal(0, sigma, n)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + eps[t]
    return x


def exact_objective(variant, gamma, sa, sb, n_a, n_b):
    """Objective in rational arithmetic from the float inputs."""
    F = Fraction
    g, n_a, n_b = F(gamma), F(n_a), F(n_b)
    if variant == "max":
        ma, mb = F(sa[2]), F(sb[2])
        return g * ((n_a - ma) / ma) ** 2 + (1 - g) * ((n_b - mb) / mb) ** 2
    (mu_a, v_a, _), (mu_b, v_b, _) = [(F(s[0]), F(s[1]), None) for s in (sa, sb)]
    m_a, k_a = 1 / mu_a + v_a / mu_a ** 3, 1 / mu_a ** 2 + 3 * v_a / mu_a ** 4
    m_b, k_b = 1 / mu_b + v_b / mu_b ** 3, 1 / mu_b ** 2 + 3 * v_b / mu_b ** 4
    return 1 + g * n_a * (n_a * k_a - 2 * m_a) + (1 - g) * n_b * (n_b * k_b - 2 * m_b)


def integer_exact_minimizers(variant, gamma, sa, sb, pool):
    """Exact minimum over integer pairs and every pair attaining it.

    Float enumeration narrows the field; survivors are compared exactly.
    """
    budget = int(np.floor(pool + 1e-9))
    a, b = np.meshgrid(np.arange(budget + 1), np.arange(budget + 1), indexing="ij")
    ok = a + b <= budget
    a, b = a[ok], b[ok]
    vals = objective(variant, gamma, sa, sb, a.astype(float), b.astype(float))
    near = np.flatnonzero(vals <= vals.min() + 1e-9 * max(1.0, abs(vals.min())))
    exact = {(int(a[i]), int(b[i])): exact_objective(variant, gamma, sa, sb, int(a[i]), int(b[i]))
             for i in near}
    best = min(exact.values())
    return best, sorted(k for k, v in exact.items() if v == best)
