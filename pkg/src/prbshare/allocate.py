"""Two-network PRB pool partitioning.

Both objectives are separable convex quadratics of the form

    J(n_a, n_b) = 1 + g * n_a * (n_a * k_a - 2 * m_a) + (1 - g) * n_b * (n_b * k_b - 2 * m_b)

with ``m = 1/M, k = 1/M**2`` for the max-demand variant and Taylor-approximated
inverse moments ``m ~ E[1/D], k ~ E[1/D**2]`` for the expected-objective
variant.  The minimiser over ``n_a + n_b <= pool, 0 <= n <= pool`` has a closed
form, so no numerical optimizer is needed.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class AllocationError(ValueError):
    pass


class Variant(str, enum.Enum):
    MAX = "max"
    AVG = "avg"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, Variant):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise AllocationError(f"unknown variant {value!r}; expected max or avg") from None


@dataclass(frozen=True)
class DemandStats:
    mean: float
    variance: float
    maximum: float

    def __post_init__(self):
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise AllocationError(f"mean demand must be positive, got {self.mean}")
        if not self.variance >= 0:
            raise AllocationError(f"variance must be non-negative, got {self.variance}")
        # tolerate float noise from summation when all values are equal
        if not self.maximum >= self.mean * (1 - 1e-12):
            raise AllocationError(f"maximum {self.maximum} below mean {self.mean}")

    def to_dict(self) -> dict:
        return {"mean": self.mean, "variance": self.variance, "maximum": self.maximum}

    @classmethod
    def from_dict(cls, d: Mapping) -> "DemandStats":
        return cls(float(d["mean"]), float(d["variance"]), float(d["maximum"]))


@dataclass(frozen=True)
class AllocationProblem:
    pool_size: float
    gamma: float
    stats_a: DemandStats
    stats_b: DemandStats
    variant: Variant = Variant.MAX
    integer_mode: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if not 0 < self.gamma < 1:
            raise AllocationError(f"gamma must lie strictly inside (0, 1), got {self.gamma}")
        if not self.pool_size > 0:
            raise AllocationError(f"pool_size must be positive, got {self.pool_size}")

    def replace(self, **changes) -> "AllocationProblem":
        d = dict(pool_size=self.pool_size, gamma=self.gamma, stats_a=self.stats_a,
                 stats_b=self.stats_b, variant=self.variant, integer_mode=self.integer_mode)
        d.update(changes)
        return AllocationProblem(**d)

    def to_dict(self) -> dict:
        return {"pool_size": self.pool_size, "gamma": self.gamma, "variant": self.variant.value,
                "integer_mode": self.integer_mode, "stats_a": self.stats_a.to_dict(),
                "stats_b": self.stats_b.to_dict()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "AllocationProblem":
        try:
            return cls(pool_size=float(d["pool_size"]), gamma=float(d["gamma"]),
                       stats_a=DemandStats.from_dict(d["stats_a"]),
                       stats_b=DemandStats.from_dict(d["stats_b"]),
                       variant=d.get("variant", "max"),
                       integer_mode=bool(d.get("integer_mode", False)))
        except (KeyError, TypeError) as exc:
            raise AllocationError(f"malformed problem: {exc}") from None


@dataclass(frozen=True)
class AllocationResult:
    n_a: float
    n_b: float
    objective: float
    fairness: float
    constraint_active: bool
    variant: Variant = Variant.MAX

    def to_dict(self) -> dict:
        return {"n_a": self.n_a, "n_b": self.n_b, "objective": self.objective,
                "fairness": self.fairness, "constraint_active": self.constraint_active,
                "variant": self.variant.value}

    @classmethod
    def from_dict(cls, d: Mapping) -> "AllocationResult":
        return cls(float(d["n_a"]), float(d["n_b"]), float(d["objective"]), float(d["fairness"]),
                   bool(d["constraint_active"]), Variant.parse(d.get("variant", "max")))


@dataclass(frozen=True)
class EvaluationRecord:
    gamma: float
    pool_size: float
    n_a: float
    n_b: float
    objective: float
    fairness: float
    surplus_a: float
    surplus_b: float
    constraint_active: bool
    variant: Variant = Variant.MAX

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "pool_size": self.pool_size, "n_a": self.n_a, "n_b": self.n_b,
                "objective": self.objective, "fairness": self.fairness,
                "surplus_a": self.surplus_a, "surplus_b": self.surplus_b,
                "constraint_active": self.constraint_active, "variant": self.variant.value}


# -- statistics ------------------------------------------------------------

def stats_from_series(series) -> DemandStats:
    """Population mean and variance plus maximum of a strictly positive series."""
    x = np.asarray(getattr(series, "values", series), dtype=float)
    if x.size == 0:
        raise AllocationError("empty demand series")
    if np.any(x <= 0):
        raise AllocationError("demand values must be strictly positive")
    return DemandStats(mean=float(x.mean()), variance=float(x.var()), maximum=float(x.max()))


def inv_moments(stats: DemandStats) -> tuple[float, float]:
    """Second-order Taylor estimates of E[1/D] and E[1/D**2]."""
    mu, var = stats.mean, stats.variance
    if mu <= 0:
        raise AllocationError("mean must be positive")
    m = 1.0 / mu + var / mu ** 3
    k = 1.0 / mu ** 2 + 3.0 * var / mu ** 4
    return m, k


def coefficients(problem: AllocationProblem) -> tuple[float, float, float, float]:
    """(m_a, k_a, m_b, k_b) of the quadratic form for the problem's variant."""
    if problem.variant is Variant.MAX:
        ma, mb = problem.stats_a.maximum, problem.stats_b.maximum
        return 1.0 / ma, 1.0 / ma ** 2, 1.0 / mb, 1.0 / mb ** 2
    return inv_moments(problem.stats_a) + inv_moments(problem.stats_b)


def targets(problem: AllocationProblem) -> tuple[float, float]:
    """Unconstrained per-network minimisers."""
    if problem.variant is Variant.MAX:
        return problem.stats_a.maximum, problem.stats_b.maximum
    ma, ka, mb, kb = coefficients(problem)
    return ma / ka, mb / kb


def objective(problem: AllocationProblem, n_a, n_b):
    """Objective value; works elementwise on arrays."""
    g = problem.gamma
    if problem.variant is Variant.MAX:
        ma, mb = problem.stats_a.maximum, problem.stats_b.maximum
        return g * ((n_a - ma) / ma) ** 2 + (1 - g) * ((n_b - mb) / mb) ** 2
    m_a, k_a, m_b, k_b = coefficients(problem)
    return 1 + g * n_a * (n_a * k_a - 2 * m_a) + (1 - g) * n_b * (n_b * k_b - 2 * m_b)


def jain_index(n_a: float, n_b: float) -> float:
    if n_a == 0 and n_b == 0:
        raise AllocationError("Jain's index undefined for an all-zero allocation")
    s = max(abs(n_a), abs(n_b))  # rescale so tiny inputs don't underflow
    a, b = n_a / s, n_b / s
    return (a + b) ** 2 / (2.0 * (a * a + b * b))


def surplus_deficit(n_star: float, demands: Sequence[float]) -> float:
    """Mean normalised surplus (>0) or deficit (<0); -1 is total starvation."""
    d = np.asarray(demands, dtype=float)
    if d.size == 0:
        raise AllocationError("no demands to evaluate against")
    if np.any(d <= 0):
        raise AllocationError("demands must be strictly positive")
    return float(np.mean((n_star - d) / d))


# -- solver ----------------------------------------------------------------

def _continuous(problem: AllocationProblem) -> tuple[float, float, bool]:
    pool, g = problem.pool_size, problem.gamma
    t_a, t_b = targets(problem)
    t_a, t_b = min(max(t_a, 0.0), pool), min(max(t_b, 0.0), pool)
    if t_a + t_b <= pool:
        return t_a, t_b, False
    m_a, k_a, m_b, k_b = coefficients(problem)
    # stationary point of J restricted to n_a + n_b = pool
    n_a = (g * m_a + (1 - g) * (k_b * pool - m_b)) / (g * k_a + (1 - g) * k_b)
    n_a = min(max(n_a, 0.0), pool)
    return n_a, pool - n_a, True


_TIE_REL = 1e-12


def _integer(problem: AllocationProblem, a_cont: float) -> tuple[int, int]:
    budget = math.floor(problem.pool_size + 1e-9)
    _, t_b = targets(problem)
    lo = max(0, math.floor(a_cont) - 2)
    hi = min(budget, math.ceil(a_cont) + 2)
    cands = []
    for a in range(lo, hi + 1):
        cap = budget - a
        for b in {min(max(math.floor(t_b), 0), cap), min(max(math.ceil(t_b), 0), cap)}:
            cands.append((float(objective(problem, float(a), float(b))), a, b))
    # values within rounding noise of the minimum count as ties
    low = min(c[0] for c in cands)
    tol = _TIE_REL * max(1.0, abs(low))
    _, a, b = max((c for c in cands if c[0] <= low + tol), key=lambda c: (c[1], c[2]))
    return a, b


def solve(problem: AllocationProblem) -> AllocationResult:
    """Exact minimiser; in integer mode, the best whole-PRB pair.

    Integer ties go to the larger ``n_a`` (then larger ``n_b``).
    ``constraint_active`` reports whether the pool is too small for both
    unconstrained targets.
    """
    n_a, n_b, active = _continuous(problem)
    if problem.integer_mode:
        ia, ib = _integer(problem, n_a)
        n_a, n_b = float(ia), float(ib)
    fair = jain_index(n_a, n_b) if (n_a or n_b) else float("nan")
    return AllocationResult(n_a=n_a, n_b=n_b, objective=float(objective(problem, n_a, n_b)),
                            fairness=fair, constraint_active=active, variant=problem.variant)


def evaluate(problem: AllocationProblem, result: AllocationResult, demands_a, demands_b) -> EvaluationRecord:
    return EvaluationRecord(
        gamma=problem.gamma, pool_size=problem.pool_size, n_a=result.n_a, n_b=result.n_b,
        objective=result.objective, fairness=result.fairness,
        surplus_a=surplus_deficit(result.n_a, demands_a),
        surplus_b=surplus_deficit(result.n_b, demands_b),
        constraint_active=result.constraint_active, variant=result.variant,
    )


def default_gammas(step: float = 0.01) -> list[float]:
    """Closed grid step, 2*step, ... strictly inside (0, 1)."""
    if not 0 < step < 1:
        raise AllocationError(f"gamma step must lie in (0, 1), got {step}")
    n = int(math.floor(1.0 / step + 1e-9))
    gs = [round(i * step, 10) for i in range(1, n + 1)]
    return [g for g in gs if 0 < g < 1]


def gamma_sweep(stats_a: DemandStats, stats_b: DemandStats, pool_size: float, variant,
                integer_mode: bool, gammas: Iterable[float], demands_a, demands_b) -> list[EvaluationRecord]:
    gammas = list(gammas)
    if not gammas:
        raise AllocationError("no gamma values to sweep")
    bad = [g for g in gammas if not 0 < g < 1]
    if bad:
        raise AllocationError(f"gamma values outside (0, 1): {bad}")
    base = AllocationProblem(pool_size, gammas[0], stats_a, stats_b, variant, integer_mode)
    out = []
    for g in gammas:
        prob = base.replace(gamma=g)
        out.append(evaluate(prob, solve(prob), demands_a, demands_b))
    return out


SWEEP_COLUMNS = ("gamma", "n_a", "n_b", "objective", "fairness", "surplus_a", "surplus_b",
                 "constraint_active")


def write_sweep_csv(records: Sequence[EvaluationRecord], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in records:
            w.writerow([repr(r.gamma), repr(r.n_a), repr(r.n_b), repr(r.objective), repr(r.fairness),
                        repr(r.surplus_a), repr(r.surplus_b), int(r.constraint_active)])


def read_sweep_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in SWEEP_COLUMNS[:-1]:
            r[k] = float(r[k])
        r["constraint_active"] = bool(int(r["constraint_active"]))
    return rows


# -- convexity diagnostics ------------------------------------------------

@dataclass(frozen=True)
class ConvexityReport:
    hessian_diag: tuple
    hessian_offdiag: float
    diag_positive: bool
    leading_minors_ok: bool
    midpoint_ok: bool
    max_midpoint_violation: float

    @property
    def ok(self) -> bool:
        return self.diag_positive and self.leading_minors_ok and self.midpoint_ok


def hessian(problem: AllocationProblem) -> np.ndarray:
    """Analytic Hessian; diagonal because the objective is separable."""
    _, k_a, _, k_b = coefficients(problem)
    g = problem.gamma
    return np.array([[2 * g * k_a, 0.0], [0.0, 2 * (1 - g) * k_b]])


def convexity_check(problem: AllocationProblem, n_segments: int = 100, seed: int = 0,
                    tol: float = 1e-9) -> ConvexityReport:
    """Check the Hessian minors and midpoint convexity on random feasible segments."""
    h = hessian(problem)
    diag = (float(h[0, 0]), float(h[1, 1]))
    minors_ok = h[0, 0] >= 0 and float(np.linalg.det(h)) >= 0
    rng = np.random.default_rng(seed)
    pool = problem.pool_size

    def feasible(n):
        a = rng.uniform(0, pool, n)
        b = rng.uniform(0, pool - a)
        return a, b

    pa, pb = feasible(n_segments)
    qa, qb = feasible(n_segments)
    mid = objective(problem, (pa + qa) / 2, (pb + qb) / 2)
    chord = (objective(problem, pa, pb) + objective(problem, qa, qb)) / 2
    viol = float(np.max(mid - chord))
    return ConvexityReport(hessian_diag=diag, hessian_offdiag=float(h[0, 1]),
                           diag_positive=diag[0] > 0 and diag[1] > 0,
                           leading_minors_ok=bool(minors_ok), midpoint_ok=viol <= tol,
                           max_midpoint_violation=viol)


# hourly LTE / NR demand statistics of the reference measurement campaign
REFERENCE_STATS_LTE = DemandStats(mean=21.52, variance=12.37, maximum=26.31)
REFERENCE_STATS_NR = DemandStats(mean=22.80, variance=8.33, maximum=25.80)
