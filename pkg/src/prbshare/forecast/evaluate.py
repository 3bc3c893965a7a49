"""Walk-forward evaluation, grid search and model selection."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from ..ingest import PrbSeries
from .arima import fit_arima, forecast_arima
from .baselines import ForecastError, predict_ma, predict_mm, predict_naive, rmse
from .ets import walk_forward_ets
from .mlp import fit_mlp, predict_sliding

KINDS = ("Naive", "MA", "MM", "ARIMA", "ETS", "MLP")
_KIND_ORDER = {k: i for i, k in enumerate(KINDS)}
_REQUIRED = {
    "Naive": ("offset",),
    "MA": ("window",),
    "MM": ("window",),
    "ARIMA": ("order",),
    "ETS": ("trend",),
    "MLP": ("n_inputs", "n_nodes", "epochs", "batch_size"),
}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: Mapping = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KIND_ORDER:
            raise ForecastError(f"unknown model kind {self.kind!r}")
        missing = [k for k in _REQUIRED[self.kind] if k not in self.params]
        if missing:
            raise ForecastError(f"{self.kind} spec missing {', '.join(missing)}")
        p = self.params
        for key in ("offset", "window", "n_inputs", "n_nodes", "epochs", "batch_size"):
            if key in p and int(p[key]) < 1:
                raise ForecastError(f"{self.kind} {key} must be >= 1")
        if self.kind == "ARIMA":
            order = p["order"]
            if len(order) != 3 or min(order) < 0:
                raise ForecastError("ARIMA order must be three non-negative integers")

    def params_key(self) -> str:
        return json.dumps(self.params, sort_keys=True)

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.params_key())

    def label(self) -> str:
        return f"{self.kind}{self.params_key()}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelSpec":
        if not isinstance(d, Mapping) or "kind" not in d:
            raise ForecastError(f"not a model spec: {d!r}")
        return cls(kind=d["kind"], params=dict(d.get("params", {})), seed=int(d.get("seed", 0)))


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.66

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ForecastError("train_fraction must lie in (0, 1)")

    def split_index(self, n: int) -> int:
        return int(math.floor(self.train_fraction * n))


@dataclass(frozen=True)
class FitReport:
    spec: ModelSpec
    rmse: float
    predictions: tuple
    observed: tuple
    train_len: int
    test_len: int

    def to_dict(self) -> dict:
        return {"kind": self.spec.kind, "params": dict(self.spec.params), "rmse": self.rmse,
                "train_len": self.train_len, "test_len": self.test_len}


@dataclass(frozen=True)
class Failure:
    spec: ModelSpec
    reason: str

    def to_dict(self) -> dict:
        return {"kind": self.spec.kind, "params": dict(self.spec.params), "error": self.reason}


@dataclass(frozen=True)
class SearchResult:
    """Successful reports ranked by RMSE, plus the specs that failed."""

    reports: tuple
    failures: tuple = ()

    def __iter__(self):
        return iter(self.reports)

    def __len__(self):
        return len(self.reports)

    def __getitem__(self, i):
        return self.reports[i]


def _walk_predictions(x: np.ndarray, split: int, spec: ModelSpec) -> np.ndarray:
    p = spec.params
    n = len(x)
    if spec.kind == "Naive":
        return np.array([predict_naive(x[:i], int(p["offset"])) for i in range(split, n)])
    if spec.kind in ("MA", "MM"):
        fn = predict_ma if spec.kind == "MA" else predict_mm
        w, off = int(p["window"]), int(p.get("offset", 1))
        return np.array([fn(x[:i], w, off) for i in range(split, n)])
    if spec.kind == "ARIMA":
        order = [int(v) for v in p["order"]]
        trend = p.get("trend", "c")
        out = np.empty(n - split)
        start = None
        for k, i in enumerate(range(split, n)):
            state = fit_arima(x[:i], *order, trend=trend, start=start)
            start = state.params
            out[k] = forecast_arima(state, x[:i])
        return out
    if spec.kind == "ETS":
        if p.get("seasonal") not in (None, "None", "none"):
            raise ForecastError("seasonal ETS is not supported")
        return walk_forward_ets(x, split, trend=p["trend"], damped=bool(p.get("damped", False)))
    # MLP: train once on the training split, then slide over the test segment
    state = fit_mlp(x[:split], int(p["n_inputs"]), int(p["n_nodes"]), int(p["epochs"]),
                    int(p["batch_size"]), spec.seed)
    return predict_sliding(state, x, split)


def walk_forward(series, spec: ModelSpec, split: SplitConfig = SplitConfig()) -> FitReport:
    """One-step walk-forward evaluation over the held-out tail of ``series``."""
    x = series.as_array() if isinstance(series, PrbSeries) else np.asarray(series, dtype=float)
    n = len(x)
    cut = split.split_index(n)
    if cut < 1 or cut >= n:
        raise ForecastError("split leaves an empty train or test segment")
    preds = np.asarray(_walk_predictions(x, cut, spec), dtype=float)
    if not np.all(np.isfinite(preds)):
        raise ForecastError(f"{spec.kind} produced non-finite predictions")
    observed = x[cut:]
    return FitReport(spec=spec, rmse=rmse(observed, preds), predictions=tuple(map(float, preds)),
                     observed=tuple(map(float, observed)), train_len=cut, test_len=n - cut)


def _evaluate(series, spec, split):
    try:
        return walk_forward(series, spec, split)
    except (ForecastError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return Failure(spec, f"{type(exc).__name__}: {exc}")


def grid_search(series, grid: Sequence[ModelSpec], split: SplitConfig = SplitConfig(),
                workers: int = 1) -> SearchResult:
    """Evaluate every spec; rank successes by (rmse, kind order, params)."""
    grid = list(grid)
    if not grid:
        raise ForecastError("empty model grid")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _evaluate(series, s, split), grid))
    else:
        results = [_evaluate(series, s, split) for s in grid]
    reports = sorted((r for r in results if isinstance(r, FitReport)),
                     key=lambda r: (r.rmse,) + r.spec.sort_key())
    failures = sorted((r for r in results if isinstance(r, Failure)), key=lambda f: f.spec.sort_key())
    return SearchResult(reports=tuple(reports), failures=tuple(failures))


def select_model(reports: Iterable[FitReport]) -> ModelSpec:
    ranked = list(reports)
    if not ranked:
        raise ForecastError("no successful model to select")
    return ranked[0].spec


# -- grid files -----------------------------------------------------------

BUNDLED_GRIDS = ("lte_hour", "nr_hour", "lte_minute", "nr_minute")


def parse_grid(data) -> list[ModelSpec]:
    if not isinstance(data, list):
        raise ForecastError("grid file must hold a JSON array of model specs")
    return [ModelSpec.from_dict(d) for d in data]


def load_grid(source) -> list[ModelSpec]:
    """Load a grid from a JSON file path or a bundled grid name (``lte_hour`` ...)."""
    if isinstance(source, str) and source in BUNDLED_GRIDS:
        text = resources.files("prbshare.data.grids").joinpath(f"{source}.json").read_text()
    else:
        text = Path(source).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ForecastError(f"invalid grid JSON: {exc}") from None
    return parse_grid(data)


def statistical_only(grid: Sequence[ModelSpec]) -> list[ModelSpec]:
    return [s for s in grid if s.kind != "MLP"]


def write_predictions(report: FitReport, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_index", "observed", "predicted"])
        for i, (o, p) in enumerate(zip(report.observed, report.predictions)):
            w.writerow([report.train_len + i, repr(o), repr(p)])


def read_predictions(path) -> tuple[np.ndarray, np.ndarray]:
    obs, pred = [], []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            obs.append(float(row["observed"]))
            pred.append(float(row["predicted"]))
    return np.array(obs), np.array(pred)
