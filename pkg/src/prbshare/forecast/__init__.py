from .arima import ArimaState, fit_arima, forecast_arima
from .baselines import ForecastError, predict_ma, predict_mm, predict_naive, rmse
from .ets import EtsState, fit_ets, forecast_ets, walk_forward_ets
from .evaluate import (
    KINDS,
    Failure,
    FitReport,
    ModelSpec,
    SearchResult,
    SplitConfig,
    grid_search,
    load_grid,
    parse_grid,
    select_model,
    statistical_only,
    walk_forward,
)
from .mlp import MlpState, fit_mlp, predict_mlp, predict_sliding

__all__ = [
    "ArimaState", "EtsState", "Failure", "FitReport", "ForecastError", "KINDS", "MlpState",
    "ModelSpec", "SearchResult", "SplitConfig", "fit_arima", "fit_ets", "fit_mlp",
    "forecast_arima", "forecast_ets", "grid_search", "load_grid", "parse_grid", "predict_ma",
    "predict_mlp", "predict_mm", "predict_sliding", "predict_naive", "rmse", "select_model", "statistical_only",
    "walk_forward", "walk_forward_ets",
]
