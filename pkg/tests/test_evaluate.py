import json

import numpy as np
import pytest

from prbshare.forecast import (
    ForecastError,
    ModelSpec,
    SplitConfig,
    grid_search,
    load_grid,
    parse_grid,
    select_model,
    statistical_only,
    walk_forward,
)
from prbshare.forecast.evaluate import BUNDLED_GRIDS, read_predictions, write_predictions

ONE_TO_TEN = np.arange(1.0, 11.0)
NAIVE = ModelSpec("Naive", {"offset": 1})
MA2 = ModelSpec("MA", {"window": 2, "offset": 1})


def test_split_index():
    assert SplitConfig().split_index(10) == 6
    assert SplitConfig().split_index(1000) == 660
    with pytest.raises(ForecastError):
        SplitConfig(1.0)


def test_hand_trace():
    r = walk_forward(ONE_TO_TEN, NAIVE)
    assert r.rmse == 1.0
    assert r.predictions == (6.0, 7.0, 8.0, 9.0)
    assert r.observed == (7.0, 8.0, 9.0, 10.0)
    assert walk_forward(ONE_TO_TEN, MA2).rmse == 1.5


def test_perfect_predictions_zero_rmse():
    assert walk_forward(np.full(30, 4.0), NAIVE).rmse == 0.0


def test_grid_ranking_and_failures():
    bad = ModelSpec("MA", {"window": 50})
    res = grid_search(ONE_TO_TEN, [MA2, bad, NAIVE])
    assert [r.spec for r in res] == [NAIVE, MA2]
    assert len(res.failures) == 1 and res.failures[0].spec == bad
    assert select_model(res) == NAIVE
    assert len(grid_search(ONE_TO_TEN, [MA2])) == 1


def test_grid_permutation_invariant():
    x = np.random.default_rng(0).gamma(5, 4, 120)
    grid = statistical_only(load_grid("lte_hour"))
    a = grid_search(x, grid)
    b = grid_search(x, grid[::-1])
    assert [r.spec for r in a] == [r.spec for r in b]
    rm = [r.rmse for r in a]
    assert rm == sorted(rm)


def test_ties_break_by_kind():
    # every window-1 / offset-1 model is the same forecast
    specs = [ModelSpec("MM", {"window": 1}), ModelSpec("MA", {"window": 1}), NAIVE]
    res = grid_search(np.random.default_rng(1).normal(size=30), specs)
    assert [r.spec.kind for r in res] == ["Naive", "MA", "MM"]


def test_workers_match_serial():
    x = np.random.default_rng(2).gamma(5, 4, 80)
    grid = statistical_only(load_grid("nr_hour"))
    a = grid_search(x, grid)
    b = grid_search(x, grid, workers=3)
    assert [(r.spec, r.rmse) for r in a] == [(r.spec, r.rmse) for r in b]


def test_empty_grid():
    with pytest.raises(ForecastError):
        grid_search(ONE_TO_TEN, [])
    with pytest.raises(ForecastError):
        select_model([])


@pytest.mark.parametrize("name", BUNDLED_GRIDS)
def test_bundled_grids(name):
    grid = load_grid(name)
    assert [s.kind for s in grid] == ["Naive", "MA", "MM", "ARIMA", "ETS", "MLP"]
    assert len(statistical_only(grid)) == 5


def test_spec_validation():
    with pytest.raises(ForecastError):
        ModelSpec("LSTM", {})
    with pytest.raises(ForecastError):
        ModelSpec("MA", {})
    with pytest.raises(ForecastError):
        ModelSpec("ARIMA", {"order": [1, 2]})
    with pytest.raises(ForecastError):
        parse_grid({"kind": "Naive"})
    spec = ModelSpec("ARIMA", {"order": [1, 0, 1], "trend": "c"}, seed=3)
    assert ModelSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec


def test_mlp_in_grid_search():
    x = 10 + np.sin(np.arange(100) / 4)
    spec = ModelSpec("MLP", {"n_inputs": 2, "n_nodes": 8, "epochs": 20, "batch_size": 16}, seed=4)
    r1, r2 = walk_forward(x, spec), walk_forward(x, spec)
    assert r1.predictions == r2.predictions
    assert r1.test_len == 34


def test_predictions_roundtrip(tmp_path):
    r = walk_forward(ONE_TO_TEN, MA2)
    write_predictions(r, tmp_path / "p.csv")
    obs, pred = read_predictions(tmp_path / "p.csv")
    assert tuple(obs) == r.observed and tuple(pred) == r.predictions
    assert (tmp_path / "p.csv").read_text().splitlines()[1].startswith("6,")
