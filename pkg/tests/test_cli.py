import csv
import json

import numpy as np
import pytest

from prbshare.cli import main
from prbshare.ingest import HOUR_MS, PrbSeries, write_series

FAST_GRID = [{"kind": "Naive", "params": {"offset": 1}},
             {"kind": "MA", "params": {"window": 2, "offset": 1}}]


@pytest.fixture
def pair(tmp_path):
    rng = np.random.default_rng(0)
    t = np.arange(80)
    a = np.clip(20 + 3 * np.sin(t / 4) + rng.normal(0, 1, 80), 1, None)
    b = np.clip(22 + 2 * np.cos(t / 5) + rng.normal(0, 1, 80), 1, None)
    pa, _ = write_series(PrbSeries(0, HOUR_MS, tuple(a), "LTE"), tmp_path / "lte.csv")
    pb, _ = write_series(PrbSeries(0, HOUR_MS, tuple(b), "NR"), tmp_path / "nr.csv")
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps(FAST_GRID))
    return pa, pb, grid


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_ingest(tmp_path, fixture_dir):
    out = tmp_path / "o"
    rc = main(["ingest", str(fixture_dir / "lte_dci_hourly.csv"), "--dci-format", "2B",
               "--out", str(out)])
    assert rc == 0
    assert len(rows(out / "lte.csv")) == 1000
    man = json.loads((out / "ingest_lte_manifest.json").read_text())
    assert set(man) >= {"config_digest", "input_digests", "output_digests", "tool_version", "timestamp"}
    assert set(man["output_digests"]) == {"lte.csv", "lte.json"}


def test_ingest_missing_file(tmp_path):
    assert main(["ingest", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2


def test_forecast_default_grid(tmp_path, pair):
    pa, _, _ = pair
    assert main(["forecast", "--series", str(pa), "--select", "--out", str(tmp_path), "--seed", "1"]) == 0
    rep = json.loads((tmp_path / "forecast_reports.json").read_text())
    assert len(rep["ranked"]) == 6
    rm = [r["rmse"] for r in rep["ranked"]]
    assert rm == sorted(rm)
    sel = json.loads((tmp_path / "forecast_selected.json").read_text())
    assert sel["spec"]["kind"] == rep["ranked"][0]["kind"]
    for name in ("rmse.csv", "predictions.csv", "stats.json"):
        assert (tmp_path / f"forecast_{name}").exists()


def test_forecast_empty_grid(tmp_path, pair):
    pa, _, _ = pair
    empty = tmp_path / "empty.json"
    empty.write_text("[]")
    assert main(["forecast", "--series", str(pa), "--grid", str(empty), "--out", str(tmp_path)]) == 2


def test_sweep_files_and_fairness(tmp_path):
    assert main(["sweep", "--out", str(tmp_path)]) == 0
    files = sorted(p.name for p in tmp_path.glob("sweep_N*.csv"))
    assert len(files) == 6
    r = {float(x["gamma"]): x for x in rows(tmp_path / "sweep_N40_avg.csv")}
    assert float(r[0.8]["fairness"]) == 1.0
    assert (float(r[0.8]["n_a"]), float(r[0.8]["n_b"])) == (20, 20)


def test_sweep_bad_step(tmp_path):
    assert main(["sweep", "--gamma-step", "1.5", "--out", str(tmp_path)]) == 2


def test_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["sweep", "--pool", "40", "--out", str(a)])
    main(["sweep", "--pool", "40", "--out", str(b)])
    ma = json.loads((a / "sweep_manifest.json").read_text())
    mb = json.loads((b / "sweep_manifest.json").read_text())
    assert ma["output_digests"] == mb["output_digests"]
    assert ma["config_digest"] == mb["config_digest"]


def test_allocate(tmp_path):
    prob = {"pool_size": 40, "gamma": 0.8, "variant": "avg", "integer_mode": True,
            "stats_a": {"mean": 21.52, "variance": 12.37, "maximum": 26.31},
            "stats_b": {"mean": 22.80, "variance": 8.33, "maximum": 25.80}}
    p = tmp_path / "prob.json"
    p.write_text(json.dumps(prob))
    assert main(["allocate", "--problem", str(p), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "allocation.json").read_text())
    assert (doc["result"]["n_a"], doc["result"]["n_b"]) == (20, 20)
    assert doc["convexity"]["ok"]


def test_simulate_requires_seed(tmp_path, pair):
    pa, pb, grid = pair
    assert main(["simulate", "--lte", str(pa), "--nr", str(pb), "--grid", str(grid),
                 "--out", str(tmp_path)]) == 2


def test_simulate_missing_series(tmp_path, pair):
    _, pb, grid = pair
    assert main(["simulate", "--seed", "1", "--lte", str(tmp_path / "nope.csv"), "--nr", str(pb),
                 "--grid", str(grid), "--out", str(tmp_path)]) == 2


def _simulate(out, pair, variant="autofairest", pool="10"):
    pa, pb, grid = pair
    return main(["simulate", "--seed", "5", "--lte", str(pa), "--nr", str(pb), "--grid", str(grid),
                 "--pool", pool, "--variant", variant, "--retrain-every", "12",
                 "--allocate-every", "4", "--warmup", "30", "--out", str(out)])


def test_simulate_deterministic(tmp_path, pair):
    assert _simulate(tmp_path / "a", pair) == 0
    assert _simulate(tmp_path / "b", pair) == 0
    ta = (tmp_path / "a" / "transcript.jsonl").read_bytes()
    assert ta == (tmp_path / "b" / "transcript.jsonl").read_bytes()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["message_counts"]["E2Allocation"] == 13


def test_autofairest_beats_max(tmp_path, pair):
    for pool in ("10", "40"):
        _simulate(tmp_path / "auto", pair, pool=pool)
        _simulate(tmp_path / "max", pair, variant="max", pool=pool)
        fa = json.loads((tmp_path / "auto" / "summary.json").read_text())["mean_fairness"]
        fm = json.loads((tmp_path / "max" / "summary.json").read_text())["mean_fairness"]
        assert fa >= fm


def test_report_modes(tmp_path, pair):
    pa, pb, _ = pair
    _simulate(tmp_path, pair)
    assert main(["report", "--transcript", str(tmp_path / "transcript.jsonl"), "--out", str(tmp_path)]) == 0
    assert main(["report", "--series-a", str(pa), "--series-b", str(pb), "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "report_similarity.json").read_text())["ks_statistic"] > 0
    assert main(["report", "--out", str(tmp_path)]) == 2


def test_synth(tmp_path, pair):
    pa, _, _ = pair
    assert main(["synth", "--reference", str(pa), "--seed", "4", "--block-len", "8",
                 "--out", str(tmp_path)]) == 0
    assert len(rows(tmp_path / "nr.csv")) == 80


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"pool": "40", "variants": "avg"}))
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert [p.name for p in tmp_path.glob("sweep_N*.csv")] == ["sweep_N40_avg.csv"]


def test_usage_error_exit_code(tmp_path):
    assert main(["nosuchcommand"]) == 2
