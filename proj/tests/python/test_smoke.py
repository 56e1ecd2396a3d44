"""Smoke tests for the _trendcast pybind11 module."""

import math
import os

import pytest

import _trendcast as tc

FIXTURE_DIR = os.environ.get("TRENDCAST_FIXTURE_DIR")


def make_panel(t_len=140, seed=5):
    spec = """{
      "t_len": %d, "seed": %d,
      "series": [
        {"name": "cyclic", "offset": 50, "noise_sd": 2.0,
         "components": [{"frequency": 1.0, "amplitude": 12.0}]},
        {"name": "noisy", "offset": 50, "noise_sd": 4.0, "components": []},
        {"name": "goal", "offset": 50, "noise_sd": 2.0,
         "components": [{"frequency": 1.0, "amplitude": 12.0, "phase": 0.2}]}
      ]
    }""" % (t_len, seed)
    d = tc.gen_panel(spec)
    d.set_targets(["goal"])
    return d


def test_csv_roundtrip():
    d = make_panel()
    again = tc.parse_trends_csv(d.to_csv())
    assert again.names == d.names
    assert again.values.shape == d.values.shape


def test_spearman_and_mse():
    assert tc.spearman_rho([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
    assert tc.spearman_rho([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(0.8)
    assert tc.spearman_pvalue(1.0, 5) == pytest.approx(2 / 120)
    assert tc.mse([0, 0], [3, 3]) == pytest.approx(9.0)


def test_morlet_peak():
    d = make_panel()
    series = list(d.values[:, 0])
    scal = tc.morlet_cwt(series)
    freqs = scal.frequencies
    peak = freqs[scal.peak_frequency_index()]
    assert abs(peak - 1.0) < 0.1
    assert tc.band_power_ratio(scal, 0.8, 1.2) > 0.3


def test_rank_periodic():
    d = make_panel()
    ranking = tc.rank_periodic(d)
    assert [name for name, _ in ranking] == ["cyclic", "noisy"]
    assert ranking[0][1].label == "ANNUAL"


def test_train_predict_cv():
    d = make_panel()
    config = tc.CascadeConfig()
    config.lag_depth = 3
    config.lambda_ = 0.1
    rows = list(range(3, 140))
    model = tc.train(d, "goal", ["cyclic", "noisy"], config, rows)
    pred = tc.predict(model, d, rows)
    actual = list(d.values[3:, 2])
    assert tc.spearman_rho(actual, pred) > 0.8

    imp = tc.feature_importance(model)
    assert {name for name, _, _ in imp} == {"cyclic", "noisy"}
    assert imp[0][2] in (1, 2)

    report = tc.cross_validate(d, "goal", "all", config, 5)
    assert report.pooled.rho > 0.7
    assert report.pooled.n == 137
    assert len(report.fold_metrics) == 5

    restored = tc.model_from_json(model.to_json())
    assert tc.predict(restored, d, rows) == pred


@pytest.mark.skipif(FIXTURE_DIR is None, reason="fixture dir not provided")
def test_fixture_parses():
    with open(os.path.join(FIXTURE_DIR, "trends_fixture.csv")) as f:
        d = tc.parse_trends_csv(f.read())
    d.set_targets(["die", "death"])
    assert d.values.shape == (261, 21)
    assert len(d.predictor_names()) == 19
