"""Golden-file checks against committed reference fixtures.

The fixtures embed their inputs, so these tests need nothing beyond the
JSON files under fixtures/ at the repository root.
"""
import json
from pathlib import Path

import numpy as np
import pytest

from sleepscreen import eval as evaluation
from sleepscreen import feature_select, transform
from sleepscreen.feature_select import MiConfig
from sleepscreen.reduce import fisher_ratio
from sleepscreen.table import NUMERIC, Column, DataTable

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"
TOL = 1e-9


def load_cases(name):
    blob = json.loads((FIXTURES / name).read_text())
    assert blob["reference_versions"]
    return blob["cases"]


def as_table(matrix, labels):
    matrix = np.asarray(matrix, dtype=np.float64)
    cols = [Column(f"f{i}", NUMERIC, matrix[:, i]) for i in range(matrix.shape[1])]
    return DataTable(cols, np.asarray(labels, dtype=np.int64))


def test_fixture_directory_complete():
    names = sorted(p.name for p in FIXTURES.glob("*.json"))
    assert names == [
        "confusion_metrics.json",
        "lda_fisher.json",
        "mi_histogram.json",
        "scaler_quantiles.json",
        "tomek_links.json",
        "wilcoxon_cases.json",
    ]


def test_robust_and_minmax_match_reference_quantiles():
    cases = load_cases("scaler_quantiles.json")
    assert len(cases) == 20
    for case in cases:
        values = np.array(case["values"])
        table = DataTable([Column("x", NUMERIC, values)],
                          np.zeros(values.shape[0], dtype=np.int64))
        robust = transform.robust_fit(table)
        assert robust.median[0] == pytest.approx(case["median"], abs=TOL)
        assert robust.iqr[0] == pytest.approx(case["iqr"], abs=TOL)
        bounds = transform.minmax_fit(table)
        assert bounds.minimum[0] == pytest.approx(case["minimum"], abs=TOL)
        assert bounds.maximum[0] == pytest.approx(case["maximum"], abs=TOL)


def test_histogram_mi_matches_reference():
    case = load_cases("mi_histogram.json")[0]
    matrix = np.array(case["matrix"])
    labels = np.array(case["labels"])
    scores = feature_select.mutual_info(
        matrix, labels, MiConfig(mode="histogram", bins=case["bins"])).mi
    assert scores.shape[0] == len(case["scores"])
    assert np.max(np.abs(scores - np.array(case["scores"]))) <= TOL


def test_wilcoxon_matches_reference_enumeration():
    cases = load_cases("wilcoxon_cases.json")
    assert len(cases) == 50
    for case in cases:
        result = evaluation.wilcoxon(case["a"], case["b"], case["alternative"])
        assert result.method == "exact"
        assert result.n_effective == case["n_effective"]
        assert result.r_plus == pytest.approx(case["r_plus"], abs=TOL)
        assert result.r_minus == pytest.approx(case["r_minus"], abs=TOL)
        assert result.p_value == pytest.approx(case["p_value"], abs=TOL)


def test_confusion_metrics_match_reference():
    cases = load_cases("confusion_metrics.json")
    assert len(cases) == 30
    for case in cases:
        cm = evaluation.ConfusionMatrix(np.array(case["matrix"]))
        for mode in ("macro", "weighted"):
            report = evaluation.metrics(cm, averaging=mode)
            assert report.accuracy == pytest.approx(case["accuracy"], abs=TOL)
            assert report.precision == pytest.approx(case[mode]["precision"], abs=TOL)
            assert report.recall == pytest.approx(case[mode]["recall"], abs=TOL)
            assert report.f1 == pytest.approx(case[mode]["f1"], abs=TOL)
            per = case["per_class"]
            assert np.allclose(report.precision_per_class, per["precision"], atol=TOL)
            assert np.allclose(report.recall_per_class, per["recall"], atol=TOL)
            assert np.allclose(report.f1_per_class, per["f1"], atol=TOL)
            assert list(report.support) == per["support"]


def test_tomek_links_match_reference():
    cases = load_cases("tomek_links.json")
    assert len(cases) == 10
    empties = 0
    for case in cases:
        table = as_table(case["matrix"], case["labels"])
        links = transform.find_tomek_links(table)
        assert [list(pair) for pair in links] == case["links"]
        empties += not case["links"]
    assert empties == 1  # one deliberately separated table


def test_fisher_ratio_matches_reference():
    cases = load_cases("lda_fisher.json")
    assert len(cases) == 5
    for case in cases:
        matrix = np.array(case["matrix"])
        labels = np.array(case["labels"])
        projection = np.array(case["projection"])
        value = fisher_ratio(matrix @ projection, labels)
        assert value == pytest.approx(case["fisher"], rel=TOL, abs=TOL)
