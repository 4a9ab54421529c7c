import json

import numpy as np
import pytest

from sleepscreen import dataset, models, pipeline
from sleepscreen.errors import (
    AllZeroDifferences,
    ExperimentError,
    FoldPlanMismatch,
)

CONSTANT = models.ClassifierSpec("gboost", {"n_stages": 1, "learning_rate": 0.0})


def make_spec(stage_list, family="knn", hyper=None, name="t"):
    return pipeline.PipelineSpec(
        name=name,
        stages=tuple(pipeline.StageSpec(k, p) for k, p in stage_list),
        classifier=models.ClassifierSpec(family, hyper or {}),
    )


# -- stage and pipeline validation -----------------------------------------------

def test_stage_spec_rejects_unknown_kind_and_params():
    with pytest.raises(ValueError):
        pipeline.StageSpec("pca", {})
    with pytest.raises(ValueError):
        pipeline.StageSpec("smote_tomek", {"neighbors": 3})


@pytest.mark.parametrize("kind,params", [
    ("smote_tomek", {"k": 0}),
    ("mi_select", {"policy": "bottom"}),
    ("mi_select", {"policy": "top_k"}),  # top_k value missing
    ("mi_select", {"bins": 1}),
    ("boruta_select", {"alpha": 1.5}),
    ("boruta_select", {"max_iter": 5}),
    ("lda", {"m": 0}),
    ("autoencoder", {"latent_dim": 0}),
    ("autoencoder", {"learning_rate": 0}),
])
def test_stage_spec_rejects_bad_values(kind, params):
    with pytest.raises(ValueError):
        pipeline.StageSpec(kind, params)


def test_stage_spec_resolved_merges_defaults():
    spec = pipeline.StageSpec("boruta_select", {"max_iter": 20})
    resolved = spec.resolved()
    assert resolved["max_iter"] == 20
    assert resolved["alpha"] == 0.05
    assert resolved["n_trees"] == 100


def test_pipeline_rejects_two_scalers():
    with pytest.raises(ValueError):
        make_spec([("robust_scaler", {}), ("minmax_scaler", {})])


def test_pipeline_rejects_resampler_after_selector():
    with pytest.raises(ValueError):
        make_spec([("mi_select", {}), ("smote_tomek", {})])
    with pytest.raises(ValueError):
        make_spec([("boruta_select", {}), ("smote_tomek", {})])
    make_spec([("smote_tomek", {}), ("mi_select", {})])  # correct order passes


def test_pipeline_configuration_label_derived_from_stages():
    spec = make_spec([("smote_tomek", {}), ("mi_select", {})])
    assert spec.configuration == "SMOTETomek + MI"
    assert make_spec([]).configuration == "Baseline"
    assert make_spec([], family="etrees").model_label == "Extra Trees"


def test_with_seed_threads_through_stages_and_classifier():
    spec = make_spec([("smote_tomek", {}), ("smote_tomek", {"seed": 99})])
    seeded = spec.with_seed(7)
    assert seeded.stages[0].parameters["seed"] == 7
    assert seeded.stages[1].parameters["seed"] == 99  # explicit seed wins
    assert seeded.classifier.seed == 7


# -- canonical grid -----------------------------------------------------------------

def test_canonical_grid_shape():
    specs = pipeline.canonical_specs()
    groups = {}
    for s in specs:
        groups.setdefault(s.group, []).append(s)
    assert len(groups["baseline"]) == len(models.FAMILIES)
    assert len(groups["pipeline1"]) == 9
    assert len(groups["pipeline2"]) == 9
    assert len(groups["ablation1"]) == 7
    assert len(groups["ablation2"]) == 7
    names = [s.name for s in specs]
    assert len(set(names)) == len(names)


def test_canonical_p1_knn_row():
    spec = next(s for s in pipeline.canonical_specs() if s.name == "P1-KNN")
    assert [st.kind for st in spec.stages] == ["smote_tomek", "mi_select"]
    assert spec.classifier.family == "knn"
    assert spec.configuration == "MI + SMOTETomek"


def test_canonical_p2_etrees_row():
    spec = next(s for s in pipeline.canonical_specs() if s.name == "P2-ETrees")
    assert [st.kind for st in spec.stages] == ["minmax_scaler", "smote_tomek", "boruta_select"]
    assert spec.classifier.family == "etrees"
    assert spec.configuration == "Boruta + SMOTETomek"


def test_canonical_full_ablation_row_order():
    specs = pipeline.specs_for_group("ablation1")
    last = specs[-1]
    assert last.configuration == "SMOTETomek + RobustScaler + MI + LDA"
    assert [st.kind for st in last.stages] == [
        "smote_tomek", "robust_scaler", "mi_select", "lda"]


def test_canonical_ablation2_scaler_only_row():
    specs = pipeline.specs_for_group("ablation2")
    row = next(s for s in specs if s.configuration == "MinMaxScaler")
    assert [st.kind for st in row.stages] == ["minmax_scaler"]
    assert row.classifier.family == "etrees"


def test_canonical_proxy_rows_are_flagged():
    by_name = {s.name: s for s in pipeline.canonical_specs()}
    for name in ("P1-XGBoost", "P1-LightGBM", "P2-XGBoost", "P2-LightGBM"):
        assert by_name[name].classifier.family == "gboost"
        assert "proxy" in by_name[name].model_label


def test_specs_for_group_unknown():
    with pytest.raises(ValueError):
        pipeline.specs_for_group("pipeline9")


# -- experiment runs ------------------------------------------------------------------

def test_run_experiment_constant_classifier_scores_test_majority(train_test):
    train, test = train_test
    spec = pipeline.PipelineSpec(name="const", stages=(), classifier=CONSTANT)
    report = pipeline.run_experiment(spec, train, test, seed=1, cv=False)
    assert abs(report.test_report.accuracy - 44 / 75) <= 1e-12


def test_run_experiment_is_reproducible_modulo_timing(train_test):
    train, test = train_test
    spec = make_spec([("smote_tomek", {}), ("mi_select", {})], name="repro")
    a = pipeline.run_experiment(spec, train, test, seed=3, cv=False)
    b = pipeline.run_experiment(spec, train, test, seed=3, cv=False)
    da, db = a.to_dict(), b.to_dict()
    da.pop("timing")
    db.pop("timing")
    assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)


def test_run_experiment_never_mutates_inputs(train_test):
    train, test = train_test
    before = (train.checksum(), test.checksum())
    spec = make_spec([("robust_scaler", {}), ("smote_tomek", {})], name="mut")
    pipeline.run_experiment(spec, train, test, seed=2, cv=False)
    assert (train.checksum(), test.checksum()) == before


def test_run_experiment_report_contents(train_test):
    train, test = train_test
    spec = make_spec([("smote_tomek", {}), ("mi_select", {})], name="full")
    report = pipeline.run_experiment(spec, train, test, seed=1, cv=True, cv_folds=4)
    assert report.resample is not None
    assert report.resample.counts_final  # resampler state surfaced
    assert [s["kind"] for s in report.stage_summaries] == ["smote_tomek", "mi_select"]
    assert report.config["classifier"]["hyperparameters"]["k"] == 5  # default echoed
    assert report.config["stages"][1]["parameters"]["policy"] == "above_mean"
    assert report.seeds == {"experiment": 1}
    assert len(report.cv_reports) == 4
    assert report.fold_plan.k == 4
    blob = json.loads(report.to_json())
    assert blob["cv"]["k"] == 4
    row = report.markdown_row()
    assert row.startswith("| K-Nearest Neighbors | SMOTETomek + MI |")
    assert row.count("|") == 7


def test_run_experiment_without_cv_has_no_fold_trace(train_test):
    train, test = train_test
    spec = make_spec([], name="nocv")
    report = pipeline.run_experiment(spec, train, test, seed=1, cv=False)
    assert report.cv_reports is None
    with pytest.raises(FoldPlanMismatch):
        report.fold_accuracies()


def test_run_experiment_marks_failing_stage(train_test):
    train, test = train_test
    spec = make_spec([("lda", {"m": 5})], name="boom")  # only 2 discriminants exist
    with pytest.raises(ExperimentError) as info:
        pipeline.run_experiment(spec, train, test, seed=1, cv=False)
    partial = info.value.partial_report
    assert partial["failed_phase"] == "stage lda"
    assert partial["completed_stages"] == []


def test_run_experiment_cv_fold_spread_is_tight_for_p1_knn(train_test):
    train, test = train_test
    spec = next(s for s in pipeline.canonical_specs() if s.name == "P1-KNN")
    report = pipeline.run_experiment(spec, train, test, seed=1)
    accs = report.fold_accuracies()
    assert accs.shape == (8,)
    assert float(accs.std()) < 0.05


def test_run_ablation_grid_one(train_test):
    train, test = train_test
    reports = pipeline.run_ablation(1, train, test, seed=1)
    assert len(reports) == 7
    assert len({r.name for r in reports}) == 7
    configurations = [r.configuration for r in reports]
    assert configurations[0] == "Baseline"
    assert configurations[-1] == "SMOTETomek + RobustScaler + MI + LDA"
    for r in reports:
        assert 0 <= r.test_report.accuracy <= 1
    with pytest.raises(ValueError):
        pipeline.run_ablation(3, train, test)


# -- report comparison -----------------------------------------------------------------

def test_compare_with_wilcoxon_self_is_all_zero(train_test):
    train, test = train_test
    spec = make_spec([], name="self", family="dtree")
    report = pipeline.run_experiment(spec, train, test, seed=1)
    with pytest.raises(AllZeroDifferences):
        pipeline.compare_with_wilcoxon(report, report)


def test_compare_with_wilcoxon_requires_matching_plans(train_test):
    train, test = train_test
    spec = make_spec([], name="cmp", family="dtree")
    r8 = pipeline.run_experiment(spec, train, test, seed=1)
    r4 = pipeline.run_experiment(spec, train, test, seed=1, cv_folds=4)
    with pytest.raises(FoldPlanMismatch):
        pipeline.compare_with_wilcoxon(r8, r4)
    no_cv = pipeline.run_experiment(spec, train, test, seed=1, cv=False)
    with pytest.raises(FoldPlanMismatch):
        pipeline.compare_with_wilcoxon(r8, no_cv)


def test_compare_with_wilcoxon_detects_real_gap(train_test):
    train, test = train_test
    strong = make_spec([], name="strong", family="dtree")
    weak = pipeline.PipelineSpec(name="weak", stages=(), classifier=CONSTANT)
    a = pipeline.run_experiment(strong, train, test, seed=1)
    b = pipeline.run_experiment(weak, train, test, seed=1)
    result = pipeline.compare_with_wilcoxon(a, b, "greater")
    assert result.p_value < 0.05
    assert result.r_plus == result.n_effective * (result.n_effective + 1) / 2


# -- config parsing ----------------------------------------------------------------------

CONFIG_TEXT = """
# custom chain
name = demo
classifier = knn k=3 seed=4
stage = smote_tomek seed=11
stage = mi_select policy=top_k top_k=6
"""


def test_parse_pipeline_spec_round_trip():
    spec = pipeline.parse_pipeline_spec(CONFIG_TEXT)
    assert spec.name == "demo"
    assert spec.classifier.family == "knn"
    assert spec.classifier.hyperparameters == {"k": 3}
    assert spec.classifier.seed == 4
    assert [s.kind for s in spec.stages] == ["smote_tomek", "mi_select"]
    assert spec.stages[0].parameters["seed"] == 11
    assert spec.stages[1].parameters["top_k"] == 6


def test_parse_pipeline_spec_errors():
    with pytest.raises(ValueError):
        pipeline.parse_pipeline_spec("name = x")  # no classifier
    with pytest.raises(ValueError):
        pipeline.parse_pipeline_spec("classifier = knn\nstage = mi_select policy")
    with pytest.raises(ValueError):
        pipeline.parse_pipeline_spec("flavor = vanilla")
    with pytest.raises(ValueError):
        pipeline.parse_pipeline_spec("classifier = knn\nnot a directive")


def test_parse_scalar_types():
    spec = pipeline.parse_pipeline_spec(
        "classifier = gboost learning_rate=0.1 n_stages=20")
    resolved = spec.classifier.resolved()
    assert resolved["learning_rate"] == 0.1
    assert resolved["n_stages"] == 20
