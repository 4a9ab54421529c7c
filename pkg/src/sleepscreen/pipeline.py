"""Preprocessing chains, the canonical experiment grid, and experiment runs.

A pipeline is an ordered list of StageSpecs plus a classifier. Stage objects
built from the specs follow the eval module's two-method protocol, so the
same chain drives held-out runs and per-fold cross-validation without any
chance of validation rows leaking into a fit.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace

import numpy as np

from . import eval as evaluation
from . import feature_select, models, reduce, transform
from .errors import ExperimentError, FoldPlanMismatch, SleepScreenError
from .table import DataTable

SCALER_KINDS = ("robust_scaler", "minmax_scaler")
RESAMPLER_KINDS = ("smote_tomek",)
SELECTOR_KINDS = ("mi_select", "boruta_select", "lda", "autoencoder")

_STAGE_DISPLAY = {
    "robust_scaler": "RobustScaler",
    "minmax_scaler": "MinMaxScaler",
    "smote_tomek": "SMOTETomek",
    "mi_select": "MI",
    "boruta_select": "Boruta",
    "lda": "LDA",
    "autoencoder": "Autoencoder",
}

FAMILY_LABELS = {
    "logreg": "Logistic Regression",
    "knn": "K-Nearest Neighbors",
    "dtree": "Decision Tree",
    "rforest": "Random Forest",
    "etrees": "Extra Trees",
    "gboost": "Gradient Boosting",
    "adaboost": "AdaBoost",
    "mlp": "MLP Classifier",
}


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def _positive_int(value) -> bool:
    return _is_int(value) and value > 0


def _optional_seed(value) -> bool:
    return value is None or (_is_int(value) and value >= 0)


_STAGE_SCHEMAS = {
    "robust_scaler": {},
    "minmax_scaler": {},
    "smote_tomek": {
        "k": (5, _positive_int),
        "seed": (None, _optional_seed),
    },
    "mi_select": {
        "policy": ("above_mean", lambda v: v in ("above_mean", "top_k")),
        "top_k": (None, lambda v: v is None or _positive_int(v)),
        "mode": ("knn", lambda v: v in ("knn", "histogram")),
        "k": (3, _positive_int),
        "bins": (10, lambda v: _is_int(v) and v >= 2),
    },
    "boruta_select": {
        "alpha": (0.05, lambda v: isinstance(v, (int, float)) and 0 < v < 1),
        "max_iter": (100, lambda v: _is_int(v) and v >= 10),
        "seed": (None, _optional_seed),
        "n_trees": (100, _positive_int),
        "max_depth": (7, lambda v: v is None or _positive_int(v)),
    },
    "lda": {
        "m": (2, _positive_int),
        "epsilon": (None, lambda v: v is None or (isinstance(v, (int, float)) and v > 0)),
    },
    "autoencoder": {
        "latent_dim": (8, _positive_int),
        "epochs": (200, _positive_int),
        "learning_rate": (1e-3, lambda v: isinstance(v, (int, float)) and v > 0),
        "batch_size": (32, _positive_int),
        "seed": (None, _optional_seed),
    },
}


@dataclass(frozen=True)
class StageSpec:
    kind: str
    parameters: dict = None

    def __post_init__(self):
        if self.kind not in _STAGE_SCHEMAS:
            raise ValueError(f"unknown stage kind {self.kind!r}")
        params = dict(self.parameters or {})
        schema = _STAGE_SCHEMAS[self.kind]
        for name, value in params.items():
            if name not in schema:
                raise ValueError(f"stage {self.kind!r} has no parameter {name!r}")
            default, valid = schema[name]
            if not valid(value):
                raise ValueError(f"bad value {value!r} for {self.kind}.{name}")
        if params.get("policy") == "top_k" and params.get("top_k") is None:
            raise ValueError("mi_select with policy top_k needs top_k")
        object.__setattr__(self, "parameters", params)

    def resolved(self) -> dict:
        merged = {name: default for name, (default, _) in _STAGE_SCHEMAS[self.kind].items()}
        merged.update(self.parameters)
        return merged


@dataclass(frozen=True)
class PipelineSpec:
    name: str
    stages: tuple
    classifier: models.ClassifierSpec
    configuration: str = ""
    model_label: str = ""
    group: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValueError("pipeline needs a name")
        stages = tuple(self.stages)
        scalers = [s for s in stages if s.kind in SCALER_KINDS]
        if len(scalers) > 1:
            raise ValueError("at most one scaler stage is allowed")
        kinds = [s.kind for s in stages]
        for i, kind in enumerate(kinds):
            if kind in RESAMPLER_KINDS and any(k in SELECTOR_KINDS for k in kinds[:i]):
                raise ValueError("resampling must happen before selection or reduction")
        object.__setattr__(self, "stages", stages)
        if not self.configuration:
            label = " + ".join(_STAGE_DISPLAY[k] for k in kinds) or "Baseline"
            object.__setattr__(self, "configuration", label)
        if not self.model_label:
            object.__setattr__(self, "model_label", FAMILY_LABELS[self.classifier.family])

    def with_seed(self, seed: int) -> "PipelineSpec":
        """Thread one experiment seed through every stochastic component.

        Stage seeds left unset pick up the experiment seed; explicitly set
        stage seeds are kept. The classifier seed is always replaced so that
        replications over seeds vary every random draw together.
        """
        seed = int(seed)
        stages = []
        for stage in self.stages:
            if "seed" in _STAGE_SCHEMAS[stage.kind] and stage.parameters.get("seed") is None:
                stages.append(StageSpec(stage.kind, {**stage.parameters, "seed": seed}))
            else:
                stages.append(stage)
        classifier = replace(self.classifier, seed=seed)
        return replace(self, stages=tuple(stages), classifier=classifier)


# -- stage objects (eval-module protocol) ---------------------------------------------

class _RobustScalerStage:
    def fit_train(self, train):
        params = transform.robust_fit(train)
        return params, transform.robust_apply(params, train)

    def apply(self, state, table):
        return transform.robust_apply(state, table)

    def summary(self, state):
        return {}


class _MinMaxScalerStage:
    def fit_train(self, train):
        params = transform.minmax_fit(train)
        return params, transform.minmax_apply(params, train)

    def apply(self, state, table):
        return transform.minmax_apply(state, table)

    def summary(self, state):
        return {}


class _SmoteTomekStage:
    def __init__(self, k, seed):
        self.k = k
        self.seed = seed

    def fit_train(self, train):
        resampled, report = transform.smote_tomek(train, k=self.k, seed=self.seed or 0)
        return report, resampled

    def apply(self, state, table):
        # resampling only reshapes the training set; held-out rows pass through
        return table

    def summary(self, state):
        return state.to_dict()


class _MiSelectStage:
    def __init__(self, policy, top_k, mode, k, bins):
        self.policy = policy
        self.top_k = top_k
        self.config = feature_select.MiConfig(mode=mode, k=k, bins=bins)

    def fit_train(self, train):
        scores = feature_select.mutual_info(train, config=self.config)
        keep = feature_select.select_top(scores, self.policy, k=self.top_k)
        if not keep:
            # degenerate tables can score every column at the mean; keep them all
            keep = list(range(train.n_cols))
        return tuple(keep), train.select_columns(keep)

    def apply(self, state, table):
        return table.select_columns(state)

    def summary(self, state):
        return {"selected_columns": list(state)}


class _BorutaStage:
    def __init__(self, alpha, max_iter, seed, n_trees, max_depth):
        self.alpha = alpha
        self.max_iter = max_iter
        self.seed = seed
        self.forest_cfg = {"n_trees": n_trees, "max_depth": max_depth}

    def fit_train(self, train):
        verdicts = feature_select.boruta(
            train, forest_cfg=self.forest_cfg, alpha=self.alpha,
            max_iter=self.max_iter, seed=self.seed or 0)
        keep = verdicts.confirmed()
        if not keep:
            keep = [i for i, s in enumerate(verdicts.statuses)
                    if s != feature_select.REJECTED]
        if not keep:
            keep = list(range(train.n_cols))
        state = (tuple(keep), verdicts.iterations_run)
        return state, train.select_columns(keep)

    def apply(self, state, table):
        return table.select_columns(state[0])

    def summary(self, state):
        return {"selected_columns": list(state[0]), "iterations_run": state[1]}


class _LdaStage:
    def __init__(self, m, epsilon):
        self.m = m
        self.epsilon = epsilon

    def fit_train(self, train):
        proj = reduce.lda_fit(train, m=self.m, epsilon=self.epsilon)
        return proj, reduce.lda_transform(proj, train)

    def apply(self, state, table):
        return reduce.lda_transform(state, table)

    def summary(self, state):
        return {"eigenvalues": [float(v) for v in state.eigenvalues]}


class _AutoencoderStage:
    def __init__(self, latent_dim, epochs, learning_rate, batch_size, seed):
        self.cfg = dict(latent_dim=latent_dim, epochs=epochs,
                        learning_rate=learning_rate, batch_size=batch_size,
                        seed=seed or 0)

    def fit_train(self, train):
        model = reduce.ae_fit(train, reduce.AutoencoderConfig(**self.cfg))
        return model, reduce.ae_encode(model, train)

    def apply(self, state, table):
        return reduce.ae_encode(state, table)

    def summary(self, state):
        return {"latent_dim": state.latent_dim,
                "final_loss": float(state.loss_trace[-1])}


_STAGE_BUILDERS = {
    "robust_scaler": lambda p: _RobustScalerStage(),
    "minmax_scaler": lambda p: _MinMaxScalerStage(),
    "smote_tomek": lambda p: _SmoteTomekStage(p["k"], p["seed"]),
    "mi_select": lambda p: _MiSelectStage(p["policy"], p["top_k"], p["mode"], p["k"], p["bins"]),
    "boruta_select": lambda p: _BorutaStage(p["alpha"], p["max_iter"], p["seed"],
                                            p["n_trees"], p["max_depth"]),
    "lda": lambda p: _LdaStage(p["m"], p["epsilon"]),
    "autoencoder": lambda p: _AutoencoderStage(p["latent_dim"], p["epochs"],
                                               p["learning_rate"], p["batch_size"], p["seed"]),
}


def build_stage(spec: StageSpec):
    return _STAGE_BUILDERS[spec.kind](spec.resolved())


# -- canonical experiment grid ---------------------------------------------------------

def _spec(name, group, label, configuration, stage_list, family, hyper=None):
    return PipelineSpec(
        name=name,
        stages=tuple(StageSpec(kind, params) for kind, params in stage_list),
        classifier=models.ClassifierSpec(family, hyper or {}),
        configuration=configuration,
        model_label=label,
        group=group,
    )


_ROBUST = ("robust_scaler", {})
_MINMAX = ("minmax_scaler", {})
_SMOTE = ("smote_tomek", {})
_MI = ("mi_select", {})
_BORUTA = ("boruta_select", {})
_LDA = ("lda", {})
_AE = ("autoencoder", {})


def canonical_specs() -> list:
    """The full experiment grid: baselines, both pipelines, both ablations.

    Pipeline-2 rows all start from min-max scaled features; that pipeline's
    wrapper stages (Boruta, autoencoder) are defined on the scaled path, so
    rows whose configuration names only the wrapper still scale first.
    XGBoost and LightGBM rows reuse the generic gradient-boosting family and
    are labelled as proxies.
    """
    specs = []
    for family in models.FAMILIES:
        specs.append(_spec(f"baseline-{family}", "baseline", FAMILY_LABELS[family],
                           "Baseline", [], family))

    xgb = "XGBoost (generic-gboost proxy)"
    lgbm = "LightGBM (generic-gboost proxy)"
    pipeline1 = [
        ("P1-LogReg", "Logistic Regression", "RobustScaler + SMOTETomek",
         [_ROBUST, _SMOTE], "logreg"),
        ("P1-KNN", "K-Nearest Neighbors", "MI + SMOTETomek",
         [_SMOTE, _MI], "knn"),
        ("P1-RForest", "Random Forest", "LDA", [_LDA], "rforest"),
        ("P1-XGBoost", xgb, "MI + SMOTETomek", [_SMOTE, _MI], "gboost"),
        ("P1-GBoost", "Gradient Boosting", "RobustScaler", [_ROBUST], "gboost"),
        ("P1-ETrees", "Extra Trees", "RobustScaler", [_ROBUST], "etrees"),
        ("P1-AdaBoost", "AdaBoost", "MI", [_MI], "adaboost"),
        ("P1-MLP", "MLP Classifier", "MI", [_MI], "mlp"),
        ("P1-LightGBM", lgbm, "MI + SMOTETomek", [_SMOTE, _MI], "gboost"),
    ]
    for name, label, configuration, stage_list, family in pipeline1:
        specs.append(_spec(name, "pipeline1", label, configuration, stage_list, family))

    pipeline2 = [
        ("P2-LogReg", "Logistic Regression", "MinMaxScaler", [_MINMAX], "logreg"),
        ("P2-KNN", "K-Nearest Neighbors", "Autoencoder", [_MINMAX, _AE], "knn"),
        ("P2-RForest", "Random Forest", "MinMaxScaler + SMOTETomek",
         [_MINMAX, _SMOTE], "rforest"),
        ("P2-XGBoost", xgb, "MinMaxScaler + SMOTETomek", [_MINMAX, _SMOTE], "gboost"),
        ("P2-GBoost", "Gradient Boosting", "Boruta", [_MINMAX, _BORUTA], "gboost"),
        ("P2-ETrees", "Extra Trees", "Boruta + SMOTETomek",
         [_MINMAX, _SMOTE, _BORUTA], "etrees"),
        ("P2-AdaBoost", "AdaBoost", "Autoencoder", [_MINMAX, _AE], "adaboost"),
        ("P2-MLP", "MLP Classifier", "Autoencoder + SMOTETomek",
         [_MINMAX, _SMOTE, _AE], "mlp"),
        ("P2-LightGBM", lgbm, "MinMaxScaler", [_MINMAX], "gboost"),
    ]
    for name, label, configuration, stage_list, family in pipeline2:
        specs.append(_spec(name, "pipeline2", label, configuration, stage_list, family))

    ablation1 = [
        ("Baseline", []),
        ("RobustScaler", [_ROBUST]),
        ("SMOTETomek + RobustScaler", [_SMOTE, _ROBUST]),
        ("RobustScaler + MI", [_ROBUST, _MI]),
        ("SMOTETomek + RobustScaler + MI", [_SMOTE, _ROBUST, _MI]),
        ("RobustScaler + MI + LDA", [_ROBUST, _MI, _LDA]),
        ("SMOTETomek + RobustScaler + MI + LDA", [_SMOTE, _ROBUST, _MI, _LDA]),
    ]
    ablation2 = [
        ("Baseline", []),
        ("MinMaxScaler", [_MINMAX]),
        ("SMOTETomek + MinMaxScaler", [_SMOTE, _MINMAX]),
        ("MinMaxScaler + Boruta", [_MINMAX, _BORUTA]),
        ("SMOTETomek + MinMaxScaler + Boruta", [_SMOTE, _MINMAX, _BORUTA]),
        ("MinMaxScaler + Boruta + Autoencoder", [_MINMAX, _BORUTA, _AE]),
        ("SMOTETomek + MinMaxScaler + Boruta + Autoencoder",
         [_SMOTE, _MINMAX, _BORUTA, _AE]),
    ]
    for grid, group, label, family in (
            (ablation1, "ablation1", "K-Nearest Neighbors", "knn"),
            (ablation2, "ablation2", "Extra Trees", "etrees")):
        for configuration, stage_list in grid:
            slug = configuration.lower().replace(" + ", "-").replace(" ", "-")
            specs.append(_spec(f"{group[:1].upper()}{group[-1]}-{slug}", group, label,
                               configuration, stage_list, family))
    return specs


def specs_for_group(group: str) -> list:
    selected = [s for s in canonical_specs() if s.group == group]
    if not selected:
        raise ValueError(f"unknown spec group {group!r}")
    return selected


# -- experiment runs -------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentReport:
    name: str
    model_label: str
    configuration: str
    config: dict
    seeds: dict
    test_report: evaluation.MetricsReport
    timing: evaluation.TimingRecord
    stage_summaries: tuple
    resample: transform.ResampleReport | None
    fold_plan: evaluation.FoldPlan | None
    cv_reports: tuple | None

    def fold_accuracies(self) -> np.ndarray:
        if self.cv_reports is None:
            raise FoldPlanMismatch(f"report {self.name!r} carries no CV trace")
        return evaluation.fold_accuracies(self.cv_reports)

    def to_dict(self) -> dict:
        blob = {
            "name": self.name,
            "model": self.model_label,
            "configuration": self.configuration,
            "config": self.config,
            "seeds": self.seeds,
            "test_metrics": self.test_report.to_dict(),
            "timing": self.timing.to_dict(),
            "stage_summaries": list(self.stage_summaries),
            "resample": self.resample.to_dict() if self.resample else None,
        }
        if self.cv_reports is not None:
            blob["cv"] = {
                "k": self.fold_plan.k,
                "seed": self.fold_plan.seed,
                "n_rows": self.fold_plan.n_rows,
                "fold_sizes": self.fold_plan.fold_sizes(),
                "fold_metrics": [r.to_dict() for r in self.cv_reports],
            }
        else:
            blob["cv"] = None
        return blob

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def markdown_row(self) -> str:
        m = self.test_report
        cells = [self.model_label, self.configuration]
        cells += [f"{100 * v:.3f}%" for v in (m.accuracy, m.f1, m.recall, m.precision)]
        return "| " + " | ".join(cells) + " |"


def _resolved_config(spec: PipelineSpec, cv: bool, cv_folds: int) -> dict:
    return {
        "name": spec.name,
        "model_label": spec.model_label,
        "configuration": spec.configuration,
        "stages": [{"kind": s.kind, "parameters": s.resolved()} for s in spec.stages],
        "classifier": {
            "family": spec.classifier.family,
            "hyperparameters": spec.classifier.resolved(),
            "seed": spec.classifier.seed,
        },
        "cv": {"enabled": cv, "folds": cv_folds},
    }


def run_experiment(spec: PipelineSpec, train: DataTable, test: DataTable,
                   seed: int = 0, *, cv: bool = True, cv_folds: int = 8) -> ExperimentReport:
    """Fit the chain on the training split, score the held-out split.

    The resampler reshapes only the training rows; test rows are transformed
    by the fitted stages and never resampled. With ``cv`` on, an 8-fold
    trace over the training split is attached for the signed-rank
    comparisons; turning it off skips that extra work for expensive chains.
    """
    seeded = spec.with_seed(seed)
    stages = [build_stage(s) for s in seeded.stages]
    completed = []
    phase = "setup"
    try:
        phase = "fit"
        started = time.perf_counter()
        states = []
        fitted_train = train
        for stage_spec, stage in zip(seeded.stages, stages):
            phase = f"stage {stage_spec.kind}"
            state, fitted_train = stage.fit_train(fitted_train)
            states.append(state)
            completed.append(stage_spec.kind)
        phase = "classifier"
        model = models.fit(seeded.classifier, fitted_train)
        train_seconds = time.perf_counter() - started

        phase = "predict"
        started = time.perf_counter()
        transformed = evaluation._apply_stages(stages, states, test)
        predicted = models.predict(model, transformed.matrix())
        test_seconds = time.perf_counter() - started

        n_classes = int(max(train.labels.max(), test.labels.max())) + 1
        test_report = evaluation.metrics(
            evaluation.confusion(test.labels, predicted, n_classes))

        plan = None
        cv_reports = None
        if cv:
            phase = "cross-validation"
            plan = evaluation.stratified_kfold(train.labels, cv_folds, seed)
            cv_reports = tuple(evaluation.cross_validate(
                seeded.classifier, stages, train, plan))
    except (SleepScreenError, ValueError) as exc:
        partial = {
            "name": spec.name,
            "completed_stages": completed,
            "failed_phase": phase,
            "error": str(exc),
        }
        raise ExperimentError(f"{spec.name}: {phase} failed: {exc}",
                              partial_report=partial) from exc

    resample = next((s for s in states if isinstance(s, transform.ResampleReport)), None)
    summaries = tuple(
        {"kind": stage_spec.kind, **stage.summary(state)}
        for stage_spec, stage, state in zip(seeded.stages, stages, states))
    timing = evaluation.TimingRecord(
        train_seconds=float(train_seconds),
        test_ms_total=float(test_seconds * 1000),
        test_ms_per_sample=float(test_seconds * 1000 / max(1, test.n_rows)),
    )
    return ExperimentReport(
        name=spec.name,
        model_label=seeded.model_label,
        configuration=seeded.configuration,
        config=_resolved_config(seeded, cv, cv_folds),
        seeds={"experiment": int(seed)},
        test_report=test_report,
        timing=timing,
        stage_summaries=summaries,
        resample=resample,
        fold_plan=plan,
        cv_reports=cv_reports,
    )


def run_ablation(pipeline_id: int, train: DataTable, test: DataTable,
                 seed: int = 0, *, cv: bool = False) -> list:
    """Run one pipeline's 7-row stepwise grid against the fixed split."""
    if pipeline_id not in (1, 2):
        raise ValueError("pipeline_id must be 1 or 2")
    specs = specs_for_group(f"ablation{pipeline_id}")
    return [run_experiment(s, train, test, seed, cv=cv) for s in specs]


def compare_with_wilcoxon(report_a: ExperimentReport, report_b: ExperimentReport,
                          alternative: str = "greater") -> evaluation.WilcoxonResult:
    """Signed-rank test on paired fold accuracies of two experiment reports."""
    plan_a, plan_b = report_a.fold_plan, report_b.fold_plan
    if plan_a is None or plan_b is None:
        raise FoldPlanMismatch("both reports need a CV trace to compare")
    same = (plan_a.k == plan_b.k and plan_a.n_rows == plan_b.n_rows
            and all(np.array_equal(x, y) for x, y in zip(plan_a.folds, plan_b.folds)))
    if not same:
        raise FoldPlanMismatch("fold plans differ; accuracies are not paired")
    return evaluation.wilcoxon(report_a.fold_accuracies(),
                               report_b.fold_accuracies(), alternative)


# -- text config parsing ----------------------------------------------------------------

def _parse_scalar(text: str):
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if lowered in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_kv(tokens) -> dict:
    params = {}
    for token in tokens:
        if "=" not in token:
            raise ValueError(f"expected key=value, got {token!r}")
        key, _, raw = token.partition("=")
        params[key.strip()] = _parse_scalar(raw.strip())
    return params


def parse_pipeline_spec(text: str) -> PipelineSpec:
    """Build a PipelineSpec from a small line-oriented config.

    Grammar, one directive per line (# starts a comment)::

        name = my-pipeline
        classifier = knn k=3
        stage = smote_tomek seed=7
        stage = mi_select policy=top_k top_k=8

    The classifier line is required; stage lines are applied in file order.
    """
    name = None
    classifier = None
    stages = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, rest = line.partition("=")
        if not eq:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        rest = rest.strip()
        if key == "name":
            name = rest
        elif key == "classifier":
            tokens = rest.split()
            if not tokens:
                raise ValueError(f"line {lineno}: classifier needs a family")
            params = _parse_kv(tokens[1:])
            seed = params.pop("seed", 0)
            classifier = models.ClassifierSpec(tokens[0], params, seed=seed)
        elif key == "stage":
            tokens = rest.split()
            if not tokens:
                raise ValueError(f"line {lineno}: stage needs a kind")
            stages.append(StageSpec(tokens[0], _parse_kv(tokens[1:])))
        else:
            raise ValueError(f"line {lineno}: unknown directive {key!r}")
    if classifier is None:
        raise ValueError("config never declares a classifier")
    return PipelineSpec(name=name or "custom", stages=tuple(stages), classifier=classifier)
