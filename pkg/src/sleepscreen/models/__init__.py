"""Classifier families under one fit/predict/predict_proba contract.

Eight families share the same entry points; hyperparameter names are
validated per family at spec construction, training state is opaque per
family, and ``predict`` is always the argmax of ``predict_proba`` (numpy's
argmax keeps the lowest class on exact vote ties, which is the documented
tie rule for the vote-based families).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..errors import InvalidHyperparameter, SingleClassTraining, UnsupportedFamily
from ..table import DataTable
from . import _boosting, _forest, _linear, _mlp, _neighbors


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def _positive_int(value) -> bool:
    return _is_int(value) and value >= 1


def _split_size(value) -> bool:
    return _is_int(value) and value >= 2


def _optional_depth(value) -> bool:
    return value is None or _positive_int(value)


def _nonneg_real(value) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool) and value >= 0

def _positive_real(value) -> bool:
    return _nonneg_real(value) and value > 0


def _hidden_sizes(value) -> bool:
    return (
        isinstance(value, (list, tuple))
        and len(value) >= 1
        and all(_positive_int(width) for width in value)
    )


# name -> (default, acceptance predicate) per family
_SCHEMAS = {
    "logreg": {
        "l2": (1e-3, _nonneg_real),
        "max_iter": (500, _positive_int),
        "tol": (1e-7, _positive_real),
    },
    "knn": {"k": (5, _positive_int)},
    "dtree": {
        "max_depth": (None, _optional_depth),
        "min_samples_split": (2, _split_size),
    },
    "rforest": {
        "n_trees": (100, _positive_int),
        "max_depth": (None, _optional_depth),
        "min_samples_split": (2, _split_size),
    },
    "etrees": {
        "n_trees": (100, _positive_int),
        "max_depth": (None, _optional_depth),
        "min_samples_split": (2, _split_size),
    },
    "gboost": {
        "n_stages": (200, _positive_int),
        "learning_rate": (0.1, _nonneg_real),
        "max_depth": (3, _positive_int),
        "min_samples_split": (2, _split_size),
    },
    "adaboost": {
        "n_stumps": (100, _positive_int),
        "max_depth": (1, _positive_int),
    },
    "mlp": {
        "hidden": ((64, 32), _hidden_sizes),
        "epochs": (300, _positive_int),
        "learning_rate": (1e-3, _nonneg_real),
        "batch_size": (32, _positive_int),
    },
}

FAMILIES = tuple(_SCHEMAS)
TREE_FAMILIES = ("dtree", "rforest", "etrees", "gboost", "adaboost")


def default_hyperparameters(family: str) -> dict:
    if family not in _SCHEMAS:
        raise InvalidHyperparameter(f"unknown model family {family!r}")
    return {name: default for name, (default, _) in _SCHEMAS[family].items()}


@dataclass(frozen=True)
class ClassifierSpec:
    """A model family plus hyperparameter overrides and a seed."""

    family: str
    hyperparameters: Mapping = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in _SCHEMAS:
            raise InvalidHyperparameter(f"unknown model family {self.family!r}")
        schema = _SCHEMAS[self.family]
        for name, value in self.hyperparameters.items():
            if name not in schema:
                raise InvalidHyperparameter(
                    f"{self.family} does not take a hyperparameter named {name!r}"
                )
            if not schema[name][1](value):
                raise InvalidHyperparameter(f"bad value for {self.family}.{name}: {value!r}")
        if not _is_int(self.seed) or self.seed < 0:
            raise InvalidHyperparameter(f"seed must be a nonnegative integer, got {self.seed!r}")
        object.__setattr__(self, "hyperparameters", dict(self.hyperparameters))
        object.__setattr__(self, "seed", int(self.seed))

    def resolved(self) -> dict:
        """Defaults overlaid with this spec's overrides."""
        merged = default_hyperparameters(self.family)
        merged.update(self.hyperparameters)
        if self.family == "mlp":
            merged["hidden"] = tuple(merged["hidden"])
        return merged


@dataclass(frozen=True)
class FittedModel:
    family: str
    n_classes: int
    n_features: int
    params: object


def _resolve_training_input(table, labels):
    if isinstance(table, DataTable):
        matrix = table.matrix()
        if labels is None:
            labels = table.labels
    else:
        matrix = np.asarray(table, dtype=np.float64)
        if labels is None:
            raise ValueError("labels are required when fitting from a bare matrix")
    labels = np.asarray(labels, dtype=np.int64)
    if matrix.ndim != 2:
        raise ValueError("training data must be a 2-D matrix")
    if labels.ndim != 1 or len(labels) != matrix.shape[0]:
        raise ValueError("labels must be one per training row")
    if labels.size and labels.min() < 0:
        raise ValueError("labels must be nonnegative integers")
    return matrix, labels


def _as_matrix(model: FittedModel, table) -> np.ndarray:
    matrix = table.matrix() if isinstance(table, DataTable) else np.asarray(table, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} feature columns, got shape {matrix.shape}"
        )
    return matrix


def fit(spec: ClassifierSpec, table, labels=None) -> FittedModel:
    matrix, labels = _resolve_training_input(table, labels)
    if np.unique(labels).size < 2:
        raise SingleClassTraining("training labels contain fewer than two classes")
    n_classes = int(labels.max()) + 1
    h = spec.resolved()

    if spec.family == "logreg":
        params = _linear.fit(matrix, labels, n_classes, l2=h["l2"], max_iter=h["max_iter"], tol=h["tol"])
    elif spec.family == "knn":
        if h["k"] > matrix.shape[0]:
            raise InvalidHyperparameter(
                f"knn.k={h['k']} exceeds the {matrix.shape[0]} training rows"
            )
        params = _neighbors.fit(matrix, labels, n_classes, k=h["k"])
    elif spec.family == "dtree":
        params = _forest.fit_dtree(
            matrix, labels, n_classes,
            max_depth=h["max_depth"], min_samples_split=h["min_samples_split"],
        )
    elif spec.family in ("rforest", "etrees"):
        params = _forest.fit_forest(
            matrix, labels, n_classes,
            n_trees=h["n_trees"], max_depth=h["max_depth"],
            min_samples_split=h["min_samples_split"], seed=spec.seed,
            bootstrap=spec.family == "rforest",
        )
    elif spec.family == "gboost":
        params = _boosting.fit_gboost(
            matrix, labels, n_classes,
            n_stages=h["n_stages"], learning_rate=h["learning_rate"],
            max_depth=h["max_depth"], min_samples_split=h["min_samples_split"],
        )
    elif spec.family == "adaboost":
        params = _boosting.fit_adaboost(
            matrix, labels, n_classes, n_stumps=h["n_stumps"], max_depth=h["max_depth"]
        )
    else:
        params = _mlp.fit(
            matrix, labels, n_classes,
            hidden=h["hidden"], epochs=h["epochs"],
            learning_rate=h["learning_rate"], batch_size=h["batch_size"], seed=spec.seed,
        )
    return FittedModel(
        family=spec.family, n_classes=n_classes, n_features=matrix.shape[1], params=params
    )


def predict_proba(model: FittedModel, table) -> np.ndarray:
    matrix = _as_matrix(model, table)
    if model.family == "logreg":
        return _linear.proba(model.params, matrix)
    if model.family == "knn":
        return _neighbors.proba(model.params, matrix)
    if model.family == "dtree":
        return _forest.dtree_proba(model.params, matrix)
    if model.family in ("rforest", "etrees"):
        return _forest.forest_proba(model.params, matrix)
    if model.family == "gboost":
        return _boosting.gboost_proba(model.params, matrix)
    if model.family == "adaboost":
        return _boosting.adaboost_proba(model.params, matrix)
    return _mlp.proba(model.params, matrix)


def predict(model: FittedModel, table) -> np.ndarray:
    return np.argmax(predict_proba(model, table), axis=1).astype(np.int64)


def feature_importances(model: FittedModel) -> np.ndarray:
    """Impurity-decrease importances normalized to sum to one."""
    if model.family not in TREE_FAMILIES:
        raise UnsupportedFamily(f"{model.family} has no impurity importances")
    if model.family == "dtree":
        raw = model.params.importances
    elif model.family in ("rforest", "etrees"):
        raw = _forest.forest_importances(model.params)
    elif model.family == "gboost":
        raw = _boosting.gboost_importances(model.params)
    else:
        raw = _boosting.adaboost_importances(model.params)
    if raw is None or raw.sum() <= 0:
        # degenerate ensemble that never split; report indifference
        return np.full(model.n_features, 1.0 / model.n_features)
    return raw / raw.sum()
