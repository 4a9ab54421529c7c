"""Feature scoring and selection: mutual information and Boruta.

Two MI estimators are provided.  The nearest-neighbor one (continuous
feature against discrete labels) is the default; the histogram one exists
so scores can be compared bit-for-bit against reference tables, since
neighbor estimators disagree across implementations on tie handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models
from .errors import DegenerateLabels, KTooLarge
from .table import DataTable


@dataclass(frozen=True)
class MiConfig:
    mode: str = "knn"
    k: int = 3
    bins: int = 10

    def __post_init__(self):
        if self.mode not in ("knn", "histogram"):
            raise ValueError(f"unknown mi mode {self.mode!r}")
        if self.k < 1 or self.bins < 1:
            raise ValueError("k and bins must be positive")


@dataclass(frozen=True)
class MiScores:
    mi: np.ndarray
    estimator_config: tuple  # (mode, k or bin count)

    def to_dict(self) -> dict:
        return {
            "mi": [float(v) for v in self.mi],
            "mode": self.estimator_config[0],
            "parameter": int(self.estimator_config[1]),
        }


def _digamma_int(values: np.ndarray, harmonic: np.ndarray) -> np.ndarray:
    """psi(n) for integer n >= 1 equals H(n-1) minus Euler's gamma; the
    gamma terms cancel in the MI formula so plain harmonic numbers do."""
    return harmonic[np.asarray(values, dtype=np.int64) - 1]


def _mi_knn_one(feature: np.ndarray, labels: np.ndarray, k: int) -> float:
    """Nearest-neighbor MI between one continuous column and discrete labels.

    Radius per point is the distance to its k-th same-class neighbor;
    neighborhood counts use <= that radius so exact duplicates (common in
    survey data) are handled deterministically.
    """
    n = len(feature)
    radius = np.zeros(n)
    class_count = np.zeros(n, dtype=np.int64)
    k_used = np.zeros(n, dtype=np.int64)
    for cls in np.unique(labels):
        members = np.nonzero(labels == cls)[0]
        count = members.size
        class_count[members] = count
        if count < 2:
            continue
        k_eff = min(k, count - 1)
        k_used[members] = k_eff
        gaps = np.abs(feature[members][:, None] - feature[members][None, :])
        gaps.sort(axis=1)  # column 0 is the self distance
        radius[members] = gaps[:, k_eff]

    keep = class_count > 1
    if not keep.any():
        return 0.0
    kept = np.nonzero(keep)[0]
    order = np.sort(feature)
    hi = np.searchsorted(order, feature[kept] + radius[kept], side="right")
    lo = np.searchsorted(order, feature[kept] - radius[kept], side="left")
    neighbor_counts = hi - lo - 1  # drop the point itself

    m = kept.size
    harmonic = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, n + 1))])
    value = (
        harmonic[m - 1]
        - _digamma_int(class_count[kept], harmonic).mean()
        + _digamma_int(k_used[kept], harmonic).mean()
        - _digamma_int(np.maximum(neighbor_counts, 1), harmonic).mean()
    )
    return max(0.0, float(value))


def _mi_histogram_one(feature: np.ndarray, labels: np.ndarray, bins: int, n_classes: int) -> float:
    """Plug-in MI over an equal-width binning of the feature."""
    lo = feature.min()
    hi = feature.max()
    if hi == lo:
        return 0.0
    index = np.minimum((bins * (feature - lo) / (hi - lo)).astype(np.int64), bins - 1)
    joint = np.zeros((bins, n_classes))
    np.add.at(joint, (index, labels), 1.0)
    joint /= len(feature)
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    positive = joint > 0
    value = float((joint[positive] * np.log(joint[positive] / (px @ py)[positive])).sum())
    return max(0.0, value)


def mutual_info(table, labels=None, config: MiConfig | None = None) -> MiScores:
    """Per-feature MI (nats) against the class labels."""
    config = config or MiConfig()
    matrix, labels = _matrix_and_labels(table, labels)
    if np.unique(labels).size < 2:
        raise DegenerateLabels("mutual information needs at least two classes")
    n_classes = int(labels.max()) + 1
    scores = np.zeros(matrix.shape[1])
    for col in range(matrix.shape[1]):
        if config.mode == "knn":
            scores[col] = _mi_knn_one(matrix[:, col], labels, config.k)
        else:
            scores[col] = _mi_histogram_one(matrix[:, col], labels, config.bins, n_classes)
    parameter = config.k if config.mode == "knn" else config.bins
    return MiScores(mi=scores, estimator_config=(config.mode, parameter))


def select_top(scores: MiScores, policy: str, k: int | None = None) -> list[int]:
    """Feature indices kept by the policy, ascending.

    top_k keeps the k highest scores (ties resolve to the lower index);
    above_mean keeps scores strictly greater than the mean.
    """
    mi = scores.mi
    if mi.size == 0:
        raise ValueError("scores are empty")
    if policy == "top_k":
        if k is None:
            raise ValueError("top_k policy needs k")
        if k > mi.size:
            raise KTooLarge(f"k={k} but only {mi.size} features")
        ranked = np.argsort(-mi, kind="stable")[:k]
        return sorted(int(i) for i in ranked)
    if policy == "above_mean":
        return [int(i) for i in np.nonzero(mi > mi.mean())[0]]
    raise ValueError(f"unknown selection policy {policy!r}")


# -- Boruta -------------------------------------------------------------------

CONFIRMED = "Confirmed"
REJECTED = "Rejected"
TENTATIVE = "Tentative"


@dataclass(frozen=True)
class BorutaVerdicts:
    statuses: list
    hit_counts: np.ndarray
    iterations_run: int
    alpha: float

    def confirmed(self) -> list[int]:
        return [i for i, s in enumerate(self.statuses) if s == CONFIRMED]

    def rejected(self) -> list[int]:
        return [i for i, s in enumerate(self.statuses) if s == REJECTED]

    def to_dict(self) -> dict:
        return {
            "statuses": list(self.statuses),
            "hit_counts": [int(h) for h in self.hit_counts],
            "iterations_run": self.iterations_run,
            "alpha": self.alpha,
        }


def _binomial_two_sided(hits: int, trials: int) -> float:
    """Exact two-sided p-value for Binomial(trials, 0.5)."""
    log_half = trials * math.log(0.5)
    pmf = np.exp(
        [
            math.lgamma(trials + 1) - math.lgamma(j + 1) - math.lgamma(trials - j + 1) + log_half
            for j in range(trials + 1)
        ]
    )
    lower = float(pmf[: hits + 1].sum())
    upper = float(pmf[hits:].sum())
    return min(1.0, 2.0 * min(lower, upper))


def boruta(
    table,
    labels=None,
    forest_cfg: dict | None = None,
    alpha: float = 0.05,
    max_iter: int = 100,
    seed: int = 0,
) -> BorutaVerdicts:
    """All-relevant feature selection against permuted shadow columns.

    Each iteration appends a column-wise permuted copy of every feature,
    fits a random forest on the doubled matrix, and credits a hit to every
    real feature whose importance beats the best shadow importance.  After
    each iteration the still-tentative features face an exact two-sided
    binomial test (p=0.5) at alpha Bonferroni-corrected by the number of
    still-tentative features; the loop stops early once nothing is
    tentative.

    The default internal forest uses 100 trees capped at depth 7: deep
    enough to catch interactions, shallow enough that unlimited-depth
    overfitting does not hand noise features spurious deep-node wins.
    """
    matrix, labels = _matrix_and_labels(table, labels)
    n_rows, n_features = matrix.shape
    if n_features < 2:
        raise ValueError("boruta needs at least two features")
    if max_iter < 10:
        raise ValueError("max_iter must be at least 10")
    forest_cfg = dict(forest_cfg or {"n_trees": 100, "max_depth": 7})

    hits = np.zeros(n_features, dtype=np.int64)
    statuses = [TENTATIVE] * n_features
    iterations = 0
    for iteration in range(max_iter):
        if TENTATIVE not in statuses:
            break
        rng = np.random.default_rng(np.random.SeedSequence([seed, iteration]))
        shadows = np.column_stack(
            [matrix[rng.permutation(n_rows), col] for col in range(n_features)]
        )
        combined = np.hstack([matrix, shadows])
        spec = models.ClassifierSpec("rforest", forest_cfg, seed=int(rng.integers(2**31)))
        fitted = models.fit(spec, combined, labels)
        importances = models.feature_importances(fitted)
        best_shadow = importances[n_features:].max()
        hits += importances[:n_features] > best_shadow
        iterations = iteration + 1

        tentative = [i for i, s in enumerate(statuses) if s == TENTATIVE]
        corrected = alpha / len(tentative)
        for feat in tentative:
            p_value = _binomial_two_sided(int(hits[feat]), iterations)
            if p_value <= corrected:
                statuses[feat] = CONFIRMED if hits[feat] * 2 > iterations else REJECTED
    return BorutaVerdicts(
        statuses=statuses, hit_counts=hits.copy(), iterations_run=iterations, alpha=alpha
    )


def _matrix_and_labels(table, labels):
    if isinstance(table, DataTable):
        matrix = table.matrix()
        if labels is None:
            labels = table.labels
    else:
        matrix = np.asarray(table, dtype=np.float64)
        if labels is None:
            raise ValueError("labels are required when scoring a bare matrix")
    labels = np.asarray(labels, dtype=np.int64)
    if matrix.ndim != 2 or labels.ndim != 1 or len(labels) != matrix.shape[0]:
        raise ValueError("need a 2-D matrix and one label per row")
    return matrix, labels
