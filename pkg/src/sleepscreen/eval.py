"""Scoring, cross-validation, hyperparameter search, and the signed-rank test.

Cross-validation accepts a list of preprocessing stages. A stage is any
object exposing two methods:

    fit_train(train: DataTable) -> (state, DataTable)
    apply(state, table: DataTable) -> DataTable

``fit_train`` sees only training rows and may return a table with different
rows (resamplers add synthetic rows and drop boundary ones). ``apply`` must
be a pure transform driven entirely by the state learned in ``fit_train``;
validation rows reach it only through ``apply``, never through ``fit_train``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import models
from .errors import (
    AllZeroDifferences,
    ClassSmallerThanK,
    EmptyMatrix,
    FoldPlanMismatch,
    LabelOutOfRange,
    LengthMismatch,
)
from .table import DataTable

ALTERNATIVES = ("two_sided", "greater", "less")


# -- confusion matrix and derived metrics ------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix; rows are true classes, columns predicted ones."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("confusion counts must be a square matrix")
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        return {"counts": self.counts.tolist()}


def confusion(y_true, y_pred, n_classes: int = 3) -> ConfusionMatrix:
    """Tally (true, predicted) label pairs into an n_classes x n_classes matrix."""
    t = np.asarray(y_true, dtype=np.int64).ravel()
    p = np.asarray(y_pred, dtype=np.int64).ravel()
    if t.shape[0] != p.shape[0]:
        raise LengthMismatch(f"{t.shape[0]} true labels vs {p.shape[0]} predictions")
    for name, arr in (("true", t), ("predicted", p)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise LabelOutOfRange(f"{name} labels fall outside 0..{n_classes - 1}")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision_per_class: tuple
    recall_per_class: tuple
    f1_per_class: tuple
    precision: float
    recall: float
    f1: float
    support: tuple
    averaging: str
    zero_predicted: tuple

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision_per_class": list(self.precision_per_class),
            "recall_per_class": list(self.recall_per_class),
            "f1_per_class": list(self.f1_per_class),
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": list(self.support),
            "averaging": self.averaging,
            "zero_predicted": list(self.zero_predicted),
        }


def metrics(cm: ConfusionMatrix, averaging: str = "macro") -> MetricsReport:
    """One-vs-rest precision/recall/F1 per class plus an aggregate.

    A class that is never predicted has undefined precision; it is reported
    as 0 and its index is listed in ``zero_predicted`` so callers can tell a
    genuine zero from a division guard.
    """
    if averaging not in ("macro", "weighted"):
        raise ValueError(f"unknown averaging mode {averaging!r}")
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total == 0:
        raise EmptyMatrix("confusion matrix has no observations")
    tp = np.diag(counts)
    predicted = counts.sum(axis=0)
    actual = counts.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
    pr_sum = precision + recall
    f1 = np.divide(2 * precision * recall, pr_sum,
                   out=np.zeros_like(tp), where=pr_sum > 0)
    if averaging == "macro":
        agg = [float(v.mean()) for v in (precision, recall, f1)]
    else:
        weights = actual / total
        agg = [float((weights * v).sum()) for v in (precision, recall, f1)]
    return MetricsReport(
        accuracy=float(tp.sum() / total),
        precision_per_class=tuple(float(v) for v in precision),
        recall_per_class=tuple(float(v) for v in recall),
        f1_per_class=tuple(float(v) for v in f1),
        precision=agg[0],
        recall=agg[1],
        f1=agg[2],
        support=tuple(int(v) for v in actual),
        averaging=averaging,
        zero_predicted=tuple(int(i) for i in np.flatnonzero(predicted == 0)),
    )


# -- fold plans ---------------------------------------------------------------------

@dataclass(frozen=True)
class FoldPlan:
    k: int
    folds: tuple
    seed: int
    n_rows: int

    def __post_init__(self):
        folds = tuple(np.asarray(f, dtype=np.int64) for f in self.folds)
        if len(folds) != self.k:
            raise ValueError("fold count does not match k")
        merged = np.sort(np.concatenate(folds)) if folds else np.empty(0, np.int64)
        if not np.array_equal(merged, np.arange(self.n_rows)):
            raise ValueError("folds must partition the row indices exactly")
        object.__setattr__(self, "folds", folds)

    def fold_sizes(self) -> list:
        return [int(f.shape[0]) for f in self.folds]


def stratified_kfold(labels, k: int, seed: int = 0) -> FoldPlan:
    """Assign rows to k folds, keeping each class's fold counts within one row.

    Each class is shuffled and dealt round-robin; the dealing start rotates
    by every class's remainder so the leftover rows land on different folds
    instead of all piling onto fold 0.
    """
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if k < 2:
        raise ValueError("k must be at least 2")
    classes, class_counts = np.unique(labels, return_counts=True)
    for cls, count in zip(classes, class_counts):
        if count < k:
            raise ClassSmallerThanK(f"class {int(cls)} has {int(count)} rows; needs >= {k}")
    rng = np.random.default_rng(seed)
    buckets = [[] for _ in range(k)]
    offset = 0
    for cls in classes:
        members = rng.permutation(np.flatnonzero(labels == cls))
        for j, row in enumerate(members):
            buckets[(j + offset) % k].append(int(row))
        offset = (offset + members.shape[0]) % k
    folds = tuple(np.sort(np.asarray(b, dtype=np.int64)) for b in buckets)
    return FoldPlan(k=k, folds=folds, seed=int(seed), n_rows=int(labels.shape[0]))


# -- cross-validation ---------------------------------------------------------------

def _fit_stages(stages, train: DataTable):
    states = []
    for stage in stages:
        state, train = stage.fit_train(train)
        states.append(state)
    return states, train


def _apply_stages(stages, states, table: DataTable) -> DataTable:
    for stage, state in zip(stages, states):
        table = stage.apply(state, table)
    return table


def cross_validate(spec, stages, table: DataTable, plan: FoldPlan) -> list:
    """Fit the stage chain and classifier on each fold's training part.

    Returns one MetricsReport per fold, in fold order. Validation rows are
    held back from every ``fit_train`` call; they only pass through ``apply``.
    """
    if plan.n_rows != table.n_rows:
        raise FoldPlanMismatch(f"plan covers {plan.n_rows} rows, table has {table.n_rows}")
    n_classes = int(table.labels.max()) + 1
    in_fold = np.zeros(table.n_rows, dtype=bool)
    reports = []
    for fold in plan.folds:
        in_fold[:] = False
        in_fold[fold] = True
        train_part = table.take_rows(np.flatnonzero(~in_fold))
        val_part = table.take_rows(fold)
        states, train_part = _fit_stages(stages, train_part)
        val_part = _apply_stages(stages, states, val_part)
        model = models.fit(spec, train_part)
        predicted = models.predict(model, val_part.matrix())
        reports.append(metrics(confusion(val_part.labels, predicted, n_classes)))
    return reports


def fold_accuracies(reports) -> np.ndarray:
    return np.asarray([r.accuracy for r in reports], dtype=np.float64)


# -- randomized hyperparameter search ------------------------------------------------

def _draw_parameters(distributions: dict, rng) -> dict:
    drawn = {}
    for name in sorted(distributions):
        dist = distributions[name]
        if callable(dist):
            drawn[name] = dist(rng)
        else:
            choices = list(dist)
            drawn[name] = choices[int(rng.integers(len(choices)))]
    return drawn


def randomized_search(family: str, distributions: dict, n_iter: int,
                      table: DataTable, plan: FoldPlan,
                      stages=(), seed: int = 0):
    """Sample hyperparameter settings and keep the best by mean fold accuracy.

    Each value in ``distributions`` is either a finite choice sequence or a
    callable taking a Generator. Draw i uses its own generator derived from
    (seed, i), so results do not depend on evaluation order; score ties keep
    the earlier draw.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be at least 1")
    best_spec = None
    best_score = -np.inf
    trace = []
    for i in range(n_iter):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        drawn = _draw_parameters(distributions, rng)
        spec = models.ClassifierSpec(family, drawn, seed=seed)
        reports = cross_validate(spec, stages, table, plan)
        accuracies = fold_accuracies(reports)
        score = float(accuracies.mean())
        trace.append({
            "draw": i,
            "hyperparameters": dict(drawn),
            "fold_accuracies": accuracies.tolist(),
            "mean_accuracy": score,
        })
        if score > best_score:
            best_score = score
            best_spec = spec
    return best_spec, trace


# -- Wilcoxon signed-rank test --------------------------------------------------------

@dataclass(frozen=True)
class WilcoxonResult:
    r_plus: float
    r_minus: float
    w_min: float
    statistic_reported: float
    p_value: float
    n_effective: int
    method: str
    alternative: str

    def to_dict(self) -> dict:
        return {
            "r_plus": self.r_plus,
            "r_minus": self.r_minus,
            "w_min": self.w_min,
            "statistic_reported": self.statistic_reported,
            "p_value": self.p_value,
            "n_effective": self.n_effective,
            "method": self.method,
            "alternative": self.alternative,
        }


def _average_ranks(values: np.ndarray):
    """Ranks 1..n with tied values sharing the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    tie_sizes = []
    start = 0
    n = values.shape[0]
    while start < n:
        stop = start
        while stop + 1 < n and values[order[stop + 1]] == values[order[start]]:
            stop += 1
        ranks[order[start:stop + 1]] = (start + stop) / 2 + 1
        tie_sizes.append(stop - start + 1)
        start = stop + 1
    return ranks, tie_sizes


def _exact_sign_counts(doubled_ranks) -> np.ndarray:
    # counts[s] = number of sign assignments whose positive-rank sum, doubled,
    # equals s; built by convolving one rank at a time over all 2^n choices
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:counts.shape[0] - r]
        counts = counts + shifted
    return counts


def wilcoxon(a, b, alternative: str = "greater") -> WilcoxonResult:
    """Paired signed-rank test on a - b with zero differences dropped.

    Exact p-values enumerate all 2^n sign assignments (as a sum-distribution
    convolution) up to n_effective = 25; larger samples use the normal
    approximation with the tied-rank variance correction and no continuity
    correction.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape[0] != b.shape[0]:
        raise LengthMismatch(f"{a.shape[0]} vs {b.shape[0]} paired values")
    if a.shape[0] == 0:
        raise ValueError("need at least one pair")
    diffs = a - b
    diffs = diffs[diffs != 0]
    n = diffs.shape[0]
    if n == 0:
        raise AllZeroDifferences("every paired difference is zero")
    ranks, tie_sizes = _average_ranks(np.abs(diffs))
    r_plus = float(ranks[diffs > 0].sum())
    r_minus = float(ranks[diffs < 0].sum())
    w_min = min(r_plus, r_minus)

    if n <= 25:
        method = "exact"
        doubled = [int(round(2 * r)) for r in ranks]
        counts = _exact_sign_counts(doubled)
        denom = float(2 ** n)
        s2 = int(round(2 * r_plus))
        p_greater = float(counts[s2:].sum()) / denom
        p_less = float(counts[:s2 + 1].sum()) / denom
    else:
        method = "normal_approx"
        mean = n * (n + 1) / 4
        variance = n * (n + 1) * (2 * n + 1) / 24
        variance -= sum(t ** 3 - t for t in tie_sizes) / 48
        sd = math.sqrt(variance)
        p_greater = 0.5 * math.erfc((r_plus - mean) / sd / math.sqrt(2))
        p_less = 0.5 * math.erfc((r_minus - mean) / sd / math.sqrt(2))

    if alternative == "greater":
        statistic, p_value = r_plus, p_greater
    elif alternative == "less":
        statistic, p_value = r_minus, p_less
    else:
        statistic, p_value = w_min, min(1.0, 2 * min(p_greater, p_less))
    return WilcoxonResult(
        r_plus=r_plus,
        r_minus=r_minus,
        w_min=w_min,
        statistic_reported=float(statistic),
        p_value=float(p_value),
        n_effective=int(n),
        method=method,
        alternative=alternative,
    )


# -- timing -----------------------------------------------------------------------

@dataclass(frozen=True)
class TimingRecord:
    train_seconds: float
    test_ms_total: float
    test_ms_per_sample: float

    def to_dict(self) -> dict:
        return {
            "train_seconds": self.train_seconds,
            "test_ms_total": self.test_ms_total,
            "test_ms_per_sample": self.test_ms_per_sample,
        }


def timing_row(model: str, configuration: str, timing: TimingRecord) -> dict:
    """Flat row for the latency tables: model, configuration, train s, test ms."""
    return {
        "model": model,
        "configuration": configuration,
        "train_seconds": timing.train_seconds,
        "test_ms_total": timing.test_ms_total,
    }


def timed_fit_predict(spec, stages, train: DataTable, test: DataTable):
    """Fit on train, score on test, timing both halves with a monotonic clock.

    The predict half includes applying the fitted stages to the test rows:
    that transform is part of producing a prediction for new data.
    """
    started = time.perf_counter()
    states, fitted_train = _fit_stages(stages, train)
    model = models.fit(spec, fitted_train)
    train_seconds = time.perf_counter() - started

    started = time.perf_counter()
    transformed = _apply_stages(stages, states, test)
    predicted = models.predict(model, transformed.matrix())
    test_seconds = time.perf_counter() - started

    n_classes = max(model.n_classes, int(test.labels.max()) + 1)
    report = metrics(confusion(test.labels, predicted, n_classes))
    timing = TimingRecord(
        train_seconds=float(train_seconds),
        test_ms_total=float(test_seconds * 1000),
        test_ms_per_sample=float(test_seconds * 1000 / max(1, test.n_rows)),
    )
    return report, timing
