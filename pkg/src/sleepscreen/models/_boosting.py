"""Stagewise boosting: softmax gradient boosting and SAMME AdaBoost."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _trees


@dataclass
class GBoostParams:
    prior_scores: np.ndarray          # log class priors
    stages: list                      # one list of n_classes trees per stage
    learning_rate: float
    n_classes: int


@dataclass
class AdaBoostParams:
    stumps: list
    alphas: list
    stage_errors: list = field(default_factory=list)
    n_classes: int = 0
    fallback: np.ndarray | None = None  # training distribution, used when no stump was kept


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def fit_gboost(matrix, labels, n_classes, *, n_stages, learning_rate, max_depth, min_samples_split):
    """One least-squares tree per class per stage on the softmax residual.

    Scores start at the log class priors, so a learning rate of zero leaves
    every prediction at the prior argmax.  Leaf values use the one-step
    Newton estimate for multiclass log-loss rather than the raw leaf mean.
    """
    n_rows = matrix.shape[0]
    priors = np.bincount(labels, minlength=n_classes) / n_rows
    prior_scores = np.log(np.clip(priors, 1e-12, None))
    scores = np.tile(prior_scores, (n_rows, 1))
    onehot = np.zeros((n_rows, n_classes))
    onehot[np.arange(n_rows), labels] = 1.0

    stages = []
    for _ in range(n_stages):
        probs = _softmax(scores)
        stage = []
        for cls in range(n_classes):
            residual = onehot[:, cls] - probs[:, cls]
            tree = _trees.grow_regressor(
                matrix, residual, max_depth=max_depth, min_samples_split=min_samples_split
            )
            _newton_leaves(tree, matrix, residual, n_classes)
            stage.append(tree)
            scores[:, cls] += learning_rate * tree.leaf_values(matrix)
        stages.append(stage)
    return GBoostParams(
        prior_scores=prior_scores, stages=stages, learning_rate=learning_rate, n_classes=n_classes
    )


def _newton_leaves(tree: _trees.Tree, matrix, residual, n_classes) -> None:
    """Replace leaf means with (K-1)/K * sum(r) / sum(|r|(1-|r|)) per leaf."""
    leaves = tree.apply(matrix)
    n_nodes = len(tree.value)
    numerator = np.bincount(leaves, weights=residual, minlength=n_nodes)
    curvature = np.abs(residual) * (1.0 - np.abs(residual))
    denominator = np.bincount(leaves, weights=curvature, minlength=n_nodes)
    safe = denominator > 1e-150
    values = np.zeros(n_nodes)
    values[safe] = (n_classes - 1) / n_classes * numerator[safe] / denominator[safe]
    tree.value = values


def gboost_proba(params: GBoostParams, matrix) -> np.ndarray:
    scores = np.tile(params.prior_scores, (matrix.shape[0], 1))
    for stage in params.stages:
        for cls, tree in enumerate(stage):
            scores[:, cls] += params.learning_rate * tree.leaf_values(matrix)
    return _softmax(scores)


def gboost_importances(params: GBoostParams) -> np.ndarray:
    total = np.zeros_like(params.stages[0][0].importances)
    for stage in params.stages:
        for tree in stage:
            total += tree.importances
    return total


def fit_adaboost(matrix, labels, n_classes, *, n_stumps, max_depth):
    """SAMME with depth-limited trees and multiplicative reweighting.

    A learner whose weighted error reaches 0.5 is discarded and boosting
    halts; a perfect learner is kept and also halts it.  ``stage_errors``
    records the weighted error of every learner that was kept.
    """
    n_rows = matrix.shape[0]
    weights = np.full(n_rows, 1.0 / n_rows)
    stumps, alphas, errors = [], [], []
    for _ in range(n_stumps):
        stump = _trees.grow_classifier(
            matrix,
            labels,
            n_classes,
            sample_weight=weights,
            max_depth=max_depth,
            min_samples_split=2,
        )
        predicted = np.argmax(stump.leaf_values(matrix), axis=1)
        missed = predicted != labels
        error = float(weights[missed].sum() / weights.sum())
        if error >= 0.5:
            break
        clamped = max(error, 1e-12)
        alpha = np.log((1.0 - clamped) / clamped) + np.log(n_classes - 1.0)
        stumps.append(stump)
        alphas.append(alpha)
        errors.append(error)
        if error == 0.0:
            break
        weights = weights * np.exp(alpha * missed)
        weights /= weights.sum()
    fallback = np.bincount(labels, minlength=n_classes) / n_rows
    return AdaBoostParams(
        stumps=stumps, alphas=alphas, stage_errors=errors, n_classes=n_classes, fallback=fallback
    )


def adaboost_proba(params: AdaBoostParams, matrix) -> np.ndarray:
    """Alpha-weighted vote shares across the kept learners."""
    if not params.stumps:
        return np.tile(params.fallback, (matrix.shape[0], 1))
    scores = np.zeros((matrix.shape[0], params.n_classes))
    rows = np.arange(matrix.shape[0])
    for stump, alpha in zip(params.stumps, params.alphas):
        voted = np.argmax(stump.leaf_values(matrix), axis=1)
        scores[rows, voted] += alpha
    return scores / sum(params.alphas)


def adaboost_importances(params: AdaBoostParams) -> np.ndarray | None:
    if not params.stumps:
        return None
    total = np.zeros_like(params.stumps[0].importances)
    for stump, alpha in zip(params.stumps, params.alphas):
        total += alpha * stump.importances
    return total
