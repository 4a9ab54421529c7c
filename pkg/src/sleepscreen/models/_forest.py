"""Single CART trees and the two randomized forest families."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _trees


@dataclass
class ForestParams:
    trees: list
    n_classes: int


def fit_dtree(matrix, labels, n_classes, *, max_depth, min_samples_split):
    return _trees.grow_classifier(
        matrix,
        labels,
        n_classes,
        max_depth=max_depth,
        min_samples_split=min_samples_split,
    )


def dtree_proba(tree: _trees.Tree, matrix) -> np.ndarray:
    return tree.leaf_values(matrix)


def fit_forest(matrix, labels, n_classes, *, n_trees, max_depth, min_samples_split, seed, bootstrap):
    """Grow ``n_trees`` members with sqrt(d) candidate features per node.

    bootstrap=True resamples rows with replacement per tree (random forest);
    bootstrap=False keeps all rows and draws one uniform threshold per
    candidate feature (extra trees).  Each member owns an rng seeded from
    (seed, tree index), so members are independent of fitting order.
    """
    max_features = max(1, int(math.sqrt(matrix.shape[1])))
    trees = []
    for index in range(n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        if bootstrap:
            rows = rng.integers(0, matrix.shape[0], size=matrix.shape[0])
            member_matrix = matrix[rows]
            member_labels = labels[rows]
        else:
            member_matrix = matrix
            member_labels = labels
        trees.append(
            _trees.grow_classifier(
                member_matrix,
                member_labels,
                n_classes,
                max_depth=max_depth,
                min_samples_split=min_samples_split,
                max_features=max_features,
                random_thresholds=not bootstrap,
                rng=rng,
            )
        )
    return ForestParams(trees=trees, n_classes=n_classes)


def forest_proba(params: ForestParams, matrix) -> np.ndarray:
    """Hard-vote fractions; argmax of this reproduces the majority vote."""
    counts = np.zeros((matrix.shape[0], params.n_classes))
    rows = np.arange(matrix.shape[0])
    for tree in params.trees:
        voted = np.argmax(tree.leaf_values(matrix), axis=1)
        counts[rows, voted] += 1.0
    return counts / len(params.trees)


def forest_importances(params: ForestParams) -> np.ndarray:
    total = np.zeros_like(params.trees[0].importances)
    for tree in params.trees:
        total += tree.importances
    return total
