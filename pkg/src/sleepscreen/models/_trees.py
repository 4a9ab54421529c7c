"""Array-backed CART trees shared by the tree and boosting families.

A fitted tree is a set of parallel node arrays rather than linked node
objects, so predicting a whole table costs one vectorized hop per tree
level instead of a Python walk per row.  Growing is iterative (explicit
stack) to keep very deep trees off the interpreter's recursion limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NO_FEATURE = -1


@dataclass
class Tree:
    """Flattened binary tree; ``feature[i] == NO_FEATURE`` marks a leaf.

    ``value`` holds one row per node: a class distribution for classifier
    trees, a scalar per node for regression trees.  ``importances`` is the
    unnormalized per-feature impurity decrease accumulated while growing.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    importances: np.ndarray

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        """Index of the leaf reached by every row."""
        at = np.zeros(matrix.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[at]
            live = np.nonzero(feat >= 0)[0]
            if live.size == 0:
                return at
            here = at[live]
            goes_left = matrix[live, feat[live]] <= self.threshold[here]
            at[live] = np.where(goes_left, self.left[here], self.right[here])

    def leaf_values(self, matrix: np.ndarray) -> np.ndarray:
        return self.value[self.apply(matrix)]


class _Builder:
    """Accumulates node arrays; children are patched in as they are grown."""

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []

    def add_leaf(self, value) -> int:
        index = len(self.feature)
        self.feature.append(NO_FEATURE)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return index

    def make_internal(self, node: int, feature: int, threshold: float) -> None:
        self.feature[node] = feature
        self.threshold[node] = threshold

    def finish(self, importances: np.ndarray) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
            importances=importances,
        )


def _candidate_features(n_features, max_features, rng):
    if max_features is None or max_features >= n_features:
        return np.arange(n_features)
    # keep the draw order: sorting it would make equal-impurity ties (common
    # in small deep nodes) always favor low column indices, which biases any
    # caller that compares columns positionally, e.g. real-vs-shadow setups
    return rng.choice(n_features, size=max_features, replace=False)


def _gini_of_rows(counts: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Gini impurity for a batch of weighted class-count rows."""
    out = np.zeros(len(counts))
    ok = weights > 0
    shares = counts[ok] / weights[ok, None]
    out[ok] = 1.0 - np.square(shares).sum(axis=1)
    return out


def _sweep_gini(column, class_weights):
    """Best midpoint threshold for one feature under weighted Gini.

    Returns (child impurity, threshold) or None when the column is constant.
    The first minimum wins, so ties resolve to the lowest threshold.
    """
    order = np.argsort(column, kind="stable")
    sorted_vals = column[order]
    cuts = np.nonzero(sorted_vals[:-1] < sorted_vals[1:])[0]
    if cuts.size == 0:
        return None
    cumulative = np.cumsum(class_weights[order], axis=0)
    left = cumulative[cuts]
    right = cumulative[-1] - left
    w_left = left.sum(axis=1)
    w_right = right.sum(axis=1)
    child = w_left * _gini_of_rows(left, w_left) + w_right * _gini_of_rows(right, w_right)
    child /= w_left + w_right
    best = int(np.argmin(child))
    threshold = 0.5 * (sorted_vals[cuts[best]] + sorted_vals[cuts[best] + 1])
    return float(child[best]), threshold


def _random_threshold_gini(column, class_weights, rng):
    """Impurity of a single uniformly drawn threshold (extra-trees style)."""
    lo = column.min()
    hi = column.max()
    if lo == hi:
        return None
    threshold = rng.uniform(lo, hi)
    left_mask = column <= threshold
    left = class_weights[left_mask].sum(axis=0)
    right = class_weights[~left_mask].sum(axis=0)
    w_left = left.sum()
    w_right = right.sum()
    total = w_left + w_right
    child = 0.0
    if w_left > 0:
        child += w_left * (1.0 - np.square(left / w_left).sum())
    if w_right > 0:
        child += w_right * (1.0 - np.square(right / w_right).sum())
    return child / total, float(threshold)


def grow_classifier(
    matrix,
    labels,
    n_classes,
    *,
    sample_weight=None,
    max_depth=None,
    min_samples_split=2,
    max_features=None,
    random_thresholds=False,
    rng=None,
):
    """CART with weighted Gini impurity; leaves store class distributions.

    ``max_features`` limits the candidate features drawn per node (forests);
    ``random_thresholds`` replaces the exhaustive midpoint sweep with one
    uniform draw per candidate feature.  Comparisons are strict, so ties
    across features keep whichever came first in candidate order: ascending
    feature index for full scans, the seeded draw order for subsets.
    """
    n_rows, n_features = matrix.shape
    weights = np.ones(n_rows) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    class_weights = np.zeros((n_rows, n_classes))
    class_weights[np.arange(n_rows), labels] = weights
    total_weight = weights.sum()
    depth_cap = math.inf if max_depth is None else max_depth

    builder = _Builder()
    importances = np.zeros(n_features)
    # (row indices, depth, parent node, is_right_child); left pushed last so the
    # traversal (and any rng draws) happen in pre-order
    stack = [(np.arange(n_rows), 0, -1, False)]
    while stack:
        rows, depth, parent, is_right = stack.pop()
        counts = class_weights[rows].sum(axis=0)
        node_weight = counts.sum()
        distribution = counts / node_weight if node_weight > 0 else np.full(n_classes, 1.0 / n_classes)
        node = builder.add_leaf(distribution)
        if parent >= 0:
            (builder.right if is_right else builder.left)[parent] = node

        node_gini = 1.0 - float(np.square(distribution).sum()) if node_weight > 0 else 0.0
        if rows.size < min_samples_split or depth >= depth_cap or node_gini <= 1e-12:
            continue

        sub = matrix[rows]
        sub_weights = class_weights[rows]
        best = None  # (child impurity, feature, threshold)
        for feat in _candidate_features(n_features, max_features, rng):
            column = sub[:, feat]
            if random_thresholds:
                found = _random_threshold_gini(column, sub_weights, rng)
            else:
                found = _sweep_gini(column, sub_weights)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], feat, found[1])
        if best is None or best[0] >= node_gini - 1e-12:
            continue

        child_gini, feat, threshold = best
        left_mask = sub[:, feat] <= threshold
        importances[feat] += (node_weight / total_weight) * (node_gini - child_gini)
        builder.make_internal(node, feat, threshold)
        stack.append((rows[~left_mask], depth + 1, node, True))
        stack.append((rows[left_mask], depth + 1, node, False))
    return builder.finish(importances)


def _sweep_sse(column, targets):
    """Best midpoint threshold for one feature by summed squared error."""
    order = np.argsort(column, kind="stable")
    sorted_vals = column[order]
    cuts = np.nonzero(sorted_vals[:-1] < sorted_vals[1:])[0]
    if cuts.size == 0:
        return None
    sorted_t = targets[order]
    cum_n = np.arange(1, len(column) + 1, dtype=np.float64)
    cum_s = np.cumsum(sorted_t)
    cum_q = np.cumsum(sorted_t * sorted_t)
    n_left = cum_n[cuts]
    n_right = len(column) - n_left
    s_left = cum_s[cuts]
    s_right = cum_s[-1] - s_left
    q_left = cum_q[cuts]
    q_right = cum_q[-1] - q_left
    sse = q_left - s_left * s_left / n_left + q_right - s_right * s_right / n_right
    best = int(np.argmin(sse))
    threshold = 0.5 * (sorted_vals[cuts[best]] + sorted_vals[cuts[best] + 1])
    return float(sse[best]), threshold


def grow_regressor(matrix, targets, *, max_depth, min_samples_split=2):
    """Least-squares regression tree; leaves store node means."""
    n_rows, n_features = matrix.shape
    builder = _Builder()
    importances = np.zeros(n_features)
    stack = [(np.arange(n_rows), 0, -1, False)]
    while stack:
        rows, depth, parent, is_right = stack.pop()
        node_targets = targets[rows]
        node = builder.add_leaf(float(node_targets.mean()))
        if parent >= 0:
            (builder.right if is_right else builder.left)[parent] = node

        node_sse = float(np.square(node_targets - node_targets.mean()).sum())
        if rows.size < min_samples_split or depth >= max_depth or node_sse <= 1e-14:
            continue

        sub = matrix[rows]
        best = None
        for feat in range(n_features):
            found = _sweep_sse(sub[:, feat], node_targets)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], feat, found[1])
        if best is None or best[0] >= node_sse:
            continue

        child_sse, feat, threshold = best
        left_mask = sub[:, feat] <= threshold
        importances[feat] += max(0.0, node_sse - child_sse) / n_rows
        builder.make_internal(node, feat, threshold)
        stack.append((rows[~left_mask], depth + 1, node, True))
        stack.append((rows[left_mask], depth + 1, node, False))
    return builder.finish(importances)
