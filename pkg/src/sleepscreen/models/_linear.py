"""Multinomial logistic regression fitted by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LogRegParams:
    shift: np.ndarray
    scale: np.ndarray
    weights: np.ndarray  # (n_features, n_classes)
    bias: np.ndarray
    n_iter: int


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def fit(matrix, labels, n_classes, *, l2, max_iter, tol):
    """Minimize softmax log-loss + 0.5*l2*||W||^2 with Armijo backtracking.

    Features are standardized internally (undone at predict time); raw survey
    columns span single digits to thousands of steps and plain gradient
    descent stalls on that conditioning.
    """
    shift = matrix.mean(axis=0)
    scale = matrix.std(axis=0)
    scale[scale == 0] = 1.0
    standardized = (matrix - shift) / scale

    n_rows = standardized.shape[0]
    targets = np.zeros((n_rows, n_classes))
    targets[np.arange(n_rows), labels] = 1.0
    weights = np.zeros((standardized.shape[1], n_classes))
    bias = np.zeros(n_classes)

    def loss_at(w, b):
        probs = _softmax(standardized @ w + b)
        data_term = -np.log(np.clip(probs[np.arange(n_rows), labels], 1e-15, None)).mean()
        return data_term + 0.5 * l2 * float(np.square(w).sum())

    step = 1.0
    current = loss_at(weights, bias)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        probs = _softmax(standardized @ weights + bias)
        grad_w = standardized.T @ (probs - targets) / n_rows + l2 * weights
        grad_b = (probs - targets).mean(axis=0)
        if max(np.abs(grad_w).max(), np.abs(grad_b).max()) <= tol:
            iterations -= 1
            break
        descent = float(np.square(grad_w).sum() + np.square(grad_b).sum())
        while step > 1e-12:
            trial = loss_at(weights - step * grad_w, bias - step * grad_b)
            if trial <= current - 0.5 * step * descent:
                break
            step *= 0.5
        weights = weights - step * grad_w
        bias = bias - step * grad_b
        current = loss_at(weights, bias)
        step = min(step * 2.0, 1e3)
    return LogRegParams(shift=shift, scale=scale, weights=weights, bias=bias, n_iter=iterations)


def proba(params: LogRegParams, matrix) -> np.ndarray:
    standardized = (matrix - params.shift) / params.scale
    return _softmax(standardized @ params.weights + params.bias)
