"""k-nearest-neighbor classification with deterministic tie handling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class KnnParams:
    train: np.ndarray
    labels: np.ndarray
    k: int
    n_classes: int


def fit(matrix, labels, n_classes, *, k):
    return KnnParams(train=matrix.copy(), labels=labels.copy(), k=k, n_classes=n_classes)


def proba(params: KnnParams, matrix) -> np.ndarray:
    """Neighbor vote fractions per class.

    Distances are exact squared Euclidean computed row-against-row (not the
    expanded inner-product form) so duplicated training rows produce exactly
    equal distances; the stable sort then resolves those ties to the lower
    training row index.  Queries are chunked to bound the broadcast buffer.
    """
    counts = np.zeros((matrix.shape[0], params.n_classes))
    chunk = max(1, int(2_000_000 / max(1, params.train.size)))
    for start in range(0, matrix.shape[0], chunk):
        block = matrix[start : start + chunk]
        deltas = block[:, None, :] - params.train[None, :, :]
        distances = np.square(deltas).sum(axis=2)
        nearest = np.argsort(distances, axis=1, kind="stable")[:, : params.k]
        votes = params.labels[nearest]
        for cls in range(params.n_classes):
            counts[start : start + chunk, cls] = (votes == cls).sum(axis=1)
    return counts / params.k
