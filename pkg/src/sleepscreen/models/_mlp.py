"""Feedforward softmax classifier built on the neural engine.

No input scaling happens here: the network sees features exactly as given,
so callers who want normalized inputs must put a scaler stage in front.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import neural


@dataclass
class MlpParams:
    net: neural.Network
    loss_trace: list


def fit(matrix, labels, n_classes, *, hidden, epochs, learning_rate, batch_size, seed):
    dims = [matrix.shape[1], *hidden, n_classes]
    activations = ["relu"] * len(hidden) + ["softmax"]
    net = neural.init(dims, activations, "cross_entropy", seed)
    targets = np.zeros((matrix.shape[0], n_classes))
    targets[np.arange(matrix.shape[0]), labels] = 1.0
    cfg = neural.TrainConfig(
        epochs=epochs, batch_size=batch_size, learning_rate=learning_rate, seed=seed
    )
    trained, trace = neural.train(net, matrix, targets, cfg)
    return MlpParams(net=trained, loss_trace=trace)


def proba(params: MlpParams, matrix) -> np.ndarray:
    return neural.forward(params.net, matrix)[-1]
