"""Feedforward network engine: He-uniform init, backprop, Adam.

Shared by the MLP classifier and the autoencoder. Everything runs at float64;
the shuffle order each epoch is a pure function of (seed, epoch) so training
is reproducible regardless of how the caller ordered the rows it passed in.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionChainBroken, NonFiniteInput, NonFiniteLoss

ACTIVATIONS = ("relu", "identity", "softmax")
LOSSES = ("cross_entropy", "mse")


@dataclass
class Layer:
    weights: np.ndarray  # (fan_in, fan_out)
    biases: np.ndarray   # (fan_out,)
    activation: str


@dataclass
class Network:
    layers: list[Layer]
    loss: str

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least one layer")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")
        for i, layer in enumerate(self.layers):
            if layer.activation not in ACTIVATIONS:
                raise ValueError(f"unknown activation {layer.activation!r}")
            last = i == len(self.layers) - 1
            if layer.activation == "softmax" and not last:
                raise ValueError("softmax is only valid as the final activation")
            if not last and layer.weights.shape[1] != self.layers[i + 1].weights.shape[0]:
                raise DimensionChainBroken(
                    f"layer {i} outputs {layer.weights.shape[1]} but layer {i + 1} "
                    f"expects {self.layers[i + 1].weights.shape[0]}"
                )
        final = self.layers[-1].activation
        if self.loss == "cross_entropy" and final != "softmax":
            raise ValueError("cross_entropy requires a softmax output layer")
        if self.loss == "mse" and final == "softmax":
            raise ValueError("mse cannot follow a softmax output layer")

    def copy(self) -> "Network":
        return Network(
            [Layer(l.weights.copy(), l.biases.copy(), l.activation) for l in self.layers],
            self.loss,
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("adam betas must lie strictly between 0 and 1")
        if self.learning_rate < 0.0:
            raise ValueError("learning rate must be non-negative")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be positive")


def init(layer_dims: list[int], activations: list[str], loss: str, seed: int) -> Network:
    """Build a network from a dimension chain, e.g. [4, 8, 2] = two layers."""
    if len(layer_dims) < 2:
        raise ValueError("need at least input and output dimensions")
    if len(activations) != len(layer_dims) - 1:
        raise ValueError("one activation per layer required")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(layer_dims, layer_dims[1:], activations):
        bound = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        layers.append(Layer(w, np.zeros(fan_out), act))
    return Network(layers, loss)


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "identity":
        return z
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(net: Network, batch: np.ndarray) -> list[np.ndarray]:
    """Activations per layer; index 0 is the input, index -1 the output."""
    batch = np.asarray(batch, dtype=np.float64)
    if not np.all(np.isfinite(batch)):
        raise NonFiniteInput("forward pass received NaN or infinity")
    acts = [batch]
    for layer in net.layers:
        z = acts[-1] @ layer.weights + layer.biases
        acts.append(_activate(z, layer.activation))
    return acts


def loss_value(net: Network, batch: np.ndarray, targets: np.ndarray) -> float:
    out = forward(net, batch)[-1]
    targets = np.asarray(targets, dtype=np.float64)
    if net.loss == "cross_entropy":
        p = np.clip(out, 1e-15, None)
        return float(-(targets * np.log(p)).sum(axis=1).mean())
    with np.errstate(over="ignore"):  # overflow surfaces as inf -> NonFiniteLoss
        return float(np.mean((out - targets) ** 2))


def backward(net: Network, batch: np.ndarray, targets: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Mean-loss gradients as one (dW, db) pair per layer."""
    targets = np.asarray(targets, dtype=np.float64)
    acts = forward(net, batch)
    n = batch.shape[0]
    out = acts[-1]
    if net.loss == "cross_entropy":
        # softmax + cross-entropy collapse to (p - y) / n
        delta = (out - targets) / n
    else:
        delta = 2.0 * (out - targets) / (n * out.shape[1])
        if net.layers[-1].activation == "relu":
            delta = delta * (out > 0.0)
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        grads[i] = (acts[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = delta @ net.layers[i].weights.T
            if net.layers[i - 1].activation == "relu":
                delta = delta * (acts[i] > 0.0)
    return grads


def _epoch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, epoch]))
    return rng.permutation(n)


def train(net: Network, data: np.ndarray, targets: np.ndarray,
          cfg: TrainConfig) -> tuple[Network, list[float]]:
    """Mini-batch Adam; returns a new network and the per-epoch full-data loss."""
    data = np.asarray(data, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if not np.all(np.isfinite(data)) or not np.all(np.isfinite(targets)):
        raise NonFiniteInput("training data contains NaN or infinity")
    net = net.copy()
    m = [[np.zeros_like(l.weights), np.zeros_like(l.biases)] for l in net.layers]
    v = [[np.zeros_like(l.weights), np.zeros_like(l.biases)] for l in net.layers]
    step = 0
    trace: list[float] = []
    n = data.shape[0]
    for epoch in range(cfg.epochs):
        order = _epoch_order(cfg.seed, epoch, n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            grads = backward(net, data[idx], targets[idx])
            step += 1
            bc1 = 1.0 - cfg.beta1 ** step
            bc2 = 1.0 - cfg.beta2 ** step
            for i, layer in enumerate(net.layers):
                for j, param in enumerate((layer.weights, layer.biases)):
                    grad = grads[i][j]
                    m[i][j] = cfg.beta1 * m[i][j] + (1.0 - cfg.beta1) * grad
                    v[i][j] = cfg.beta2 * v[i][j] + (1.0 - cfg.beta2) * grad ** 2
                    param -= (cfg.learning_rate
                              * (m[i][j] / bc1) / (np.sqrt(v[i][j] / bc2) + cfg.epsilon))
        epoch_loss = loss_value(net, data, targets)
        if not np.isfinite(epoch_loss):
            raise NonFiniteLoss(f"loss became non-finite at epoch {epoch + 1}")
        trace.append(epoch_loss)
    return net, trace
