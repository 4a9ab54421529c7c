"""Dimensionality reduction: Fisher discriminant projection and an autoencoder."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import neural
from .errors import DimensionMismatch, SingularScatter
from .table import Column, DataTable, NUMERIC


@dataclass(frozen=True)
class LdaProjection:
    matrix: np.ndarray       # (d, m), columns ordered by eigenvalue descending
    class_means: np.ndarray  # (n_classes, d)
    eigenvalues: np.ndarray  # (m,), clamped at zero
    epsilon: float

    def to_dict(self) -> dict:
        return {
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "epsilon": self.epsilon,
        }


def _scatter_matrices(matrix: np.ndarray, labels: np.ndarray):
    overall = matrix.mean(axis=0)
    classes = np.unique(labels)
    within = np.zeros((matrix.shape[1], matrix.shape[1]))
    between = np.zeros_like(within)
    means = np.zeros((int(labels.max()) + 1, matrix.shape[1]))
    for cls in classes:
        rows = matrix[labels == cls]
        mean = rows.mean(axis=0)
        means[cls] = mean
        centered = rows - mean
        within += centered.T @ centered
        gap = (mean - overall)[:, None]
        between += rows.shape[0] * (gap @ gap.T)
    return within, between, means


def lda_fit(table, labels=None, m: int = 2, epsilon: float | None = None) -> LdaProjection:
    """Top-m directions of the regularized Fisher eigenproblem.

    Solves (Sw + eps*I)^-1 Sb through a Cholesky reformulation so the
    eigensolve stays symmetric.  eps defaults to 1e-4 times the mean
    within-scatter diagonal; one-hot columns leave Sw near-singular here.
    """
    matrix, labels = _matrix_and_labels(table, labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise SingularScatter("between-class scatter is zero with a single class")
    if m < 1 or m > min(classes.size - 1, matrix.shape[1]):
        raise ValueError(f"m={m} outside 1..min(classes-1, features)")
    for cls in classes:
        if (labels == cls).sum() < 2:
            raise ValueError(f"class {cls} has fewer than two rows")

    within, between, means = _scatter_matrices(matrix, labels)
    if epsilon is None:
        epsilon = 1e-4 * float(np.diag(within).mean())
        if epsilon <= 0:
            epsilon = 1e-8
    regularized = within + epsilon * np.eye(matrix.shape[1])
    try:
        chol = np.linalg.cholesky(regularized)
    except np.linalg.LinAlgError as exc:
        raise SingularScatter("within-class scatter not invertible after shrinkage") from exc
    half = np.linalg.solve(chol, between)
    symmetric = np.linalg.solve(chol, half.T).T
    symmetric = 0.5 * (symmetric + symmetric.T)  # kill asymmetry from roundoff
    values, vectors = np.linalg.eigh(symmetric)
    order = np.argsort(values)[::-1][:m]
    directions = np.linalg.solve(chol.T, vectors[:, order])
    norms = np.linalg.norm(directions, axis=0)
    norms[norms == 0] = 1.0
    return LdaProjection(
        matrix=directions / norms,
        class_means=means,
        eigenvalues=np.maximum(values[order], 0.0),
        epsilon=float(epsilon),
    )


def lda_transform(proj: LdaProjection, table):
    """X @ W; DataTable in, DataTable out (columns lda_0..lda_{m-1})."""
    if isinstance(table, DataTable):
        if table.n_cols != proj.matrix.shape[0]:
            raise DimensionMismatch(
                f"projection expects {proj.matrix.shape[0]} columns, table has {table.n_cols}"
            )
        projected = table.matrix() @ proj.matrix
        columns = [
            Column(f"lda_{i}", NUMERIC, projected[:, i]) for i in range(projected.shape[1])
        ]
        return DataTable(columns, table.labels)
    matrix = np.asarray(table, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != proj.matrix.shape[0]:
        raise DimensionMismatch(
            f"projection expects {proj.matrix.shape[0]} columns, got {matrix.shape}"
        )
    return matrix @ proj.matrix


def fisher_ratio(matrix: np.ndarray, labels: np.ndarray) -> float:
    """trace(Sb) / trace(Sw) of the given (usually projected) data."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    within, between, _ = _scatter_matrices(matrix, np.asarray(labels, dtype=np.int64))
    denominator = float(np.trace(within))
    if denominator <= 0:
        denominator = 1e-300
    return float(np.trace(between)) / denominator


# -- autoencoder ---------------------------------------------------------------

@dataclass(frozen=True)
class AutoencoderConfig:
    latent_dim: int = 8
    hidden_dims: tuple = ()  # () means one layer of max(8, ceil(d/2)), chosen at fit
    epochs: int = 200
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


@dataclass(frozen=True)
class AutoencoderModel:
    net: neural.Network
    encoder_layers: int
    latent_dim: int
    loss_trace: list


def ae_fit(table, cfg: AutoencoderConfig | None = None) -> AutoencoderModel:
    """Symmetric relu autoencoder trained on mean squared reconstruction error."""
    cfg = cfg or AutoencoderConfig()
    matrix = table.matrix() if isinstance(table, DataTable) else np.asarray(table, dtype=np.float64)
    width = matrix.shape[1]
    if cfg.latent_dim >= width:
        raise ValueError(f"latent_dim {cfg.latent_dim} must be below input width {width}")
    hidden = tuple(cfg.hidden_dims) or (max(8, math.ceil(width / 2)),)
    dims = [width, *hidden, cfg.latent_dim, *reversed(hidden), width]
    # relu on the true hidden layers; the bottleneck and the reconstruction
    # are both linear so a one-unit latent cannot die the way a relu can
    activations = (
        ["relu"] * len(hidden) + ["identity"] + ["relu"] * len(hidden) + ["identity"]
    )
    net = neural.init(dims, activations, "mse", cfg.seed)
    train_cfg = neural.TrainConfig(
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        seed=cfg.seed,
    )
    trained, trace = neural.train(net, matrix, matrix, train_cfg)
    return AutoencoderModel(
        net=trained,
        encoder_layers=len(hidden) + 1,
        latent_dim=cfg.latent_dim,
        loss_trace=trace,
    )


def ae_encode(model: AutoencoderModel, table):
    """Latent representation; DataTable in, DataTable out (columns ae_0..)."""
    if isinstance(table, DataTable):
        latent = _encode_matrix(model, table.matrix())
        columns = [Column(f"ae_{i}", NUMERIC, latent[:, i]) for i in range(latent.shape[1])]
        return DataTable(columns, table.labels)
    return _encode_matrix(model, np.asarray(table, dtype=np.float64))


def _encode_matrix(model: AutoencoderModel, matrix: np.ndarray) -> np.ndarray:
    expected = model.net.layers[0].weights.shape[0]
    if matrix.ndim != 2 or matrix.shape[1] != expected:
        raise DimensionMismatch(f"encoder expects {expected} columns, got {matrix.shape}")
    activations = neural.forward(model.net, matrix)
    return activations[model.encoder_layers]


def ae_reconstruction_mse(model: AutoencoderModel, table) -> float:
    matrix = table.matrix() if isinstance(table, DataTable) else np.asarray(table, dtype=np.float64)
    rebuilt = neural.forward(model.net, matrix)[-1]
    return float(np.square(rebuilt - matrix).mean())


def _matrix_and_labels(table, labels):
    if isinstance(table, DataTable):
        matrix = table.matrix()
        if labels is None:
            labels = table.labels
    else:
        matrix = np.asarray(table, dtype=np.float64)
        if labels is None:
            raise ValueError("labels are required with a bare matrix")
    labels = np.asarray(labels, dtype=np.int64)
    if matrix.ndim != 2 or labels.ndim != 1 or len(labels) != matrix.shape[0]:
        raise ValueError("need a 2-D matrix and one label per row")
    return matrix, labels
