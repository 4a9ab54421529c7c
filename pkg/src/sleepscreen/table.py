"""Column-major sample container shared by every pipeline stage.

A DataTable is a list of named numeric columns plus an integer label vector.
Stages never mutate a table; every operation returns a new one built from
fresh arrays, so tables can be shared freely across threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NUMERIC = "numeric"
BINARY = "binary"
ONEHOT = "onehot"

_KINDS = (NUMERIC, BINARY, ONEHOT)


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown column kind {self.kind!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("column values must be one-dimensional")
        object.__setattr__(self, "values", v)


class DataTable:
    """Immutable-by-convention table: columns share one row count, labels are ints."""

    def __init__(self, columns: Sequence[Column], labels: Iterable[int]):
        columns = list(columns)
        if not columns:
            raise ValueError("a DataTable needs at least one column")
        labels = np.asarray(list(labels) if not isinstance(labels, np.ndarray) else labels,
                            dtype=np.int64)
        n = columns[0].values.shape[0]
        for col in columns:
            if col.values.shape[0] != n:
                raise ValueError(f"column {col.name!r} has {col.values.shape[0]} rows, expected {n}")
        if labels.shape[0] != n:
            raise ValueError(f"labels have {labels.shape[0]} rows, expected {n}")
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        self.columns = columns
        self.labels = labels

    # -- basic access --------------------------------------------------

    @property
    def n_rows(self) -> int:
        return self.columns[0].values.shape[0]

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def kinds(self) -> list[str]:
        return [c.kind for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def matrix(self) -> np.ndarray:
        """Row-major view of the data as an (n_rows, n_cols) float array (copy)."""
        return np.column_stack([c.values for c in self.columns])

    def class_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    # -- derivation helpers (always copy) -------------------------------

    def with_matrix(self, matrix: np.ndarray, labels: np.ndarray | None = None) -> "DataTable":
        """Rebuild the table from a matrix, keeping column names and kinds."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != self.n_cols:
            raise ValueError(f"matrix shape {matrix.shape} does not match {self.n_cols} columns")
        cols = [Column(c.name, c.kind, matrix[:, j].copy()) for j, c in enumerate(self.columns)]
        return DataTable(cols, self.labels.copy() if labels is None else labels)

    def select_columns(self, indices: Iterable[int]) -> "DataTable":
        idx = list(indices)
        cols = [Column(self.columns[i].name, self.columns[i].kind, self.columns[i].values.copy())
                for i in idx]
        return DataTable(cols, self.labels.copy())

    def take_rows(self, indices: Iterable[int]) -> "DataTable":
        idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices,
                         dtype=np.int64)
        cols = [Column(c.name, c.kind, c.values[idx]) for c in self.columns]
        return DataTable(cols, self.labels[idx])

    def append_columns(self, columns: Sequence[Column]) -> "DataTable":
        cols = [Column(c.name, c.kind, c.values.copy()) for c in self.columns]
        cols.extend(columns)
        return DataTable(cols, self.labels.copy())

    def append_rows(self, matrix: np.ndarray, labels: np.ndarray) -> "DataTable":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[1] != self.n_cols:
            raise ValueError("row block width does not match column count")
        cols = [Column(c.name, c.kind, np.concatenate([c.values, matrix[:, j]]))
                for j, c in enumerate(self.columns)]
        return DataTable(cols, np.concatenate([self.labels, np.asarray(labels, dtype=np.int64)]))

    # -- comparison ------------------------------------------------------

    def equals(self, other: "DataTable") -> bool:
        return (self.names == other.names
                and self.kinds == other.kinds
                and np.array_equal(self.labels, other.labels)
                and all(np.array_equal(a.values, b.values)
                        for a, b in zip(self.columns, other.columns)))

    def checksum(self) -> int:
        """Content hash used by tests to prove non-mutation."""
        h = 0
        for c in self.columns:
            h = hash((h, c.name, c.kind, c.values.tobytes()))
        return hash((h, self.labels.tobytes()))

    def __repr__(self):
        return f"DataTable({self.n_rows} rows, {self.n_cols} cols)"
