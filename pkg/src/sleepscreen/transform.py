"""Scalers and resamplers used as pipeline stages.

Scalers are fit on training data only and applied to anything; resamplers
rewrite the training table. All distance work is exact (n is small) with
ties broken by lowest row index so results are order-deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClassTooSmall
from .table import DataTable


# -- scalers -----------------------------------------------------------------

@dataclass(frozen=True)
class RobustScalerParams:
    median: np.ndarray
    iqr: np.ndarray


@dataclass(frozen=True)
class MinMaxParams:
    minimum: np.ndarray
    maximum: np.ndarray


def robust_fit(table: DataTable) -> RobustScalerParams:
    m = table.matrix()
    q1, med, q3 = np.quantile(m, [0.25, 0.5, 0.75], axis=0)  # linear (type-7)
    return RobustScalerParams(median=med, iqr=q3 - q1)


def robust_apply(params: RobustScalerParams, table: DataTable) -> DataTable:
    divisor = np.where(params.iqr == 0.0, 1.0, params.iqr)
    return table.with_matrix((table.matrix() - params.median) / divisor)


def minmax_fit(table: DataTable) -> MinMaxParams:
    m = table.matrix()
    return MinMaxParams(minimum=m.min(axis=0), maximum=m.max(axis=0))


def minmax_apply(params: MinMaxParams, table: DataTable) -> DataTable:
    span = params.maximum - params.minimum
    divisor = np.where(span == 0.0, 1.0, span)
    scaled = (table.matrix() - params.minimum) / divisor
    # no clipping: values outside the fitted range land outside [0,1]
    return table.with_matrix(scaled)


# -- SMOTE --------------------------------------------------------------------

def smote(table: DataTable, k: int = 5, seed: int = 0) -> DataTable:
    """Oversample every minority class up to the majority count.

    Each synthetic row is x + u*(nn - x) with u ~ U[0,1), nn one of the k
    nearest same-class neighbors of x. Originals are kept; synthetics are
    appended grouped by ascending class label.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    counts = table.class_counts()
    majority = max(counts.values())
    if all(c == majority for c in counts.values()):
        return table
    matrix = table.matrix()
    rng = np.random.default_rng(seed)
    new_rows, new_labels = [], []
    for cls in sorted(counts):
        need = majority - counts[cls]
        if need == 0:
            continue
        rows = np.flatnonzero(table.labels == cls)
        n = rows.shape[0]
        if n < 2:
            raise ClassTooSmall(f"class {cls} has {n} row(s); SMOTE needs at least 2")
        pts = matrix[rows]
        k_eff = min(k, n - 1)
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        np.fill_diagonal(d, np.inf)
        # stable sort keeps lowest-index neighbor first on distance ties
        nn = np.argsort(d, axis=1, kind="stable")[:, :k_eff]
        base = rng.integers(0, n, size=need)
        pick = rng.integers(0, k_eff, size=need)
        u = rng.random(need)
        neighbor = nn[base, pick]
        synth = pts[base] + u[:, None] * (pts[neighbor] - pts[base])
        new_rows.append(synth)
        new_labels.append(np.full(need, cls, dtype=np.int64))
    return table.append_rows(np.vstack(new_rows), np.concatenate(new_labels))


# -- Tomek links ----------------------------------------------------------------

def _nearest_neighbors(matrix: np.ndarray) -> np.ndarray:
    d = np.linalg.norm(matrix[:, None, :] - matrix[None, :, :], axis=2)
    np.fill_diagonal(d, np.inf)
    return d.argmin(axis=1)  # argmin takes the first minimum: lowest index wins ties


def find_tomek_links(table: DataTable) -> list[tuple[int, int]]:
    """Unordered pairs of opposite-class rows that are mutual nearest neighbors."""
    if table.n_rows < 2:
        return []
    nn = _nearest_neighbors(table.matrix())
    links = []
    for a in range(table.n_rows):
        b = int(nn[a])
        if a < b and nn[b] == a and table.labels[a] != table.labels[b]:
            links.append((a, b))
    return links


def _drop_set(table: DataTable, links: list[tuple[int, int]], policy: str) -> set[int]:
    if policy not in ("both", "majority_member"):
        raise ValueError(f"unknown policy {policy!r}")
    counts = table.class_counts()
    drop: set[int] = set()
    for a, b in links:
        if policy == "both":
            drop.update((a, b))
        else:
            ca, cb = counts[int(table.labels[a])], counts[int(table.labels[b])]
            if ca > cb:
                drop.add(a)
            elif cb > ca:
                drop.add(b)
    return drop


def remove_tomek_links(table: DataTable, policy: str = "both") -> DataTable:
    """Single-pass removal: find links once, drop once, never iterate."""
    drop = _drop_set(table, find_tomek_links(table), policy)
    if not drop:
        return table
    keep = [i for i in range(table.n_rows) if i not in drop]
    return table.take_rows(keep)


# -- combined -------------------------------------------------------------------

@dataclass(frozen=True)
class ResampleReport:
    counts_before: dict[int, int]
    counts_after_smote: dict[int, int]
    tomek_links_removed: int
    counts_final: dict[int, int]

    @property
    def rows_removed(self) -> int:
        return sum(self.counts_after_smote.values()) - sum(self.counts_final.values())

    def to_dict(self) -> dict:
        return {
            "counts_before": {str(k): v for k, v in sorted(self.counts_before.items())},
            "counts_after_smote": {str(k): v for k, v in sorted(self.counts_after_smote.items())},
            "tomek_links_removed": self.tomek_links_removed,
            "counts_final": {str(k): v for k, v in sorted(self.counts_final.items())},
            "rows_removed": self.rows_removed,
        }


def smote_tomek(table: DataTable, k: int = 5, seed: int = 0,
                policy: str = "both") -> tuple[DataTable, ResampleReport]:
    before = table.class_counts()
    oversampled = smote(table, k=k, seed=seed)
    after_smote = oversampled.class_counts()
    links = find_tomek_links(oversampled)
    drop = _drop_set(oversampled, links, policy)
    if drop:
        cleaned = oversampled.take_rows([i for i in range(oversampled.n_rows) if i not in drop])
    else:
        cleaned = oversampled
    acted = sum(1 for a, b in links if a in drop or b in drop)
    report = ResampleReport(
        counts_before=before,
        counts_after_smote=after_smote,
        tomek_links_removed=acted,
        counts_final=cleaned.class_counts(),
    )
    return cleaned, report
