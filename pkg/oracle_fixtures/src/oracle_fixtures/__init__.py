"""One-shot golden-fixture generator backed by mature reference libraries.

Writes self-contained JSON fixtures (inputs embedded verbatim, reference
versions pinned) that the screening toolkit's test suite consumes
read-only.  Stochastic algorithms (SMOTE, forests, autoencoders) get no
fixtures on purpose: exact cross-implementation RNG equality is not a
meaningful target, so those stay covered by property tests on the
consumer side.

Reference stack per fixture family:

- quantile/scaler vectors .... statistics.quantiles (stdlib, inclusive)
- mutual information ......... sklearn.metrics.mutual_info_score on binned columns
- Wilcoxon signed-rank ....... full 2^n sign enumeration over scipy.stats.rankdata
                               average ranks, cross-checked against
                               scipy.stats.wilcoxon where it supports exact mode
- confusion-matrix metrics ... sklearn.metrics.precision_recall_fscore_support
- Tomek links ................ mutual-nearest-neighbor scan over scipy cdist
- LDA Fisher criterion ....... sklearn LinearDiscriminantAnalysis projections,
                               trace ratio recomputed from per-class covariances
"""
from __future__ import annotations

import itertools
import platform
import statistics
import tempfile
from pathlib import Path

import numpy as np
import scipy
import sklearn
from scipy.spatial.distance import cdist
from scipy.stats import rankdata, wilcoxon as scipy_wilcoxon
from sklearn.discriminant_analysis import LinearDiscriminantAnalysis
from sklearn.metrics import (
    accuracy_score,
    mutual_info_score,
    precision_recall_fscore_support,
)

from ._canonical import dumps

# Fixed provenance stamp: a wall-clock timestamp would break the
# byte-identical regeneration contract, so the generation date is pinned.
GENERATED = "2026-08-14"

FIXTURE_NAMES = (
    "scaler_quantiles.json",
    "mi_histogram.json",
    "wilcoxon_cases.json",
    "confusion_metrics.json",
    "tomek_links.json",
    "lda_fisher.json",
)

DEFAULT_DATA = "data/sleep_synth.csv"


def _versions() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
    }


def _payload(name: str, cases: list, extra: dict | None = None) -> dict:
    blob = {
        "fixture": name,
        "generated": GENERATED,
        "reference_versions": _versions(),
        "cases": cases,
    }
    if extra:
        blob.update(extra)
    return blob


# -- quantile / scaler vectors -------------------------------------------------

def _scaler_cases() -> list:
    rng = np.random.default_rng(101)
    vectors = [[1.0, 2.0, 3.0, 4.0, 5.0]]  # the documented Q1=2, Q3=4 anchor
    makers = (
        lambda n: rng.uniform(-5.0, 25.0, n),
        lambda n: rng.normal(0.0, 3.0, n),
        lambda n: rng.integers(-4, 12, n).astype(float),  # heavy ties
        lambda n: rng.lognormal(0.0, 1.0, n),             # outliers
        lambda n: np.full(n, 7.25),                       # zero spread
    )
    while len(vectors) < 20:
        n = int(rng.integers(5, 41))
        vectors.append(list(makers[len(vectors) % len(makers)](n)))
    cases = []
    for i, values in enumerate(vectors):
        q1, med, q3 = statistics.quantiles(values, n=4, method="inclusive")
        cases.append({
            "name": f"case_{i:02d}",
            "values": [float(v) for v in values],
            "q1": float(q1),
            "median": float(med),
            "q3": float(q3),
            "iqr": float(q3 - q1),
            "minimum": float(min(values)),
            "maximum": float(max(values)),
        })
    return cases


# -- mutual information on the canonical dataset --------------------------------

def _bin_column(values: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros(values.shape[0], dtype=np.int64)
    index = (bins * (values - lo) / (hi - lo)).astype(np.int64)
    return np.minimum(index, bins - 1)


def _mi_cases(data_path: str) -> list:
    # the canonical table comes through the toolkit's public loader; the
    # encoded matrix is embedded so consumers never touch the CSV
    from sleepscreen import dataset

    table = dataset.load_encoded(data_path)
    matrix = table.matrix()
    labels = table.labels
    bins = 10
    scores = []
    for col in range(matrix.shape[1]):
        binned = _bin_column(matrix[:, col], bins)
        scores.append(float(mutual_info_score(labels, binned)))
    return [{
        "name": "canonical_histogram_mi",
        "bins": bins,
        "binning": "equal-width over [min, max]; floor(bins*(x-lo)/(hi-lo)), "
                   "top edge folded into the last bin",
        "columns": list(table.names),
        "matrix": matrix,
        "labels": labels,
        "scores": scores,
    }]


# -- Wilcoxon signed-rank --------------------------------------------------------

def _signed_rank_reference(a, b, alternative: str) -> dict:
    """Exact test by enumerating all 2^n sign assignments.

    Average ranks are halves, so every rank sum is an exact dyadic float and
    the >=/<= comparisons below are safe without tolerances.  Zero
    differences are dropped before ranking (Wilcoxon's original treatment).
    """
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        raise ValueError("all differences are zero")
    ranks = rankdata(np.abs(d))
    r_plus = float(ranks[d > 0].sum())
    r_minus = float(ranks[d < 0].sum())
    signs = (np.arange(2 ** n)[:, None] >> np.arange(n)) & 1
    totals = signs @ ranks
    p_greater = float((totals >= r_plus).mean())
    p_less = float((totals <= r_plus).mean())
    p_two = min(1.0, 2.0 * min(p_greater, p_less))
    p_value = {"greater": p_greater, "less": p_less, "two_sided": p_two}[alternative]
    return {
        "n_effective": n,
        "r_plus": r_plus,
        "r_minus": r_minus,
        "p_value": p_value,
        "has_ties": bool(np.unique(np.abs(d)).size < n),
    }


def _scipy_alternative(alternative: str) -> str:
    return "two-sided" if alternative == "two_sided" else alternative


def _wilcoxon_cases() -> list:
    rng = np.random.default_rng(20260814)
    alternatives = ("greater", "less", "two_sided")
    styles = ("clean", "ties", "zeros", "mixed")
    cases = []

    def add(a, b, alternative, style):
        a = [float(v) for v in a]
        b = [float(v) for v in b]
        ref = _signed_rank_reference(a, b, alternative)
        diffs = np.array(a) - np.array(b)
        has_zeros = bool((diffs == 0.0).any())
        if style == "clean" and not ref["has_ties"] and not has_zeros:
            # scipy's exact mode covers the tie-free zero-free region; the
            # enumerator must agree with it there to be trusted elsewhere
            check = scipy_wilcoxon(a, b, alternative=_scipy_alternative(alternative),
                                   zero_method="wilcox", correction=False,
                                   method="exact")
            if abs(check.pvalue - ref["p_value"]) > 1e-12:
                raise AssertionError(
                    f"enumeration disagrees with scipy: {check.pvalue} vs {ref['p_value']}")
        cases.append({
            "name": f"case_{len(cases):02d}",
            "a": a,
            "b": b,
            "alternative": alternative,
            "style": style,
            "has_zero_differences": has_zeros,
            **ref,
        })

    # anchor: n=8, every difference positive, one-sided greater
    base = np.round(rng.normal(90.0, 4.0, 8), 3)
    add(base + rng.uniform(0.5, 2.0, 8).round(3), base, "greater", "clean")

    while len(cases) < 50:
        i = len(cases)
        n = 8 + (i % 5)  # spans 8..12
        alternative = alternatives[i % 3]
        style = styles[i % 4]
        b = np.round(rng.normal(0.0, 5.0, n), 3)
        if style == "clean":
            d = rng.normal(0.4, 1.5, n)
        elif style == "ties":
            d = rng.integers(1, 5, n) * np.where(rng.random(n) < 0.7, 1.0, -1.0)
        elif style == "zeros":
            d = rng.normal(0.0, 2.0, n)
            d[rng.integers(0, n, 2)] = 0.0
        else:
            d = rng.integers(0, 4, n) * np.where(rng.random(n) < 0.6, 1.0, -1.0)
        if np.count_nonzero(d) < 2:
            continue
        add(b + d, b, alternative, style)

    assert len(cases) == 50
    assert any(c["has_ties"] for c in cases)
    assert any(c["has_zero_differences"] for c in cases)
    assert {c["alternative"] for c in cases} == set(alternatives)
    assert {len(c["a"]) for c in cases} == {8, 9, 10, 11, 12}
    return cases


# -- confusion-matrix metrics ----------------------------------------------------

def _expand_matrix(matrix: np.ndarray):
    y_true, y_pred = [], []
    k = matrix.shape[0]
    for i in range(k):
        for j in range(k):
            y_true.extend([i] * int(matrix[i, j]))
            y_pred.extend([j] * int(matrix[i, j]))
    return np.array(y_true), np.array(y_pred)


def _confusion_cases() -> list:
    rng = np.random.default_rng(404)
    matrices = [np.eye(3, dtype=np.int64) * 5]  # all metrics exactly 1.0
    silent = rng.integers(0, 9, (3, 3))
    silent[:, 1] = 0  # a class nobody predicts
    silent[0, 0] += 1
    matrices.append(silent)
    absent = rng.integers(1, 9, (4, 4))
    absent[2, :] = 0  # a class with zero support
    matrices.append(absent)
    while len(matrices) < 30:
        k = int(rng.integers(2, 7))
        m = rng.integers(0, 31, (k, k))
        if m.sum() == 0:
            continue
        matrices.append(m)
    cases = []
    for i, matrix in enumerate(matrices):
        matrix = np.asarray(matrix, dtype=np.int64)
        y_true, y_pred = _expand_matrix(matrix)
        labels = list(range(matrix.shape[0]))
        case = {
            "name": f"case_{i:02d}",
            "matrix": matrix,
            "accuracy": float(accuracy_score(y_true, y_pred)),
        }
        for mode in ("macro", "weighted"):
            p, r, f, _ = precision_recall_fscore_support(
                y_true, y_pred, labels=labels, average=mode, zero_division=0)
            case[mode] = {"precision": float(p), "recall": float(r), "f1": float(f)}
        p, r, f, support = precision_recall_fscore_support(
            y_true, y_pred, labels=labels, average=None, zero_division=0)
        case["per_class"] = {
            "precision": [float(v) for v in p],
            "recall": [float(v) for v in r],
            "f1": [float(v) for v in f],
            "support": [int(v) for v in support],
        }
        cases.append(case)
    return cases


# -- Tomek links -------------------------------------------------------------------

def _tomek_reference(matrix: np.ndarray, labels: np.ndarray) -> list:
    d = cdist(matrix, matrix)
    np.fill_diagonal(d, np.inf)
    ordered = np.sort(d, axis=1)
    if not (ordered[:, 1] - ordered[:, 0] > 1e-9).all():
        raise AssertionError("nearest neighbor not unique; regenerate the table")
    nn = d.argmin(axis=1)
    links = []
    for a in range(matrix.shape[0]):
        b = int(nn[a])
        if a < b and int(nn[b]) == a and labels[a] != labels[b]:
            links.append([a, b])
    return links


def _tomek_cases() -> list:
    rng = np.random.default_rng(777)
    cases = []
    attempt = 0
    while len(cases) < 10:
        attempt += 1
        n_classes = 2 + (len(cases) % 2)
        d = int(rng.integers(2, 5))
        per_class = int(rng.integers(4, 11))
        # widely separated means on the last case: a deliberate no-link table
        spread = 8.0 if len(cases) == 9 else 1.0
        rows, labels = [], []
        for cls in range(n_classes):
            center = rng.normal(0.0, 1.0, d) * spread
            rows.append(center + rng.normal(0.0, 1.0, (per_class, d)))
            labels.extend([cls] * per_class)
        matrix = np.vstack(rows)
        labels = np.array(labels, dtype=np.int64)
        try:
            links = _tomek_reference(matrix, labels)
        except AssertionError:
            continue
        if spread == 1.0 and not links:
            continue  # overlapping clusters should exhibit at least one link
        if attempt > 500:
            raise RuntimeError("could not generate tomek tables")
        cases.append({
            "name": f"case_{len(cases):02d}",
            "matrix": matrix,
            "labels": labels,
            "links": links,
        })
    return cases


# -- LDA Fisher criterion -----------------------------------------------------------

def _fisher_reference(projected: np.ndarray, labels: np.ndarray) -> float:
    """trace(Sb)/trace(Sw) where Sw comes from per-class sample covariances."""
    overall = projected.mean(axis=0)
    within = np.zeros((projected.shape[1], projected.shape[1]))
    between = np.zeros_like(within)
    for cls in np.unique(labels):
        rows = projected[labels == cls]
        within += (rows.shape[0] - 1) * np.cov(rows, rowvar=False, ddof=1).reshape(within.shape)
        gap = (rows.mean(axis=0) - overall)[:, None]
        between += rows.shape[0] * (gap @ gap.T)
    return float(np.trace(between) / np.trace(within))


def _lda_cases() -> list:
    rng = np.random.default_rng(515)
    layouts = [(3, 4, 2), (3, 6, 2), (4, 5, 2), (4, 8, 2), (2, 4, 1)]
    cases = []
    for i, (n_classes, d, m) in enumerate(layouts):
        rows, labels = [], []
        for cls in range(n_classes):
            center = rng.normal(0.0, 3.0, d)
            count = int(rng.integers(15, 26))
            rows.append(center + rng.normal(0.0, 1.0, (count, d)))
            labels.extend([cls] * count)
        matrix = np.vstack(rows)
        labels = np.array(labels, dtype=np.int64)
        model = LinearDiscriminantAnalysis(solver="eigen")
        model.fit(matrix, labels)
        projection = np.asarray(model.scalings_)[:, :m]
        fisher = _fisher_reference(matrix @ projection, labels)
        cases.append({
            "name": f"case_{i}",
            "matrix": matrix,
            "labels": labels,
            "m": m,
            "projection": projection,
            "fisher": fisher,
        })
    return cases


# -- entry points ---------------------------------------------------------------------

def _build_all(data_path: str) -> dict:
    return {
        "scaler_quantiles.json": _payload("scaler_quantiles", _scaler_cases()),
        "mi_histogram.json": _payload("mi_histogram", _mi_cases(data_path)),
        "wilcoxon_cases.json": _payload("wilcoxon_cases", _wilcoxon_cases()),
        "confusion_metrics.json": _payload("confusion_metrics", _confusion_cases()),
        "tomek_links.json": _payload("tomek_links", _tomek_cases()),
        "lda_fisher.json": _payload("lda_fisher", _lda_cases()),
    }


def generate_all(out_dir, data_path: str = DEFAULT_DATA) -> list:
    """Write every fixture file into out_dir; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, payload in _build_all(data_path).items():
        path = out / name
        path.write_text(dumps(payload), encoding="utf-8")
        written.append(path)
    return written


def verify(out_dir, data_path: str = DEFAULT_DATA) -> list:
    """Regenerate and byte-compare; returns the names that drifted."""
    out = Path(out_dir)
    if not out.is_dir():
        raise FileNotFoundError(f"fixture directory {out} does not exist")
    drifted = []
    with tempfile.TemporaryDirectory() as scratch:
        for path in generate_all(scratch, data_path):
            committed = out / path.name
            if not committed.is_file() or committed.read_bytes() != path.read_bytes():
                drifted.append(path.name)
    return sorted(drifted)
