import numpy as np
import pytest

from sleepscreen import feature_select as fs
from sleepscreen.errors import DegenerateLabels, KTooLarge

SMALL_FOREST = {"n_trees": 30, "max_depth": 5}


def signal_plus_noise(seed, n=200, informative=3, noise=6):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, informative + noise))
    weights = np.array([2.0, -1.5, 2.5])[:informative]
    score = X[:, :informative] @ weights
    y = np.digitize(score, np.quantile(score, [1 / 3, 2 / 3]))
    return X, y


# -- mutual information --------------------------------------------------------

def test_mi_config_validation():
    with pytest.raises(ValueError):
        fs.MiConfig(mode="kernel")
    with pytest.raises(ValueError):
        fs.MiConfig(k=0)


def test_histogram_mi_of_labels_equals_label_entropy():
    y = np.array([0] * 30 + [1] * 50 + [2] * 20)
    scores = fs.mutual_info(y[:, None].astype(float), y, fs.MiConfig(mode="histogram"))
    freqs = np.bincount(y) / len(y)
    entropy = -(freqs @ np.log(freqs))
    assert abs(scores.mi[0] - entropy) <= 1e-12


def test_knn_mi_of_independent_feature_sits_in_permutation_null():
    rng = np.random.default_rng(77)
    y = rng.integers(0, 3, size=150)
    x = rng.normal(size=(150, 1))
    observed = fs.mutual_info(x, y).mi[0]
    null = np.array(
        [fs.mutual_info(x, rng.permutation(y)).mi[0] for _ in range(200)]
    )
    assert observed <= null.mean() + 3 * null.std()


@pytest.mark.parametrize("mode", ["knn", "histogram"])
def test_mi_nonnegative_and_full_length(encoded_table, mode):
    scores = fs.mutual_info(encoded_table, config=fs.MiConfig(mode=mode))
    assert scores.mi.shape == (encoded_table.n_cols,)
    assert (scores.mi >= 0).all()


@pytest.mark.parametrize("mode", ["knn", "histogram"])
def test_mi_row_permutation_invariant(mode):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(80, 4))
    y = rng.integers(0, 3, size=80)
    shuffle = rng.permutation(80)
    a = fs.mutual_info(X, y, fs.MiConfig(mode=mode)).mi
    b = fs.mutual_info(X[shuffle], y[shuffle], fs.MiConfig(mode=mode)).mi
    assert np.allclose(a, b, atol=1e-12)


def test_mi_informative_feature_outranks_noise():
    X, y = signal_plus_noise(11)
    scores = fs.mutual_info(X, y)
    assert scores.mi[:3].min() > scores.mi[3:].max()


def test_mi_single_class_rejected():
    with pytest.raises(DegenerateLabels):
        fs.mutual_info(np.zeros((10, 2)), np.zeros(10, dtype=int))


def test_mi_bare_matrix_needs_labels():
    with pytest.raises(ValueError):
        fs.mutual_info(np.zeros((4, 2)))


def test_mi_scores_serialize():
    scores = fs.mutual_info(np.arange(12.0).reshape(6, 2), np.array([0, 1, 0, 1, 0, 1]))
    blob = scores.to_dict()
    assert blob["mode"] == "knn" and blob["parameter"] == 3
    assert len(blob["mi"]) == 2


# -- selection policies ---------------------------------------------------------

def make_scores(values):
    return fs.MiScores(mi=np.asarray(values, dtype=float), estimator_config=("knn", 3))


def test_top_k_keeps_highest():
    assert fs.select_top(make_scores([0.9, 0.1, 0.5]), "top_k", k=2) == [0, 2]


def test_top_k_tie_prefers_lower_index():
    assert fs.select_top(make_scores([0.3, 0.3]), "top_k", k=1) == [0]


def test_above_mean_is_strict():
    assert fs.select_top(make_scores([0.4, 0.4, 0.4]), "above_mean") == []


def test_above_mean_partitions_indices():
    scores = make_scores([0.9, 0.1, 0.5, 0.2])
    kept = set(fs.select_top(scores, "above_mean"))
    assert kept == {0, 2}
    assert kept | ({0, 1, 2, 3} - kept) == {0, 1, 2, 3}


def test_top_k_too_large():
    with pytest.raises(KTooLarge):
        fs.select_top(make_scores([0.1, 0.2]), "top_k", k=3)


def test_select_top_argument_errors():
    with pytest.raises(ValueError):
        fs.select_top(make_scores([0.1]), "top_k")
    with pytest.raises(ValueError):
        fs.select_top(make_scores([0.1]), "bottom_k")


# -- boruta ----------------------------------------------------------------------

def test_boruta_argument_errors():
    X, y = signal_plus_noise(1, n=40)
    with pytest.raises(ValueError):
        fs.boruta(X[:, :1], y)
    with pytest.raises(ValueError):
        fs.boruta(X, y, max_iter=5)


def test_boruta_finds_planted_signal():
    X, y = signal_plus_noise(21)
    verdicts = fs.boruta(X, y, forest_cfg=SMALL_FOREST, max_iter=40, seed=9)
    assert set(verdicts.confirmed()) >= {0, 1, 2}
    noise_rejected = sum(1 for i in verdicts.rejected() if i >= 3)
    assert noise_rejected >= 4


def test_boruta_deterministic():
    X, y = signal_plus_noise(22, n=120)
    first = fs.boruta(X, y, forest_cfg=SMALL_FOREST, max_iter=25, seed=5)
    second = fs.boruta(X, y, forest_cfg=SMALL_FOREST, max_iter=25, seed=5)
    assert first.statuses == second.statuses
    assert (first.hit_counts == second.hit_counts).all()
    assert first.iterations_run == second.iterations_run


def test_boruta_constant_feature_never_confirmed():
    X, y = signal_plus_noise(23, n=120)
    X = X.copy()
    X[:, 4] = 2.5
    verdicts = fs.boruta(X, y, forest_cfg=SMALL_FOREST, max_iter=25, seed=3)
    assert verdicts.statuses[4] != fs.CONFIRMED


def test_boruta_tiny_alpha_leaves_everything_tentative():
    X, y = signal_plus_noise(24, n=100)
    verdicts = fs.boruta(
        X, y, forest_cfg={"n_trees": 15, "max_depth": 4}, alpha=1e-9, max_iter=10, seed=1
    )
    assert all(status == fs.TENTATIVE for status in verdicts.statuses)
    assert verdicts.iterations_run == 10


def test_boruta_bookkeeping_invariants():
    X, y = signal_plus_noise(25, n=120)
    verdicts = fs.boruta(X, y, forest_cfg=SMALL_FOREST, max_iter=25, seed=2)
    assert len(verdicts.statuses) == X.shape[1]
    assert (verdicts.hit_counts <= verdicts.iterations_run).all()
    assert set(verdicts.statuses) <= {fs.CONFIRMED, fs.REJECTED, fs.TENTATIVE}
    blob = verdicts.to_dict()
    assert len(blob["statuses"]) == X.shape[1]
    assert blob["iterations_run"] == verdicts.iterations_run


def test_binomial_two_sided_matches_direct_sum():
    # spot-check the exact test against a hand-computed case: 8 hits in 8
    assert abs(fs._binomial_two_sided(8, 8) - 2 * 0.5**8) <= 1e-15
    assert fs._binomial_two_sided(4, 8) == 1.0
