import numpy as np
import pytest

from sleepscreen import models
from sleepscreen.errors import InvalidHyperparameter, SingleClassTraining, UnsupportedFamily

# fast overrides so the whole-family loops stay quick
FAST = {
    "logreg": {},
    "knn": {},
    "dtree": {},
    "rforest": {"n_trees": 10},
    "etrees": {"n_trees": 10},
    "gboost": {"n_stages": 10},
    "adaboost": {"n_stumps": 10},
    "mlp": {"hidden": (8,), "epochs": 20},
}


def blobs(seed, n=60, d=5, k=3, spread=2.0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 6.0, size=(k, d))
    labels = rng.integers(0, k, size=n)
    return centers[labels] + rng.normal(0.0, spread, size=(n, d)), labels


# -- spec validation ---------------------------------------------------------

def test_unknown_family_rejected():
    with pytest.raises(InvalidHyperparameter):
        models.ClassifierSpec("svm")


def test_unknown_hyperparameter_name_rejected():
    with pytest.raises(InvalidHyperparameter):
        models.ClassifierSpec("knn", {"neighbors": 5})


@pytest.mark.parametrize(
    "family,params",
    [
        ("knn", {"k": 0}),
        ("knn", {"k": 2.5}),
        ("knn", {"k": True}),
        ("logreg", {"l2": -1.0}),
        ("logreg", {"tol": 0.0}),
        ("dtree", {"max_depth": 0}),
        ("dtree", {"min_samples_split": 1}),
        ("rforest", {"n_trees": 0}),
        ("gboost", {"learning_rate": -0.1}),
        ("mlp", {"hidden": ()}),
        ("mlp", {"hidden": (16, 0)}),
    ],
)
def test_bad_hyperparameter_values_rejected(family, params):
    with pytest.raises(InvalidHyperparameter):
        models.ClassifierSpec(family, params)


def test_negative_seed_rejected():
    with pytest.raises(InvalidHyperparameter):
        models.ClassifierSpec("knn", seed=-1)


def test_resolved_merges_defaults_with_overrides():
    spec = models.ClassifierSpec("gboost", {"n_stages": 50})
    merged = spec.resolved()
    assert merged["n_stages"] == 50
    assert merged["learning_rate"] == 0.1
    assert merged["max_depth"] == 3


def test_default_hyperparameters_is_a_copy():
    first = models.default_hyperparameters("knn")
    first["k"] = 99
    assert models.default_hyperparameters("knn")["k"] == 5


# -- fit preconditions -------------------------------------------------------

def test_single_class_training_rejected():
    X = np.random.default_rng(0).normal(size=(10, 3))
    with pytest.raises(SingleClassTraining):
        models.fit(models.ClassifierSpec("dtree"), X, np.zeros(10, dtype=int))


def test_bare_matrix_requires_labels():
    with pytest.raises(ValueError):
        models.fit(models.ClassifierSpec("dtree"), np.zeros((4, 2)))


def test_knn_k_larger_than_training_set_rejected():
    X, y = blobs(0, n=4)
    with pytest.raises(InvalidHyperparameter):
        models.fit(models.ClassifierSpec("knn", {"k": 5}), X, y)


def test_predict_rejects_wrong_width():
    X, y = blobs(0)
    model = models.fit(models.ClassifierSpec("dtree"), X, y)
    with pytest.raises(ValueError):
        models.predict(model, X[:, :3])


# -- documented toy behaviors -------------------------------------------------

def test_knn_k1_memorizes_training_set():
    X, y = blobs(3, n=40)
    model = models.fit(models.ClassifierSpec("knn", {"k": 1}), X, y)
    assert (models.predict(model, X) == y).all()


def test_logreg_separates_two_linear_clusters():
    rng = np.random.default_rng(5)
    X = np.vstack([rng.normal(-4.0, 1.0, (30, 2)), rng.normal(4.0, 1.0, (30, 2))])
    y = np.repeat([0, 1], 30)
    model = models.fit(models.ClassifierSpec("logreg"), X, y)
    assert (models.predict(model, X) == y).all()


def test_knn_distance_tie_prefers_lower_row_index():
    X = np.array([[0.0], [0.0], [9.0]])
    y = np.array([0, 1, 1])
    model = models.fit(models.ClassifierSpec("knn", {"k": 1}), X, y)
    assert models.predict(model, np.array([[0.0]]))[0] == 0


def test_knn_vote_tie_prefers_lower_class():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    y = np.array([2, 1, 0, 0])
    model = models.fit(models.ClassifierSpec("knn", {"k": 2}), X, y)
    # neighbors of 0.5 are rows 0 and 1: one vote each for classes 1 and 2
    assert models.predict(model, np.array([[0.5]]))[0] == 1


def test_knn_proba_is_vote_fractions():
    X = np.array([[0.0], [0.1], [0.2], [5.0], [5.1]])
    y = np.array([0, 0, 1, 1, 1])
    model = models.fit(models.ClassifierSpec("knn", {"k": 3}), X, y)
    proba = models.predict_proba(model, np.array([[0.0]]))
    assert np.allclose(proba[0], [2 / 3, 1 / 3])


def test_knn_invariant_under_added_constant_column():
    X, y = blobs(11, n=50)
    query, _ = blobs(12, n=20)
    model = models.fit(models.ClassifierSpec("knn"), X, y)
    before = models.predict(model, query)
    padded = models.fit(
        models.ClassifierSpec("knn"),
        np.hstack([X, np.full((len(X), 1), 7.5)]),
        y,
    )
    after = models.predict(padded, np.hstack([query, np.full((len(query), 1), 7.5)]))
    assert (before == after).all()


def test_gboost_zero_learning_rate_predicts_prior_argmax():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(40, 4))
    y = np.array([0] * 8 + [1] * 25 + [2] * 7)
    model = models.fit(
        models.ClassifierSpec("gboost", {"learning_rate": 0.0, "n_stages": 3}), X, y
    )
    assert (models.predict(model, rng.normal(size=(30, 4))) == 1).all()


def test_adaboost_kept_learners_all_beat_chance():
    X, y = blobs(21, n=80)
    model = models.fit(models.ClassifierSpec("adaboost", {"n_stumps": 40}), X, y)
    trace = model.params.stage_errors
    assert len(trace) >= 1
    assert all(err < 0.5 for err in trace)


# -- feature importances ------------------------------------------------------

def test_stump_importance_is_one_hot_on_split_feature():
    rng = np.random.default_rng(30)
    X = np.zeros((40, 6))
    X[:, 3] = np.concatenate([rng.uniform(0, 1, 20), rng.uniform(5, 6, 20)])
    y = np.repeat([0, 1], 20)
    model = models.fit(models.ClassifierSpec("dtree", {"max_depth": 1}), X, y)
    importances = models.feature_importances(model)
    expected = np.zeros(6)
    expected[3] = 1.0
    assert np.allclose(importances, expected)


@pytest.mark.parametrize("family", models.TREE_FAMILIES)
def test_importances_sum_to_one(family):
    X, y = blobs(31, n=80)
    model = models.fit(models.ClassifierSpec(family, FAST[family], seed=2), X, y)
    importances = models.feature_importances(model)
    assert importances.shape == (X.shape[1],)
    assert (importances >= 0).all()
    assert abs(importances.sum() - 1.0) <= 1e-9


@pytest.mark.parametrize("family", ["logreg", "knn", "mlp"])
def test_importances_unsupported_for_non_tree_families(family):
    X, y = blobs(32, n=40)
    model = models.fit(models.ClassifierSpec(family, FAST[family]), X, y)
    with pytest.raises(UnsupportedFamily):
        models.feature_importances(model)


@pytest.mark.parametrize("family", ["etrees", "gboost"])
def test_appended_noise_feature_ranks_below_best_informative(family):
    X, y = blobs(33, n=90)
    rng = np.random.default_rng(34)
    padded = np.hstack([X, rng.normal(size=(len(X), 1))])
    model = models.fit(models.ClassifierSpec(family, FAST[family], seed=3), padded, y)
    importances = models.feature_importances(model)
    assert importances[-1] < importances[:-1].max()


# -- cross-family contracts ---------------------------------------------------

@pytest.mark.parametrize("family", models.FAMILIES)
def test_fit_predict_contract(family):
    X, y = blobs(40, n=60)
    spec = models.ClassifierSpec(family, FAST[family], seed=9)
    model = models.fit(spec, X, y)
    assert model.n_classes == 3
    labels = models.predict(model, X)
    assert labels.dtype == np.int64
    assert ((labels >= 0) & (labels < 3)).all()
    # predict is pure
    assert (models.predict(model, X) == labels).all()
    # refitting with the same seed reproduces the model's behavior
    again = models.fit(spec, X, y)
    assert (models.predict(again, X) == labels).all()


@pytest.mark.parametrize("family", models.FAMILIES)
def test_proba_rows_sum_to_one(family):
    X, y = blobs(41, n=60)
    model = models.fit(models.ClassifierSpec(family, FAST[family], seed=4), X, y)
    proba = models.predict_proba(model, X)
    assert proba.shape == (len(X), 3)
    assert (proba >= 0).all()
    assert np.abs(proba.sum(axis=1) - 1.0).max() <= 1e-9


@pytest.mark.parametrize("family", models.FAMILIES)
def test_predict_matches_proba_argmax(family):
    X, y = blobs(42, n=60)
    model = models.fit(models.ClassifierSpec(family, FAST[family], seed=5), X, y)
    proba = models.predict_proba(model, X)
    assert (models.predict(model, X) == np.argmax(proba, axis=1)).all()


def test_ensemble_dominates_single_tree_on_twenty_datasets():
    """Each ensemble's training accuracy meets or beats one tree grown
    with the same depth limit, across twenty seeded datasets."""

    def train_acc(family, params, X, y, seed=0):
        model = models.fit(models.ClassifierSpec(family, params, seed=seed), X, y)
        return (models.predict(model, X) == y).mean()

    for i in range(20):
        X, y = blobs(1000 + i)
        full_tree = train_acc("dtree", {}, X, y)
        depth3_tree = train_acc("dtree", {"max_depth": 3}, X, y)
        stump = train_acc("dtree", {"max_depth": 1}, X, y)
        assert train_acc("rforest", {"n_trees": 25}, X, y, seed=i) >= full_tree
        assert train_acc("etrees", {"n_trees": 25}, X, y, seed=i) >= full_tree
        assert train_acc("gboost", {"n_stages": 20, "max_depth": 3}, X, y) >= depth3_tree
        assert train_acc("adaboost", {"n_stumps": 30}, X, y) >= stump


def test_forest_seed_changes_predictions_somewhere():
    # not a contract on any single dataset, but across several seeds the
    # randomized families should not be identical everywhere
    X, y = blobs(50, n=80, spread=4.0)
    query, _ = blobs(51, n=200, spread=4.0)
    a = models.fit(models.ClassifierSpec("rforest", {"n_trees": 5}, seed=0), X, y)
    b = models.fit(models.ClassifierSpec("rforest", {"n_trees": 5}, seed=1), X, y)
    assert (models.predict_proba(a, query) != models.predict_proba(b, query)).any()


def test_fit_accepts_data_table(encoded_table):
    from sleepscreen import dataset

    train, test = dataset.stratified_split(encoded_table, 0.8, seed=1)
    model = models.fit(models.ClassifierSpec("dtree"), train)
    accuracy = (models.predict(model, test) == test.labels).mean()
    assert accuracy >= 0.9
