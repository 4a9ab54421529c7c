import numpy as np
import pytest

from sleepscreen import reduce, transform
from sleepscreen.errors import DimensionMismatch, SingularScatter
from sleepscreen.table import Column, DataTable, NUMERIC


def two_clusters(seed=5, gap=10.0, n=40):
    rng = np.random.default_rng(seed)
    a = rng.normal([0.0, 0.0], 1.0, (n, 2))
    b = rng.normal([gap, 0.0], 1.0, (n, 2))
    return np.vstack([a, b]), np.repeat([0, 1], n)


# -- LDA -------------------------------------------------------------------------

def test_lda_separates_well_separated_clusters():
    X, y = two_clusters()
    proj = reduce.lda_fit(X, y, m=1)
    z = (X @ proj.matrix).ravel()
    z0, z1 = z[:40], z[40:]
    pooled = np.sqrt((z0.var(ddof=1) + z1.var(ddof=1)) / 2)
    assert abs(z0.mean() - z1.mean()) > 5 * pooled


def test_lda_single_class_is_singular():
    X = np.random.default_rng(0).normal(size=(20, 3))
    with pytest.raises(SingularScatter):
        reduce.lda_fit(X, np.zeros(20, dtype=int))


def test_lda_on_one_dimensional_data_is_identity_up_to_sign():
    rng = np.random.default_rng(1)
    X = np.concatenate([rng.normal(0, 1, 20), rng.normal(6, 1, 20)])[:, None]
    proj = reduce.lda_fit(X, np.repeat([0, 1], 20), m=1)
    assert abs(abs(proj.matrix[0, 0]) - 1.0) <= 1e-9


def test_lda_m_bounds_and_small_class_rejected():
    X, y = two_clusters()
    with pytest.raises(ValueError):
        reduce.lda_fit(X, y, m=2)  # two classes allow only m=1
    lonely = np.concatenate([y[:-1], [2]])
    with pytest.raises(ValueError):
        reduce.lda_fit(X, lonely, m=1)


def test_lda_eigenvalues_nonnegative_descending(encoded_table):
    proj = reduce.lda_fit(encoded_table, m=2)
    assert (proj.eigenvalues >= 0).all()
    assert proj.eigenvalues[0] >= proj.eigenvalues[1]
    assert proj.matrix.shape == (encoded_table.n_cols, 2)


def test_lda_transform_is_linear_and_preserves_duplicates():
    X, y = two_clusters()
    proj = reduce.lda_fit(X, y, m=1)
    assert np.array_equal(reduce.lda_transform(proj, np.zeros((3, 2))), np.zeros((3, 1)))
    doubled = np.vstack([X[:1], X[:1]])
    out = reduce.lda_transform(proj, doubled)
    assert np.array_equal(out[0], out[1])


def test_lda_transform_dimension_mismatch():
    X, y = two_clusters()
    proj = reduce.lda_fit(X, y, m=1)
    with pytest.raises(DimensionMismatch):
        reduce.lda_transform(proj, np.zeros((3, 5)))


def test_lda_table_round_trip(encoded_table):
    proj = reduce.lda_fit(encoded_table, m=2)
    out = reduce.lda_transform(proj, encoded_table)
    assert out.names == ["lda_0", "lda_1"]
    assert (out.labels == encoded_table.labels).all()
    assert np.allclose(out.matrix(), encoded_table.matrix() @ proj.matrix)


def test_lda_beats_random_projections(encoded_table):
    labels = encoded_table.labels
    matrix = encoded_table.matrix()
    proj = reduce.lda_fit(encoded_table, m=2)
    fitted = reduce.fisher_ratio(matrix @ proj.matrix, labels)
    rng = np.random.default_rng(99)
    for _ in range(200):
        random_proj = rng.normal(size=(matrix.shape[1], 2))
        random_proj /= np.linalg.norm(random_proj, axis=0)
        assert fitted >= reduce.fisher_ratio(matrix @ random_proj, labels)


def test_lda_projection_serializes(encoded_table):
    proj = reduce.lda_fit(encoded_table, m=2)
    blob = proj.to_dict()
    assert len(blob["matrix"]) == encoded_table.n_cols
    assert len(blob["eigenvalues"]) == 2


# -- autoencoder -------------------------------------------------------------------

def rank_one_table(n=400, d=6, seed=0):
    rng = np.random.default_rng(seed)
    direction = rng.uniform(0.3, 1.0, size=d)
    coefficients = rng.uniform(0.2, 1.0, size=(n, 1))
    return coefficients * direction


def test_ae_config_validation():
    with pytest.raises(ValueError):
        reduce.AutoencoderConfig(latent_dim=0)
    with pytest.raises(ValueError):
        reduce.AutoencoderConfig(epochs=0)
    with pytest.raises(ValueError):
        reduce.AutoencoderConfig(batch_size=0)


def test_ae_latent_must_be_smaller_than_input():
    with pytest.raises(ValueError):
        reduce.ae_fit(np.zeros((10, 4)), reduce.AutoencoderConfig(latent_dim=4))


def test_ae_reconstructs_rank_one_data():
    data = rank_one_table()
    model = reduce.ae_fit(data, reduce.AutoencoderConfig(latent_dim=1, seed=0))
    assert reduce.ae_reconstruction_mse(model, data) < 1e-3


def test_ae_deterministic_given_seed():
    data = rank_one_table(n=120)
    cfg = reduce.AutoencoderConfig(latent_dim=2, epochs=40, seed=7)
    a = reduce.ae_encode(reduce.ae_fit(data, cfg), data)
    b = reduce.ae_encode(reduce.ae_fit(data, cfg), data)
    assert np.array_equal(a, b)


def test_ae_loss_trace_improves_on_canonical_table(encoded_table):
    scaled = transform.minmax_apply(transform.minmax_fit(encoded_table), encoded_table)
    model = reduce.ae_fit(scaled, reduce.AutoencoderConfig(seed=1))
    trace = np.asarray(model.loss_trace)
    assert np.isfinite(trace).all()
    assert trace[-1] < trace[0]


def test_ae_encode_width_is_latent_dim():
    data = rank_one_table(n=150, d=7)
    model = reduce.ae_fit(data, reduce.AutoencoderConfig(latent_dim=3, epochs=30, seed=2))
    assert reduce.ae_encode(model, data[:5]).shape == (5, 3)
    assert reduce.ae_encode(model, data).shape == (150, 3)


def test_ae_table_round_trip():
    data = rank_one_table(n=60, d=5)
    table = DataTable(
        [Column(f"c{i}", NUMERIC, data[:, i]) for i in range(5)],
        np.zeros(60, dtype=np.int64),
    )
    model = reduce.ae_fit(table, reduce.AutoencoderConfig(latent_dim=2, epochs=20, seed=3))
    out = reduce.ae_encode(model, table)
    assert out.names == ["ae_0", "ae_1"]
    assert (out.labels == table.labels).all()


def test_ae_encode_dimension_mismatch():
    data = rank_one_table(n=60, d=5)
    model = reduce.ae_fit(data, reduce.AutoencoderConfig(latent_dim=2, epochs=10, seed=4))
    with pytest.raises(DimensionMismatch):
        reduce.ae_encode(model, data[:, :3])
