import numpy as np
import pytest
import scipy.sparse as sp
from sklearn.exceptions import NotFittedError

from oracle_ward import partition_of
from predgroups.cluster import KMeans, load_model, save_model
from predgroups.errors import FingerprintMismatchError, ModelError
from predgroups.synthetic import blob_vectors


def test_three_distant_points_exact_fit():
    X = np.array([[0.0, 0.0], [100.0, 0.0], [0.0, 100.0]])
    model = KMeans(n_clusters=3, seed=0).fit(X)
    assert model.inertia_ == pytest.approx(0.0, abs=1e-12)
    assert len(set(model.labels_.tolist())) == 3


def test_two_blobs_recovered_exactly():
    X, blobs = blob_vectors([50, 50], dim=5, separation=10.0, seed=7)
    model = KMeans(n_clusters=2, seed=0).fit(X)
    assert partition_of(model.labels_) == partition_of(blobs)


def test_determinism_same_seed():
    X, _ = blob_vectors([30, 30, 30], dim=4, separation=6.0, seed=3)
    a = KMeans(n_clusters=3, seed=42).fit(X)
    b = KMeans(n_clusters=3, seed=42).fit(X)
    assert np.array_equal(a.cluster_centers_, b.cluster_centers_)
    assert np.array_equal(a.labels_, b.labels_)


def test_inertia_history_non_increasing_and_recomputable():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((120, 6))
    model = KMeans(n_clusters=8, seed=1).fit(X)
    history = model.inertia_history_
    assert all(a >= b - 1e-9 * max(abs(a), 1) for a, b in zip(history, history[1:]))
    # inertia equals the recomputed sum of squared distances to assigned centroids
    diffs = X - model.cluster_centers_[model.labels_]
    recomputed = float((diffs**2).sum())
    assert model.inertia_ == pytest.approx(recomputed, rel=1e-6)


def test_predict_training_vectors_returns_fitted_clusters():
    X, _ = blob_vectors([40, 40], dim=3, separation=8.0, seed=9)
    model = KMeans(n_clusters=2, seed=0).fit(X)
    assert np.array_equal(model.predict(X), model.labels_)


def test_predict_held_out_blob_point():
    X, blobs = blob_vectors([50, 50], dim=5, separation=10.0, seed=11)
    held_out = X[-1:]
    model = KMeans(n_clusters=2, seed=0).fit(X[:-1])
    predicted = int(model.predict(held_out)[0])
    same_blob = int(model.labels_[blobs[:-1] == blobs[-1]][0])
    assert predicted == same_blob


def test_predict_tie_breaks_to_lowest_cluster_id():
    model = KMeans(n_clusters=6)
    centers = np.zeros((6, 2))
    centers[2] = [1.0, 0.0]
    centers[5] = [-1.0, 0.0]
    for i in (0, 1, 3, 4):
        centers[i] = [50.0 + i, 50.0]
    model.cluster_centers_ = centers
    model.labels_ = np.arange(6)
    # the origin is exactly equidistant from clusters 2 and 5
    assert int(model.predict(np.array([[0.0, 0.0]]))[0]) == 2


def test_sparse_and_dense_agree():
    X, _ = blob_vectors([25, 25], dim=6, separation=9.0, seed=2)
    dense = KMeans(n_clusters=2, seed=4).fit(X)
    sparse = KMeans(n_clusters=2, seed=4).fit(sp.csr_matrix(X))
    assert np.array_equal(dense.labels_, sparse.labels_)
    assert np.allclose(dense.cluster_centers_, sparse.cluster_centers_)


def test_errors():
    X = np.zeros((3, 2))
    with pytest.raises(ValueError):
        KMeans(n_clusters=5).fit(X)
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        KMeans(n_clusters=2).fit(bad)
    with pytest.raises(NotFittedError):
        KMeans(n_clusters=2).predict(X)
    fitted = KMeans(n_clusters=2, seed=0).fit(np.eye(4))
    with pytest.raises(ValueError):
        fitted.predict(np.zeros((2, 7)))


def test_save_load_roundtrip_bit_exact(tmp_path):
    X, _ = blob_vectors([20, 20], dim=4, separation=8.0, seed=6)
    model = KMeans(n_clusters=2, seed=1).fit(X)
    path = tmp_path / "model.pgcm"
    save_model(path, model, fingerprint="f" * 64, doc_ids=[f"d{i}" for i in range(40)])
    loaded = load_model(path, expected_fingerprint="f" * 64)
    assert loaded.algorithm == "kmeans"
    assert np.array_equal(loaded.estimator.cluster_centers_, model.cluster_centers_)
    assert np.array_equal(loaded.estimator.labels_, model.labels_)
    assert loaded.doc_ids == [f"d{i}" for i in range(40)]
    # re-saving the loaded model yields identical bytes
    again = tmp_path / "again.pgcm"
    save_model(again, loaded.estimator, fingerprint=loaded.fingerprint,
               doc_ids=loaded.doc_ids)
    assert again.read_bytes() == path.read_bytes()


def test_load_wrong_fingerprint_refused(tmp_path):
    X, _ = blob_vectors([10, 10], dim=3, separation=8.0, seed=6)
    model = KMeans(n_clusters=2, seed=1).fit(X)
    path = tmp_path / "model.pgcm"
    save_model(path, model, fingerprint="a" * 64, doc_ids=["x"] * 0 or ["d"])
    with pytest.raises(FingerprintMismatchError):
        load_model(path, expected_fingerprint="b" * 64)


def test_load_garbage_rejected(tmp_path):
    path = tmp_path / "junk.pgcm"
    path.write_bytes(b"JUNKJUNKJUNK")
    with pytest.raises(ModelError):
        load_model(path)
