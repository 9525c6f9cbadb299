import numpy as np
import pytest

from ntklens.datasets import (
    CsvSchema,
    Dataset,
    SplitSpec,
    load_csv_tabular,
    load_mnist_idx,
    make_synthetic_clusters,
    make_synthetic_regression,
    split,
    standardize,
    write_idx_images,
    write_idx_labels,
)
from ntklens import presets

SIMPLE_SCHEMA = CsvSchema(feature_columns=("a", "b"), target_columns=("y",), task="regression", name="toy")


def write_csv(path, text):
    path.write_text(text)
    return path


def test_load_small_csv(tmp_path):
    p = write_csv(tmp_path / "t.csv", "a,b,y\n1,2,3\n4,5,6\n7,8,9\n")
    ds = load_csv_tabular(p, SIMPLE_SCHEMA)
    assert ds.inputs.shape == (3, 2)
    assert ds.targets.shape == (3, 1)
    assert ds.dropped_rows == 0
    assert np.array_equal(ds.inputs, [[1, 2], [4, 5], [7, 8]])


def test_load_csv_drops_and_reports(tmp_path):
    p = write_csv(tmp_path / "t.csv", "a,b,y\n1,2,3\n?,5,6\n7,oops,9\n7,8,9\n")
    ds = load_csv_tabular(p, SIMPLE_SCHEMA)
    assert ds.n_samples == 2
    assert ds.dropped_rows == 2


def test_load_csv_schema_mismatch(tmp_path):
    p = write_csv(tmp_path / "t.csv", "a,z,y\n1,2,3\n")
    with pytest.raises(ValueError, match="lacks columns"):
        load_csv_tabular(p, SIMPLE_SCHEMA)


def test_load_csv_one_hot_drop_first(tmp_path):
    schema = CsvSchema(("a", "cat"), ("y",), "regression", one_hot_drop_first=("cat",))
    p = write_csv(tmp_path / "t.csv", "a,cat,y\n1,1,0\n2,2,0\n3,3,0\n4,1,0\n")
    ds = load_csv_tabular(p, schema)
    assert ds.n_features == 3  # a + two indicators (first category dropped)
    assert np.array_equal(ds.inputs[:, 1:], [[0, 0], [1, 0], [0, 1], [0, 0]])


def test_fuel_snapshot_counts():
    ds = presets.load_named_dataset("fuel")
    assert ds.n_samples + ds.dropped_rows == 398
    assert ds.dropped_rows == 6
    assert ds.n_features == 8
    assert ds.task == "regression"


def test_gait_snapshot_counts():
    ds = presets.load_named_dataset("gait")
    assert ds.n_samples == 48
    assert ds.n_features == 328
    assert len(np.unique(ds.targets)) == 16


def test_concrete_snapshot_counts():
    ds = presets.load_named_dataset("concrete")
    assert ds.n_samples == 103
    assert ds.n_features + ds.targets.shape[1] == 10
    assert ds.targets.shape[1] == 3


def test_idx_roundtrip_and_errors(tmp_path):
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(10, 4, 4)).astype(np.uint8)
    labels = np.arange(10).astype(np.uint8)
    ip, lp = tmp_path / "i.idx", tmp_path / "l.idx"
    write_idx_images(ip, images)
    write_idx_labels(lp, labels)

    ds = load_mnist_idx(ip, lp, subset=10, seed=1)
    assert ds.n_samples == 10 and ds.n_features == 16
    assert sorted(np.asarray(ds.targets)) == list(range(10))  # identity subsample, permuted

    images[0, 0, 0] = 255
    write_idx_images(ip, images)
    ds = load_mnist_idx(ip, lp, subset=10, seed=1)
    assert ds.inputs.max() == 1.0

    # deterministic subsample
    a = load_mnist_idx(ip, lp, subset=4, seed=7)
    b = load_mnist_idx(ip, lp, subset=4, seed=7)
    assert np.array_equal(a.inputs, b.inputs)

    bad = tmp_path / "bad.idx"
    bad.write_bytes(b"\x00\x00\x01\x02" + b"\x00" * 16)
    with pytest.raises(ValueError, match="magic"):
        load_mnist_idx(bad, lp, subset=2)

    trunc = tmp_path / "trunc.idx"
    trunc.write_bytes(open(ip, "rb").read()[:-7])
    with pytest.raises(ValueError, match="expected"):
        load_mnist_idx(trunc, lp, subset=2)

    write_idx_labels(lp, labels[:6])
    with pytest.raises(ValueError, match="does not match"):
        load_mnist_idx(ip, lp, subset=2)


def test_standardize_exact_values():
    train = Dataset(np.array([[1.0], [2.0], [3.0]]), np.array([1.0, 2.0, 3.0]), "regression")
    out, _, scaler = standardize(train)
    expected = np.array([-1.22474487, 0.0, 1.22474487])
    assert np.allclose(out.inputs[:, 0], expected, atol=1e-8)
    assert np.allclose(out.targets[:, 0], expected, atol=1e-8)
    assert np.allclose(scaler.inverse_targets(out.targets), train.targets, atol=1e-12)


def test_standardize_constant_column():
    train = Dataset(np.array([[5.0, 1.0], [5.0, 2.0]]), np.array([0.0, 1.0]), "regression")
    out, _, _ = standardize(train)
    assert np.all(out.inputs[:, 0] == 0.0)


def test_standardize_uses_train_statistics():
    train = Dataset(np.array([[0.0], [2.0]]), np.array([0.0, 2.0]), "regression")
    test = Dataset(np.array([[4.0]]), np.array([4.0]), "regression")
    _, (test_out,), _ = standardize(train, [test])
    # train mean 1, std 1 -> test value 4 maps to 3, not to its own z-score 0
    assert test_out.inputs[0, 0] == pytest.approx(3.0)
    assert test_out.targets[0, 0] == pytest.approx(3.0)


def test_standardize_moments_property():
    rng = np.random.default_rng(1)
    train = Dataset(rng.normal(5.0, 3.0, size=(40, 6)), rng.normal(size=40), "regression")
    out, _, _ = standardize(train)
    assert np.abs(out.inputs.mean(axis=0)).max() < 1e-10
    assert np.abs(out.inputs.var(axis=0) - 1.0).max() < 1e-8


def test_split_disjoint_exhaustive():
    ds = make_synthetic_regression(10, 2, seed=0)
    pool, test = split(ds, SplitSpec(test_count=3, seed=5))
    assert pool.n_samples == 7 and test.n_samples == 3
    merged = np.vstack([pool.inputs, test.inputs])
    assert np.array_equal(np.sort(merged, axis=0), np.sort(ds.inputs, axis=0))
    pool2, test2 = split(ds, SplitSpec(test_count=3, seed=5))
    assert np.array_equal(pool.inputs, pool2.inputs)
    assert np.array_equal(test.inputs, test2.inputs)


def test_split_validates_test_count():
    ds = make_synthetic_regression(5, 2, seed=0)
    with pytest.raises(ValueError):
        split(ds, SplitSpec(test_count=5, seed=0))


def test_fuel_split_sizes():
    pool, test, _ = presets.load_split("fuel", split_seed=0)
    assert test.n_samples == 120
    assert pool.n_samples == 392 - 120  # 398 published rows minus 6 missing-value drops


def test_clusters_noise_free_points_sit_on_centers():
    ds = make_synthetic_clusters(k=3, per_cluster=4, separation=6.0, noise=0.0, seed=0)
    for label in range(3):
        pts = ds.inputs[np.asarray(ds.targets) == label]
        assert np.allclose(pts, pts[0], atol=1e-12)


def test_clusters_separation_and_margin():
    ds = make_synthetic_clusters(k=2, per_cluster=10, separation=10.0, noise=0.1, seed=1)
    centers = np.array([ds.inputs[np.asarray(ds.targets) == lab].mean(axis=0) for lab in range(2)])
    assert np.linalg.norm(centers[0] - centers[1]) > 9.5
    # nearest-center rule classifies every point, with >5 of slack
    for x, label in zip(ds.inputs, np.asarray(ds.targets)):
        d_own = np.linalg.norm(x - centers[label])
        d_other = np.linalg.norm(x - centers[1 - label])
        assert d_other - d_own > 5.0


def test_clusters_pairwise_center_distance():
    ds = make_synthetic_clusters(k=5, per_cluster=1, separation=4.0, noise=0.0, seed=0)
    pts = ds.inputs
    for i in range(5):
        for j in range(i + 1, 5):
            assert np.linalg.norm(pts[i] - pts[j]) >= 4.0 - 1e-9


def test_clusters_deterministic():
    a = make_synthetic_clusters(4, 3, 8.0, 0.2, seed=9)
    b = make_synthetic_clusters(4, 3, 8.0, 0.2, seed=9)
    assert np.array_equal(a.inputs, b.inputs)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.zeros(2), "regression")
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf]]), np.zeros(1), "regression")
    with pytest.raises(ValueError):
        Dataset(np.zeros((1, 1)), np.zeros(1), "ranking")
