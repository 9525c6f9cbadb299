"""Dataset ingestion, normalization, splitting and synthetic generators.

Loaders return immutable-by-convention `Dataset` values: float64 inputs,
float64 targets for regression, integer class indices for classification.
Tabular data arrives as CSV with a header row; image data as big-endian IDX
files.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

TASKS = ("regression", "classification")
MISSING_MARKERS = {"", "?", "NA", "NaN", "nan"}

IDX_IMAGE_MAGIC = 2051
IDX_LABEL_MAGIC = 2049


@dataclass
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray
    task: str
    name: str = ""
    dropped_rows: int = 0

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.task == "regression":
            self.targets = np.asarray(self.targets, dtype=np.float64)
            if self.targets.ndim == 1:
                self.targets = self.targets[:, None]
        else:
            self.targets = np.asarray(self.targets, dtype=np.int64)
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError("inputs and targets disagree on sample count")
        if not np.isfinite(self.inputs).all():
            raise ValueError("inputs contain non-finite values")
        if self.task == "regression" and not np.isfinite(self.targets).all():
            raise ValueError("targets contain non-finite values")

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_features(self) -> int:
        return self.inputs.shape[1]

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return replace(self, inputs=self.inputs[idx], targets=self.targets[idx], dropped_rows=0)


@dataclass(frozen=True)
class SplitSpec:
    test_count: int
    seed: int = 0


@dataclass(frozen=True)
class CsvSchema:
    """Column selection for a tabular file.

    `one_hot_drop_first` lists categorical feature columns to expand into
    indicator columns, dropping the first category.
    """

    feature_columns: tuple[str, ...]
    target_columns: tuple[str, ...]
    task: str
    name: str = ""
    one_hot_drop_first: tuple[str, ...] = ()


def load_csv_tabular(path, schema: CsvSchema) -> Dataset:
    """Read a header CSV; rows with missing or unparseable cells are dropped.

    The number of dropped rows is reported on the returned Dataset.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        all_rows = [row for row in reader if row]

    columns = list(schema.feature_columns) + list(schema.target_columns)
    missing_cols = [c for c in columns if c not in header]
    if missing_cols:
        raise ValueError(f"{path} lacks columns {missing_cols}; header is {header}")
    col_idx = {c: header.index(c) for c in columns}

    kept, dropped = [], 0
    for row in all_rows:
        values = {}
        ok = True
        for c in columns:
            cell = row[col_idx[c]].strip()
            if cell in MISSING_MARKERS:
                ok = False
                break
            try:
                values[c] = float(cell)
            except ValueError:
                ok = False
                break
        if ok:
            kept.append(values)
        else:
            dropped += 1
    if not kept:
        raise ValueError(f"{path}: no usable rows")

    feature_blocks = []
    for c in schema.feature_columns:
        col = np.array([r[c] for r in kept])
        if c in schema.one_hot_drop_first:
            categories = np.unique(col)
            for cat in categories[1:]:
                feature_blocks.append((col == cat).astype(np.float64))
        else:
            feature_blocks.append(col)
    inputs = np.column_stack(feature_blocks)

    target_cols = np.column_stack([[r[c] for r in kept] for c in schema.target_columns])
    if schema.task == "classification":
        targets = target_cols[:, 0].astype(np.int64)
    else:
        targets = target_cols
    return Dataset(inputs=inputs, targets=targets, task=schema.task, name=schema.name, dropped_rows=dropped)


def _read_idx(path, expected_magic):
    with open(path, "rb") as fh:
        head = fh.read(4)
        if len(head) < 4:
            raise ValueError(f"{path}: truncated IDX header")
        magic = struct.unpack(">i", head)[0]
        if magic != expected_magic:
            raise ValueError(f"{path}: bad IDX magic {magic}, expected {expected_magic}")
        ndim = magic % 256
        dims = []
        for _ in range(ndim):
            raw = fh.read(4)
            if len(raw) < 4:
                raise ValueError(f"{path}: truncated IDX dimension header")
            dims.append(struct.unpack(">i", raw)[0])
        count = int(np.prod(dims))
        data = np.frombuffer(fh.read(), dtype=np.uint8)
        if data.size != count:
            raise ValueError(f"{path}: expected {count} bytes of data, found {data.size}")
    return data.reshape(dims)


def load_mnist_idx(images_path, labels_path, subset: int, seed: int = 0) -> Dataset:
    """Load an IDX image/label pair, flatten to [0,1] rows, subsample.

    Subsampling is uniform without replacement and deterministic per seed;
    `subset` equal to the file size yields a seeded permutation of all rows.
    """
    images = _read_idx(images_path, IDX_IMAGE_MAGIC)
    labels = _read_idx(labels_path, IDX_LABEL_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise ValueError(
            f"image count {images.shape[0]} does not match label count {labels.shape[0]}"
        )
    n = images.shape[0]
    if not (1 <= subset <= n):
        raise ValueError(f"subset must be in [1, {n}], got {subset}")
    idx = np.random.default_rng(seed).choice(n, size=subset, replace=False)
    flat = images.reshape(n, -1)[idx].astype(np.float64) / 255.0
    return Dataset(inputs=flat, targets=labels[idx].astype(np.int64), task="classification", name="mnist")


def write_idx_images(path, images: np.ndarray) -> None:
    arr = np.asarray(images, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">iiii", IDX_IMAGE_MAGIC, arr.shape[0], arr.shape[1], arr.shape[2]))
        fh.write(arr.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    arr = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">ii", IDX_LABEL_MAGIC, arr.shape[0]))
        fh.write(arr.tobytes())


class Standardizer:
    """Column statistics of a training set, applied to any same-shape data."""

    def __init__(self, train: Dataset):
        if train.n_samples == 0:
            raise ValueError("cannot standardize an empty training set")
        self.feature_mean = train.inputs.mean(axis=0)
        self.feature_std = train.inputs.std(axis=0)
        self._feature_scale = np.where(self.feature_std > 0, self.feature_std, 1.0)
        self.target_mean = None
        self.target_std = None
        if train.task == "regression":
            self.target_mean = train.targets.mean(axis=0)
            self.target_std = train.targets.std(axis=0)
            self._target_scale = np.where(self.target_std > 0, self.target_std, 1.0)

    def apply(self, ds: Dataset) -> Dataset:
        inputs = (ds.inputs - self.feature_mean) / self._feature_scale
        targets = ds.targets
        if ds.task == "regression" and self.target_mean is not None:
            targets = (ds.targets - self.target_mean) / self._target_scale
        return replace(ds, inputs=inputs, targets=targets)

    def inverse_targets(self, standardized: np.ndarray) -> np.ndarray:
        if self.target_mean is None:
            raise ValueError("no target statistics were fitted (classification task)")
        return np.asarray(standardized) * self._target_scale + self.target_mean


def standardize(train: Dataset, others: list[Dataset] | None = None):
    """Shift/scale features (and regression targets) to train-set z-scores.

    Statistics come from `train` only; constant columns map to zero.  Image
    data already living in [0,1] should bypass this (the experiment pipelines
    skip it for the digits corpus).  Returns the transformed training set,
    the transformed others, and the fitted Standardizer for inverse maps.
    """
    scaler = Standardizer(train)
    others = others or []
    return scaler.apply(train), [scaler.apply(ds) for ds in others], scaler


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive (train_pool, test) split, deterministic per seed."""
    if not (0 < spec.test_count < ds.n_samples):
        raise ValueError(
            f"test_count must be in (0, {ds.n_samples}), got {spec.test_count}"
        )
    perm = np.random.default_rng(spec.seed).permutation(ds.n_samples)
    test = ds.take(perm[: spec.test_count])
    train_pool = ds.take(perm[spec.test_count :])
    return train_pool, test


def make_synthetic_clusters(k: int, per_cluster: int, separation: float, noise: float, seed: int = 0) -> Dataset:
    """k Gaussian blobs in 2D whose centers are pairwise >= separation apart."""
    if k < 2:
        raise ValueError("need at least two clusters")
    rng = np.random.default_rng(seed)
    # adjacent points on a circle of this radius sit exactly `separation` apart
    radius = separation / (2.0 * np.sin(np.pi / k))
    angles = 2.0 * np.pi * np.arange(k) / k
    centers = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    points = np.repeat(centers, per_cluster, axis=0)
    if noise > 0:
        points = points + rng.normal(0.0, noise, size=points.shape)
    labels = np.repeat(np.arange(k), per_cluster)
    return Dataset(inputs=points, targets=labels, task="classification", name="clusters")


def make_synthetic_regression(n: int, d: int, noise: float = 0.1, seed: int = 0) -> Dataset:
    """Linear map plus Gaussian noise; handy as a fast regression pool."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    w = rng.normal(size=d)
    y = x @ w + noise * rng.normal(size=n)
    return Dataset(inputs=x, targets=y, task="regression", name="synth-linear")


def generate_digits_idx(out_dir, n_images: int = 10500, seed: int = 0, image_size: int = 28):
    """Render an IDX image/label pair from the packaged 8x8 digits snapshot.

    Each output image is a source digit upsampled to `image_size`, randomly
    rotated a few degrees and shifted by up to two pixels; intensities are
    rescaled to 0..255.  Deterministic per seed.  Returns the two paths.
    """
    from importlib import resources

    from scipy import ndimage

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    images_path = out_dir / f"digits-{n_images}-{seed}-images.idx"
    labels_path = out_dir / f"digits-{n_images}-{seed}-labels.idx"
    if images_path.exists() and labels_path.exists():
        return images_path, labels_path

    with resources.files("ntklens.data").joinpath("digits8x8.npz").open("rb") as fh:
        archive = np.load(fh)
        source = archive["images"].astype(np.float64) / 16.0
        source_labels = archive["labels"]

    rng = np.random.default_rng(seed)
    order = rng.permutation(source.shape[0])
    upscale = (image_size - 4) / 8.0
    images = np.zeros((n_images, image_size, image_size), dtype=np.uint8)
    labels = np.zeros(n_images, dtype=np.uint8)
    for i in range(n_images):
        src = order[i % source.shape[0]]
        big = ndimage.zoom(source[src], upscale, order=1)
        big = ndimage.rotate(big, rng.uniform(-10.0, 10.0), reshape=False, order=1)
        canvas = np.zeros((image_size, image_size))
        dy, dx = rng.integers(0, 5, size=2)  # 4px margin -> shift of +-2 around center
        canvas[dy : dy + big.shape[0], dx : dx + big.shape[1]] = big
        images[i] = np.clip(canvas * 255.0, 0.0, 255.0).astype(np.uint8)
        labels[i] = source_labels[src]
    write_idx_images(images_path, images)
    write_idx_labels(labels_path, labels)
    return images_path, labels_path
