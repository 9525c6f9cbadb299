"""Named dataset pipelines and the architectures used by the experiments.

Each preset bundles a loader, the train/test split size, the dense
architectures for the two experiment families, and desk-scale training
defaults.  Loaders validate the published row and feature counts of the
shipped snapshots at load time.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .datasets import (
    CsvSchema,
    Dataset,
    SplitSpec,
    Standardizer,
    generate_digits_idx,
    load_csv_tabular,
    load_mnist_idx,
    make_synthetic_clusters,
    make_synthetic_regression,
    split,
    standardize,
)
from .network import NetworkSpec
from .seeding import derive_seed

FUEL_SCHEMA = CsvSchema(
    feature_columns=("cylinders", "displacement", "horsepower", "weight", "acceleration", "model_year", "origin"),
    target_columns=("mpg",),
    task="regression",
    name="fuel",
    one_hot_drop_first=("origin",),
)
GAIT_SCHEMA = CsvSchema(
    feature_columns=tuple(f"f{i}" for i in range(328)),
    target_columns=("label",),
    task="classification",
    name="gait",
)
CONCRETE_SCHEMA = CsvSchema(
    feature_columns=("cement", "slag", "fly_ash", "water", "sp", "coarse_aggr", "fine_aggr"),
    target_columns=("slump", "flow", "strength"),
    task="regression",
    name="concrete",
)

MNIST_POOL_SIZE = 10000
MNIST_SOURCE_IMAGES = 10500


@dataclass(frozen=True)
class Preset:
    name: str
    task: str
    loss: str
    test_count: int
    correlation_widths: tuple[int, ...]  # hidden..output; input width comes from the data
    selection_widths: tuple[int, ...]
    correlation_epochs: int
    correlation_batch: int
    correlation_lr: float
    comparison_epochs: int
    comparison_batch: int
    comparison_lr: float
    retrain_epochs: int = 50
    retrain_lr: float = 1e-3
    standardized: bool = True

    def correlation_spec(self, input_width: int, parametrization: str) -> NetworkSpec:
        return NetworkSpec((input_width, *self.correlation_widths), "relu", parametrization)

    def selection_spec(self, input_width: int, parametrization: str = "ntk") -> NetworkSpec:
        return NetworkSpec((input_width, *self.selection_widths), "relu", parametrization)


PRESETS: dict[str, Preset] = {
    "fuel": Preset(
        name="fuel", task="regression", loss="mse", test_count=120,
        correlation_widths=(128, 128, 1), selection_widths=(32, 32, 32, 1),
        correlation_epochs=400, correlation_batch=0, correlation_lr=3e-3,
        comparison_epochs=400, comparison_batch=0, comparison_lr=3e-3,
        retrain_epochs=200, retrain_lr=1e-2,
    ),
    "mnist": Preset(
        name="mnist", task="classification", loss="softmax_cross_entropy", test_count=500,
        correlation_widths=(128, 128, 10), selection_widths=(128, 128, 10),
        correlation_epochs=25, correlation_batch=64, correlation_lr=1e-3,
        comparison_epochs=25, comparison_batch=64, comparison_lr=1e-3,
        standardized=False,
    ),
    "gait": Preset(
        name="gait", task="classification", loss="softmax_cross_entropy", test_count=10,
        correlation_widths=(128, 128, 16), selection_widths=(32, 32, 16),
        correlation_epochs=200, correlation_batch=0, correlation_lr=1e-3,
        comparison_epochs=200, comparison_batch=0, comparison_lr=1e-3,
        retrain_epochs=100, retrain_lr=1e-2,
    ),
    "concrete": Preset(
        name="concrete", task="regression", loss="mse", test_count=10,
        correlation_widths=(128, 128, 3), selection_widths=(32, 32, 32, 3),
        correlation_epochs=400, correlation_batch=0, correlation_lr=3e-3,
        comparison_epochs=400, comparison_batch=0, comparison_lr=3e-3,
        retrain_epochs=100, retrain_lr=1e-2,
    ),
    "clusters": Preset(
        name="clusters", task="classification", loss="softmax_cross_entropy", test_count=8,
        correlation_widths=(16, 16, 4), selection_widths=(16, 16, 4),
        correlation_epochs=150, correlation_batch=0, correlation_lr=1e-2,
        comparison_epochs=150, comparison_batch=0, comparison_lr=1e-2,
        retrain_epochs=100, retrain_lr=1e-2,
        standardized=False,
    ),
    "synth-linear": Preset(
        name="synth-linear", task="regression", loss="mse", test_count=60,
        correlation_widths=(32, 32, 1), selection_widths=(32, 32, 1),
        correlation_epochs=150, correlation_batch=0, correlation_lr=1e-2,
        comparison_epochs=150, comparison_batch=0, comparison_lr=1e-2,
    ),
}


def data_path(filename: str) -> Path:
    return Path(resources.files("ntklens.data").joinpath(filename))


def default_data_dir() -> Path:
    env = os.environ.get("NTKLENS_DATA_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "ntklens"


def load_named_dataset(name: str, data_dir=None, seed: int = 0) -> Dataset:
    """Load one of the shipped snapshots, validating its published shape."""
    if name == "fuel":
        ds = load_csv_tabular(data_path("fuel.csv"), FUEL_SCHEMA)
        if ds.n_samples + ds.dropped_rows != 398 or ds.n_features != 8:
            raise ValueError(
                f"fuel snapshot shape drifted: {ds.n_samples}+{ds.dropped_rows} rows, "
                f"{ds.n_features} features (want 398 rows incl. drops, 8 features)"
            )
        return ds
    if name == "gait":
        ds = load_csv_tabular(data_path("gait.csv"), GAIT_SCHEMA)
        if ds.n_samples != 48 or ds.n_features != 328:
            raise ValueError(f"gait snapshot shape drifted: {ds.n_samples}x{ds.n_features}")
        return ds
    if name == "concrete":
        ds = load_csv_tabular(data_path("concrete.csv"), CONCRETE_SCHEMA)
        # the published count of 10 covers the 7 mix inputs plus 3 outcomes
        if ds.n_samples != 103 or ds.n_features + ds.targets.shape[1] != 10:
            raise ValueError(f"concrete snapshot shape drifted: {ds.n_samples}x{ds.n_features}")
        return ds
    if name == "mnist":
        directory = Path(data_dir) if data_dir else default_data_dir()
        images, labels = generate_digits_idx(directory, n_images=MNIST_SOURCE_IMAGES, seed=0)
        ds = load_mnist_idx(images, labels, subset=MNIST_POOL_SIZE, seed=derive_seed(seed, 101))
        if ds.n_features != 784:
            raise ValueError("digit images must flatten to 784 features")
        return ds
    if name == "clusters":
        return make_synthetic_clusters(k=4, per_cluster=16, separation=10.0, noise=0.6, seed=derive_seed(seed, 102))
    if name == "synth-linear":
        return make_synthetic_regression(n=360, d=6, noise=0.2, seed=derive_seed(seed, 103))
    raise ValueError(f"unknown dataset {name!r}; presets are {sorted(PRESETS)}")


def load_split(name: str, data_dir=None, split_seed: int = 0):
    """(train_pool, test, scaler-or-None) for a named preset.

    Tabular presets are standardized with train-pool statistics; the digits
    corpus stays on its native [0,1] scale.
    """
    preset = PRESETS[name]
    ds = load_named_dataset(name, data_dir=data_dir, seed=split_seed)
    pool, test = split(ds, SplitSpec(test_count=preset.test_count, seed=derive_seed(split_seed, 104)))
    scaler: Standardizer | None = None
    if preset.standardized:
        pool, (test,), scaler = standardize(pool, [test])
    return pool, test, scaler


def describe_presets() -> list[str]:
    lines = []
    for name in sorted(PRESETS):
        p = PRESETS[name]
        lines.append(
            f"{name}: task={p.task} loss={p.loss} test_count={p.test_count} "
            f"correlation_widths={p.correlation_widths} selection_widths={p.selection_widths}"
        )
    return lines
