"""Ensemble experiment drivers, correlation statistics and result files.

Two experiment families:

* correlation -- many seeded runs with randomly drawn training-set sizes;
  records the kernel collective variables before the first optimizer step
  and the training outcomes, then computes the Pearson matrix across runs.
* rnd comparison -- for each requested selection size, an ensemble of
  greedy-RND and uniform-random selections, each followed by training;
  aggregated as means with standard errors.

Every run's seed derives from the master seed and the run's index, so
ensembles reproduce bit-for-bit regardless of worker count.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import presets as presets_mod
from .datasets import Dataset
from .kernel import collective_variables
from .network import AdamConfig, init_network
from .seeding import derive_seed
from .selection import RndConfig, select_random, select_rnd
from .training import TrainConfig, train

RECORD_COLUMNS = (
    "run_id",
    "seed",
    "dataset_name",
    "dataset_size",
    "parametrization",
    "starting_entropy",
    "starting_trace",
    "max_eig_ratio",
    "min_test_loss",
    "final_test_loss",
    "min_train_loss",
    "max_accuracy",
    "diverged",
)

COMPARISON_COLUMNS = (
    "dataset_size",
    "method",
    "ensemble_count",
    "min_test_loss_mean",
    "min_test_loss_se",
    "final_test_loss_mean",
    "final_test_loss_se",
    "starting_entropy_mean",
    "starting_entropy_se",
    "starting_trace_mean",
    "starting_trace_se",
)


@dataclass
class ExperimentRecord:
    run_id: int
    seed: int
    dataset_name: str
    dataset_size: int
    parametrization: str
    starting_entropy: float
    starting_trace: float
    max_eig_ratio: float
    min_test_loss: float
    final_test_loss: float
    min_train_loss: float
    max_accuracy: float | None
    diverged: bool


@dataclass
class CorrelationMatrix:
    variable_names: list[str]
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)

    def value(self, a: str, b: str) -> float:
        i = self.variable_names.index(a)
        j = self.variable_names.index(b)
        return float(self.entries[i, j])


@dataclass
class ComparisonPoint:
    dataset_size: int
    method: str
    ensemble_count: int
    min_test_loss_mean: float
    min_test_loss_se: float
    final_test_loss_mean: float
    final_test_loss_se: float
    starting_entropy_mean: float
    starting_entropy_se: float
    starting_trace_mean: float
    starting_trace_se: float


def pearson(x, y) -> float:
    """Product-moment correlation; raises on short or zero-variance input."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("pearson expects two equal-length vectors")
    if xa.size < 2:
        raise ValueError("pearson needs at least two points")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("pearson undefined for zero-variance input")
    r = float(dx @ dy) / np.sqrt(vx * vy)
    return float(np.clip(r, -1.0, 1.0))


def standard_error(values) -> float:
    """Sample standard deviation over sqrt(count)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        return 0.0
    return float(arr.std(ddof=1) / np.sqrt(arr.size))


# ---------------------------------------------------------------------------
# correlation experiment


@dataclass(frozen=True)
class CorrelationConfig:
    preset: str = "fuel"
    runs: int = 200
    size_min: int = 16
    size_max: int = 200
    parametrization: str = "lecun"
    master_seed: int = 0
    split_seed: int = 0
    ntk_cap: int = 512
    workers: int = 1
    epochs: int | None = None
    batch_size: int | None = None
    learning_rate: float | None = None
    eval_every: int = 1
    data_dir: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not (1 <= self.size_min <= self.size_max):
            raise ValueError("need 1 <= size_min <= size_max")
        if self.preset not in presets_mod.PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.parametrization not in ("lecun", "ntk"):
            raise ValueError("parametrization must be lecun or ntk")


@dataclass
class CorrelationOutcome:
    records: list[ExperimentRecord]
    matrix: CorrelationMatrix | None
    excluded_variables: list[str] = field(default_factory=list)
    note: str = ""

    @property
    def n_diverged(self) -> int:
        return sum(r.diverged for r in self.records)


@dataclass
class _CorrContext:
    cfg: CorrelationConfig
    pool: Dataset
    test: Dataset
    train_cfg: TrainConfig


def _make_train_cfg(preset, epochs, batch_size, learning_rate, eval_every, seed=0) -> TrainConfig:
    return TrainConfig(
        epochs=epochs,
        batch_size=batch_size,
        adam=AdamConfig(learning_rate=learning_rate),
        loss=preset.loss,
        eval_every=eval_every,
        seed=seed,
    )


def _correlation_context(cfg: CorrelationConfig) -> _CorrContext:
    preset = presets_mod.PRESETS[cfg.preset]
    pool, test, _ = presets_mod.load_split(cfg.preset, data_dir=cfg.data_dir, split_seed=cfg.split_seed)
    if cfg.size_max > pool.n_samples:
        raise ValueError(f"size_max {cfg.size_max} exceeds pool of {pool.n_samples}")
    train_cfg = _make_train_cfg(
        preset,
        cfg.epochs if cfg.epochs is not None else preset.correlation_epochs,
        cfg.batch_size if cfg.batch_size is not None else preset.correlation_batch,
        cfg.learning_rate if cfg.learning_rate is not None else preset.correlation_lr,
        cfg.eval_every,
    )
    return _CorrContext(cfg=cfg, pool=pool, test=test, train_cfg=train_cfg)


def _correlation_run(ctx: _CorrContext, run_id: int) -> ExperimentRecord:
    cfg = ctx.cfg
    preset = presets_mod.PRESETS[cfg.preset]
    seed = derive_seed(cfg.master_seed, run_id)
    rng = np.random.default_rng(derive_seed(seed, 0))
    size = int(rng.integers(cfg.size_min, cfg.size_max + 1))
    subset_idx = rng.choice(ctx.pool.n_samples, size=size, replace=False)
    subset = ctx.pool.take(subset_idx)

    state = init_network(
        preset.correlation_spec(ctx.pool.n_features, cfg.parametrization),
        derive_seed(seed, 1),
    )
    assert state.optimizer_steps == 0
    report = collective_variables(state, subset.inputs[: cfg.ntk_cap])

    train_cfg = replace(ctx.train_cfg, seed=derive_seed(seed, 2))
    _, outcome = train(state, subset, ctx.test, train_cfg)
    return ExperimentRecord(
        run_id=run_id,
        seed=seed,
        dataset_name=cfg.preset,
        dataset_size=size,
        parametrization=cfg.parametrization,
        starting_entropy=report.entropy,
        starting_trace=report.trace,
        max_eig_ratio=report.max_eig_ratio,
        min_test_loss=outcome.min_test_loss,
        final_test_loss=outcome.final_test_loss,
        min_train_loss=outcome.min_train_loss,
        max_accuracy=outcome.max_accuracy,
        diverged=outcome.diverged,
    )


_WORKER_CTX = None


def _init_worker(ctx):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _worker_corr_run(run_id: int) -> ExperimentRecord:
    return _correlation_run(_WORKER_CTX, run_id)


def _worker_comp_run(spec) -> ExperimentRecord:
    return _comparison_run(_WORKER_CTX, *spec)


def _map_runs(worker_fn, local_fn, ctx, items, workers: int):
    if workers <= 1:
        return [local_fn(ctx, *item) if isinstance(item, tuple) else local_fn(ctx, item) for item in items]
    with concurrent.futures.ProcessPoolExecutor(
        max_workers=workers, initializer=_init_worker, initargs=(ctx,)
    ) as pool:
        return list(pool.map(worker_fn, items))


def run_correlation_experiment(cfg: CorrelationConfig) -> CorrelationOutcome:
    """Seeded ensemble of runs plus the Pearson matrix over their records."""
    ctx = _correlation_context(cfg)
    records = _map_runs(_worker_corr_run, _correlation_run, ctx, list(range(cfg.runs)), cfg.workers)
    matrix, excluded, note = correlation_matrix(records)
    return CorrelationOutcome(records=records, matrix=matrix, excluded_variables=excluded, note=note)


def correlation_matrix(records: list[ExperimentRecord]):
    """Pearson matrix over the standard record variables.

    Diverged runs are excluded.  Variables with zero variance (or absent,
    like accuracy on regression tasks) are dropped and reported rather than
    producing NaN entries.  Returns (matrix-or-None, excluded, note).
    """
    valid = [r for r in records if not r.diverged]
    if len(valid) < 2:
        return None, [], f"insufficient data: {len(valid)} non-diverged runs"
    columns: dict[str, np.ndarray] = {
        "starting_entropy": np.array([r.starting_entropy for r in valid]),
        "starting_trace": np.array([r.starting_trace for r in valid]),
        "dataset_size": np.array([float(r.dataset_size) for r in valid]),
        "min_test_loss": np.array([r.min_test_loss for r in valid]),
        "final_test_loss": np.array([r.final_test_loss for r in valid]),
        "min_train_loss": np.array([r.min_train_loss for r in valid]),
    }
    if all(r.max_accuracy is not None for r in valid):
        columns["max_accuracy"] = np.array([r.max_accuracy for r in valid])

    excluded = [name for name, vals in columns.items() if float(np.var(vals)) == 0.0]
    names = [n for n in columns if n not in excluded]
    if len(names) < 2:
        return None, excluded, "insufficient varying variables"
    k = len(names)
    entries = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            r = pearson(columns[names[i]], columns[names[j]])
            entries[i, j] = r
            entries[j, i] = r
    return CorrelationMatrix(variable_names=names, entries=entries), excluded, ""


# ---------------------------------------------------------------------------
# rnd-vs-random comparison


@dataclass(frozen=True)
class ComparisonConfig:
    preset: str = "fuel"
    sizes: tuple[int, ...] = (8, 16, 32)
    ensemble: int = 20
    master_seed: int = 0
    split_seed: int = 0
    workers: int = 1
    epochs: int | None = None
    batch_size: int | None = None
    learning_rate: float | None = None
    retrain_epochs: int | None = None
    retrain_lr: float | None = None
    eval_every: int = 1
    data_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ValueError("sizes must be positive")
        if self.ensemble < 1:
            raise ValueError("ensemble must be >= 1")
        if self.preset not in presets_mod.PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")


@dataclass
class ComparisonOutcome:
    points: list[ComparisonPoint]
    records: list[ExperimentRecord]

    def point(self, size: int, method: str) -> ComparisonPoint:
        for p in self.points:
            if p.dataset_size == size and p.method == method:
                return p
        raise KeyError(f"no point for size={size} method={method}")


@dataclass
class _CompContext:
    cfg: ComparisonConfig
    pool: Dataset
    test: Dataset
    train_cfg: TrainConfig
    retrain_epochs: int
    retrain_lr: float


METHODS = ("rnd", "random")


def _comparison_context(cfg: ComparisonConfig) -> _CompContext:
    preset = presets_mod.PRESETS[cfg.preset]
    pool, test, _ = presets_mod.load_split(cfg.preset, data_dir=cfg.data_dir, split_seed=cfg.split_seed)
    if max(cfg.sizes) > pool.n_samples:
        raise ValueError(f"size {max(cfg.sizes)} exceeds pool of {pool.n_samples}")
    train_cfg = _make_train_cfg(
        preset,
        cfg.epochs if cfg.epochs is not None else preset.comparison_epochs,
        cfg.batch_size if cfg.batch_size is not None else preset.comparison_batch,
        cfg.learning_rate if cfg.learning_rate is not None else preset.comparison_lr,
        cfg.eval_every,
    )
    return _CompContext(
        cfg=cfg,
        pool=pool,
        test=test,
        train_cfg=train_cfg,
        retrain_epochs=cfg.retrain_epochs if cfg.retrain_epochs is not None else preset.retrain_epochs,
        retrain_lr=cfg.retrain_lr if cfg.retrain_lr is not None else preset.retrain_lr,
    )


def _comparison_run(ctx: _CompContext, run_id: int, size_idx: int, method_idx: int, rep: int) -> ExperimentRecord:
    cfg = ctx.cfg
    preset = presets_mod.PRESETS[cfg.preset]
    size = cfg.sizes[size_idx]
    method = METHODS[method_idx]
    seed = derive_seed(cfg.master_seed, size_idx, method_idx, rep)

    arch = preset.selection_spec(ctx.pool.n_features)
    if method == "rnd":
        selection = select_rnd(
            ctx.pool,
            RndConfig(
                embedding_spec=arch,
                target_size=size,
                retrain_epochs=ctx.retrain_epochs,
                retrain_lr=ctx.retrain_lr,
                seed=derive_seed(seed, 0),
            ),
        )
    else:
        selection = select_random(ctx.pool, size, seed=derive_seed(seed, 0))
    chosen = ctx.pool.take(selection.chosen_indices)

    state = init_network(arch, derive_seed(seed, 1))
    assert state.optimizer_steps == 0
    report = collective_variables(state, chosen.inputs)

    train_cfg = replace(ctx.train_cfg, seed=derive_seed(seed, 2))
    _, outcome = train(state, chosen, ctx.test, train_cfg)
    return ExperimentRecord(
        run_id=run_id,
        seed=seed,
        dataset_name=f"{cfg.preset}[{method}]",
        dataset_size=size,
        parametrization=arch.parametrization,
        starting_entropy=report.entropy,
        starting_trace=report.trace,
        max_eig_ratio=report.max_eig_ratio,
        min_test_loss=outcome.min_test_loss,
        final_test_loss=outcome.final_test_loss,
        min_train_loss=outcome.min_train_loss,
        max_accuracy=outcome.max_accuracy,
        diverged=outcome.diverged,
    )


def run_rnd_comparison(cfg: ComparisonConfig) -> ComparisonOutcome:
    """Ensembles of rnd/random selections at each size, with mean +- se."""
    ctx = _comparison_context(cfg)
    specs = []
    run_id = 0
    for size_idx in range(len(cfg.sizes)):
        for method_idx in range(len(METHODS)):
            for rep in range(cfg.ensemble):
                specs.append((run_id, size_idx, method_idx, rep))
                run_id += 1
    records = _map_runs(_worker_comp_run, _comparison_run, ctx, specs, cfg.workers)

    points = []
    for size_idx, size in enumerate(cfg.sizes):
        for method_idx, method in enumerate(METHODS):
            group = [
                r
                for (r, spec) in zip(records, specs)
                if spec[1] == size_idx and spec[2] == method_idx and not r.diverged
            ]
            if not group:
                raise RuntimeError(f"every run diverged for size={size} method={method}")
            points.append(
                ComparisonPoint(
                    dataset_size=size,
                    method=method,
                    ensemble_count=len(group),
                    min_test_loss_mean=float(np.mean([r.min_test_loss for r in group])),
                    min_test_loss_se=standard_error([r.min_test_loss for r in group]),
                    final_test_loss_mean=float(np.mean([r.final_test_loss for r in group])),
                    final_test_loss_se=standard_error([r.final_test_loss for r in group]),
                    starting_entropy_mean=float(np.mean([r.starting_entropy for r in group])),
                    starting_entropy_se=standard_error([r.starting_entropy for r in group]),
                    starting_trace_mean=float(np.mean([r.starting_trace for r in group])),
                    starting_trace_se=standard_error([r.starting_trace for r in group]),
                )
            )
    return ComparisonOutcome(points=points, records=records)


# ---------------------------------------------------------------------------
# result files


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_records_csv(records: list[ExperimentRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            writer.writerow([_fmt_cell(getattr(r, col)) for col in RECORD_COLUMNS])


def read_records_csv(path) -> list[ExperimentRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        records = []
        for row in reader:
            records.append(
                ExperimentRecord(
                    run_id=int(row["run_id"]),
                    seed=int(row["seed"]),
                    dataset_name=row["dataset_name"],
                    dataset_size=int(row["dataset_size"]),
                    parametrization=row["parametrization"],
                    starting_entropy=float(row["starting_entropy"]),
                    starting_trace=float(row["starting_trace"]),
                    max_eig_ratio=float(row["max_eig_ratio"]),
                    min_test_loss=float(row["min_test_loss"]),
                    final_test_loss=float(row["final_test_loss"]),
                    min_train_loss=float(row["min_train_loss"]),
                    max_accuracy=float(row["max_accuracy"]) if row["max_accuracy"] else None,
                    diverged=row["diverged"] == "true",
                )
            )
        return records


def write_correlation_json(outcome: CorrelationOutcome, path) -> None:
    payload = {
        "n_runs": len(outcome.records),
        "n_diverged": outcome.n_diverged,
        "excluded_variables": outcome.excluded_variables,
        "note": outcome.note,
    }
    if outcome.matrix is not None:
        payload["variables"] = outcome.matrix.variable_names
        payload["matrix"] = [[float(v) for v in row] for row in outcome.matrix.entries]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_comparison_csv(points: list[ComparisonPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMPARISON_COLUMNS)
        for p in points:
            writer.writerow([_fmt_cell(getattr(p, col)) for col in COMPARISON_COLUMNS])


def content_hash(payload: bytes) -> str:
    """Git-style blob hash of raw bytes."""
    header = f"blob {len(payload)}\0".encode()
    return hashlib.sha1(header + payload).hexdigest()


def write_run_meta(config_echo: dict, input_files: list, path) -> None:
    import ntklens

    hashes = {}
    for f in input_files:
        try:
            hashes[str(f)] = content_hash(open(f, "rb").read())
        except OSError:
            hashes[str(f)] = None
    meta = {
        "config": config_echo,
        "input_hashes": hashes,
        "versions": {"ntklens": ntklens.__version__, "numpy": np.__version__},
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
