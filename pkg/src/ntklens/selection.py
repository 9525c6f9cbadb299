"""Greedy data selection with a frozen random target network.

Two randomly initialized networks of identical architecture embed every
candidate point.  The target stays frozen; the predictor is retrained after
each pick to reproduce the target's embeddings on the growing selected set.
The mean squared difference between the two embeddings measures novelty, and
the most novel point wins each round.  A seeded uniform draw provides the
baseline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .datasets import Dataset
from .network import AdamConfig, NetworkSpec, NetworkState, adam_step, forward, init_network, loss_and_grad
from .seeding import derive_seed


@dataclass(frozen=True)
class RndConfig:
    """Knobs for one selection run; target and predictor share embedding_spec."""

    embedding_spec: NetworkSpec
    target_size: int
    retrain_epochs: int = 50
    retrain_lr: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.target_size < 1:
            raise ValueError("target_size must be >= 1")
        if self.retrain_epochs < 1:
            raise ValueError("retrain_epochs must be >= 1")
        if self.retrain_lr <= 0:
            raise ValueError("retrain_lr must be positive")


@dataclass
class SelectionResult:
    chosen_indices: list[int]
    step_distances: list[float]
    method: str

    def __post_init__(self):
        if len(set(self.chosen_indices)) != len(self.chosen_indices):
            raise ValueError("chosen indices must be distinct")
        if any(d < 0 for d in self.step_distances):
            raise ValueError("distances must be non-negative")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "chosen_indices": [int(i) for i in self.chosen_indices],
            "step_distances": [float(d) for d in self.step_distances],
        }


def _pool_inputs(pool) -> np.ndarray:
    if isinstance(pool, Dataset):
        return pool.inputs
    x = np.asarray(pool, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("pool must be a Dataset or an (N, d) array")
    return x


def rnd_distance(target: NetworkState, predictor: NetworkState, point: np.ndarray) -> float:
    """Mean squared difference between the two embeddings of one point."""
    x = np.asarray(point, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    diff = forward(target, x) - forward(predictor, x)
    return float(np.mean(diff * diff))


def _pool_distances(target: NetworkState, predictor: NetworkState, inputs: np.ndarray) -> np.ndarray:
    diff = forward(target, inputs) - forward(predictor, inputs)
    return np.mean(diff * diff, axis=1)


def _retrain(predictor: NetworkState, inputs, targets, epochs: int, lr: float) -> NetworkState:
    """Full-batch ADAM epochs fitting the predictor to frozen embeddings."""
    opt = None
    cfg = AdamConfig(learning_rate=lr)
    for _ in range(epochs):
        _, grad = loss_and_grad(predictor, inputs, targets, "mse")
        predictor, opt = adam_step(predictor, grad, opt, cfg)
    return predictor


def select_rnd(
    pool,
    cfg: RndConfig,
    *,
    target: NetworkState | None = None,
    predictor: NetworkState | None = None,
    stop_distance: float | None = None,
) -> SelectionResult:
    """Pick `target_size` pool points greedily by embedding-prediction error.

    Each round scores every pool point, takes the argmax (ties break to the
    lowest index), then retrains the predictor on the selected points against
    the frozen target embeddings (warm start).  Already-chosen indices are
    excluded from later argmaxes so the selected set always reaches the
    requested size.  With `stop_distance` set, selection instead stops once
    the best remaining distance is at or below that threshold.  Deterministic
    per cfg.seed; explicit `target`/`predictor` states override the seeded
    initialization.
    """
    inputs = _pool_inputs(pool)
    n = inputs.shape[0]
    if cfg.target_size > n:
        raise ValueError(f"cannot select {cfg.target_size} points from a pool of {n}")
    if target is None:
        target = init_network(cfg.embedding_spec, derive_seed(cfg.seed, 0))
    if predictor is None:
        predictor = init_network(cfg.embedding_spec, derive_seed(cfg.seed, 1))

    chosen: list[int] = []
    distances: list[float] = []
    available = np.ones(n, dtype=bool)
    for _ in range(cfg.target_size):
        d = _pool_distances(target, predictor, inputs)
        d[~available] = -np.inf
        best = int(np.argmax(d))
        if stop_distance is not None and d[best] <= stop_distance:
            break
        chosen.append(best)
        distances.append(float(d[best]))
        available[best] = False
        # frozen-target embeddings, evaluated on exactly the retraining batch
        # so a predictor that already matches the target sees a zero gradient
        batch = inputs[chosen]
        predictor = _retrain(
            predictor,
            batch,
            forward(target, batch),
            cfg.retrain_epochs,
            cfg.retrain_lr,
        )
    return SelectionResult(chosen_indices=chosen, step_distances=distances, method="rnd")


def select_random(pool, size: int, seed: int = 0) -> SelectionResult:
    """Uniform sample without replacement; distances are recorded as zero."""
    inputs = _pool_inputs(pool)
    n = inputs.shape[0]
    if size > n:
        raise ValueError(f"cannot select {size} points from a pool of {n}")
    idx = np.random.default_rng(seed).choice(n, size=size, replace=False)
    return SelectionResult(
        chosen_indices=[int(i) for i in idx],
        step_distances=[0.0] * size,
        method="random",
    )


def dump_selection_json(result: SelectionResult, cfg: RndConfig | None, path) -> None:
    payload = result.to_dict()
    if cfg is not None:
        payload["config"] = {
            "embedding_widths": list(cfg.embedding_spec.layer_widths),
            "embedding_activation": cfg.embedding_spec.activation,
            "embedding_parametrization": cfg.embedding_spec.parametrization,
            "target_size": cfg.target_size,
            "retrain_epochs": cfg.retrain_epochs,
            "retrain_lr": cfg.retrain_lr,
            "seed": cfg.seed,
        }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
