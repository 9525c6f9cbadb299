"""Training loop with per-epoch test tracking, plus the kernel-consistency probe.

`train` runs seeded mini-batch ADAM and records the loss curves the
experiment reports are built from.  `linearized_step_check` compares the
actual change in network outputs after one plain gradient-descent step
against the first-order prediction from the tangent kernel,

    delta f_i ~= -eta * sum_j K_ij * dL/df_j,

which is exact for models linear in their parameters and first-order
accurate otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset
from .kernel import compute_ntk
from .network import (
    AdamConfig,
    NetworkState,
    adam_step,
    forward,
    gradient_descent_step,
    loss_and_grad,
    loss_output_grad,
)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 0  # 0 = full batch
    adam: AdamConfig = field(default_factory=AdamConfig)
    loss: str = "mse"
    eval_every: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 0")


@dataclass
class TrainOutcome:
    min_test_loss: float
    final_test_loss: float
    min_train_loss: float
    max_accuracy: float | None
    train_loss_curve: list[float]
    test_loss_curve: list[float]
    eval_epochs: list[int]
    diverged: bool = False

    def to_dict(self) -> dict:
        return {
            "min_test_loss": self.min_test_loss,
            "final_test_loss": self.final_test_loss,
            "min_train_loss": self.min_train_loss,
            "max_accuracy": self.max_accuracy,
            "train_loss_curve": self.train_loss_curve,
            "test_loss_curve": self.test_loss_curve,
            "eval_epochs": self.eval_epochs,
            "diverged": self.diverged,
        }


def evaluate(state: NetworkState, ds: Dataset, loss_kind: str):
    """(loss, accuracy-or-None) on a dataset; accuracy as a 0..100 percentage."""
    outputs = forward(state, ds.inputs)
    loss, _ = loss_output_grad(outputs, ds.targets, loss_kind)
    accuracy = None
    if ds.task == "classification":
        predicted = np.argmax(outputs, axis=1)
        accuracy = float(100.0 * np.mean(predicted == np.asarray(ds.targets)))
    return loss, accuracy


def train(
    state: NetworkState,
    train_ds: Dataset,
    test_ds: Dataset,
    cfg: TrainConfig,
) -> tuple[NetworkState, TrainOutcome]:
    """Mini-batch ADAM with deterministic per-seed shuffling.

    Test loss (and accuracy for classification) are evaluated before the
    first step, every `eval_every` epochs and at the final epoch.  A
    non-finite loss marks the run diverged and returns the partial curves.
    """
    if test_ds.n_samples == 0:
        raise ValueError("test set must be non-empty")
    rng = np.random.default_rng(cfg.seed)
    n = train_ds.n_samples
    batch = n if cfg.batch_size == 0 else min(cfg.batch_size, n)

    train_curve: list[float] = []
    test_curve: list[float] = []
    acc_curve: list[float] = []
    eval_epochs: list[int] = []
    diverged = False

    def record(epoch: int) -> bool:
        train_loss, _ = evaluate(state, train_ds, cfg.loss)
        test_loss, accuracy = evaluate(state, test_ds, cfg.loss)
        if not (np.isfinite(train_loss) and np.isfinite(test_loss)):
            return False
        eval_epochs.append(epoch)
        train_curve.append(train_loss)
        test_curve.append(test_loss)
        if accuracy is not None:
            acc_curve.append(accuracy)
        return True

    # divergence is an expected, flagged outcome; keep numpy quiet about the
    # overflow that precedes the non-finite loss which ends the run
    with np.errstate(over="ignore", invalid="ignore"):
        if not record(0):
            diverged = True
        opt_state = None
        epoch = 0
        while not diverged and epoch < cfg.epochs:
            epoch += 1
            order = rng.permutation(n) if batch < n else np.arange(n)
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                loss, grad = loss_and_grad(state, train_ds.inputs[idx], train_ds.targets[idx], cfg.loss)
                if not np.isfinite(loss):
                    diverged = True
                    break
                state, opt_state = adam_step(state, grad, opt_state, cfg.adam)
            if diverged:
                break
            if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
                if not record(epoch):
                    diverged = True

    outcome = TrainOutcome(
        min_test_loss=float(min(test_curve)) if test_curve else float("nan"),
        final_test_loss=float(test_curve[-1]) if test_curve else float("nan"),
        min_train_loss=float(min(train_curve)) if train_curve else float("nan"),
        max_accuracy=float(max(acc_curve)) if acc_curve else None,
        train_loss_curve=train_curve,
        test_loss_curve=test_curve,
        eval_epochs=eval_epochs,
        diverged=diverged,
    )
    return state, outcome


@dataclass
class LinearizedCheck:
    predicted_delta: np.ndarray
    actual_delta: np.ndarray
    rel_err: float


def linearized_step_check(
    state: NetworkState,
    inputs: np.ndarray,
    targets: np.ndarray,
    loss_kind: str,
    eta: float = 1e-4,
) -> LinearizedCheck:
    """Kernel-predicted output change vs one actual gradient-descent step.

    Meaningful for single-output heads, where the kernel prediction is the
    exact first-order term; with several outputs the summed kernel only
    approximates the block structure.  A zero actual step is degenerate and
    reported as rel_err = nan.
    """
    before = forward(state, inputs)
    _, output_grad = loss_output_grad(before, targets, loss_kind)
    kernel = compute_ntk(state, inputs).entries
    predicted = -eta * (kernel @ output_grad)

    _, grad = loss_and_grad(state, inputs, targets, loss_kind)
    after = forward(gradient_descent_step(state, grad, eta), inputs)
    actual = after - before

    scale = float(np.linalg.norm(actual))
    rel_err = float(np.linalg.norm(predicted - actual) / scale) if scale > 0 else float("nan")
    return LinearizedCheck(predicted_delta=predicted, actual_delta=actual, rel_err=rel_err)
