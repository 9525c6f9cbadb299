import numpy as np
import pytest

from ntklens.datasets import Dataset, make_synthetic_regression
from ntklens.network import AdamConfig, NetworkSpec, init_network
from ntklens.training import TrainConfig, linearized_step_check, train


def single_point_dataset():
    return Dataset(np.array([[0.5, -1.0]]), np.array([0.7]), "regression")


def test_memorizes_single_point():
    ds = single_point_dataset()
    state = init_network(NetworkSpec((2, 8, 1)), 0)
    cfg = TrainConfig(epochs=800, adam=AdamConfig(learning_rate=1e-2), loss="mse", eval_every=50, seed=1)
    _, outcome = train(state, ds, ds, cfg)
    assert outcome.min_test_loss < 1e-3
    assert not outcome.diverged


def test_vanishing_learning_rate_keeps_initial_loss():
    ds = make_synthetic_regression(12, 3, seed=2)
    state = init_network(NetworkSpec((3, 6, 1)), 3)
    cfg = TrainConfig(epochs=3, adam=AdamConfig(learning_rate=1e-300), loss="mse", seed=4)
    _, outcome = train(state, ds, ds, cfg)
    assert outcome.final_test_loss == outcome.test_loss_curve[0]
    assert outcome.min_test_loss == outcome.final_test_loss


def test_train_deterministic():
    ds = make_synthetic_regression(20, 3, seed=5)
    cfg = TrainConfig(epochs=15, batch_size=8, loss="mse", seed=6)

    def run():
        state = init_network(NetworkSpec((3, 8, 1)), 7)
        return train(state, ds, ds, cfg)

    s1, o1 = run()
    s2, o2 = run()
    assert np.array_equal(s1.params, s2.params)
    assert o1.test_loss_curve == o2.test_loss_curve
    assert o1.to_dict() == o2.to_dict()


def test_min_is_lower_envelope_and_eval_cadence():
    ds = make_synthetic_regression(16, 2, seed=8)
    state = init_network(NetworkSpec((2, 8, 1)), 9)
    cfg = TrainConfig(epochs=7, eval_every=3, loss="mse", seed=10)
    _, outcome = train(state, ds, ds, cfg)
    assert outcome.eval_epochs == [0, 3, 6, 7]
    assert outcome.min_test_loss <= min(outcome.test_loss_curve)
    assert outcome.min_test_loss <= outcome.final_test_loss
    assert outcome.min_train_loss == min(outcome.train_loss_curve)


def test_classification_accuracy_range():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(30, 4))
    y = (x[:, 0] > 0).astype(int)
    ds = Dataset(x, y, "classification")
    state = init_network(NetworkSpec((4, 8, 2)), 12)
    cfg = TrainConfig(epochs=30, loss="softmax_cross_entropy", seed=13)
    _, outcome = train(state, ds, ds, cfg)
    assert outcome.max_accuracy is not None
    assert 0.0 <= outcome.max_accuracy <= 100.0
    assert outcome.max_accuracy > 60.0


def test_regression_has_no_accuracy():
    ds = make_synthetic_regression(10, 2, seed=14)
    state = init_network(NetworkSpec((2, 4, 1)), 15)
    _, outcome = train(state, ds, ds, TrainConfig(epochs=2, loss="mse", seed=16))
    assert outcome.max_accuracy is None


def test_divergence_flagged():
    ds = make_synthetic_regression(10, 2, noise=0.0, seed=17)
    state = init_network(NetworkSpec((2, 4, 1)), 18)
    cfg = TrainConfig(epochs=50, adam=AdamConfig(learning_rate=1e150), loss="mse", seed=19)
    _, outcome = train(state, ds, ds, cfg)
    assert outcome.diverged
    assert len(outcome.test_loss_curve) >= 1  # partial curves retained


def test_empty_test_set_rejected():
    ds = make_synthetic_regression(10, 2, seed=20)
    empty = Dataset(np.zeros((0, 2)), np.zeros((0, 1)), "regression")
    state = init_network(NetworkSpec((2, 4, 1)), 21)
    with pytest.raises(ValueError):
        train(state, ds, empty, TrainConfig(epochs=1, loss="mse"))


def test_linearized_exact_for_linear_mse():
    spec = NetworkSpec((4, 1), activation="linear")
    state = init_network(spec, 22)
    rng = np.random.default_rng(23)
    x, y = rng.normal(size=(9, 4)), rng.normal(size=(9, 1))
    for eta in (1e-2, 1e-4):
        check = linearized_step_check(state, x, y, "mse", eta=eta)
        assert check.rel_err < 1e-12


def test_linearized_first_order_for_relu():
    spec = NetworkSpec((8, 8, 1))
    state = init_network(spec, 24)
    rng = np.random.default_rng(25)
    x, y = rng.normal(size=(10, 8)), rng.normal(size=(10, 1))
    check = linearized_step_check(state, x, y, "mse", eta=1e-4)
    assert check.rel_err < 1e-2
    halved = linearized_step_check(state, x, y, "mse", eta=5e-5)
    assert halved.rel_err < check.rel_err


def test_linearized_degenerate_zero_step():
    spec = NetworkSpec((2, 1), activation="linear")
    state = init_network(spec, 26)
    x = np.random.default_rng(27).normal(size=(4, 2))
    y = np.asarray(state.params[:2] @ x.T + state.params[2]).reshape(-1, 1)
    check = linearized_step_check(state, x, y, "mse", eta=1e-4)
    assert np.isnan(check.rel_err)
