import copy
import json

import numpy as np
import pytest

from ntklens.datasets import Dataset, make_synthetic_clusters
from ntklens.network import NetworkSpec, NetworkState, forward, init_network
from ntklens.seeding import derive_seed
from ntklens.selection import (
    RndConfig,
    SelectionResult,
    dump_selection_json,
    rnd_distance,
    select_random,
    select_rnd,
)

EMBED = NetworkSpec((2, 16, 8), "relu", "ntk")


def constant_net(values):
    """Single linear layer with zero weights; biases pin the embedding."""
    values = np.asarray(values, dtype=np.float64)
    spec = NetworkSpec((1, values.size), activation="linear")
    params = np.concatenate([np.zeros(values.size), values])
    return NetworkState(spec, params)


def test_distance_zero_for_copied_predictor():
    target = init_network(EMBED, 0)
    predictor = copy.deepcopy(target)
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert rnd_distance(target, predictor, rng.normal(size=2)) == 0.0


def test_distance_direct_formula():
    target = constant_net([1.0, 2.0])
    predictor = constant_net([1.0, 0.0])
    assert rnd_distance(target, predictor, np.array([0.3])) == pytest.approx(2.0, rel=1e-15)


def test_distance_matches_recomputation():
    target = init_network(EMBED, 1)
    predictor = init_network(EMBED, 2)
    point = np.random.default_rng(3).normal(size=2)
    f = forward(target, point[None, :])[0]
    g = forward(predictor, point[None, :])[0]
    assert rnd_distance(target, predictor, point) == pytest.approx(float(np.mean((f - g) ** 2)), rel=1e-14)


def duplicate_pool():
    # two identical points and one far-away distinct point
    return Dataset(
        np.array([[0.0, 0.0], [0.0, 0.0], [4.0, 4.0]]),
        np.array([0, 0, 1]),
        "classification",
    )


def test_rnd_skips_learned_duplicate():
    pool = duplicate_pool()
    cfg = RndConfig(embedding_spec=EMBED, target_size=2, retrain_epochs=300, retrain_lr=1e-2, seed=4)
    result = select_rnd(pool, cfg)
    chosen_points = pool.inputs[result.chosen_indices]
    # one duplicate and the distinct point, never both duplicates
    assert not np.array_equal(chosen_points[0], chosen_points[1])


def test_rnd_full_pool_is_permutation():
    pool = make_synthetic_clusters(3, 3, 8.0, 0.3, seed=5)
    cfg = RndConfig(embedding_spec=EMBED, target_size=9, retrain_epochs=2, retrain_lr=1e-3, seed=6)
    result = select_rnd(pool, cfg)
    assert sorted(result.chosen_indices) == list(range(9))
    assert len(result.step_distances) == 9


def test_rnd_deterministic():
    pool = make_synthetic_clusters(3, 4, 8.0, 0.3, seed=7)
    cfg = RndConfig(embedding_spec=EMBED, target_size=5, retrain_epochs=20, retrain_lr=1e-2, seed=8)
    a = select_rnd(pool, cfg)
    b = select_rnd(pool, cfg)
    assert a.chosen_indices == b.chosen_indices
    assert a.step_distances == b.step_distances


def test_rnd_identical_networks_degrade_to_index_order():
    pool = make_synthetic_clusters(3, 4, 8.0, 0.3, seed=9)
    target = init_network(EMBED, 10)
    predictor = copy.deepcopy(target)
    cfg = RndConfig(embedding_spec=EMBED, target_size=4, retrain_epochs=5, retrain_lr=1e-3, seed=0)
    result = select_rnd(pool, cfg, target=target, predictor=predictor)
    assert result.chosen_indices == [0, 1, 2, 3]
    assert result.step_distances == [0.0, 0.0, 0.0, 0.0]


def test_rnd_first_distance_matches_initial_networks():
    pool = make_synthetic_clusters(3, 4, 8.0, 0.3, seed=11)
    cfg = RndConfig(embedding_spec=EMBED, target_size=2, retrain_epochs=10, retrain_lr=1e-2, seed=12)
    result = select_rnd(pool, cfg)
    # rebuild the seeded networks and verify the first recorded distance
    target = init_network(EMBED, derive_seed(cfg.seed, 0))
    predictor = init_network(EMBED, derive_seed(cfg.seed, 1))
    d0 = np.array([rnd_distance(target, predictor, x) for x in pool.inputs])
    assert result.chosen_indices[0] == int(np.argmax(d0))
    assert result.step_distances[0] == pytest.approx(float(d0.max()), rel=1e-14)


def test_rnd_threshold_mode_stops_early():
    pool = duplicate_pool()
    cfg = RndConfig(embedding_spec=EMBED, target_size=3, retrain_epochs=500, retrain_lr=2e-2, seed=13)
    full = select_rnd(pool, cfg)
    # a threshold above the final winning distance cuts selection short
    cut = select_rnd(pool, cfg, stop_distance=full.step_distances[-1] + 1e-12)
    assert len(cut.chosen_indices) < 3
    assert cut.chosen_indices == full.chosen_indices[: len(cut.chosen_indices)]


def test_rnd_size_validation():
    pool = duplicate_pool()
    cfg = RndConfig(embedding_spec=EMBED, target_size=5, seed=0)
    with pytest.raises(ValueError):
        select_rnd(pool, cfg)
    with pytest.raises(ValueError):
        select_random(pool, 5, seed=0)


def test_rnd_cluster_coverage_sanity():
    wins = 0
    for seed in range(10):
        ds = make_synthetic_clusters(4, 10, 10.0, 0.1, seed=derive_seed(seed, 50))
        cfg = RndConfig(embedding_spec=EMBED, target_size=4, retrain_epochs=100, retrain_lr=1e-2, seed=seed)
        result = select_rnd(ds, cfg)
        clusters = {int(ds.targets[i]) for i in result.chosen_indices}
        wins += len(clusters) == 4
    assert wins >= 9


def test_random_full_pool_is_permutation():
    pool = duplicate_pool()
    result = select_random(pool, 3, seed=1)
    assert sorted(result.chosen_indices) == [0, 1, 2]
    assert result.method == "random"


def test_random_deterministic():
    pool = make_synthetic_clusters(3, 5, 8.0, 0.3, seed=2)
    assert select_random(pool, 6, seed=3).chosen_indices == select_random(pool, 6, seed=3).chosen_indices


def test_random_uniformity_monte_carlo():
    pool = np.zeros((10, 2))
    hits = sum(0 in select_random(pool, 1, seed=s).chosen_indices for s in range(10_000))
    assert abs(hits / 10_000 - 0.1) < 0.01


def test_selection_result_validation():
    with pytest.raises(ValueError):
        SelectionResult([1, 1], [0.0, 0.0], "rnd")
    with pytest.raises(ValueError):
        SelectionResult([1, 2], [0.0, -1.0], "rnd")


def test_selection_json_dump(tmp_path):
    pool = duplicate_pool()
    cfg = RndConfig(embedding_spec=EMBED, target_size=2, retrain_epochs=5, retrain_lr=1e-2, seed=14)
    result = select_rnd(pool, cfg)
    path = tmp_path / "sel.json"
    dump_selection_json(result, cfg, path)
    payload = json.loads(path.read_text())
    assert payload["method"] == "rnd"
    assert payload["chosen_indices"] == result.chosen_indices
    assert payload["config"]["target_size"] == 2
