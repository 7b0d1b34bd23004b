"""Tests for holdout splitting, the validation matrix and training."""

import numpy as np
import pytest

from src.core import (
    Clustering,
    Dataset,
    DegenerateError,
    TrainConfig,
    UnsplittableClusterError,
    UsageError,
    average_accuracy,
    balanced_accuracy,
    estimate,
    forward,
    init_network,
    pair_score,
    select_config,
    split,
    validation_matrix,
)
from src.helpers import discrete_mixture

FAST = dict(hidden=(16,), lr=1e-2, batch_size=32)


def _two_masses(per_cluster=50):
    features = np.concatenate([np.zeros(per_cluster), np.full(per_cluster, 10.0)]).reshape(-1, 1)
    dataset = Dataset.from_arrays(features, labels=np.repeat([0, 1], per_cluster))
    clustering = Clustering.from_members([range(per_cluster), range(per_cluster, 2 * per_cluster)])
    return dataset, clustering


def _three_blobs(per_cluster=60, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]])
    features = np.concatenate([rng.normal(c, 0.5, size=(per_cluster, 2)) for c in centers])
    dataset = Dataset.from_arrays(features, labels=np.repeat([0, 1, 2], per_cluster))
    clustering = Clustering.from_members([range(i * per_cluster, (i + 1) * per_cluster) for i in range(3)])
    return dataset, clustering


class TestTrainConfig:

    def test_defaults(self):
        config = TrainConfig()
        assert config.epochs == 200
        assert config.patience == 10
        assert config.train_fraction == pytest.approx(0.7)
        assert config.hidden == (128, 64)

    @pytest.mark.parametrize("field, value", [
        ("epochs", 0), ("batch_size", 0), ("lr", 0.0), ("val_fraction", 1.0), ("patience", 0), ("seed", -1),
    ])
    def test_invalid_fields(self, field, value):
        with pytest.raises(UsageError):
            TrainConfig(**{field: value})

    def test_dict_round_trip_ignores_unknown_keys(self):
        config = TrainConfig(lr=0.01, hidden=(8, 4))
        data = dict(config.to_dict(), comment="ignored")
        assert TrainConfig.from_dict(data) == config


class TestSplit:

    def test_half_split(self):
        plan = split(Clustering.from_members([range(10)]), 0.5, seed=0)
        assert (plan.train[0].size, plan.validation[0].size) == (5, 5)

    def test_seventy_thirty(self):
        plan = split(Clustering.from_members([range(100), range(100, 110)]), 0.7, seed=0)
        assert (plan.train[0].size, plan.validation[0].size) == (70, 30)
        assert (plan.train[1].size, plan.validation[1].size) == (7, 3)

    def test_both_sides_keep_a_member(self):
        plan = split(Clustering.from_members([range(2), range(2, 5)]), 0.95, seed=0)
        assert [v.size for v in plan.validation] == [1, 1]
        plan = split(Clustering.from_members([range(2), range(2, 5)]), 0.05, seed=0)
        assert [t.size for t in plan.train] == [1, 1]

    def test_partition_is_disjoint_and_complete(self):
        clustering = Clustering.from_members([range(13), range(13, 40)])
        plan = split(clustering, 0.7, seed=3)
        for cluster, train, val in zip(clustering.clusters, plan.train, plan.validation):
            assert not set(train.tolist()) & set(val.tolist())
            assert sorted(train.tolist() + val.tolist()) == cluster.members.tolist()

    def test_deterministic(self):
        clustering = Clustering.from_members([range(20), range(20, 50)])
        a, b = split(clustering, 0.7, seed=5), split(clustering, 0.7, seed=5)
        for x, y in zip(a.train + a.validation, b.train + b.validation):
            np.testing.assert_array_equal(x, y)

    def test_singleton_cluster(self):
        with pytest.raises(UnsplittableClusterError) as excinfo:
            split(Clustering.from_members([range(5), [5]]), 0.7, seed=0)
        assert excinfo.value.cluster_id == 1


class TestBalancedAccuracy:

    def test_perfect(self):
        assert balanced_accuracy([0, 0, 0], [1, 1]) == 1.0

    def test_constant_predictor(self):
        assert balanced_accuracy([1, 1, 1], [1, 1, 1, 1]) == 0.5

    def test_unequal_sides(self):
        assert balanced_accuracy([0, 1], [1, 1, 1, 0]) == pytest.approx(0.625)

    def test_empty_side(self):
        with pytest.raises(UsageError):
            balanced_accuracy([], [1])


class TestValidationMatrix:

    def test_symmetric_with_half_diagonal(self):
        rng = np.random.default_rng(0)
        params = init_network(3, 4, hidden=(5,), rng=rng)
        feats = [rng.standard_normal((n, 3)) for n in (4, 6, 5, 7)]
        matrix = validation_matrix(params, feats, [10, 11, 12, 13])
        np.testing.assert_array_equal(matrix.values, matrix.values.T)
        np.testing.assert_array_equal(np.diag(matrix.values), 0.5)
        assert matrix.cluster_ids == (10, 11, 12, 13)

    def test_entry_is_balanced_accuracy_of_thresholded_scores(self):
        rng = np.random.default_rng(1)
        params = init_network(2, 3, hidden=(4,), rng=rng)
        feats = [rng.standard_normal((n, 2)) for n in (5, 8, 6)]
        matrix = validation_matrix(params, feats, [0, 1, 2])

        for i in range(3):
            for j in range(i + 1, 3):
                pred_i = [int(pair_score(forward(params, x), i, j) >= 0.5) for x in feats[i]]
                pred_j = [int(pair_score(forward(params, x), i, j) >= 0.5) for x in feats[j]]
                assert matrix.values[i, j] == pytest.approx(balanced_accuracy(pred_i, pred_j), abs=1e-15)


class TestEstimate:

    def test_well_separated_masses(self):
        dataset, clustering = _two_masses()
        result = estimate(dataset, clustering, TrainConfig(epochs=40, patience=40, **FAST))
        assert result.matrix.values[0, 1] == pytest.approx(1.0, abs=0.02)

    def test_matrix_invariants_and_history(self):
        dataset, clustering = _three_blobs()
        result = estimate(dataset, clustering, TrainConfig(epochs=15, patience=3, **FAST))
        values = result.matrix.values
        np.testing.assert_array_equal(values, values.T)
        np.testing.assert_array_equal(np.diag(values), 0.5)
        assert [r.epoch for r in result.history] == list(range(1, len(result.history) + 1))
        assert 1 <= result.best_epoch <= len(result.history)
        assert result.best_average_accuracy == max(r.average_accuracy for r in result.history)
        assert average_accuracy(result.matrix) == result.best_average_accuracy

    def test_early_stopping_respects_patience(self):
        dataset, clustering = _two_masses()
        result = estimate(dataset, clustering, TrainConfig(epochs=200, patience=2, **FAST))
        assert len(result.history) <= result.best_epoch + 2

    def test_callback_sees_every_epoch(self):
        dataset, clustering = _two_masses(20)
        seen = []
        result = estimate(dataset, clustering, TrainConfig(epochs=5, patience=5, **FAST), on_epoch=seen.append)
        assert [r.epoch for r in seen] == [1, 2, 3, 4, 5]
        assert len(result.history) == 5

    def test_same_seed_reproduces(self):
        dataset, clustering = _three_blobs(30)
        config = TrainConfig(epochs=5, patience=5, seed=4, **FAST)
        a, b = estimate(dataset, clustering, config), estimate(dataset, clustering, config)
        np.testing.assert_array_equal(a.matrix.values, b.matrix.values)
        np.testing.assert_array_equal(a.params.to_flat(), b.params.to_flat())

    def test_validation_features_never_touch_training(self):
        dataset, clustering = _three_blobs(30)
        config = TrainConfig(epochs=6, patience=6, seed=2, **FAST)
        plan = split(clustering, config.train_fraction, config.seed)
        held_out = np.concatenate(plan.validation)

        features = dataset.features.copy()
        features[dataset.rows(held_out)] += 100.0
        perturbed = dataset.with_features(features)

        a = estimate(dataset, clustering, config)
        b = estimate(perturbed, clustering, config)
        np.testing.assert_array_equal(a.params.to_flat(), b.params.to_flat())

    def test_single_cluster_is_degenerate(self):
        dataset, _ = _two_masses(10)
        with pytest.raises(DegenerateError):
            estimate(dataset, Clustering.from_members([range(20)]), TrainConfig(epochs=1))

    def test_singleton_cluster_is_unsplittable(self):
        dataset, _ = _two_masses(10)
        with pytest.raises(UnsplittableClusterError):
            estimate(dataset, Clustering.from_members([range(19), [19]]), TrainConfig(epochs=1))


class TestSelectConfig:

    def test_picks_highest_average_accuracy(self):
        dataset, clustering = _three_blobs(30)
        configs = [
            TrainConfig(epochs=3, patience=3, hidden=(4,), lr=1e-6),
            TrainConfig(epochs=10, patience=10, **FAST),
        ]
        selection = select_config(dataset, clustering, configs)
        scores = [r.best_average_accuracy for r in selection.results]
        assert selection.best_index == int(np.argmax(scores))
        assert selection.best_config is configs[selection.best_index]

    def test_needs_candidates(self):
        dataset, clustering = _two_masses(10)
        with pytest.raises(UsageError):
            select_config(dataset, clustering, [])


@pytest.mark.slow
class TestEstimateStatistics:

    def test_identical_distributions_give_chance(self):
        rng = np.random.default_rng(0)
        features = rng.standard_normal((6000, 1))
        dataset = Dataset.from_arrays(features)
        clustering = Clustering.from_members([range(3000), range(3000, 6000)])
        result = estimate(dataset, clustering, TrainConfig(epochs=20, patience=3, hidden=(16,), batch_size=128))
        assert result.matrix.values[0, 1] == pytest.approx(0.5, abs=0.05)

    def test_two_symbol_distributions(self):
        dataset, _ = discrete_mixture([[0.8, 0.2], [0.2, 0.8]], 2000, seed=0)
        clustering = Clustering.from_members([range(2000), range(2000, 4000)])
        result = estimate(dataset, clustering, TrainConfig(epochs=30, patience=5, hidden=(16,), batch_size=128))
        assert result.matrix.values[0, 1] == pytest.approx(0.8, abs=0.05)

    def test_cluster_order_permutes_matrix(self):
        dataset, clustering = _three_blobs(80, seed=1)
        config = TrainConfig(epochs=30, patience=30, **FAST)
        base = estimate(dataset, clustering, config).matrix

        order = [2, 0, 1]
        reordered = Clustering(tuple(clustering.clusters[i] for i in order))
        permuted = estimate(dataset, reordered, config).matrix
        assert permuted.cluster_ids == tuple(clustering.ids[i] for i in order)
        np.testing.assert_allclose(permuted.values, base.permuted(order).values, atol=0.05)
