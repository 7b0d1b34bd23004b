"""Tests for Q(D), A(D), purity and unique majorities."""

import numpy as np
import pytest

from src.core import (
    Clustering,
    ConsistencyError,
    Dataset,
    DistanceMatrix,
    UndefinedMetricError,
    average_accuracy,
    majority_categories,
    pair_partition,
    purity,
    quality,
    quality_from_majorities,
    unique_majorities,
)


def _matrix(upper, k, kind="ba"):
    values = np.full((k, k), 0.5 if kind == "ba" else 0.0)
    rows, cols = np.triu_indices(k, 1)
    values[rows, cols] = upper
    values[cols, rows] = upper
    return DistanceMatrix(cluster_ids=tuple(range(k)), values=values, kind=kind)


def _brute_force_quality(matrix, majorities):
    k = matrix.k
    same, diff = [], []
    for i in range(k):
        for j in range(i + 1, k):
            (same if majorities[i] == majorities[j] else diff).append(matrix.values[i, j])
    favorable = 0.0
    for s in same:
        for d in diff:
            favorable += 1.0 if s < d else 0.5 if s == d else 0.0
    return favorable / (len(same) * len(diff))


class TestQuality:

    def test_worked_example(self):
        # pairs in row-major order: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
        # same-category pairs (0,1) and (2,3) hold 0.6 and 0.9
        matrix = _matrix([0.6, 0.7, 0.95, 0.7, 0.95, 0.9], 4)
        assert quality_from_majorities(matrix, [0, 0, 1, 1]) == pytest.approx(0.75, abs=1e-15)

    def test_perfect_separation(self):
        matrix = _matrix([0.55, 0.9, 0.9, 0.9, 0.9, 0.52], 4)
        assert quality_from_majorities(matrix, [0, 0, 1, 1]) == 1.0

    def test_ties_count_half(self):
        matrix = _matrix([0.7] * 6, 4)
        assert quality_from_majorities(matrix, [0, 0, 1, 1]) == 0.5

    def test_matches_brute_force_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            k = int(rng.integers(4, 13))
            majorities = rng.integers(3, size=k)
            upper = np.round(rng.uniform(0.5, 1.0, size=k * (k - 1) // 2), 1)
            matrix = _matrix(upper, k)
            assert average_accuracy(matrix) == pytest.approx(float(np.mean(upper)), abs=1e-15)
            try:
                expected = _brute_force_quality(matrix, majorities)
            except ZeroDivisionError:
                with pytest.raises(UndefinedMetricError):
                    quality_from_majorities(matrix, majorities)
                continue
            assert quality_from_majorities(matrix, majorities) == pytest.approx(expected, abs=1e-12)

    def test_works_for_euclidean_matrices(self):
        matrix = _matrix([1.0, 5.0, 6.0, 4.5, 7.0, 0.5], 4, kind="euclidean")
        assert quality_from_majorities(matrix, [0, 0, 1, 1]) == 1.0

    def test_undefined_without_same_pairs(self):
        with pytest.raises(UndefinedMetricError):
            quality_from_majorities(_matrix([0.8, 0.9, 0.7], 3), [0, 1, 2])

    def test_undefined_without_different_pairs(self):
        with pytest.raises(UndefinedMetricError):
            quality_from_majorities(_matrix([0.8, 0.9, 0.7], 3), [4, 4, 4])

    def test_cluster_ids_must_match(self, two_category_dataset, four_clusters):
        matrix = DistanceMatrix(cluster_ids=(0, 1, 2, 9), values=_matrix([0.6] * 6, 4).values)
        with pytest.raises(ConsistencyError):
            quality(matrix, four_clusters, two_category_dataset)

    def test_quality_uses_majorities(self, two_category_dataset, four_clusters):
        matrix = _matrix([0.6, 0.7, 0.95, 0.7, 0.95, 0.9], 4)
        assert quality(matrix, four_clusters, two_category_dataset) == pytest.approx(0.75)


class TestPairPartition:

    def test_row_major_order(self):
        partition = pair_partition([0, 1, 0])
        assert partition.same == ((0, 2),)
        assert partition.diff == ((0, 1), (1, 2))


class TestAverageAccuracy:

    def test_mean_of_upper_triangle(self):
        assert average_accuracy(_matrix([0.6, 0.8, 1.0], 3)) == pytest.approx(0.8)

    def test_two_clusters(self):
        assert average_accuracy(_matrix([0.73], 2)) == 0.73

    def test_single_cluster_is_undefined(self):
        single = DistanceMatrix(cluster_ids=(5,), values=np.array([[0.5]]))
        with pytest.raises(UndefinedMetricError):
            average_accuracy(single)


class TestPurity:

    def test_pure_clusters(self, two_category_dataset, four_clusters):
        assert purity(four_clusters, two_category_dataset) == 1.0
        assert unique_majorities(four_clusters, two_category_dataset) == 2

    def test_mixed_cluster(self):
        dataset = Dataset.from_arrays(np.zeros((6, 1)), labels=[0, 0, 1, 2, 2, 2])
        clustering = Clustering.from_members([[0, 1, 2], [3, 4, 5]])
        assert purity(clustering, dataset) == pytest.approx(5 / 6)
        assert unique_majorities(clustering, dataset) == 2

    def test_majority_tie_takes_smallest_label(self):
        dataset = Dataset.from_arrays(np.zeros((4, 1)), labels=[3, 1, 3, 1])
        clustering = Clustering.from_members([[0, 1, 2, 3]])
        assert majority_categories(clustering, dataset) == [1]
