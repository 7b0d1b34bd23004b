"""Evaluation of a distance matrix against ground-truth categories."""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from .clustering import Clustering, majority_categories
from .dataset import UNLABELED, Dataset
from .distance_matrix import DistanceMatrix
from .errors import ConsistencyError, UndefinedMetricError, UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairPartition:
    """Cluster pairs (i < j, by position) split by majority agreement.

    Attributes:
        same: Pairs whose majority categories are equal
        diff: All other pairs
    """

    same: Tuple[Tuple[int, int], ...]
    diff: Tuple[Tuple[int, int], ...]


def pair_partition(majorities: Sequence[int]) -> PairPartition:
    """Partition all pairs i < j by whether ``majorities[i] == majorities[j]``."""
    same, diff = [], []
    k = len(majorities)
    for i in range(k):
        for j in range(i + 1, k):
            (same if majorities[i] == majorities[j] else diff).append((i, j))
    return PairPartition(same=tuple(same), diff=tuple(diff))


def quality_from_majorities(matrix: DistanceMatrix, majorities: Sequence[int]) -> float:
    """P(D_same < D_diff) with ties counted 1/2, i.e. the AUROC of the pair split.

    Computed from mid-ranks (Mann-Whitney U), which equals exhaustive pair
    counting.
    """
    if len(majorities) != matrix.k:
        raise ConsistencyError(f"{len(majorities)} majorities for a {matrix.k}x{matrix.k} matrix")
    partition = pair_partition(majorities)
    if not partition.same or not partition.diff:
        raise UndefinedMetricError(
            f"quality needs same- and different-category pairs "
            f"(got {len(partition.same)} and {len(partition.diff)})"
        )
    same = np.array([matrix.values[i, j] for i, j in partition.same])
    diff = np.array([matrix.values[i, j] for i, j in partition.diff])
    ranks = rankdata(np.concatenate([diff, same]))
    n_diff, n_same = diff.shape[0], same.shape[0]
    u_diff = ranks[:n_diff].sum() - n_diff * (n_diff + 1) / 2.0
    return float(u_diff / (n_diff * n_same))


def quality(matrix: DistanceMatrix, clustering: Clustering, dataset: Dataset) -> float:
    """Q(D): probability that a same-category pair is closer than a different one.

    Args:
        matrix: Distance matrix over ``clustering``'s clusters
        clustering: Clustering the matrix refers to
        dataset: Labeled dataset

    Returns:
        Q in [0, 1]
    """
    if list(matrix.cluster_ids) != clustering.ids:
        raise ConsistencyError("distance matrix and clustering list different cluster ids")
    return quality_from_majorities(matrix, majority_categories(clustering, dataset))


def average_accuracy(matrix: DistanceMatrix) -> float:
    """A(D): mean of the upper triangle."""
    if matrix.k < 2:
        raise UndefinedMetricError(f"average accuracy needs k >= 2, got {matrix.k}")
    return float(matrix.upper_triangle().mean())


def purity(clustering: Clustering, dataset: Dataset) -> float:
    """Fraction of observations carrying their cluster's majority category."""
    majority_total = 0
    for c in clustering.clusters:
        labels = dataset.labels_of(c.members)
        if np.any(labels == UNLABELED):
            raise UsageError(f"cluster {c.id} has unlabeled members")
        majority_total += int(np.unique(labels, return_counts=True)[1].max())
    return majority_total / clustering.num_observations


def unique_majorities(clustering: Clustering, dataset: Dataset) -> int:
    """Number of distinct majority categories."""
    return len(set(majority_categories(clustering, dataset)))
