"""Creating, corrupting and merging clusterings."""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .clustering import Cluster, Clustering, majority_categories, majority_category
from .dataset import Dataset
from .errors import ConsistencyError, UsageError
from .distance_matrix import KIND_EUCLIDEAN, DistanceMatrix
from .estimator import TrainConfig, estimate
from ..utils.rng import substream

logger = logging.getLogger(__name__)

# Signature of a merge backend: distances between the clusters of a clustering.
DistanceBackend = Callable[[Dataset, Clustering], DistanceMatrix]


def artificial_overcluster(dataset: Dataset, s: int, seed: int) -> Clustering:
    """Split every category into random clusters of exactly ``s`` observations.

    Each category is shuffled and cut into consecutive chunks; the remainder
    (fewer than ``s`` observations) is discarded.

    Args:
        dataset: Labeled dataset
        s: Cluster size
        seed: Run seed (``overcluster`` stream)

    Returns:
        Clustering with ids 0..k-1, categories in ascending label order
    """
    if s < 1:
        raise UsageError(f"s must be >= 1, got {s}")
    if not dataset.has_labels:
        raise UsageError("artificial over-clustering needs every observation labeled")

    rng = substream(seed, "overcluster")
    members: List[np.ndarray] = []
    discarded = 0
    for category in dataset.categories().tolist():
        ids = dataset.ids[dataset.labels == category]
        if ids.shape[0] < s:
            raise UsageError(
                f"category {category} has {ids.shape[0]} observations, fewer than s={s}"
            )
        ids = rng.permutation(ids)
        chunks = ids.shape[0] // s
        members.extend(ids[c * s:(c + 1) * s] for c in range(chunks))
        discarded += ids.shape[0] - chunks * s

    logger.info(f"Artificial over-clustering: {len(members)} clusters of {s}, {discarded} discarded")
    return Clustering.from_members(members)


def inject_noise(clustering: Clustering, dataset: Dataset, pi: float, seed: int) -> Clustering:
    """Move a fraction ``pi`` of observations to clusters of another category.

    floor(pi * N) observations are drawn globally at random; each is moved to
    a uniformly chosen cluster whose majority category (frozen before the
    pass) differs from the observation's label. A cluster emptied by the
    moves is dropped.

    Args:
        clustering: Clustering to corrupt
        dataset: Labeled dataset
        pi: Noise ratio in [0, 1)
        seed: Run seed (``noise`` stream)

    Returns:
        New clustering; the input is unchanged
    """
    if not 0.0 <= pi < 1.0:
        raise UsageError(f"pi must lie in [0, 1), got {pi}")
    total = clustering.num_observations
    count = int(np.floor(pi * total))
    if count == 0:
        return clustering

    majorities = np.asarray(majority_categories(clustering, dataset))
    if np.unique(majorities).shape[0] < 2:
        raise UsageError("noise injection needs at least 2 distinct majority categories")

    rng = substream(seed, "noise")
    all_ids = np.concatenate([c.members for c in clustering.clusters])
    chosen = rng.choice(all_ids, size=count, replace=False)
    labels = dataset.labels_of(chosen)

    position = {c.id: idx for idx, c in enumerate(clustering.clusters)}
    assignment = {int(o): position[clustering.cluster_of(o)] for o in all_ids.tolist()}
    for obs_id, label in zip(chosen.tolist(), labels.tolist()):
        targets = np.flatnonzero(majorities != label)
        targets = targets[targets != assignment[obs_id]]
        if targets.size == 0:
            raise UsageError(f"no cluster with a majority other than {label} for observation {obs_id}")
        assignment[obs_id] = int(targets[rng.integers(targets.size)])

    buckets: List[List[int]] = [[] for _ in clustering.clusters]
    for obs_id, idx in assignment.items():
        buckets[idx].append(obs_id)

    clusters = []
    for c, bucket in zip(clustering.clusters, buckets):
        if not bucket:
            logger.warning(f"Cluster {c.id} lost all members to noise injection and was dropped")
            continue
        clusters.append(Cluster(id=c.id, members=np.asarray(bucket)))
    logger.info(f"Moved {count} of {total} observations (pi={pi})")
    return Clustering(tuple(clusters))


def greedy_overcluster_indices(features: np.ndarray, s: int, k: int) -> List[np.ndarray]:
    """Dense fixed-size clusters by greedy nearest-neighbour selection.

    Every round builds, for each unassigned point, the candidate made of
    the point and its s-1 nearest unassigned neighbours, and keeps the
    candidate whose seed has the smallest average distance to those
    neighbours (the densest). Ties go to the lowest seed index; neighbour
    ties to the lowest index.

    Args:
        features: Feature matrix (n, d)
        s: Cluster size, >= 2
        k: Number of clusters

    Returns:
        k arrays of row indices, in selection order
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    if s < 2:
        raise UsageError(f"s must be >= 2, got {s}")
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if n < k * s:
        raise UsageError(f"need n >= k*s, got n={n}, k={k}, s={s}")

    distances = cdist(features, features)
    unassigned = np.arange(n)
    selected: List[np.ndarray] = []
    for round_idx in range(k):
        sub = distances[np.ix_(unassigned, unassigned)]
        np.fill_diagonal(sub, np.inf)
        neighbours = np.argsort(sub, axis=1, kind="stable")[:, :s - 1]
        density = np.take_along_axis(sub, neighbours, axis=1).mean(axis=1)
        best = int(np.argmin(density))
        rows = np.concatenate([[best], neighbours[best]])
        selected.append(unassigned[rows])
        logger.debug(f"Round {round_idx}: seed {unassigned[best]} with average distance {density[best]:.4f}")
        unassigned = np.delete(unassigned, rows)
    return selected


def greedy_overcluster(dataset: Dataset, s: int, k: int) -> Clustering:
    """Greedy dense over-clustering of a dataset's features; cluster ids 0..k-1."""
    groups = greedy_overcluster_indices(dataset.features, s, k)
    logger.info(f"Greedy over-clustering: {k} clusters of {s}, {dataset.size - k * s} left unassigned")
    return Clustering.from_members([dataset.ids[g] for g in groups])


def euclidean_baseline(dataset: Dataset, clustering: Clustering) -> DistanceMatrix:
    """Average Euclidean distance between the members of every cluster pair."""
    clustering.check_against(dataset)
    feats = [dataset.features_of(c.members) for c in clustering.clusters]
    k = clustering.k
    values = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            values[i, j] = values[j, i] = cdist(feats[i], feats[j]).mean()
    return DistanceMatrix(cluster_ids=tuple(clustering.ids), values=values, kind=KIND_EUCLIDEAN)


def euclidean_backend() -> DistanceBackend:
    """Merge backend using ``euclidean_baseline``."""
    return euclidean_baseline


def tvd_backend(config: TrainConfig) -> DistanceBackend:
    """Merge backend that retrains the pairwise network from scratch per call."""

    def backend(dataset: Dataset, clustering: Clustering) -> DistanceMatrix:
        return estimate(dataset, clustering, config).matrix

    return backend


@dataclass(frozen=True)
class MergeStep:
    """One merge decision.

    Attributes:
        step: 1-based step number
        a: Id of the cluster that absorbs ``b``
        b: Id of the absorbed cluster
        distance: Distance between ``a`` and ``b`` used for the decision
        majority_a: Majority category of ``a`` at merge time (None if unlabeled)
        majority_b: Majority category of ``b`` at merge time (None if unlabeled)
        correct: Whether both majorities agree (None if unlabeled)
    """

    step: int
    a: int
    b: int
    distance: float
    majority_a: Optional[int] = None
    majority_b: Optional[int] = None
    correct: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "a": self.a,
            "b": self.b,
            "distance": self.distance,
            "majority_a": self.majority_a,
            "majority_b": self.majority_b,
            "correct": self.correct,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MergeStep":
        return cls(
            step=int(data["step"]),
            a=int(data["a"]),
            b=int(data["b"]),
            distance=float(data["distance"]),
            majority_a=None if data.get("majority_a") is None else int(data["majority_a"]),
            majority_b=None if data.get("majority_b") is None else int(data["majority_b"]),
            correct=None if data.get("correct") is None else bool(data["correct"]),
        )


@dataclass(frozen=True)
class MergeTrace:
    """Ordered merge decisions."""

    steps: Tuple[MergeStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)


def closest_pair(matrix: DistanceMatrix) -> Tuple[int, int]:
    """Off-diagonal argmin (i < j); ties go to the lexicographically smallest pair."""
    k = matrix.k
    upper = np.triu_indices(k, 1)
    # row-major order of triu_indices makes argmin's first hit the smallest pair
    best = int(np.argmin(matrix.values[upper]))
    return int(upper[0][best]), int(upper[1][best])


def hierarchical_merge(
    dataset: Dataset,
    clustering: Clustering,
    backend: DistanceBackend,
    steps: int,
) -> Tuple[MergeTrace, Clustering]:
    """Merge the closest pair ``steps`` times, recomputing distances each time.

    Args:
        dataset: Dataset the clustering refers to
        clustering: Starting clustering
        backend: Distance function, called once per step on the current clustering
        steps: Number of merges, at most k-1

    Returns:
        Tuple of (trace, final clustering)
    """
    if steps < 0 or steps > clustering.k - 1:
        raise UsageError(f"steps must lie in 0..{clustering.k - 1}, got {steps}")
    clustering.check_against(dataset)
    labeled = dataset.has_labels

    current = clustering
    records: List[MergeStep] = []
    for step in range(1, steps + 1):
        matrix = backend(dataset, current)
        if list(matrix.cluster_ids) != current.ids:
            raise ConsistencyError("backend returned distances for different clusters")
        a, b = closest_pair(matrix)
        cluster_a, cluster_b = current.clusters[a], current.clusters[b]
        maj_a = maj_b = correct = None
        if labeled:
            maj_a = majority_category(cluster_a, dataset)
            maj_b = majority_category(cluster_b, dataset)
            correct = maj_a == maj_b
        records.append(
            MergeStep(
                step=step,
                a=cluster_a.id,
                b=cluster_b.id,
                distance=float(matrix.values[a, b]),
                majority_a=maj_a,
                majority_b=maj_b,
                correct=correct,
            )
        )
        logger.info(
            f"Merge {step}: clusters {cluster_a.id} + {cluster_b.id} "
            f"at distance {matrix.values[a, b]:.4f} (correct={correct})"
        )
        current = current.merged(a, b)
    return MergeTrace(steps=tuple(records)), current


def correct_merges(trace: MergeTrace, upto: int) -> int:
    """Number of correct merges among the first ``upto`` steps."""
    if upto < 0 or upto > len(trace):
        raise UsageError(f"upto must lie in 0..{len(trace)}, got {upto}")
    return sum(1 for step in trace.steps[:upto] if step.correct)


def cm_curve(trace: MergeTrace) -> List[int]:
    """CM(1), ..., CM(len(trace))."""
    return [correct_merges(trace, k) for k in range(1, len(trace) + 1)]
