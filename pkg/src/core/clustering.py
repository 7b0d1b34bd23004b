"""Clustering data model."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .dataset import UNLABELED, Dataset
from .errors import UsageError


@dataclass(frozen=True, eq=False)
class Cluster:
    """A cluster of observation ids.

    Attributes:
        id: Cluster id, unique within a clustering
        members: Sorted observation ids
    """

    id: int
    members: np.ndarray

    def __post_init__(self):
        members = np.sort(np.asarray(self.members, dtype=np.int64))
        object.__setattr__(self, "id", int(self.id))
        object.__setattr__(self, "members", members)

    @property
    def size(self) -> int:
        return int(self.members.shape[0])


@dataclass(frozen=True, eq=False)
class Clustering:
    """Disjoint, non-empty clusters over observation ids.

    Attributes:
        clusters: Clusters in their canonical order (index = position)
    """

    clusters: Tuple[Cluster, ...]
    _cluster_of: Dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        clusters = tuple(self.clusters)
        ids = [c.id for c in clusters]
        if len(set(ids)) != len(ids):
            raise UsageError(f"duplicate cluster ids in {ids}")

        cluster_of: Dict[int, int] = {}
        for c in clusters:
            if c.size == 0:
                raise UsageError(f"cluster {c.id} is empty")
            for obs_id in c.members.tolist():
                if obs_id in cluster_of:
                    raise UsageError(
                        f"observation {obs_id} is in clusters {cluster_of[obs_id]} and {c.id}"
                    )
                cluster_of[obs_id] = c.id
        object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "_cluster_of", cluster_of)

    @classmethod
    def from_members(cls, members: Sequence[Sequence[int]]) -> "Clustering":
        """Build a clustering with ids 0..k-1 from member lists."""
        return cls(tuple(Cluster(id=i, members=np.asarray(m)) for i, m in enumerate(members)))

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def ids(self) -> List[int]:
        return [c.id for c in self.clusters]

    @property
    def num_observations(self) -> int:
        return len(self._cluster_of)

    def cluster_of(self, obs_id: int) -> int:
        """Id of the cluster holding ``obs_id``."""
        return self._cluster_of[int(obs_id)]

    def check_against(self, dataset: Dataset) -> None:
        """Raise ``ConsistencyError`` if a member id is not in the dataset."""
        for c in self.clusters:
            dataset.rows(c.members)

    def merged(self, a: int, b: int) -> "Clustering":
        """Clustering with cluster ``b`` folded into ``a`` (positions a < b).

        The merged cluster keeps the id and position of ``a``.
        """
        if not (0 <= a < b < self.k):
            raise UsageError(f"cannot merge positions {a} and {b} of {self.k} clusters")
        clusters = list(self.clusters)
        clusters[a] = Cluster(
            id=clusters[a].id,
            members=np.concatenate([clusters[a].members, clusters[b].members]),
        )
        del clusters[b]
        return Clustering(tuple(clusters))

    def to_dict(self) -> dict:
        """Convert clustering to dictionary for serialization.

        Returns:
            ``{"clusters": [{"id": ..., "members": [...]}, ...]}``
        """
        return {
            "clusters": [
                {"id": c.id, "members": c.members.tolist()} for c in self.clusters
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Clustering":
        """Create clustering from dictionary.

        Args:
            data: Dictionary as produced by ``to_dict``

        Returns:
            Clustering instance
        """
        return cls(
            tuple(
                Cluster(id=entry["id"], members=np.asarray(entry["members"], dtype=np.int64))
                for entry in data["clusters"]
            )
        )


def majority_category(cluster: Cluster, dataset: Dataset) -> int:
    """Most frequent label among the cluster's members; ties go to the smallest.

    Raises:
        UsageError: If a member is unlabeled
    """
    if cluster.size == 0:
        raise UsageError(f"cluster {cluster.id} is empty")
    labels = dataset.labels_of(cluster.members)
    if np.any(labels == UNLABELED):
        raise UsageError(f"cluster {cluster.id} has unlabeled members")
    values, counts = np.unique(labels, return_counts=True)
    return int(values[np.argmax(counts)])


def majority_categories(clustering: Clustering, dataset: Dataset) -> List[int]:
    return [majority_category(c, dataset) for c in clustering.clusters]
