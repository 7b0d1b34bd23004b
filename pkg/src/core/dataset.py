"""Dataset data model."""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .errors import ConsistencyError, ShapeError, UsageError

# Label value stored for observations without a ground-truth category.
UNLABELED = -1


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observations as real-valued feature vectors with optional labels.

    Attributes:
        ids: Observation ids, unique non-negative integers, shape (n,)
        features: Feature matrix, shape (n, d), float64
        labels: Category per observation, shape (n,); ``UNLABELED`` (-1)
            marks a missing label
    """

    ids: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    _row_of: Dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        labels = np.asarray(self.labels, dtype=np.int64)

        if features.ndim != 2:
            raise ShapeError(f"features must be 2-D, got {features.ndim}-D")
        if ids.shape != (features.shape[0],) or labels.shape != ids.shape:
            raise ShapeError(
                f"ids {ids.shape}, features {features.shape} and labels "
                f"{labels.shape} disagree on the number of observations"
            )
        if not np.all(np.isfinite(features)):
            raise UsageError("features contain non-finite values")
        if np.any(labels < UNLABELED):
            raise UsageError("labels must be non-negative (or -1 for unlabeled)")

        row_of = {int(obs_id): row for row, obs_id in enumerate(ids)}
        if len(row_of) != len(ids):
            raise UsageError("observation ids must be unique")

        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_row_of", row_of)

    @classmethod
    def from_arrays(
        cls,
        features: np.ndarray,
        labels: Optional[Sequence[int]] = None,
        ids: Optional[Sequence[int]] = None,
    ) -> "Dataset":
        """Build a dataset, numbering observations 0..n-1 when ids are omitted.

        Args:
            features: Feature matrix (n, d) or vector (n,)
            labels: Optional labels; all unlabeled when omitted
            ids: Optional observation ids

        Returns:
            Dataset instance
        """
        features = np.asarray(features, dtype=np.float64)
        n = features.shape[0]
        if ids is None:
            ids = np.arange(n)
        if labels is None:
            labels = np.full(n, UNLABELED)
        return cls(ids=np.asarray(ids), features=features, labels=np.asarray(labels))

    @property
    def size(self) -> int:
        """Number of observations."""
        return int(self.ids.shape[0])

    @property
    def dim(self) -> int:
        """Feature dimension."""
        return int(self.features.shape[1])

    @property
    def has_labels(self) -> bool:
        """Whether every observation carries a label."""
        return bool(self.size > 0 and np.all(self.labels != UNLABELED))

    def rows(self, obs_ids: Sequence[int]) -> np.ndarray:
        """Map observation ids to row positions.

        Args:
            obs_ids: Observation ids

        Returns:
            Integer row indices

        Raises:
            ConsistencyError: If an id is not part of the dataset
        """
        try:
            return np.fromiter(
                (self._row_of[int(i)] for i in obs_ids), dtype=np.int64
            )
        except KeyError as e:
            raise ConsistencyError(f"unknown observation id {e.args[0]}") from None

    def features_of(self, obs_ids: Sequence[int]) -> np.ndarray:
        """Feature rows for the given observation ids."""
        return self.features[self.rows(obs_ids)]

    def labels_of(self, obs_ids: Sequence[int]) -> np.ndarray:
        """Labels for the given observation ids."""
        return self.labels[self.rows(obs_ids)]

    def with_features(self, features: np.ndarray) -> "Dataset":
        """Copy of the dataset with replaced features (same ids and labels)."""
        return Dataset(ids=self.ids.copy(), features=features, labels=self.labels.copy())

    def categories(self) -> np.ndarray:
        """Sorted distinct labels, excluding the unlabeled marker."""
        return np.unique(self.labels[self.labels != UNLABELED])
