"""Distance matrix between the clusters of a clustering."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ShapeError, UsageError

# Balanced accuracies: entries in [0, 1], diagonal 1/2.
KIND_BA = "ba"
# Average Euclidean distances: entries >= 0, diagonal 0.
KIND_EUCLIDEAN = "euclidean"

_DIAGONAL = {KIND_BA: 0.5, KIND_EUCLIDEAN: 0.0}


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric k x k matrix indexed by cluster position.

    Attributes:
        cluster_ids: Cluster id of each row/column
        values: Matrix entries (k, k)
        kind: ``"ba"`` or ``"euclidean"``
    """

    cluster_ids: Tuple[int, ...]
    values: np.ndarray
    kind: str = KIND_BA

    def __post_init__(self):
        if self.kind not in _DIAGONAL:
            raise UsageError(f"unknown distance kind '{self.kind}'")
        ids = tuple(int(i) for i in self.cluster_ids)
        values = np.array(self.values, dtype=np.float64)
        k = len(ids)
        if values.shape != (k, k):
            raise ShapeError(f"matrix of shape {values.shape} for {k} clusters")
        if not np.all(np.isfinite(values)):
            raise UsageError("distance matrix has non-finite entries")
        if not np.array_equal(values, values.T):
            raise UsageError("distance matrix is not symmetric")
        if not np.all(np.diag(values) == _DIAGONAL[self.kind]):
            raise UsageError(f"diagonal of a '{self.kind}' matrix must be {_DIAGONAL[self.kind]}")
        if self.kind == KIND_BA and (values.min() < 0.0 or values.max() > 1.0):
            raise UsageError("balanced accuracies must lie in [0, 1]")
        if self.kind == KIND_EUCLIDEAN and values.min() < 0.0:
            raise UsageError("distances must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "cluster_ids", ids)
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return len(self.cluster_ids)

    def upper_triangle(self) -> np.ndarray:
        """Entries (i, j) with i < j in row-major order."""
        return self.values[np.triu_indices(self.k, 1)]

    def permuted(self, order) -> "DistanceMatrix":
        """Matrix with rows and columns reordered by ``order`` (positions)."""
        order = np.asarray(order, dtype=np.int64)
        return DistanceMatrix(
            cluster_ids=tuple(self.cluster_ids[i] for i in order),
            values=self.values[np.ix_(order, order)],
            kind=self.kind,
        )

    def to_dict(self) -> dict:
        """Serializable form: ``{"cluster_ids": [...], "<kind>": [[...]]}``."""
        return {
            "cluster_ids": list(self.cluster_ids),
            self.kind: self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DistanceMatrix":
        kind = KIND_BA if KIND_BA in data else KIND_EUCLIDEAN
        return cls(cluster_ids=tuple(data["cluster_ids"]), values=np.asarray(data[kind]), kind=kind)
