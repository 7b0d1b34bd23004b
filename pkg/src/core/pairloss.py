"""Pairwise balanced loss over ``k`` logits.

All k^2 pairwise classification tasks share one k-wide output layer: the
score that an observation belongs to cluster ``j`` rather than ``i`` is
``sigmoid(f_j - f_i)``. For an observation from cluster ``i`` only row
``i`` (pairs (i, j), class 0) and column ``i`` (pairs (j, i), class 1) of
the k x k score matrix carry a loss, so the matrix is never built.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.special import expit

from .errors import ClusterIndexError, DegenerateError, NumericError, ShapeError, UsageError
from .numcore import NetworkParams, backward, forward

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ClusterSizes:
    """Cluster sizes |S_1|..|S_k| used for the balancing weights.

    During training these are the sizes of the training splits.

    Attributes:
        sizes: Positive counts, one per cluster
    """

    sizes: np.ndarray

    def __post_init__(self):
        sizes = np.asarray(self.sizes, dtype=np.int64)
        if sizes.ndim != 1 or sizes.shape[0] < 2:
            raise DegenerateError(f"need at least 2 clusters, got sizes {sizes.tolist()}")
        if np.any(sizes < 1):
            raise UsageError(f"every cluster size must be >= 1, got {sizes.tolist()}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def k(self) -> int:
        return int(self.sizes.shape[0])

    def __getitem__(self, i: int) -> int:
        return int(self.sizes[i])


class PairScoreView:
    """Read-only view of all pairwise scores derived from one logit vector.

    ``view[i, j]`` is ``f(x)_ij``; ``view[i, j] + view[j, i] == 1`` and
    ``view[i, i] == 0.5``.
    """

    def __init__(self, logits: np.ndarray):
        self.logits = _check_logits(logits)

    @property
    def k(self) -> int:
        return int(self.logits.shape[0])

    def __getitem__(self, pair: Tuple[int, int]) -> float:
        i, j = pair
        return pair_score(self.logits, i, j)

    def row(self, i: int) -> np.ndarray:
        """Scores f(x)_i* for all j."""
        _check_index(i, self.k)
        return expit(self.logits - self.logits[i])

    def column(self, i: int) -> np.ndarray:
        """Scores f(x)_*i for all j."""
        _check_index(i, self.k)
        return expit(self.logits[i] - self.logits)


def _check_logits(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1:
        raise ShapeError(f"logits must be a vector, got shape {logits.shape}")
    bad = np.flatnonzero(~np.isfinite(logits))
    if bad.size:
        raise NumericError("non-finite logit", index=(int(bad[0]),))
    return logits


def _check_index(i: int, k: int) -> None:
    if not 0 <= i < k:
        raise ClusterIndexError(f"cluster index {i} outside 0..{k - 1}")


def pair_score(logits: np.ndarray, i: int, j: int) -> float:
    """Probability that the observation stems from cluster ``j`` rather than ``i``.

    Args:
        logits: Logit vector of length k
        i: Cluster index (class 0 of the pair)
        j: Cluster index (class 1 of the pair)

    Returns:
        sigmoid(logits[j] - logits[i])
    """
    logits = np.asarray(logits, dtype=np.float64)
    k = logits.shape[0]
    _check_index(i, k)
    _check_index(j, k)
    return float(expit(logits[j] - logits[i]))


def pair_scores(logits: np.ndarray) -> np.ndarray:
    """Full k x k score matrix, entry (i, j) = sigmoid(f_j - f_i).

    Only meant for inspection and small k; training never calls it.
    """
    logits = _check_logits(logits)
    return expit(logits[None, :] - logits[:, None])


def balanced_weight(sizes: ClusterSizes, i: int, j: int, y: int) -> float:
    """Cost-sensitive weight for the pair task (i, j).

    With s_i = |S_i| / (|S_i| + |S_j|) the weight is 1 / (2 s_i) for class
    0 and 1 / (2 s_j) for class 1, which makes the weighted loss estimate
    the balanced objective.

    Args:
        sizes: Cluster sizes
        i: Cluster providing class 0
        j: Cluster providing class 1
        y: Class label, 0 or 1

    Returns:
        Positive weight
    """
    _check_index(i, sizes.k)
    _check_index(j, sizes.k)
    if i == j:
        raise DegenerateError(f"pair ({i}, {j}) is not a classification task")
    if y not in (0, 1):
        raise UsageError(f"class label must be 0 or 1, got {y}")
    total = sizes[i] + sizes[j]
    share = sizes[i] / total if y == 0 else sizes[j] / total
    return 1.0 / (2.0 * share)


def _softplus(z: np.ndarray) -> np.ndarray:
    # -log(sigmoid(-z)), stable for large |z|
    return np.logaddexp(0.0, z)


def _pair_coefficients(sizes: np.ndarray, origin: np.ndarray) -> np.ndarray:
    """Per-observation, per-cluster factor multiplying softplus(f_j - f_i).

    Row r holds, for origin i = origin[r] and every j != i, the sum of the
    two balancing weights 1/(|S_i|+|S_j|) * [w_ij(y=0) + w_ji(y=1)]; entry j = i
    is zero. Both class terms share the margin f_j - f_i: cross-entropy of
    class 0 on sigmoid(f_j - f_i) and of class 1 on sigmoid(f_i - f_j) are
    both softplus(f_j - f_i).
    """
    n_i = sizes[origin][:, None].astype(np.float64)
    n_j = sizes[None, :].astype(np.float64)
    total = n_i + n_j
    pair_norm = 1.0 / total
    weight_class0 = 1.0 / (2.0 * (n_i / total))  # task (i, j), y = 0
    weight_class1 = 1.0 / (2.0 * (n_i / total))  # task (j, i), y = 1, s of i
    coeffs = pair_norm * (weight_class0 + weight_class1)
    coeffs[np.arange(origin.shape[0]), origin] = 0.0
    return coeffs


def _logit_loss_and_grad(
    logits: np.ndarray, origin: np.ndarray, sizes: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-observation losses (n,) and their gradients on the logits (n, k)."""
    rows = np.arange(origin.shape[0])
    margins = logits - logits[rows, origin][:, None]
    coeffs = _pair_coefficients(sizes, origin)
    losses = np.sum(coeffs * _softplus(margins), axis=1)
    grad = coeffs * expit(margins)
    grad[rows, origin] = -grad.sum(axis=1)
    return losses, grad


def observation_loss(
    logits: np.ndarray, origin: int, sizes: ClusterSizes
) -> Tuple[float, np.ndarray]:
    """Loss contributed by one observation and its gradient on the logits.

    Sum over j != i of 1/(|S_i|+|S_j|) * (l_bal^ij(0, f_ij) + l_bal^ji(1, f_ji))
    with binary cross-entropy as base loss; only logit ``i`` and the other
    logits are touched, no k x k matrix is formed.

    Args:
        logits: Logit vector f(x) of length k
        origin: Index ``i`` of the cluster the observation belongs to
        sizes: Cluster sizes

    Returns:
        Tuple of (loss, gradient with shape (k,))
    """
    logits = _check_logits(logits)
    if logits.shape[0] != sizes.k:
        raise ShapeError(f"{logits.shape[0]} logits for {sizes.k} clusters")
    _check_index(origin, sizes.k)
    losses, grad = _logit_loss_and_grad(
        logits[None, :], np.array([origin], dtype=np.int64), sizes.sizes
    )
    return float(losses[0]), grad[0]


def batch_logit_loss(
    logits: np.ndarray, origins: Sequence[int], sizes: ClusterSizes
) -> Tuple[float, np.ndarray]:
    """Normalized loss of a batch given its logits, and the logit gradient.

    Returns:
        Tuple of (L, dL/dlogits with shape (n, k))
    """
    logits = np.asarray(logits, dtype=np.float64)
    origins = np.asarray(origins, dtype=np.int64)
    if logits.ndim != 2 or logits.shape[1] != sizes.k:
        raise ShapeError(f"logits of shape {logits.shape} for {sizes.k} clusters")
    if origins.shape != (logits.shape[0],):
        raise ShapeError(f"{origins.shape[0]} origins for {logits.shape[0]} observations")
    if origins.shape[0] == 0:
        raise UsageError("batch must not be empty")
    if np.any(origins < 0) or np.any(origins >= sizes.k):
        raise ClusterIndexError(f"origins must lie in 0..{sizes.k - 1}")
    bad = np.argwhere(~np.isfinite(logits))
    if bad.size:
        raise NumericError("non-finite logit", index=tuple(int(v) for v in bad[0]))

    k = sizes.k
    norm = 1.0 / (k * k - k)
    losses, grad = _logit_loss_and_grad(logits, origins, sizes.sizes)
    return float(norm * losses.sum()), norm * grad


def total_loss(
    params: NetworkParams,
    features: np.ndarray,
    origins: Sequence[int],
    sizes: ClusterSizes,
) -> Tuple[float, NetworkParams]:
    """Total pairwise loss of a batch and its parameter gradient.

    L = 1/(k^2 - k) * sum over observations of ``observation_loss``. The
    pair normalization uses ``sizes`` (full training-split sizes), so the
    expected mini-batch loss matches the full-data loss up to the batch
    fraction.

    Args:
        params: Network parameters
        features: Batch of feature vectors (n, d)
        origins: Cluster index of each observation
        sizes: Cluster sizes

    Returns:
        Tuple of (L, gradient with the structure of ``params``)
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise UsageError("batch must be a non-empty (n, d) array")
    if params.output_dim != sizes.k:
        raise ShapeError(f"network has {params.output_dim} outputs for {sizes.k} clusters")
    logits = forward(params, features)
    loss, upstream = batch_logit_loss(logits, origins, sizes)
    return loss, backward(params, features, upstream)


def memory_estimate(k: int, h: int, bytes_per_param: int, use_trick: bool) -> int:
    """Bytes needed for the output layer weights.

    A separate output per ordered pair needs k^2 * h weights; the logit
    difference parameterization needs k * h.

    Args:
        k: Number of clusters
        h: Width of the last hidden layer
        bytes_per_param: Bytes per weight (4 for float32)
        use_trick: Whether the k-logit parameterization is used

    Returns:
        Byte count
    """
    if k < 1 or h < 1 or bytes_per_param < 1:
        raise UsageError(f"k, h and bytes_per_param must be positive (got {k}, {h}, {bytes_per_param})")
    outputs = k if use_trick else k * k
    return int(outputs) * int(h) * int(bytes_per_param)
