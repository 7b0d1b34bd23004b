"""Holdout estimation of the balanced-accuracy matrix between all clusters.

Each cluster is split into a training and a validation part. One network
with k outputs is trained on the training parts with the pairwise balanced
loss; after every epoch the balanced accuracy of every pair is measured on
the validation parts. Training stops once the average accuracy A(D) has not
improved for ``patience`` epochs, and the matrix of the best epoch is kept.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .clustering import Clustering
from .dataset import Dataset
from .distance_matrix import KIND_BA, DistanceMatrix
from .errors import DegenerateError, UnsplittableClusterError, UsageError
from .metrics import average_accuracy
from .numcore import DEFAULT_HIDDEN, AdamState, NetworkParams, adam_step, forward, init_network
from .pairloss import ClusterSizes, total_loss
from ..utils.rng import substream

logger = logging.getLogger(__name__)

# Guards floor(fraction * size) against representation error (0.7 * 10 -> 7).
_FLOOR_SLACK = 1e-9


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters.

    Attributes:
        epochs: Maximum number of epochs
        batch_size: Observations per gradient step
        lr: Adam step size
        beta1: Adam first-moment decay
        beta2: Adam second-moment decay
        eps: Adam denominator guard
        val_fraction: Share of each cluster held out for validation
        patience: Epochs without A(D) improvement before stopping
        seed: Run seed
        hidden: Hidden layer widths
        standardize: Z-score inputs with training-split statistics
    """

    epochs: int = 200
    batch_size: int = 64
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    val_fraction: float = 0.3
    patience: int = 10
    seed: int = 0
    hidden: Tuple[int, ...] = DEFAULT_HIDDEN
    standardize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        self.validate()

    def validate(self) -> None:
        """Raise ``UsageError`` naming the first invalid field."""
        for name in ("epochs", "batch_size", "patience"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.lr > 0:
            raise UsageError(f"lr must be positive, got {self.lr}")
        if not 0.0 < self.val_fraction < 1.0:
            raise UsageError(f"val_fraction must lie in (0, 1), got {self.val_fraction}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.eps > 0):
            raise UsageError("Adam betas must lie in [0, 1) and eps must be positive")
        if self.seed < 0:
            raise UsageError(f"seed must be >= 0, got {self.seed}")
        if any(h < 1 for h in self.hidden):
            raise UsageError(f"hidden widths must be positive, got {self.hidden}")

    @property
    def train_fraction(self) -> float:
        return 1.0 - self.val_fraction

    def to_dict(self) -> dict:
        data = asdict(self)
        data["hidden"] = list(self.hidden)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{key: value for key, value in data.items() if key in known})


@dataclass(frozen=True, eq=False)
class SplitPlan:
    """Per-cluster partition into training and validation ids.

    Attributes:
        cluster_ids: Cluster id per position
        train: Training member ids per position
        validation: Validation member ids per position
        fraction: Training fraction used
        seed: Seed used
    """

    cluster_ids: Tuple[int, ...]
    train: Tuple[np.ndarray, ...]
    validation: Tuple[np.ndarray, ...]
    fraction: float
    seed: int

    @property
    def train_sizes(self) -> np.ndarray:
        return np.array([t.shape[0] for t in self.train], dtype=np.int64)


def split(clustering: Clustering, fraction: float, seed: int) -> SplitPlan:
    """Randomly split every cluster into training and validation ids.

    The training part gets floor(fraction * size) members, clamped so both
    parts keep at least one member.

    Args:
        clustering: Clustering to split
        fraction: Training fraction in (0, 1)
        seed: Run seed (``split`` stream)

    Returns:
        SplitPlan

    Raises:
        UnsplittableClusterError: If a cluster has fewer than two members
    """
    if not 0.0 < fraction < 1.0:
        raise UsageError(f"fraction must lie in (0, 1), got {fraction}")
    rng = substream(seed, "split")
    train, validation = [], []
    for c in clustering.clusters:
        if c.size < 2:
            raise UnsplittableClusterError(c.id, c.size)
        n_train = int(np.floor(fraction * c.size + _FLOOR_SLACK))
        n_train = min(max(n_train, 1), c.size - 1)
        shuffled = rng.permutation(c.members)
        train.append(np.sort(shuffled[:n_train]))
        validation.append(np.sort(shuffled[n_train:]))
    return SplitPlan(
        cluster_ids=tuple(clustering.ids),
        train=tuple(train),
        validation=tuple(validation),
        fraction=fraction,
        seed=seed,
    )


def balanced_accuracy(predictions_i: Sequence[int], predictions_j: Sequence[int]) -> float:
    """Balanced accuracy of one pair task.

    Args:
        predictions_i: Predicted classes for validation members of S_i (truth 0)
        predictions_j: Predicted classes for validation members of S_j (truth 1)

    Returns:
        1/2 * (share of S_i predicted 0 + share of S_j predicted 1)
    """
    predictions_i = np.asarray(predictions_i)
    predictions_j = np.asarray(predictions_j)
    if predictions_i.size == 0 or predictions_j.size == 0:
        raise UsageError("both validation sets must be non-empty")
    return 0.5 * (float(np.mean(predictions_i == 0)) + float(np.mean(predictions_j == 1)))


def validation_matrix(
    params: NetworkParams,
    validation_features: Sequence[np.ndarray],
    cluster_ids: Sequence[int],
) -> DistanceMatrix:
    """Balanced accuracy of every pair task on the validation parts.

    Class 1 is predicted iff f(x)_ij >= 1/2. Entries are computed for i < j
    and mirrored.
    """
    k = len(validation_features)
    predicts_zero = np.zeros((k, k))  # [i, j]: share of S_i predicted 0 in task (i, j)
    predicts_one = np.zeros((k, k))   # [j, i]: share of S_j predicted 1 in task (i, j)
    for c, feats in enumerate(validation_features):
        logits = forward(params, feats)
        # column j: f(x)_cj for x in S_c; scores of task (c, j)
        as_first = expit(logits - logits[:, [c]])
        predicts_zero[c] = np.mean(as_first < 0.5, axis=0)
        # column i: f(x)_ic for x in S_c; scores of task (i, c)
        as_second = expit(logits[:, [c]] - logits)
        predicts_one[c] = np.mean(as_second >= 0.5, axis=0)

    values = np.full((k, k), 0.5)
    for i in range(k):
        for j in range(i + 1, k):
            values[i, j] = values[j, i] = 0.5 * (predicts_zero[i, j] + predicts_one[j, i])
    return DistanceMatrix(cluster_ids=tuple(cluster_ids), values=values, kind=KIND_BA)


@dataclass(frozen=True, eq=False)
class EpochRecord:
    """Outcome of one training epoch.

    Attributes:
        epoch: 1-based epoch number
        loss: Sum of the batch losses over the epoch
        average_accuracy: A(D) of the validation matrix after the epoch
        matrix: The validation matrix after the epoch
    """

    epoch: int
    loss: float
    average_accuracy: float
    matrix: DistanceMatrix


@dataclass(frozen=True, eq=False)
class EstimateResult:
    """Outcome of ``estimate``.

    Attributes:
        matrix: Matrix of the epoch with the best A(D)
        best_epoch: Epoch that produced ``matrix``
        history: One record per epoch run, in order
        params: Network parameters after the last epoch
        plan: Split used
    """

    matrix: DistanceMatrix
    best_epoch: int
    history: Tuple[EpochRecord, ...]
    params: NetworkParams
    plan: SplitPlan

    @property
    def best_average_accuracy(self) -> float:
        return self.history[self.best_epoch - 1].average_accuracy


def _standardizer(train: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std[std == 0.0] = 1.0
    return lambda x: (x - mean) / std


def estimate(
    dataset: Dataset,
    clustering: Clustering,
    config: Optional[TrainConfig] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> EstimateResult:
    """Train the pairwise network and estimate the balanced-accuracy matrix.

    Args:
        dataset: Observations
        clustering: Clusters to compare (k >= 2, every cluster >= 2 members)
        config: Training configuration; defaults when omitted
        on_epoch: Optional callback invoked with every epoch's record

    Returns:
        EstimateResult with the best-A(D) matrix and the per-epoch history
    """
    config = config or TrainConfig()
    if clustering.k < 2:
        raise DegenerateError(f"need at least 2 clusters, got {clustering.k}")
    clustering.check_against(dataset)

    plan = split(clustering, config.train_fraction, config.seed)
    train_x = np.concatenate([dataset.features_of(ids) for ids in plan.train])
    train_origin = np.concatenate(
        [np.full(ids.shape[0], pos, dtype=np.int64) for pos, ids in enumerate(plan.train)]
    )
    scale = _standardizer(train_x) if config.standardize else (lambda x: x)
    train_x = scale(train_x)
    val_x = [scale(dataset.features_of(ids)) for ids in plan.validation]
    sizes = ClusterSizes(plan.train_sizes)
    logger.info(
        f"Training on {train_x.shape[0]} observations from {clustering.k} clusters, "
        f"{sum(v.shape[0] for v in val_x)} held out"
    )

    params = init_network(dataset.dim, clustering.k, config.hidden, substream(config.seed, "init"))
    state = AdamState.for_params(
        params, lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps
    )
    shuffle_rng = substream(config.seed, "shuffle")

    history: List[EpochRecord] = []
    best_epoch, best_score, stale = 0, -np.inf, 0
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(train_x.shape[0])
        epoch_loss = 0.0
        for start in range(0, order.shape[0], config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grads = total_loss(params, train_x[batch], train_origin[batch], sizes)
            params, state = adam_step(params, grads, state)
            epoch_loss += loss

        matrix = validation_matrix(params, val_x, plan.cluster_ids)
        record = EpochRecord(
            epoch=epoch, loss=epoch_loss, average_accuracy=average_accuracy(matrix), matrix=matrix
        )
        history.append(record)
        if on_epoch is not None:
            on_epoch(record)
        logger.debug(f"Epoch {epoch}: loss {epoch_loss:.6f}, A(D) {record.average_accuracy:.4f}")

        if record.average_accuracy > best_score:
            best_epoch, best_score, stale = epoch, record.average_accuracy, 0
        else:
            stale += 1
            if stale >= config.patience:
                logger.info(f"Early stop after epoch {epoch}; best epoch {best_epoch}")
                break

    logger.info(f"Best A(D) {best_score:.4f} at epoch {best_epoch} of {len(history)}")
    return EstimateResult(
        matrix=history[best_epoch - 1].matrix,
        best_epoch=best_epoch,
        history=tuple(history),
        params=params,
        plan=plan,
    )


@dataclass(frozen=True, eq=False)
class Selection:
    """Outcome of ``select_config``.

    Attributes:
        best_index: Position of the chosen candidate
        configs: Candidates in the order given
        results: One EstimateResult per candidate
    """

    best_index: int
    configs: Tuple[TrainConfig, ...]
    results: Tuple[EstimateResult, ...] = field(repr=False)

    @property
    def best_config(self) -> TrainConfig:
        return self.configs[self.best_index]

    @property
    def best_result(self) -> EstimateResult:
        return self.results[self.best_index]


def select_config(
    dataset: Dataset, clustering: Clustering, configs: Sequence[TrainConfig]
) -> Selection:
    """Pick the candidate configuration with the highest A(D).

    A(D) needs no labels, so this is usable on unannotated data. Ties keep
    the earliest candidate.
    """
    if not configs:
        raise UsageError("select_config needs at least one configuration")
    results = []
    for idx, config in enumerate(configs):
        result = estimate(dataset, clustering, config)
        logger.info(f"Candidate {idx}: lr={config.lr}, hidden={config.hidden}, A(D)={result.best_average_accuracy:.4f}")
        results.append(result)
    scores = [r.best_average_accuracy for r in results]
    best = int(np.argmax(scores))
    return Selection(best_index=best, configs=tuple(configs), results=tuple(results))
