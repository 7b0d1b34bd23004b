"""Core data models and business logic."""

from .errors import (
    ClusterIndexError,
    ConsistencyError,
    DegenerateError,
    NumericError,
    ParseError,
    ShapeError,
    StorageError,
    TvdMergeError,
    UndefinedMetricError,
    UnsplittableClusterError,
    UsageError,
)
from .dataset import UNLABELED, Dataset
from .clustering import Cluster, Clustering, majority_categories, majority_category
from .distance_matrix import KIND_BA, KIND_EUCLIDEAN, DistanceMatrix
from .numcore import DEFAULT_HIDDEN, AdamState, Layer, NetworkParams, adam_step, backward, forward, init_network
from .pairloss import (
    ClusterSizes,
    PairScoreView,
    balanced_weight,
    memory_estimate,
    observation_loss,
    pair_score,
    pair_scores,
    total_loss,
)
from .metrics import (
    PairPartition,
    average_accuracy,
    pair_partition,
    purity,
    quality,
    quality_from_majorities,
    unique_majorities,
)
from .estimator import (
    EpochRecord,
    EstimateResult,
    Selection,
    SplitPlan,
    TrainConfig,
    balanced_accuracy,
    estimate,
    select_config,
    split,
    validation_matrix,
)
from .oracle import (
    DiscreteDistribution,
    GaussianSpec,
    ba_to_tvd,
    bayes_predict,
    expected_bayes_ba,
    mean_gap_for_tvd,
    monte_carlo_bayes_ba,
    tvd_discrete,
    tvd_gaussian_1d,
    tvd_gaussian_equal_var,
)
from .clusterops import (
    MergeStep,
    MergeTrace,
    artificial_overcluster,
    closest_pair,
    cm_curve,
    correct_merges,
    euclidean_backend,
    euclidean_baseline,
    greedy_overcluster,
    greedy_overcluster_indices,
    hierarchical_merge,
    inject_noise,
    tvd_backend,
)
from .config import RunConfig, validate_run_config
from .storage import StorageManager

__all__ = [
    "ClusterIndexError", "ConsistencyError", "DegenerateError", "NumericError",
    "ParseError", "ShapeError", "StorageError", "TvdMergeError",
    "UndefinedMetricError", "UnsplittableClusterError", "UsageError",
    "UNLABELED", "Dataset",
    "Cluster", "Clustering", "majority_categories", "majority_category",
    "KIND_BA", "KIND_EUCLIDEAN", "DistanceMatrix",
    "DEFAULT_HIDDEN", "AdamState", "Layer", "NetworkParams", "adam_step", "backward", "forward", "init_network",
    "ClusterSizes", "PairScoreView", "balanced_weight", "memory_estimate",
    "observation_loss", "pair_score", "pair_scores", "total_loss",
    "PairPartition", "average_accuracy", "pair_partition", "purity", "quality",
    "quality_from_majorities", "unique_majorities",
    "EpochRecord", "EstimateResult", "Selection", "SplitPlan", "TrainConfig",
    "balanced_accuracy", "estimate", "select_config", "split", "validation_matrix",
    "DiscreteDistribution", "GaussianSpec", "ba_to_tvd", "bayes_predict",
    "expected_bayes_ba", "mean_gap_for_tvd", "monte_carlo_bayes_ba", "tvd_discrete",
    "tvd_gaussian_1d", "tvd_gaussian_equal_var",
    "MergeStep", "MergeTrace", "artificial_overcluster", "closest_pair", "cm_curve",
    "correct_merges", "euclidean_backend", "euclidean_baseline", "greedy_overcluster",
    "greedy_overcluster_indices", "hierarchical_merge", "inject_noise", "tvd_backend",
    "RunConfig", "validate_run_config", "StorageManager",
]
