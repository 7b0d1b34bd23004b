"""Command implementations behind the CLI."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.stats import spearmanr

from .core import (
    Clustering,
    ConsistencyError,
    Dataset,
    DistanceMatrix,
    EpochRecord,
    RunConfig,
    StorageManager,
    TrainConfig,
    UndefinedMetricError,
    artificial_overcluster,
    average_accuracy,
    cm_curve,
    estimate,
    euclidean_backend,
    greedy_overcluster,
    hierarchical_merge,
    inject_noise,
    majority_categories,
    pair_partition,
    purity,
    quality_from_majorities,
    select_config,
    tvd_backend,
    unique_majorities,
    validate_run_config,
)
from .helpers import discrete_mixture, gaussian_mixture, pairwise_tvds

logger = logging.getLogger(__name__)


class Application:
    """Runs CLI commands against the storage layer.

    Every command validates its RunConfig first, writes its outputs with the
    config embedded, and returns a report dictionary for printing.

    Attributes:
        storage: Storage manager for all file formats
    """

    def __init__(self, storage: Optional[StorageManager] = None):
        """Initialize application.

        Args:
            storage: Storage manager; defaults to one rooted at the current directory
        """
        self.storage = storage or StorageManager()
        self._handlers = {
            "synth": self.synth,
            "overcluster": self.overcluster,
            "estimate": self.estimate,
            "merge": self.merge,
            "eval": self.evaluate,
            "sweep": self.sweep,
        }

    def run(self, config: RunConfig) -> Dict[str, Any]:
        """Validate and execute one command."""
        validate_run_config(config)
        logger.info(f"Running '{config.command}' with {config.params}")
        return self._handlers[config.command](config)

    def replay(self, path) -> Dict[str, Any]:
        """Re-execute the command whose config is embedded in ``path``."""
        config = self.storage.load_config(path)
        logger.info(f"Replaying '{config.command}' from {path}")
        return self.run(config)

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def synth(self, config: RunConfig) -> Dict[str, Any]:
        """Generate a labeled synthetic dataset and echo exact category TVDs."""
        seed = int(config.get("seed", 0))
        per_category = int(config.get("per_category"))
        if config.get("kind") == "discrete":
            dataset, dists = discrete_mixture(config.get("probs"), per_category, seed)
            tvds = pairwise_tvds(dists)
        else:
            dataset, dists = gaussian_mixture(
                int(config.get("categories")),
                per_category,
                int(config.get("dim")),
                float(config.get("separation")),
                seed,
            )
            tvds = pairwise_tvds(dists) if dataset.dim == 1 else None

        out = self.storage.save_dataset(dataset, config.get("out"))
        report = {"observations": dataset.size, "dim": dataset.dim, "tvd": tvds}
        self.storage.save_dataset_meta(out, {"report": report, "config": config.to_dict()})
        return report

    def overcluster(self, config: RunConfig) -> Dict[str, Any]:
        """Create an over-clustering (artificial or greedy), optionally noisy."""
        dataset = self.storage.load_dataset(config.get("data"))
        seed = int(config.get("seed", 0))
        s = int(config.get("s"))
        if config.get("mode") == "artificial":
            clustering = artificial_overcluster(dataset, s, seed)
        else:
            clustering = greedy_overcluster(dataset, s, int(config.get("k")))

        pi = float(config.get("pi", 0.0))
        if pi > 0.0:
            clustering = inject_noise(clustering, dataset, pi, seed)

        report: Dict[str, Any] = {"k": clustering.k, "observations": clustering.num_observations}
        if dataset.has_labels:
            report["purity"] = purity(clustering, dataset)
            report["unique_majorities"] = unique_majorities(clustering, dataset)
        self.storage.save_clustering(clustering, config.get("out"), config, report)
        return report

    def estimate(self, config: RunConfig) -> Dict[str, Any]:
        """Estimate the balanced-accuracy matrix and write the epoch series."""
        dataset, clustering = self._load_inputs(config)
        train = config.train_config()
        majorities = self._majorities_or_none(dataset, clustering)
        if majorities is not None:
            partition = pair_partition(majorities)
            if not partition.same or not partition.diff:
                logger.warning(
                    "Quality undefined: cluster pairs do not include both same-majority "
                    "and different-majority pairs; skipping the quality column"
                )
                majorities = None

        series: List[List[Any]] = []

        def record_epoch(record: EpochRecord) -> None:
            series.append([record.epoch, record.loss, record.average_accuracy,
                           self._quality_or_none(record.matrix, majorities)])

        result = estimate(dataset, clustering, train, on_epoch=record_epoch)

        report: Dict[str, Any] = {
            "best_epoch": result.best_epoch,
            "epochs_run": len(result.history),
            "average_accuracy": average_accuracy(result.matrix),
            "quality": self._quality_or_none(result.matrix, majorities),
        }
        q_series = [row[3] for row in series]
        if len(series) >= 3 and all(q is not None for q in q_series):
            rho, _ = spearmanr([row[2] for row in series], q_series)
            report["spearman_a_q"] = None if np.isnan(rho) else float(rho)

        self.storage.save_distances(
            result.matrix, config.get("out"), config, {"best_epoch": result.best_epoch}
        )
        history_path = config.get("history") or self._history_path(config.get("out"))
        self.storage.save_series_csv(
            ["epoch", "loss", "average_accuracy", "quality"], series, history_path
        )
        return report

    def merge(self, config: RunConfig) -> Dict[str, Any]:
        """Hierarchically merge clusters with the TVD or Euclidean backend."""
        dataset, clustering = self._load_inputs(config)
        if config.get("backend") == "tvd":
            backend = tvd_backend(config.train_config())
        else:
            backend = euclidean_backend()

        trace, final = hierarchical_merge(dataset, clustering, backend, int(config.get("steps")))
        cm = cm_curve(trace) if dataset.has_labels else []
        self.storage.save_trace([step.to_dict() for step in trace.steps], cm, config.get("out"), config)
        return {"steps": len(trace), "k_final": final.k, "cm": cm}

    def evaluate(self, config: RunConfig) -> Dict[str, Any]:
        """Compute Q, A, purity and unique majorities for a distance matrix."""
        dataset = self.storage.load_dataset(config.get("data"))
        clustering = self.storage.load_clustering(config.get("clusters"))
        clustering.check_against(dataset)
        matrix = self.storage.load_distances(config.get("distances"))
        matrix = self._align(matrix, clustering)

        report: Dict[str, Any] = {"average_accuracy": average_accuracy(matrix)}
        if dataset.has_labels:
            report["quality"] = self._quality_or_none(matrix, majority_categories(clustering, dataset))
            report["purity"] = purity(clustering, dataset)
            report["unique_majorities"] = unique_majorities(clustering, dataset)
        if config.get("out"):
            self.storage.save_json({"metrics": report, "config": config.to_dict()}, config.get("out"))
        return report

    def sweep(self, config: RunConfig) -> Dict[str, Any]:
        """Select learning rate and architecture by A(D), without labels."""
        dataset, clustering = self._load_inputs(config)
        base = config.train_config()
        candidates = [
            TrainConfig.from_dict({**base.to_dict(), "lr": float(lr), "hidden": list(hidden)})
            for lr in config.get("lrs")
            for hidden in config.get("hiddens")
        ]
        selection = select_config(dataset, clustering, candidates)

        rows = []
        for cand, result in zip(selection.configs, selection.results):
            row = {
                "lr": cand.lr,
                "hidden": list(cand.hidden),
                "average_accuracy": result.best_average_accuracy,
                "best_epoch": result.best_epoch,
            }
            if dataset.has_labels:
                row["quality"] = self._quality_or_none(
                    result.matrix, majority_categories(clustering, dataset)
                )
            rows.append(row)
        report = {"candidates": rows, "best": rows[selection.best_index]}
        self.storage.save_json({**report, "config": config.to_dict()}, config.get("out"))
        return report

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    def _load_inputs(self, config: RunConfig):
        dataset = self.storage.load_dataset(config.get("data"))
        clustering = self.storage.load_clustering(config.get("clusters"))
        clustering.check_against(dataset)
        return dataset, clustering

    @staticmethod
    def _history_path(out) -> str:
        out = Path(out)
        return str(out.with_name(out.stem + ".history.csv"))

    @staticmethod
    def _majorities_or_none(dataset: Dataset, clustering: Clustering) -> Optional[List[int]]:
        return majority_categories(clustering, dataset) if dataset.has_labels else None

    @staticmethod
    def _quality_or_none(matrix: DistanceMatrix, majorities: Optional[List[int]]) -> Optional[float]:
        if majorities is None:
            return None
        try:
            return quality_from_majorities(matrix, majorities)
        except UndefinedMetricError as e:
            logger.warning(f"Quality undefined: {e}")
            return None

    @staticmethod
    def _align(matrix: DistanceMatrix, clustering: Clustering) -> DistanceMatrix:
        """Reorder ``matrix`` to the clustering's cluster order."""
        if list(matrix.cluster_ids) == clustering.ids:
            return matrix
        if sorted(matrix.cluster_ids) != sorted(clustering.ids):
            raise ConsistencyError(
                f"distance matrix covers clusters {sorted(matrix.cluster_ids)}, "
                f"clustering has {sorted(clustering.ids)}"
            )
        position = {cid: idx for idx, cid in enumerate(matrix.cluster_ids)}
        return matrix.permuted([position[cid] for cid in clustering.ids])
