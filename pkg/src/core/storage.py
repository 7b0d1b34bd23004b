"""Storage manager for reading and writing run artifacts.

Datasets are CSV tables (``id,label,f0,...``); clusterings, distance
matrices, merge traces and reports are JSON documents. Every JSON document
embeds the ``config`` that produced it.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .clustering import Clustering
from .config import RunConfig
from .dataset import UNLABELED, Dataset
from .distance_matrix import DistanceMatrix
from .errors import ParseError, StorageError

logger = logging.getLogger(__name__)

META_SUFFIX = ".meta.json"


class StorageManager:
    """Reads and writes every on-disk format.

    Relative paths resolve against ``base_dir``.

    Attributes:
        base_dir: Directory relative paths are resolved against
    """

    def __init__(self, base_dir: Optional[Path] = None):
        """Initialize storage manager.

        Args:
            base_dir: Base directory. Defaults to the current directory
        """
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd()

    def resolve(self, path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_dir / path

    def _ensure_parent(self, path: Path) -> None:
        """Ensure the directory holding ``path`` exists."""
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Failed to create directory {path.parent}: {e}")
            raise StorageError(f"cannot create directory {path.parent}: {e}") from e

    # ------------------------------------------------------------------
    # JSON
    # ------------------------------------------------------------------

    def save_json(self, payload: Dict[str, Any], path) -> Path:
        """Write a JSON document (UTF-8, 2-space indent, trailing newline)."""
        file_path = self.resolve(path)
        self._ensure_parent(file_path)
        try:
            with open(file_path, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2, ensure_ascii=False)
                f.write("\n")
        except OSError as e:
            logger.error(f"Failed to write {file_path}: {e}")
            raise StorageError(f"cannot write {file_path}: {e}") from e
        logger.debug(f"Wrote {file_path}")
        return file_path

    def load_json(self, path) -> Dict[str, Any]:
        """Read a JSON document."""
        file_path = self.resolve(path)
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, path=str(file_path), line=e.lineno) from e
        except OSError as e:
            logger.error(f"Failed to read {file_path}: {e}")
            raise StorageError(f"cannot read {file_path}: {e}") from e

    # ------------------------------------------------------------------
    # Dataset
    # ------------------------------------------------------------------

    def save_dataset(self, dataset: Dataset, path) -> Path:
        """Write a dataset as CSV with header ``id,label,f0,...,f{d-1}``."""
        file_path = self.resolve(path)
        self._ensure_parent(file_path)
        header = ["id", "label"] + [f"f{j}" for j in range(dataset.dim)]
        try:
            with open(file_path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                for obs_id, label, row in zip(dataset.ids, dataset.labels, dataset.features):
                    label_cell = "" if label == UNLABELED else str(int(label))
                    writer.writerow([str(int(obs_id)), label_cell] + [repr(float(v)) for v in row])
        except OSError as e:
            logger.error(f"Failed to write dataset {file_path}: {e}")
            raise StorageError(f"cannot write {file_path}: {e}") from e
        logger.info(f"Saved dataset with {dataset.size} observations to {file_path}")
        return file_path

    def load_dataset(self, path) -> Dataset:
        """Read a dataset CSV.

        Raises:
            ParseError: With line and field of the first malformed cell
        """
        file_path = self.resolve(path)
        ids: List[int] = []
        labels: List[int] = []
        rows: List[List[float]] = []
        try:
            with open(file_path, "r", encoding="utf-8", newline="") as f:
                reader = csv.reader(f)
                header = next(reader, None)
                if header is None or header[:2] != ["id", "label"]:
                    raise ParseError("header must start with 'id,label'", path=str(file_path), line=1)
                feature_names = header[2:]
                if feature_names != [f"f{j}" for j in range(len(feature_names))] or not feature_names:
                    raise ParseError("feature columns must be f0..f{d-1}", path=str(file_path), line=1)

                for line_no, record in enumerate(reader, start=2):
                    if not record:
                        continue
                    if len(record) != len(header):
                        raise ParseError(
                            f"expected {len(header)} fields, got {len(record)}",
                            path=str(file_path), line=line_no,
                        )
                    ids.append(self._parse_int(record[0], file_path, line_no, "id"))
                    labels.append(
                        UNLABELED if record[1] == ""
                        else self._parse_int(record[1], file_path, line_no, "label")
                    )
                    rows.append([
                        self._parse_float(cell, file_path, line_no, name)
                        for cell, name in zip(record[2:], feature_names)
                    ])
        except OSError as e:
            logger.error(f"Failed to read dataset {file_path}: {e}")
            raise StorageError(f"cannot read {file_path}: {e}") from e

        features = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(feature_names))
        logger.info(f"Loaded {len(ids)} observations from {file_path}")
        return Dataset(ids=np.asarray(ids), features=features, labels=np.asarray(labels))

    @staticmethod
    def _parse_int(cell: str, path: Path, line: int, field: str) -> int:
        try:
            return int(cell)
        except ValueError:
            raise ParseError(f"'{cell}' is not an integer", path=str(path), line=line, field=field) from None

    @staticmethod
    def _parse_float(cell: str, path: Path, line: int, field: str) -> float:
        try:
            value = float(cell)
        except ValueError:
            raise ParseError(f"'{cell}' is not a number", path=str(path), line=line, field=field) from None
        if not np.isfinite(value):
            raise ParseError(f"'{cell}' is not finite", path=str(path), line=line, field=field)
        return value

    def save_dataset_meta(self, dataset_path, payload: Dict[str, Any]) -> Path:
        """Write the sidecar document next to a dataset CSV."""
        return self.save_json(payload, str(self.resolve(dataset_path)) + META_SUFFIX)

    # ------------------------------------------------------------------
    # Clustering, distances, traces
    # ------------------------------------------------------------------

    def save_clustering(
        self, clustering: Clustering, path, config: RunConfig, report: Optional[dict] = None
    ) -> Path:
        payload = clustering.to_dict()
        if report is not None:
            payload["report"] = report
        payload["config"] = config.to_dict()
        file_path = self.save_json(payload, path)
        logger.info(f"Saved {clustering.k} clusters to {file_path}")
        return file_path

    def load_clustering(self, path) -> Clustering:
        data = self.load_json(path)
        entries = data.get("clusters") if isinstance(data, dict) else None
        if not isinstance(entries, list):
            raise ParseError("missing 'clusters' list", path=str(self.resolve(path)), field="clusters")
        for idx, entry in enumerate(entries):
            if not isinstance(entry, dict) or "id" not in entry or not isinstance(entry.get("members"), list):
                raise ParseError(
                    "each cluster needs 'id' and a 'members' list",
                    path=str(self.resolve(path)), field=f"clusters[{idx}]",
                )
        return Clustering.from_dict(data)

    def save_distances(
        self, matrix: DistanceMatrix, path, config: RunConfig, extra: Optional[dict] = None
    ) -> Path:
        payload = matrix.to_dict()
        payload.update(extra or {})
        payload["config"] = config.to_dict()
        return self.save_json(payload, path)

    def load_distances(self, path) -> DistanceMatrix:
        data = self.load_json(path)
        if "cluster_ids" not in data or not ({"ba", "euclidean"} & set(data)):
            raise ParseError(
                "needs 'cluster_ids' and a 'ba' (or 'euclidean') matrix",
                path=str(self.resolve(path)), field="ba",
            )
        return DistanceMatrix.from_dict(data)

    def save_trace(self, trace_rows: Sequence[dict], cm: Sequence[int], path, config: RunConfig) -> Path:
        payload = {"trace": list(trace_rows), "cm": list(cm), "config": config.to_dict()}
        return self.save_json(payload, path)

    def load_trace(self, path) -> Tuple[List[dict], List[int]]:
        data = self.load_json(path)
        if not isinstance(data.get("trace"), list):
            raise ParseError("missing 'trace' list", path=str(self.resolve(path)), field="trace")
        return data["trace"], list(data.get("cm", []))

    # ------------------------------------------------------------------
    # Series and configs
    # ------------------------------------------------------------------

    def save_series_csv(self, header: Sequence[str], rows: Sequence[Sequence[Any]], path) -> Path:
        """Write a numeric series (e.g. per-epoch history) as CSV."""
        file_path = self.resolve(path)
        self._ensure_parent(file_path)
        try:
            with open(file_path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
        except OSError as e:
            logger.error(f"Failed to write {file_path}: {e}")
            raise StorageError(f"cannot write {file_path}: {e}") from e
        return file_path

    def load_config(self, path) -> RunConfig:
        """RunConfig embedded in an output file (or its dataset sidecar)."""
        file_path = self.resolve(path)
        if file_path.suffix == ".csv":
            file_path = Path(str(file_path) + META_SUFFIX)
        data = self.load_json(file_path)
        if not isinstance(data, dict) or "config" not in data:
            raise ParseError("no embedded 'config'", path=str(file_path), field="config")
        return RunConfig.from_dict(data["config"])
