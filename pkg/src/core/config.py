"""Run configuration embedded in every output file."""

from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from .errors import UsageError
from .estimator import TrainConfig

COMMANDS = ("synth", "overcluster", "estimate", "merge", "eval", "sweep")
OVERCLUSTER_MODES = ("artificial", "greedy")
SYNTH_KINDS = ("gaussian", "discrete")
BACKENDS = ("tvd", "euclidean")


@dataclass
class RunConfig:
    """Parameters of one CLI command.

    Attributes:
        command: Command name, one of ``COMMANDS``
        params: Command parameters (JSON-serializable)
    """

    command: str
    params: Dict[str, Any] = field(default_factory=dict)

    def get(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    def train_config(self) -> TrainConfig:
        """TrainConfig described by the ``train`` parameter."""
        return TrainConfig.from_dict(self.params.get("train", {}))

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {"command": self.command, "params": self.params}

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """Create from dictionary.

        Args:
            data: Dictionary as produced by ``to_dict``

        Returns:
            RunConfig instance
        """
        return cls(command=data["command"], params=dict(data.get("params", {})))


def _require(condition: bool, name: str, message: str) -> None:
    if not condition:
        raise UsageError(f"--{name.replace('_', '-')}: {message}")


def _require_path(config: RunConfig, name: str) -> None:
    _require(bool(config.get(name)), name, "a path is required")


def validate_run_config(config: RunConfig) -> None:
    """Check every parameter against its operation's preconditions.

    Raises:
        UsageError: Naming the first offending parameter
    """
    command = config.command
    _require(command in COMMANDS, "command", f"unknown command '{command}'")
    p = config.params

    if "seed" in p:
        _require(int(p["seed"]) >= 0, "seed", "must be >= 0")
    if "train" in p:
        config.train_config()

    if command == "synth":
        _require(p.get("kind") in SYNTH_KINDS, "kind", f"must be one of {SYNTH_KINDS}")
        _require(int(p.get("per_category", 0)) >= 1, "per_category", "must be >= 1")
        if p["kind"] == "gaussian":
            _require(int(p.get("categories", 0)) >= 1, "categories", "must be >= 1")
            _require(int(p.get("dim", 0)) >= 1, "dim", "must be >= 1")
            _require(float(p.get("separation", -1)) >= 0, "separation", "must be >= 0")
        else:
            probs = p.get("probs") or []
            _require(len(probs) >= 1, "probs", "needs at least one distribution")
            _require(len({len(row) for row in probs}) == 1, "probs", "distributions need equal support")
            for row in probs:
                row = np.asarray(row, dtype=np.float64)
                _require(bool(np.all(row >= 0)) and abs(row.sum() - 1.0) <= 1e-9, "probs",
                         f"{row.tolist()} is not a probability vector")
        _require_path(config, "out")

    elif command == "overcluster":
        mode = p.get("mode")
        _require(mode in OVERCLUSTER_MODES, "mode", f"must be one of {OVERCLUSTER_MODES}")
        s = int(p.get("s", 0))
        _require(s >= (2 if mode == "greedy" else 1), "s", "must be >= 2 for greedy, >= 1 otherwise")
        if mode == "greedy":
            _require(int(p.get("k", 0)) >= 1, "k", "must be >= 1")
        _require(0.0 <= float(p.get("pi", 0.0)) < 1.0, "pi", "must lie in [0, 1)")
        _require_path(config, "data")
        _require_path(config, "out")

    elif command in ("estimate", "merge", "sweep"):
        _require_path(config, "data")
        _require_path(config, "clusters")
        _require_path(config, "out")
        if command == "merge":
            _require(int(p.get("steps", -1)) >= 0, "steps", "must be >= 0")
            _require(p.get("backend") in BACKENDS, "backend", f"must be one of {BACKENDS}")
        if command == "sweep":
            lrs = p.get("lrs") or []
            hiddens = p.get("hiddens") or []
            _require(len(lrs) >= 1 and all(float(v) > 0 for v in lrs), "lrs", "needs positive values")
            _require(len(hiddens) >= 1 and all(all(int(h) >= 1 for h in hid) for hid in hiddens),
                     "hiddens", "needs positive layer widths")

    elif command == "eval":
        _require_path(config, "distances")
        _require_path(config, "clusters")
        _require_path(config, "data")
