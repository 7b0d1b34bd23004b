"""Exception hierarchy with machine-readable categories."""

from typing import Optional


class TvdMergeError(Exception):
    """Base class for every error raised by the library.

    Attributes:
        category: Short machine-readable name printed by the CLI
        exit_code: Process exit code used by the CLI
    """

    category = "error"
    exit_code = 1


class ShapeError(TvdMergeError):
    """Array dimensions do not chain or match."""

    category = "shape"
    exit_code = 2


class NumericError(TvdMergeError):
    """A non-finite value showed up where finite values are required."""

    category = "numeric"
    exit_code = 3

    def __init__(self, message: str, index: Optional[tuple] = None):
        """Initialize numeric error.

        Args:
            message: Human readable description
            index: Location of the offending entry, if known
        """
        if index is not None:
            message = f"{message} at index {index}"
        super().__init__(message)
        self.index = index


class ClusterIndexError(TvdMergeError, IndexError):
    """Cluster index outside 0..k-1."""

    category = "index"
    exit_code = 4


class DegenerateError(TvdMergeError):
    """Degenerate input: a pair (i, i) or fewer than two clusters."""

    category = "degenerate"
    exit_code = 5


class UsageError(TvdMergeError, ValueError):
    """A precondition on a parameter was violated."""

    category = "usage"
    exit_code = 6


class UnsplittableClusterError(UsageError):
    """A cluster is too small to be split into train and validation."""

    category = "unsplittable"
    exit_code = 7

    def __init__(self, cluster_id: int, size: int):
        super().__init__(
            f"cluster {cluster_id} has {size} member(s); at least 2 are needed"
        )
        self.cluster_id = cluster_id


class UndefinedMetricError(TvdMergeError):
    """The metric is undefined for the given input."""

    category = "undefined_metric"
    exit_code = 8


class ParseError(TvdMergeError):
    """A file could not be parsed."""

    category = "parse"
    exit_code = 9

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        """Initialize parse error.

        Args:
            message: Description of the problem
            path: File being parsed
            line: 1-based line number, if known
            field: Offending field or column name, if known
        """
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line
        self.field = field


class ConsistencyError(TvdMergeError):
    """Two inputs disagree (unknown ids, mismatched clusters)."""

    category = "consistency"
    exit_code = 10


class StorageError(TvdMergeError):
    """A file could not be read or written."""

    category = "io"
    exit_code = 11
