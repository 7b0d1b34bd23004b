"""tvd-merge - cluster distances from a single pairwise classifier."""

__version__ = "0.1.0"
