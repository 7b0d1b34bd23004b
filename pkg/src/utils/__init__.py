"""Utility modules."""

from .rng import STREAMS, substream

__all__ = ["STREAMS", "substream"]
