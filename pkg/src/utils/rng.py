"""Named random sub-streams derived from a single seed."""

from typing import Dict

import numpy as np

# Fixed stream ids; adding a stream must never renumber an existing one.
STREAMS: Dict[str, int] = {
    "split": 1,
    "init": 2,
    "shuffle": 3,
    "noise": 4,
    "synth": 5,
    "overcluster": 6,
    "montecarlo": 7,
}


def substream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Create the generator for one named component.

    Components seeded from the same ``seed`` but different names draw
    independent sequences, so changing how many draws one component makes
    never shifts another.

    Args:
        seed: Run seed (the ``--seed`` flag)
        name: Stream name, one of ``STREAMS``
        extra: Optional further integers (e.g. a trial index)

    Returns:
        A fresh ``numpy.random.Generator``
    """
    if name not in STREAMS:
        raise KeyError(f"unknown random stream '{name}'")
    return np.random.default_rng([int(seed), STREAMS[name], *map(int, extra)])
