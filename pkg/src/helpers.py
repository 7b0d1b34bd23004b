"""Synthetic datasets with known per-category distributions."""

from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np

from .core.dataset import Dataset
from .core.oracle import DiscreteDistribution, GaussianSpec, tvd_discrete, tvd_gaussian_1d
from .utils.rng import substream


def category_means(categories: int, dim: int, separation: float) -> np.ndarray:
    """Means with pairwise distance ``separation`` where the dimension allows.

    With ``categories <= dim`` the means sit on scaled unit vectors, so every
    pair is exactly ``separation`` apart; otherwise they are spaced
    ``separation`` apart along the first axis.

    Returns:
        Array (categories, dim)
    """
    means = np.zeros((categories, dim))
    if categories <= dim:
        means[np.arange(categories), np.arange(categories)] = separation / np.sqrt(2.0)
    else:
        means[:, 0] = separation * np.arange(categories)
    return means


def gaussian_mixture(
    categories: int, per_category: int, dim: int, separation: float, seed: int
) -> Tuple[Dataset, List[GaussianSpec]]:
    """Unit-variance Gaussian per category, ``per_category`` draws each.

    Observation ids run 0..n-1 in category order.

    Returns:
        Tuple of (dataset, generating Gaussian per category)
    """
    rng = substream(seed, "synth")
    specs = [
        GaussianSpec(mean=mean, var=np.ones(dim))
        for mean in category_means(categories, dim, separation)
    ]
    features = np.concatenate([spec.sample(per_category, rng) for spec in specs])
    labels = np.repeat(np.arange(categories), per_category)
    return Dataset.from_arrays(features, labels=labels), specs


def discrete_mixture(
    probs: Sequence[Sequence[float]], per_category: int, seed: int
) -> Tuple[Dataset, List[DiscreteDistribution]]:
    """One symbol per observation from each category's distribution, one-hot encoded.

    Returns:
        Tuple of (dataset, generating distribution per category)
    """
    rng = substream(seed, "synth")
    dists = [DiscreteDistribution(np.asarray(p, dtype=np.float64)) for p in probs]
    support = dists[0].support
    symbols = np.concatenate([d.sample(per_category, rng) for d in dists])
    features = np.eye(support)[symbols]
    labels = np.repeat(np.arange(len(dists)), per_category)
    return Dataset.from_arrays(features, labels=labels), dists


def pairwise_tvds(dists: Sequence) -> List[dict]:
    """Exact TVD of every category pair (discrete or one-dimensional Gaussian)."""
    result = []
    for a, b in combinations(range(len(dists)), 2):
        if isinstance(dists[a], DiscreteDistribution):
            value = tvd_discrete(dists[a], dists[b])
        else:
            value = tvd_gaussian_1d(dists[a], dists[b])
        result.append({"a": a, "b": b, "tvd": value})
    return result
