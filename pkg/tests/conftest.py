"""Shared fixtures."""

import numpy as np
import pytest

from src.core import Clustering, Dataset, StorageManager


@pytest.fixture
def storage(tmp_path):
    return StorageManager(base_dir=tmp_path)


@pytest.fixture
def two_category_dataset():
    """40 observations in 1-D: category 0 around -3, category 1 around +3."""
    rng = np.random.default_rng(7)
    features = np.concatenate([rng.normal(-3.0, 0.5, 20), rng.normal(3.0, 0.5, 20)])
    labels = np.repeat([0, 1], 20)
    return Dataset.from_arrays(features.reshape(-1, 1), labels=labels)


@pytest.fixture
def four_clusters(two_category_dataset):
    """Two pure clusters per category, ten observations each."""
    return Clustering.from_members([range(0, 10), range(10, 20), range(20, 30), range(30, 40)])
