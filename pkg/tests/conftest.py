import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_separable_dataset(rng, n=30, p=3, K=3, spread=6.0):
    """Well-separated class clouds, one center per class."""
    centers = rng.standard_normal((K, p)) * spread
    labels = np.repeat(np.arange(K), -(-n // K))[:n]
    X = centers[labels] + rng.standard_normal((n, p))
    return X, labels
