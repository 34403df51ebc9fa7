import numpy as np
import pytest

from gtsp_bls.instance import euclidean_instance


def random_instance(rng: np.random.Generator, n: int, m: int, span: int = 100):
    """Random Euclidean GTSP instance with ``m`` non-empty clusters over ``n`` nodes."""
    coords = rng.integers(0, span, size=(n, 2))
    owner = np.concatenate([np.arange(m), rng.integers(m, size=n - m)])
    rng.shuffle(owner)
    members = [np.flatnonzero(owner == k) for k in range(m)]
    return euclidean_instance(coords, members)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
