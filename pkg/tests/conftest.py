import numpy as np
import pytest

from rdcn.matrix import perm_matrix, random_derangements


def random_ds(n, k, rng, scale=1.0):
    """Convex combination of k random derangements, times ``scale``."""
    perms = random_derangements(n, k, rng)
    w = rng.random(k) + 0.05
    w *= scale / w.sum()
    return sum(wi * perm_matrix(p) for wi, p in zip(w, perms))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
