import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_spd(rng, p, scale=1.0):
    """Random symmetric positive definite matrix with eigenvalues >= scale/10."""
    a = rng.standard_normal((p, p))
    return scale * (a @ a.T / p + 0.1 * np.eye(p))


def random_symmetric(rng, p):
    a = rng.standard_normal((p, p))
    return (a + a.T) / 2.0
