import numpy as np
import pytest

from gwlimits.offspring import OffspringDistribution


@pytest.fixture
def binary():
    """Supercritical law {1/4 at 0, 3/4 at 2}: f = 1/3, conjugate {3/4, 0, 1/4}."""
    return OffspringDistribution([0.25, 0.0, 0.75])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
