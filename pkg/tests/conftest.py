import numpy as np
import pytest

from bifbm.checks import DEFAULT_LATTICE

LATTICE = DEFAULT_LATTICE


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
