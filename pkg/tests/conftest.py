import numpy as np
import pytest

from cpflow.spectral import build_grid


@pytest.fixture(scope="session")
def grid32():
    return build_grid(32)


@pytest.fixture(scope="session")
def grid48():
    return build_grid(48)


@pytest.fixture(scope="session")
def grid64():
    return build_grid(64)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
