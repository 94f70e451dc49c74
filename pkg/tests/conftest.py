import numpy as np
import pytest

from permaframe import build_cache


@pytest.fixture(scope="session")
def cache4_all():
    return build_cache(4, "all")


@pytest.fixture(scope="session")
def cache5_all():
    return build_cache(5, "all")


@pytest.fixture(scope="session")
def cache6_all():
    return build_cache(6, "all")


@pytest.fixture(scope="session")
def cache5_h():
    return build_cache(5, "h")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
