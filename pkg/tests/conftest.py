import functools

import numpy as np
import pytest

from pswfscat.grids import DirectionSet, PolarGrid
from pswfscat.pswf import build_basis


@functools.lru_cache(maxsize=None)
def cached_basis(max_m: int, max_n: int):
    return build_basis(32.0, max_m, max_n)


@pytest.fixture(scope="session")
def basis_small():
    """c = 32 basis with m, n <= 4 (45 entries)."""
    return cached_basis(4, 4)


@pytest.fixture(scope="session")
def basis_full():
    """c = 32 basis with m, n <= 10 (231 entries), shared across the suite."""
    return cached_basis(10, 10)


@pytest.fixture(scope="session")
def grid104():
    return PolarGrid(104, 56)


@pytest.fixture(scope="session")
def dirs104():
    return DirectionSet.uniform(104)

