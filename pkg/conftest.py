"""
Shared fixtures
"""
import os

os.environ.setdefault('GEOLAB_ENV', 'testing')

import numpy as np
import pytest

from lewis_solver import SolverConfig, diagonal_subspace, random_subspace, solve_lewis


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope='session')
def lewis_p1():
    """Solved random k=3, m=4 subspace of S_1."""
    return solve_lewis(random_subspace(3, 4, 1.0, seed=3), SolverConfig(seed=3))


@pytest.fixture(scope='session')
def lewis_p15():
    return solve_lewis(random_subspace(3, 4, 1.5, seed=5), SolverConfig(seed=5))


@pytest.fixture(scope='session')
def lewis_diagonal():
    return solve_lewis(diagonal_subspace(4, 1.0))


