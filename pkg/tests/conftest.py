import functools

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def dense_operator(mats):
    """Kronecker product with party 1 as the most significant factor."""
    return functools.reduce(np.kron, mats)


def dense_expectation(state, mats):
    psi = state.amplitudes
    return float(np.vdot(psi, dense_operator(mats) @ psi).real)
