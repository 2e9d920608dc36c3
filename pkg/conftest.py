"""
Shared pytest fixtures for julia-pressure.
"""

import pytest

from julia_pressure.sphere.families import NamedFamily


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: depth-16 closed-form checks (seconds to a minute)")


@pytest.fixture
def square():
    """z^2: Σ empty, J the unit circle."""
    return NamedFamily.power(2).resolved


@pytest.fixture
def chebyshev():
    """z^2 - 2: Σ = {2, -2}, J = [-2, 2]."""
    return NamedFamily.chebyshev(2).resolved


@pytest.fixture
def basilica():
    """z^2 - 1: hyperbolic, Σ empty."""
    return NamedFamily.quadratic(-1.0).resolved


@pytest.fixture
def lambda_map():
    """(4 z^2 - 4 z + 1)^-1: exceptional with a critical point over infinity."""
    return NamedFamily.lambda_family(4.0, 2).resolved
