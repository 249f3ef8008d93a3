import numpy as np
import pytest

from bubbletower.configuration import make_configuration
from bubbletower.quadrature import QuadratureScheme, QuadratureSettings


@pytest.fixture()
def rng():
    # language=rst
    """Fixture that gives a seeded random generator, fresh for every test."""
    return np.random.default_rng(20170)


@pytest.fixture(scope='session')
def coarse_settings() -> QuadratureSettings:
    # language=rst
    """Fixture that gives cheap quadrature settings.

    Structural identities hold at any resolution, because every rule is
    invariant under the ring symmetries; only scaling tests need more nodes.

    """
    return QuadratureSettings(radial_nodes=8, angular_degree=8, max_refine=1)


@pytest.fixture(scope='session')
def tower():
    # language=rst
    """Fixture that gives the configuration n = 4, k = h = 8, δ = ε = 1."""
    return make_configuration(4, 8, 8, 1.0, 1.0)


@pytest.fixture(scope='session')
def tower_scheme(tower, coarse_settings) -> QuadratureScheme:
    return QuadratureScheme.for_configuration(tower, coarse_settings)
