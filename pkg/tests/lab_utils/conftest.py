import numpy as np
import pytest

import lab_utils


@pytest.fixture()
def rng():
    # language=rst
    """Fixture that gives a seeded random generator, fresh for every test."""
    return np.random.default_rng(20170)


@pytest.fixture()
def symmetric_circulant(rng):
    # language=rst
    """Fixture that builds diagonally dominant symmetric circulants.

    Usage::

        c = symmetric_circulant(8)

    Symmetry (:math:`r_s = r_{m-s}`) makes the cos and sin ring modes an
    eigenspace, as for the ring interaction matrices.

    """
    def build(m: int) -> lab_utils.CirculantMatrix:
        half = rng.uniform(0.0, 1.0, m // 2 + 1)
        row = np.array([half[min(s, m - s)] for s in range(m)])
        row[0] = m + 2.0
        return lab_utils.CirculantMatrix(row)
    return build
