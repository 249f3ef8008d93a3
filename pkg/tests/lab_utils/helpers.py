import numpy as np

import lab_utils


def orthogonal_to_ring_modes(v: np.ndarray) -> np.ndarray:
    # language=rst
    """Projects *v* onto the complement of the cos and sin ring modes."""
    v = np.array(v, dtype=float)
    for mode in lab_utils.ring_modes(len(v)):
        v -= (v @ mode) / (mode @ mode) * mode
    return v


def explicit_circulant(row) -> np.ndarray:
    # language=rst
    """:math:`C_{ij} = r_{(j-i) \\bmod m}`, written out entry by entry."""
    m = len(row)
    return np.array([[row[(j - i) % m] for j in range(m)] for i in range(m)])
