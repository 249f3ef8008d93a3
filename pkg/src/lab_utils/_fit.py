import logging
import typing as T

import numpy as np

_logger = logging.getLogger(__name__)


def loglog_slope(xs: T.Sequence[float], ys: T.Sequence[float]) -> float:
    # language=rst
    """Least-squares slope of :math:`\\log y` against :math:`\\log x`.

    Zero or negative values are rejected; their logarithm is undefined.

    :raises: ValueError

    """
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or len(xs) < 2:
        raise ValueError("need at least two (x, y) pairs of equal length")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fits need positive data")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def quadratic_coefficients(xs: T.Sequence[float], ys: T.Sequence[float]) -> T.Tuple[float, float, float]:
    # language=rst
    """Coefficients ``(s2, s1, s0)`` of the parabola :math:`s_2x^2 + s_1x + s_0`
    through (or, with more than three points, closest to) the data."""
    s2, s1, s0 = np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), 2)
    return float(s2), float(s1), float(s0)
