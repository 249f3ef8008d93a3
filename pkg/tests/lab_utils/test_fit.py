import numpy as np
import pytest

from lab_utils import loglog_slope, quadratic_coefficients


def test_loglog_slope():
    ks = [8, 12, 16, 24]
    assert loglog_slope(ks, [3.0 * k ** (-1 / 3) for k in ks]) == pytest.approx(-1 / 3)
    assert loglog_slope(ks, [k ** 2 for k in ks]) == pytest.approx(2.0)


def test_loglog_slope_rejects():
    with pytest.raises(ValueError):
        loglog_slope([8], [1.0])
    with pytest.raises(ValueError):
        loglog_slope([8, 12], [1.0, 0.0])


def test_quadratic_coefficients():
    xs = np.array([0.5, 1.0, 1.5])
    s2, s1, s0 = quadratic_coefficients(xs, 2.0 * xs ** 2 - 3.0 * xs)
    assert s2 == pytest.approx(2.0)
    assert s1 == pytest.approx(-3.0)
    assert s0 == pytest.approx(0.0, abs=1e-12)
