import numpy as np
import pytest

from bubbletower import bubble
from bubbletower.errors import DomainError

from .helpers import central_difference, laplacian, random_points


def test_exponents():
    assert bubble.exponents(4) == (1.0, 3.0, 2.0)
    m, p, gamma = bubble.exponents(6)
    assert (m, p, gamma) == (2.0, 2.0, 6.0)


@pytest.mark.parametrize('n', [3, 2, 4.5])
def test_dimension_below_four_is_rejected(n):
    with pytest.raises(DomainError, match="n must be ≥ 4"):
        bubble.exponents(n)


@pytest.mark.parametrize('n', [4, 5, 6])
def test_bubble_solves_critical_equation(n, rng):
    y = random_points(rng, 20, n, 0.1, 3.0)
    params = bubble.BubbleParams(n=n, mu=0.5, xi=(0.3,) + (0.0,) * (n - 1))
    lap = laplacian(lambda x: bubble.eval_scaled_bubble(x, params), y + params.center)
    expected = bubble.laplacian_bubble(y + params.center, params)
    np.testing.assert_allclose(lap, expected, rtol=1e-5, atol=1e-7 * np.max(np.abs(expected)))


@pytest.mark.parametrize('n', [4, 5, 7])
def test_standard_bubble_is_kelvin_invariant(n, rng):
    y = random_points(rng, 50, n)
    transformed = bubble.kelvin(lambda x: bubble.eval_bubble(x, n), y, n)
    np.testing.assert_allclose(transformed, bubble.eval_bubble(y, n), rtol=1e-12)


def test_bubble_on_unit_sphere_is_kelvin_invariant(rng):
    n, mu = 4, 0.2
    xi = np.array([np.sqrt(1 - mu ** 2), 0.0, 0.0, 0.0])
    params = bubble.BubbleParams(n, mu, tuple(xi))
    y = random_points(rng, 50, n)
    transformed = bubble.kelvin(lambda x: bubble.eval_scaled_bubble(x, params), y, n)
    np.testing.assert_allclose(transformed, bubble.eval_scaled_bubble(y, params), rtol=1e-11)


def test_kelvin_at_origin():
    with pytest.raises(DomainError, match="singular"):
        bubble.kelvin(lambda x: bubble.eval_bubble(x, 4), np.zeros((1, 4)), 4)


def test_dilation_is_scale_derivative(rng):
    n, mu, step = 5, 0.7, 1e-6
    xi = (0.1, -0.2, 0.0, 0.3, 0.0)
    y = random_points(rng, 30, n, 0.1, 5.0)

    def at(scale):
        return bubble.eval_scaled_bubble(y, bubble.BubbleParams(n, scale, xi))

    derivative = (at(mu + step) - at(mu - step)) / (2 * step)
    expected = -mu * derivative
    np.testing.assert_allclose(bubble.eval_scaled_Z(0, y, bubble.BubbleParams(n, mu, xi)), expected,
                               rtol=1e-6, atol=1e-8)


def test_gradient_matches_finite_differences(rng):
    n = 4
    params = bubble.BubbleParams(n, 0.3, (0.5, 0.5, 0.0, 0.0))
    y = random_points(rng, 30, n, 0.1, 4.0)
    gradient = bubble.scaled_bubble_gradient(y, params)
    for axis in range(n):
        fd = central_difference(lambda x: bubble.eval_scaled_bubble(x, params), y, axis)
        np.testing.assert_allclose(gradient[:, axis], fd, rtol=1e-6, atol=1e-8)
        np.testing.assert_array_equal(bubble.eval_scaled_Z(axis + 1, y, params), gradient[:, axis])


def test_standard_values():
    assert bubble.eval_bubble(np.zeros(4), 4) == 2.0
    assert bubble.eval_bubble(np.array([1.0, 0, 0, 0]), 4) == 1.0
    # The dilation field changes sign on the unit sphere.
    assert bubble.eval_Z(0, np.array([1.0, 0, 0, 0]), 4) == 0.0
    assert bubble.eval_Z(0, np.zeros(4), 4) > 0


def test_invalid_params():
    with pytest.raises(DomainError, match="mu must be > 0"):
        bubble.BubbleParams(4, 0.0, (0.0,) * 4)
    with pytest.raises(DomainError, match="coordinates"):
        bubble.BubbleParams(4, 1.0, (0.0,) * 3)
    with pytest.raises(DomainError, match="alpha"):
        bubble.eval_Z(5, np.zeros(4), 4)
    with pytest.raises(DomainError, match="last axis"):
        bubble.eval_bubble(np.zeros(3), 4)
