import numpy as np
import pytest

from bubbletower.bubble import eval_bubble
from bubbletower.errors import DomainError
from bubbletower.scalar_field import ScalarField, zero_field


def test_declared_symmetries_are_spot_checked(tower):
    field = ScalarField(lambda y: eval_bubble(y, 4), 4, {'even-mask', 'kelvin-even'}, name='U')
    assert field.weight == 2
    np.testing.assert_array_equal(field(np.zeros(4)), 2.0)
    with pytest.raises(DomainError, match="violates its declared symmetry 'even-mask'"):
        ScalarField(lambda y: y[..., 1], 4, {'even-mask'}, name='y2')
    with pytest.raises(DomainError, match="violates its declared symmetry 'ring1-invariant'"):
        ScalarField(lambda y: y[..., 0], 4, {'ring1-invariant'}, config=tower, name='y1')


def test_kelvin_weight_is_configurable():
    # Constants are Kelvin-even for weight 0 only.
    field = ScalarField(lambda y: np.ones(y.shape[:-1]), 4, {'kelvin-even'}, kelvin_weight=0.0)
    assert field.weight == 0.0
    with pytest.raises(DomainError, match="kelvin-even"):
        ScalarField(lambda y: np.ones(y.shape[:-1]), 4, {'kelvin-even'})


@pytest.mark.parametrize('tags, message', [
    ({'kelvin-even', 'kelvin-odd'}, "both"),
    ({'upside-down'}, "unknown symmetry tags"),
    ({'ring2-invariant'}, "need a configuration"),
])
def test_invalid_tags(tags, message):
    with pytest.raises(DomainError, match=message):
        ScalarField(lambda y: np.zeros(y.shape[:-1]), 4, tags)


def test_zero_field():
    field = zero_field(5)
    assert field.decay_exponent == np.inf
    np.testing.assert_array_equal(field(np.ones((3, 5))), np.zeros(3))
    with pytest.raises(DomainError):
        field(np.ones((3, 4)))
