import dataclasses
import math

import numpy as np
import pytest
import scipy.integrate

from bubbletower import quadrature
from bubbletower.bubble import eval_bubble, eval_scaled_bubble, eval_Z
from bubbletower.configuration import make_configuration
from bubbletower.errors import DomainError, QuadratureError
from bubbletower.quadrature import QuadratureScheme, QuadratureSettings
from bubbletower.scalar_field import ScalarField, zero_field


def sphere_area(n: int) -> float:
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def bubble_power(n: int) -> ScalarField:
    p = (n + 2) / (n - 2)
    return ScalarField(lambda y: eval_bubble(y, n) ** p, n, decay_exponent=n + 2, name='U^p')


@pytest.mark.parametrize('n, m1, m2', [(4, 8, 12), (5, 6, 6), (6, 8, 4)])
def test_sphere_rule_weights(n, m1, m2):
    directions, weights = quadrature.sphere_rule(n, m1, m2, 10, 10, 4)
    assert np.sum(weights) == pytest.approx(sphere_area(n), rel=1e-12)
    np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0, atol=1e-14)
    # Odd moments vanish, second moments are |S^{n-1}|/n.
    np.testing.assert_allclose(weights @ directions, 0.0, atol=1e-12)
    np.testing.assert_allclose(weights @ directions ** 2, sphere_area(n) / n, rtol=1e-10)


def test_partition_bump():
    t = np.array([0.0, 1.0, 1.5, 2.0, 3.0])
    np.testing.assert_array_equal(quadrature.partition_bump(t)[[0, 1, 3, 4]], [1.0, 1.0, 0.0, 0.0])
    assert quadrature.partition_bump(t)[2] == pytest.approx(0.5)
    s = np.linspace(1.0, 2.0, 101)
    assert np.all(np.diff(quadrature.partition_bump(s)) <= 0)


def test_integral_of_critical_power_n4():
    result = quadrature.integrate(bubble_power(4), QuadratureScheme.plain(4))
    assert result.converged
    assert result.value == pytest.approx(4 * math.pi ** 2, rel=1e-10)


def test_integral_of_critical_power_n5():
    scheme = QuadratureScheme.plain(5, QuadratureSettings(radial_nodes=16, angular_degree=24))
    result = quadrature.integrate(bubble_power(5), scheme)
    assert result.value == pytest.approx(8 * math.pi ** 2 / 3 * 2 ** 3.5 / 5, rel=1e-9)


def test_integral_over_ring_bubbles(tower, tower_scheme):
    def ring_power(y):
        return sum(eval_scaled_bubble(y, tower.ring1_params(j)) ** 3 for j in range(tower.k))

    field = ScalarField(ring_power, 4, decay_exponent=6, name='ring 1 power')
    result = quadrature.integrate(field, tower_scheme)
    expected = tower.k * tower.mu * 4 * math.pi ** 2
    assert result.value == pytest.approx(expected, rel=2e-2)


def test_regions_add_up(tower, tower_scheme):
    field = ScalarField(lambda y: eval_bubble(y, 4) ** 3, 4, decay_exponent=6)
    regions = quadrature.region_integrals(tower_scheme, lambda cell: field(cell.points))
    assert regions.value.shape == (1 + tower.k + tower.h,)
    assert np.sum(regions.value) == pytest.approx(quadrature.integrate(field, tower_scheme).value, rel=1e-12)
    # The bubble balls of one ring are congruent.
    np.testing.assert_allclose(regions.value[1:1 + tower.k], regions.value[1], rtol=1e-10)


def test_slow_decay_is_rejected():
    slow = ScalarField(lambda y: eval_bubble(y, 4), 4, decay_exponent=2, name='U')
    with pytest.raises(QuadratureError, match="integrable"):
        quadrature.integrate(slow, QuadratureScheme.plain(4))


@pytest.mark.parametrize('q', [2.0, 4.0, 1.0])
def test_norm_exponent_range(q):
    with pytest.raises(DomainError, match="open interval"):
        quadrature.check_exponent(q, 4)
    with pytest.raises(DomainError, match="open interval"):
        QuadratureScheme.plain(4, QuadratureSettings(q=q))


def test_norm_of_zero_field():
    assert quadrature.norm_starstar(zero_field(4), QuadratureScheme.plain(4)) == 0.0


def test_norm_star_of_bubble():
    field = ScalarField(lambda y: eval_bubble(y, 4), 4, decay_exponent=2, name='U')
    result = quadrature.norm_star(field, QuadratureScheme.plain(4))
    # (1 + |y|^2) U = 2 everywhere in dimension 4.
    assert result.value == pytest.approx(2.0, rel=1e-12)


def test_unknown_region(tower, tower_scheme):
    field = ScalarField(lambda y: eval_bubble(y, 4) ** 3, 4, decay_exponent=6)
    with pytest.raises(DomainError, match="no region"):
        quadrature.norm_starstar(field, tower_scheme, region=('ring1', tower.k))


@pytest.mark.parametrize('kwargs, message', [
    ({'rel_tol': 0.0}, "rel_tol"),
    ({'rel_tol': 1.0}, "rel_tol"),
    ({'radial_nodes': 1}, "radial_nodes"),
    ({'angular_degree': 2}, "angular_degree"),
    ({'max_refine': 0}, "max_refine"),
    ({'alpha_bar': 0.0}, "alpha_bar"),
    ({'cutoff_orientation': 'sideways'}, "cutoff_orientation"),
])
def test_invalid_settings(kwargs, message):
    with pytest.raises(DomainError, match=message):
        QuadratureSettings(**kwargs)


def test_overlapping_patches_are_rejected():
    config = make_configuration(4, 8, 8, 1.0, 1.0)
    with pytest.raises(QuadratureError, match="overlap"):
        QuadratureScheme.for_configuration(config, QuadratureSettings(alpha_bar=2.0))


def test_pairwise_sum_is_ordered():
    values = [np.array(float(i)) for i in range(7)]
    assert quadrature.pairwise_sum(values) == 21.0


def normalizer_density(alpha: int) -> ScalarField:
    return ScalarField(lambda y: eval_bubble(y, 4) ** 2 * eval_Z(alpha, y, 4) ** 2, 4,
                       decay_exponent=8 + 2 * min(alpha, 1), name=f'U^2 Z{alpha}^2')


def test_refinement_doubles_node_counts():
    settings = QuadratureSettings()
    assert [settings.scaled(12, level) for level in range(3)] == [12, 24, 48]


@pytest.mark.parametrize('field', [bubble_power(4), normalizer_density(0), normalizer_density(1)],
                         ids=lambda field: field.name)
def test_node_doubling_is_within_error_estimate(field):
    coarse = QuadratureSettings(radial_nodes=6, angular_degree=8)
    doubled = dataclasses.replace(coarse, radial_nodes=12, angular_degree=16)
    once = quadrature.integrate(field, QuadratureScheme.plain(4, coarse))
    twice = quadrature.integrate(field, QuadratureScheme.plain(4, doubled))
    assert abs(once.value - twice.value) <= 3 * once.err_est + 1e-13 * abs(twice.value)


def test_normalizers_agree():
    scheme = QuadratureScheme.plain(4)
    dilation = quadrature.integrate(normalizer_density(0), scheme).value
    translation = quadrature.integrate(normalizer_density(1), scheme).value
    assert dilation == pytest.approx(8 * math.pi ** 2 / 15, rel=1e-10)
    assert translation == pytest.approx(dilation, rel=1e-10)


def test_weighted_norm_of_critical_power():
    # With q = 3 the weight is (1 + |y|)^(10/3), so |weight U^3|^3 is radial.
    def radial(r):
        return 2 * math.pi ** 2 * r ** 3 * (1 + r) ** 10 * (2 / (1 + r * r)) ** 9

    oracle, _ = scipy.integrate.quad(radial, 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    value = quadrature.norm_starstar(bubble_power(4), QuadratureScheme.plain(4), q=3.0)
    assert value == pytest.approx(oracle ** (1 / 3), rel=1e-8)


def test_weighted_norm_scaling(tower, tower_scheme):
    params = tower.ring1_params(0)
    concentrated = ScalarField(lambda y: eval_scaled_bubble(y, params) ** 3, 4, decay_exponent=6,
                               name='ring bubble power')
    # mu^((n+2)/2) h(xi + mu z) is the standard U^p again.
    center = np.array(tower.xi[0])
    rescaled = ScalarField(lambda z: tower.mu ** 3 * concentrated(center + tower.mu * z), 4,
                           decay_exponent=6, name='rescaled')
    plain = QuadratureScheme.plain(4)
    assert quadrature.norm_starstar(rescaled, plain) == pytest.approx(
        quadrature.norm_starstar(bubble_power(4), plain), rel=1e-9)
    # The concentrated field sees the weight at its centre: its norm is
    # (1 + |xi|)^(10/3) mu^(n/q - (n+2)/2) times the unweighted norm of U^p.
    unweighted = (512 * math.pi ** 2 / 56) ** (1 / 3)
    expected = (1 + np.linalg.norm(center)) ** (10 / 3) * tower.mu ** (4 / 3 - 3) * unweighted
    assert quadrature.norm_starstar(concentrated, tower_scheme) == pytest.approx(expected, rel=2e-2)


def test_weighted_norm_reports_convergence():
    field = bubble_power(4)
    rough = QuadratureScheme.plain(4, QuadratureSettings(radial_nodes=4, angular_degree=4, rel_tol=1e-12))
    result = quadrature.weighted_norm(field, rough)
    assert not result.converged
    assert result.err_est > 0
    assert result.value == quadrature.norm_starstar(field, rough)
    assert quadrature.weighted_norm(field, QuadratureScheme.plain(4)).converged


def test_unknown_region_is_rejected_before_integration():
    with pytest.raises(DomainError, match="no region"):
        quadrature.norm_starstar(bubble_power(4), QuadratureScheme.plain(4), region='ring1')
