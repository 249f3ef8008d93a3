import numpy as np
import pytest

from bubbletower import kernel_basis
from bubbletower.bubble import scaled_bubble_gradient
from bubbletower.configuration import make_configuration, single_bubble
from bubbletower.errors import DomainError
from bubbletower.kernel_basis import CENTER, RING1, RING2, Site
from bubbletower.quadrature import QuadratureScheme


@pytest.fixture(scope='module')
def sample(tower):
    return kernel_basis.sample_points(tower)


@pytest.mark.parametrize('n, N0, script_N', [(4, 15, 15), (5, 20, 21), (6, 25, 28)])
def test_counts(n, N0, script_N):
    assert kernel_basis.N0(n) == N0
    assert kernel_basis.script_N(n) == script_N
    assert len(kernel_basis.generators(n)) == N0


def test_generator_labels(tower):
    labels = kernel_basis.KernelBasis(tower).labels()
    assert labels[:8] == ('dilation', 'translation1', 'translation2', 'translation3', 'translation4',
                          'rotation12', 'rotation34', 'conformal1')
    assert labels[-4:] == ('rotation13', 'rotation14', 'rotation23', 'rotation24')
    assert len(set(labels)) == len(labels)


@pytest.mark.parametrize('n', [4, 5, 7])
def test_rebasing_determinant(n):
    assert np.linalg.det(kernel_basis.rebasing_matrix(n)) == pytest.approx(1 / 16)


def test_sample_points(tower, sample):
    assert sample.shape == (100, 4)
    radii = np.linalg.norm(sample, axis=1)
    assert np.all((radii >= 0.05 * (1 - 1e-12)) & (radii <= 20.0 * (1 + 1e-12)))
    for center in tower.xi:
        assert np.all(np.linalg.norm(sample - center, axis=1) > 2 * tower.mu)
    np.testing.assert_array_equal(kernel_basis.sample_points(tower), sample)


def test_decompositions_reproduce_fields(tower, sample):
    residuals = kernel_basis.appendix_max_residuals(tower, sample)
    assert len(residuals) == 15
    assert max(residuals) <= 1e-8


def test_decompositions_in_dimension_five():
    config = make_configuration(5, 8, 8, 1.0, 1.0)
    residuals = kernel_basis.appendix_max_residuals(config, kernel_basis.sample_points(config, 50))
    assert len(residuals) == 20
    assert max(residuals) <= 1e-8


def test_rebased_fields(tower, sample):
    for a in range(1, 5):
        beta = tower.n + 2 + a
        expected = 0.5 * (kernel_basis.eval_z(a, sample, tower) - kernel_basis.eval_z(beta, sample, tower))
        np.testing.assert_allclose(kernel_basis.eval_bold_z(beta, sample, tower), expected, rtol=0, atol=0)
        np.testing.assert_allclose(kernel_basis.z_values(tower, sample, bold=True)[beta], expected,
                                   rtol=0, atol=1e-12 * np.max(np.abs(expected)))


def test_rotation_of_ring_plane_only_sees_ring_one(tower):
    terms = kernel_basis.z_decomposition(tower.n + 1, tower)
    assert {t.site.kind for t in terms} == {RING1}
    assert all(t.alpha == 2 and t.coef == -1.0 for t in terms)


def test_special_conformal_identities(tower, sample):
    residuals = kernel_basis.kelvin_lemma_residual(tower, sample)
    assert set(residuals) == {'central', 'ring1', 'ring2'}
    assert max(residuals.values()) <= 1e-9


def test_linearized_images_have_kelvin_parity(tower, sample):
    residuals = kernel_basis.l_image_kelvin_residual(tower, sample)
    assert set(residuals) == {f'alpha{a}' for a in range(5)}
    assert max(residuals.values()) <= 1e-8


def test_single_bubble_kernel_is_exact():
    config = single_bubble(4)
    y = kernel_basis.sample_points(config, 50)
    for alpha in range(5):
        np.testing.assert_allclose(kernel_basis.eval_L_Zgroup(config, alpha, Site(CENTER), y), 0.0,
                                   atol=1e-12)


def test_frame_fields(tower, sample):
    gradient = scaled_bubble_gradient(sample, tower.ring2_params(2))
    np.testing.assert_allclose(kernel_basis.eval_Zgroup(tower, 3, Site(RING2, 2), sample),
                               gradient @ tower.eta[2])
    np.testing.assert_allclose(kernel_basis.eval_Zgroup(tower, 1, Site(RING2, 2), sample),
                               gradient[:, 0])


def test_pi_lists_every_site(tower):
    fields = kernel_basis.Pi(tower, 3)
    assert len(fields) == 1 + tower.k + tower.h
    assert fields[0].name == 'Z[3, center 0]'


@pytest.mark.parametrize('site', [Site(RING1, 8), Site(RING2, -1), Site('ring3', 0)])
def test_unknown_sites(tower, site):
    with pytest.raises(DomainError, match="no site"):
        kernel_basis.site_params(tower, site)


def test_beta_range(tower):
    with pytest.raises(DomainError, match="beta"):
        kernel_basis.eval_z(15, np.zeros(4), tower)
    with pytest.raises(DomainError, match="beta"):
        kernel_basis.KernelBasis(tower).z(-1)


def test_kernel_basis_fingerprint(tower):
    basis = kernel_basis.KernelBasis(tower)
    assert basis.N0 == basis.script_N == 15
    assert basis.rebasing_determinant() == pytest.approx(1 / 16)
    assert len(basis.fingerprint()) == 40
    assert basis.fingerprint() == kernel_basis.KernelBasis(make_configuration(4, 8, 8, 1.0, 1.0)).fingerprint()
    assert basis.fingerprint() != kernel_basis.KernelBasis(make_configuration(4, 8, 9, 1.0, 1.0)).fingerprint()


@pytest.mark.slow
def test_gram_matrix_has_full_rank(tower):
    result = kernel_basis.gram_rank(tower, QuadratureScheme.for_configuration(tower))
    assert result.rank == 15
    np.testing.assert_allclose(result.gram, result.gram.T)
    assert result.rank_sweep[1e-4] <= result.rank_sweep[1e-8]
