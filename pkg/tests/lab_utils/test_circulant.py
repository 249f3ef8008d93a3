import numpy as np
import pytest

import lab_utils

from .helpers import explicit_circulant, orthogonal_to_ring_modes


@pytest.mark.parametrize('m', [3, 4, 7, 8, 16, 31, 32])
def test_matvec_matches_dense(m, rng):
    row = rng.standard_normal(m)
    c = lab_utils.CirculantMatrix(row)
    dense = explicit_circulant(row)
    np.testing.assert_allclose(c.to_dense(), dense, rtol=0, atol=0)
    for _ in range(3):
        x = rng.standard_normal(m)
        np.testing.assert_allclose(c @ x, dense @ x, rtol=0, atol=1e-10 * np.abs(dense).sum())
        np.testing.assert_allclose(lab_utils.circ_matvec(c, x), dense @ x,
                                   rtol=0, atol=1e-10 * np.abs(dense).sum())


def test_eigenvalues_belong_to_fourier_modes(rng):
    m = 9
    c = lab_utils.CirculantMatrix(rng.standard_normal(m))
    dense = c.to_dense()
    for k in range(m):
        mode = np.exp(2j * np.pi * np.arange(m) * k / m)
        np.testing.assert_allclose(dense @ mode, c.eigenvalues[k] * mode, atol=1e-12)


def test_from_dense_reports_deviation():
    row = [3.0, 1.0, 0.5, 1.0]
    c, deviation = lab_utils.CirculantMatrix.from_dense(explicit_circulant(row))
    assert deviation == 0.0
    np.testing.assert_array_equal(c.first_row, row)
    perturbed = explicit_circulant(row)
    perturbed[2, 1] += 0.25
    _, deviation = lab_utils.CirculantMatrix.from_dense(perturbed)
    assert deviation == pytest.approx(0.25)


def test_invalid_shapes():
    with pytest.raises(ValueError):
        lab_utils.CirculantMatrix([])
    with pytest.raises(ValueError):
        lab_utils.CirculantMatrix([1.0, 2.0]).matvec([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        lab_utils.CirculantMatrix.from_dense(np.ones((2, 3)))


@pytest.mark.parametrize('m', [5, 8, 12, 32])
def test_deflated_solve(m, rng, symmetric_circulant):
    c = symmetric_circulant(m)
    deflation = lab_utils.ring_modes(m)
    rhs = orthogonal_to_ring_modes(rng.standard_normal(m))
    w = lab_utils.circ_solve_deflated(c, rhs, deflation)
    np.testing.assert_allclose(c.to_dense() @ w, rhs, atol=1e-10 * np.linalg.norm(rhs))
    for mode in deflation:
        assert abs(w @ mode) < 1e-10 * np.linalg.norm(w)


def test_deflated_modes():
    assert lab_utils.deflated_modes(8, lab_utils.ring_modes(8)) == frozenset({1, 7})
    assert lab_utils.deflated_modes(8, ()) == frozenset()
    with pytest.raises(ValueError):
        # A lone cos vector touches two Fourier modes.
        lab_utils.deflated_modes(8, [lab_utils.ring_modes(8)[0]])


def test_inconsistent_rhs(symmetric_circulant):
    m = 8
    cos_, sin_ = lab_utils.ring_modes(m)
    with pytest.raises(lab_utils.ConsistencyError) as excinfo:
        lab_utils.circ_solve_deflated(symmetric_circulant(m), cos_ + 0.5, (cos_, sin_))
    products = excinfo.value.inner_products
    assert len(products) == 2
    assert abs(products[0]) > 0.1
    assert abs(products[1]) < 1e-12


def test_singular_outside_deflation():
    # Constant rows annihilate every mode except mode 0.
    c = lab_utils.CirculantMatrix(np.ones(6))
    with pytest.raises(np.linalg.LinAlgError):
        lab_utils.circ_solve_deflated(c, orthogonal_to_ring_modes(np.arange(6.0)) - 2.5,
                                      lab_utils.ring_modes(6))


def _system(symmetric_circulant, rng, k, h, gamma):
    return lab_utils.BlockInteractionSystem(
        symmetric_circulant(k), symmetric_circulant(h), gamma,
        orthogonal_to_ring_modes(rng.standard_normal(k)),
        orthogonal_to_ring_modes(rng.standard_normal(h)),
    )


@pytest.mark.parametrize('k,h', [(8, 8), (8, 12), (16, 6), (32, 32)])
def test_contraction_matches_dense_oracle(k, h, rng, symmetric_circulant):
    system = _system(symmetric_circulant, rng, k, h, gamma=0.1)
    assert system.contraction_factor() < 1
    result = lab_utils.solve_block_contraction(system)
    wbar, what = lab_utils.dense_deflated_solve(system)
    solution = np.concatenate([result.wbar, result.what])
    dense = np.concatenate([wbar, what])
    np.testing.assert_allclose(solution, dense, rtol=0, atol=1e-8 * np.max(np.abs(dense)))
    full = system.dense() @ dense
    np.testing.assert_allclose(full, np.concatenate([system.rbar, system.rhat]), atol=1e-10)


def test_uncoupled_system_takes_one_sweep(rng, symmetric_circulant):
    system = _system(symmetric_circulant, rng, 8, 8, gamma=0.0)
    assert system.contraction_factor() == 0.0
    assert lab_utils.solve_block_contraction(system).iterations == 1


def test_contraction_diverges(rng, symmetric_circulant):
    system = _system(symmetric_circulant, rng, 8, 8, gamma=10.0)
    assert system.contraction_factor() > 1
    with pytest.raises(lab_utils.ConvergenceError) as excinfo:
        lab_utils.solve_block_contraction(system, max_iter=30)
    assert excinfo.value.contraction_factor == pytest.approx(system.contraction_factor())


def test_contraction_factor_closed_form():
    system = lab_utils.BlockInteractionSystem(
        lab_utils.CirculantMatrix([4.0, 1.0, 0.0, 1.0]),
        lab_utils.CirculantMatrix([3.0, 1.0, 1.0]),
        0.5, np.zeros(4), np.zeros(3),
    )
    # gamma^2 k h / (lambda_bar_0 lambda_hat_0)
    assert system.contraction_factor() == pytest.approx(0.25 * 12 / (6.0 * 5.0))
    assert system.product_bound() >= system.contraction_factor()


def test_dense_oracle_size_limit(rng, symmetric_circulant):
    system = _system(symmetric_circulant, rng, 40, 40, gamma=0.1)
    with pytest.raises(ValueError):
        lab_utils.dense_deflated_solve(system)
