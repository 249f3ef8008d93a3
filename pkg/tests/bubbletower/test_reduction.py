import math

import pytest

from bubbletower import reduction
from bubbletower.configuration import make_configuration
from bubbletower.errors import DomainError, NoRootError
from bubbletower.kernel_basis import RING1, RING2


@pytest.fixture(scope='module')
def coefficients(tower, tower_scheme):
    return reduction.reduced_coefficients(tower, tower_scheme)


def test_interaction_constant_limit():
    assert reduction.interaction_constant_limit(4) == pytest.approx(-8 * math.pi ** 2 / 3, rel=1e-14)
    assert reduction.interaction_constant_limit(5) < 0
    assert reduction.interaction_constant_limit(6) < 0


def test_standard_denominator():
    # 16 * pi^2 / 2 * int_1^inf (s^-3 - 5 s^-4 + 8 s^-5 - 4 s^-6) ds
    assert reduction.standard_denominator(4) == pytest.approx(8 * math.pi ** 2 / 15, rel=1e-8)


def test_denominators_are_scale_invariant(coefficients):
    assert coefficients.denominator_bar == pytest.approx(reduction.standard_denominator(4), rel=2e-2)
    assert coefficients.denominator_hat == pytest.approx(coefficients.denominator_bar, rel=1e-9)


def test_pieces_add_up(coefficients):
    for ring, c0, denominator in ((RING1, coefficients.cbar0, coefficients.denominator_bar),
                                  (RING2, coefficients.chat0, coefficients.denominator_hat)):
        pieces = coefficients.pieces[ring]
        assert set(pieces) == {'ball', 'exterior', 'other_ring1', 'other_ring2'}
        assert sum(pieces.values()) == pytest.approx(c0 * denominator, rel=1e-12, abs=1e-300)


def test_plane_exchange_swaps_coefficients(coefficients):
    # k = h and delta = eps
    assert coefficients.chat0 == pytest.approx(coefficients.cbar0, rel=1e-9)
    assert coefficients.pieces[RING1]['ball'] == pytest.approx(coefficients.pieces[RING2]['ball'], rel=1e-9)


def test_coefficients_mapping(coefficients, tower):
    mapping = coefficients.to_mapping()
    assert mapping['k'] == tower.k
    assert mapping['q'] == 3.0
    assert set(mapping['pieces']) == {RING1, RING2}


@pytest.mark.parametrize('ring', [0, 3, 'ring3'])
def test_projected_coefficient_rings(tower, tower_scheme, ring):
    with pytest.raises(DomainError, match="ring must be 1 or 2"):
        reduction.projected_coefficient(tower, ring, tower_scheme)


def test_projected_coefficient(tower, tower_scheme, coefficients):
    assert reduction.projected_coefficient(tower, 1, tower_scheme) == coefficients.cbar0


def test_mismatched_scheme(tower_scheme, coarse_settings):
    other = make_configuration(4, 8, 8, 2.0, 1.0)
    with pytest.raises(DomainError, match="different configuration"):
        reduction.reduced_coefficients(other, tower_scheme)
    with pytest.raises(DomainError, match="different configuration"):
        reduction.claim_split(other, tower_scheme)


def test_coefficient_table(coarse_settings):
    table = reduction.coefficient_table(4, 8, 8, [0.5, 1.0], settings=coarse_settings)
    assert [row['delta'] for row in table] == [0.5, 1.0]
    for row in table:
        assert row['eps'] == row['delta']
        assert row['chat0'] == pytest.approx(row['cbar0'], rel=1e-9)
    fixed = reduction.coefficient_table(4, 8, 8, [0.5], eps=2.0, settings=coarse_settings)
    assert fixed[0]['eps'] == 2.0


def test_claim_split(tower, tower_scheme):
    split = reduction.claim_split(tower, tower_scheme)
    assert split.k == tower.k
    assert split.total > 0
    assert math.isfinite(split.ratio)
    assert reduction.ClaimSplit(8, 1.0, 0.0, True).ratio == math.inf
    assert reduction.ClaimSplit(8, 1.0, 4.0, True).ratio == 0.25


def test_pair_interaction_with_itself(tower):
    with pytest.raises(DomainError, match="itself"):
        reduction.pair_interaction(tower, 0)


@pytest.mark.parametrize('k', [8, 16])
def test_pair_interaction_approaches_its_limit(k):
    config = make_configuration(4, k, k, 1.0, 1.0)
    interaction = reduction.pair_interaction(config, 0, ring=RING2)
    # The ball has radius k; outside it U^2 Z_0 leaves 6 (1/S - 3/(2 S^2) + 2/(3 S^3))
    # of the full integral, with S = 1 + k^2.
    s = 1.0 + k ** 2
    missing = 6 * (1 / s - 3 / (2 * s ** 2) + 2 / (3 * s ** 3))
    assert interaction.limit == reduction.interaction_constant_limit(4)
    assert interaction.ratio == pytest.approx(interaction.limit * (1 - missing), rel=1e-3)


def test_solver_options():
    options = reduction.SolverOptions()
    assert options.tol == 1e-8
    assert options.box[0] < 1.0 < options.box[1]


@pytest.mark.slow
def test_solve_reduced(coarse_settings):
    try:
        solution = reduction.solve_reduced(4, 8, 8, coarse_settings, reduction.SolverOptions(scan_points=5))
    except NoRootError as e:
        assert len(e.table) == 5
    else:
        assert solution.delta_star == solution.eps_star
        assert solution.residuals
        assert reduction.SolverOptions().box[0] <= solution.delta_star <= reduction.SolverOptions().box[1]
