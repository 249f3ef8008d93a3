import dataclasses

import pytest

from bubbletower import nondegeneracy
from bubbletower.configuration import make_configuration, single_bubble
from bubbletower.errors import DomainError
from bubbletower.quadrature import QuadratureScheme


def test_certify_needs_rings(coarse_settings):
    config = single_bubble(4)
    with pytest.raises(DomainError, match="no rings"):
        nondegeneracy.certify(config, QuadratureScheme.plain(4, coarse_settings))


def test_certify_needs_matching_scheme(tower_scheme):
    with pytest.raises(DomainError, match="different configuration"):
        nondegeneracy.certify(make_configuration(4, 8, 8, 1.0, 3.0), tower_scheme)


@pytest.mark.slow
def test_certificate(tower, tower_scheme):
    report = nondegeneracy.certify(tower, tower_scheme)
    assert report.failures == {}
    assert (report.N0, report.script_N) == (15, 15)
    assert report.maximal
    assert report.appendix_max_residual <= nondegeneracy.APPENDIX_TOLERANCE
    assert len(report.appendix_residuals) == 15
    assert set(report.circulant_kernel_residuals) == {f'alpha{a}' for a in range(5)}
    assert report.cutoff_orientation == 'inner'
    assert report.k_over_h == 1.0
    mapping = report.to_mapping()
    assert mapping['pass'] == report.passed
    assert mapping['caveat'] == nondegeneracy.CAVEAT
    # A failed check is enough to fail the report.
    assert not dataclasses.replace(report, failures={'gram': 'LinAlgError: SVD did not converge'}).passed
