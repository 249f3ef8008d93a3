# language=rst
"""
The nondegeneracy certificate of one configuration.

:func:`certify` runs every computable check on the kernel candidates and
bundles the results into a :class:`NondegeneracyReport`.  With no correction
to the approximate solution, the certificate can only show that the
:math:`N_0 = 5(n-1)` candidates are linearly independent and nearly in the
kernel; it can't exclude other kernel elements.

"""

import concurrent.futures
import dataclasses
import logging
import typing as T

import numpy as np

import lab_utils

from . import circulant_algebra, kernel_basis
from .config import worker_count
from .configuration import TowerConfiguration
from .errors import BubbletowerError, DomainError
from .quadrature import QuadratureScheme

_logger = logging.getLogger(__name__)


APPENDIX_TOLERANCE = 1e-8
SAMPLE_COUNT = 100
CAVEAT = ("Consistency evidence at zero correction: the kernel candidates are linearly "
          "independent and their linearized residuals are small. This is not a proof "
          "that the kernel has no other elements.")

_CAPTURED = (BubbletowerError, lab_utils.LabError, np.linalg.LinAlgError)


@dataclasses.dataclass(frozen=True)
class NondegeneracyReport:
    # language=rst
    """Everything :func:`certify` measured.

    :ivar maximal: whether :math:`N_0` equals :math:`2n + 1 + n(n-1)/2`, which
        is the case exactly for :math:`n = 4`.
    :ivar circulant_kernel_residuals: per :math:`\\alpha`, the relative
        residual of the known kernel vectors of the interaction matrices.
    :ivar warnings: names of the quadratures that didn't reach ``rel_tol``.
    :ivar failures: per check that raised, the error message.

    """
    config: T.Mapping[str, T.Any]
    N0: int
    script_N: int
    maximal: bool
    gram_rank: T.Optional[int]
    min_singular_ratio: T.Optional[float]
    singular_values: T.Tuple[float, ...]
    rank_sweep: T.Mapping[str, int]
    appendix_max_residual: T.Optional[float]
    appendix_residuals: T.Tuple[float, ...]
    kelvin_lemma: T.Mapping[str, float]
    l_image_kelvin: T.Mapping[str, float]
    L_residual_table: T.Tuple[float, ...]
    circulant_kernel_residuals: T.Mapping[str, float]
    k_over_h: float
    small_rings: bool
    cutoff_orientation: str
    warnings: T.Tuple[str, ...]
    failures: T.Mapping[str, str]
    caveat: str = CAVEAT

    @property
    def passed(self) -> bool:
        return (not self.failures and self.gram_rank == self.N0 and
                self.appendix_max_residual is not None and
                self.appendix_max_residual <= APPENDIX_TOLERANCE)

    def to_mapping(self) -> T.Dict[str, T.Any]:
        result = dataclasses.asdict(self)
        result['pass'] = self.passed
        return result


def _circulant_kernel_residuals(config: TowerConfiguration,
                                scheme: QuadratureScheme) -> T.Tuple[T.Dict[str, float], bool]:
    matrix = circulant_algebra.interaction_matrix(
        config, circulant_algebra.m1_fields(config), scheme, 'M1'
    )
    residuals = circulant_algebra.kernel_residuals(
        matrix.matrix, circulant_algebra.m1_kernel_vectors(config)
    )
    result = {f'alpha{alpha}': r for alpha, r in enumerate(residuals)}
    converged = matrix.converged
    for alpha in range(5, config.n + 1):
        htilde = circulant_algebra.assemble_Htilde(config, alpha, scheme)
        result[f'alpha{alpha}'] = htilde.row_sum_residual
        converged = converged and htilde.converged
    return result, converged


def certify(config: TowerConfiguration, scheme: QuadratureScheme,
            sample_count: int=SAMPLE_COUNT, seed: int=kernel_basis.SAMPLE_SEED) -> NondegeneracyReport:
    # language=rst
    """Runs all checks concurrently and assembles the report.

    A check that raises doesn't stop the others; its message is recorded in
    ``failures`` and the report doesn't pass.

    :raises: DomainError if the configuration has no rings.

    """
    if config.k == 0 or config.h == 0:
        raise DomainError("no rings: certify needs k ≥ 3 and h ≥ 3")
    if scheme.config != config:
        raise DomainError("the quadrature scheme belongs to a different configuration")
    n = config.n
    sample = kernel_basis.sample_points(config, sample_count, seed)
    checks = {
        'gram': lambda: kernel_basis.gram_rank(config, scheme),
        'appendix': lambda: kernel_basis.appendix_max_residuals(config, sample),
        'kelvin_lemma': lambda: kernel_basis.kelvin_lemma_residual(config, sample),
        'l_image_kelvin': lambda: kernel_basis.l_image_kelvin_residual(config, sample),
        'residual_norms': lambda: kernel_basis.residual_norms(config, scheme),
        'circulant': lambda: _circulant_kernel_residuals(config, scheme),
    }
    results, failures = {}, {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(worker_count(), len(checks))) as pool:
        futures = {name: pool.submit(check) for name, check in checks.items()}
        for name, future in futures.items():
            try:
                results[name] = future.result()
            except _CAPTURED as e:
                _logger.error("Check %s failed: %s", name, e)
                failures[name] = f"{type(e).__name__}: {e}"

    warnings = []
    gram = results.get('gram')
    if gram is not None and not gram.converged:
        warnings.append('gram')
    residual_norms, residuals_converged = results.get('residual_norms', ((), True))
    if not residuals_converged:
        warnings.append('residual_norms')
    circulant, circulant_converged = results.get('circulant', ({}, True))
    if not circulant_converged:
        warnings.append('circulant')
    appendix = results.get('appendix', ())

    report = NondegeneracyReport(
        config=config.to_mapping(),
        N0=kernel_basis.N0(n),
        script_N=kernel_basis.script_N(n),
        maximal=kernel_basis.N0(n) == kernel_basis.script_N(n),
        gram_rank=gram.rank if gram is not None else None,
        min_singular_ratio=gram.min_singular_ratio if gram is not None else None,
        singular_values=gram.singular_values if gram is not None else (),
        rank_sweep={f'{t:g}': r for t, r in gram.rank_sweep.items()} if gram is not None else {},
        appendix_max_residual=max(appendix) if appendix else None,
        appendix_residuals=tuple(appendix),
        kelvin_lemma=results.get('kelvin_lemma', {}),
        l_image_kelvin=results.get('l_image_kelvin', {}),
        L_residual_table=tuple(residual_norms),
        circulant_kernel_residuals=circulant,
        k_over_h=config.ring_ratio,
        small_rings=config.small_rings,
        cutoff_orientation=scheme.settings.cutoff_orientation,
        warnings=tuple(warnings),
        failures=failures,
    )
    _logger.info("Certificate n=%d k=%d h=%d: rank %s of %d, appendix residual %s, pass=%s",
                 n, config.k, config.h, report.gram_rank, report.N0,
                 report.appendix_max_residual, report.passed)
    return report
