import logging

from bubbletower import circulant_algebra, command
from bubbletower.configuration import make_configuration
from bubbletower.quadrature import QuadratureScheme

_logger = logging.getLogger(__name__)


class CirculantCheck(command.Command):
    # language=rst
    """The structure of the ring interaction matrices.

    Writes :file:`circulant.json` with the letter blocks of :math:`M_1`, the
    :math:`\\beta` table, the orthogonality conditions, the kernel residuals
    and a contraction solve of every coupled ring system.  Fails if any block
    system can't be solved.

    """

    NAME = 'circulant-check'

    def __init__(self, run):
        super().__init__(run)
        self.config = make_configuration(run.n, run.k, run.h, run.delta, run.eps)
        self.reports = ()

    def execute(self) -> bool:
        config = self.config
        scheme = QuadratureScheme.for_configuration(config, self.settings)
        blocks = circulant_algebra.assemble_M1_blocks(config, scheme)
        betas = circulant_algebra.beta_table(config, scheme)
        conditions = circulant_algebra.check_orthogonality_conditions(blocks, seed=self.run.seed)
        kernel = circulant_algebra.kernel_residuals(
            blocks.matrix, circulant_algebra.m1_kernel_vectors(config)
        )
        htilde = {}
        reports = []
        for alpha in (0, *range(5, config.n + 1)):
            if alpha >= 5:
                result = circulant_algebra.assemble_Htilde(config, alpha, scheme)
                htilde[f'alpha{alpha}'] = result.row_sum_residual
            assembled = circulant_algebra.block_system(config, alpha, scheme, seed=self.run.seed)
            report = circulant_algebra.solve_block_system(assembled, config.n)
            reports.append(dict(report.to_mapping(),
                                circulant_deviation=assembled.circulant_deviation,
                                coupling_spread=assembled.coupling_spread))
        self.reports = tuple(reports)
        self.write_json('circulant.json', {
            'M1': blocks.to_mapping(),
            'beta': betas.to_mapping(),
            'orthogonality': conditions.to_mapping(),
            'kernel_residuals': {f'alpha{beta}': r for beta, r in enumerate(kernel)},
            'Htilde_row_sum_residuals': htilde,
            'block_systems': self.reports,
        })
        return all(report['failure'] is None for report in self.reports)

    @property
    def summary(self) -> str:
        factors = ', '.join(f"alpha={r['alpha']}: {r['contraction_factor']:.3g}" for r in self.reports)
        return (f"circulant-check n={self.config.n} k={self.config.k} h={self.config.h}: "
                f"contraction factors {factors}")
