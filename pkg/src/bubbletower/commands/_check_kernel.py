import logging

from bubbletower import command, kernel_basis
from bubbletower.configuration import make_configuration
from bubbletower.nondegeneracy import APPENDIX_TOLERANCE
from bubbletower.quadrature import QuadratureScheme

_logger = logging.getLogger(__name__)


class CheckKernel(command.Command):
    # language=rst
    """Rank and residuals of the kernel candidates.

    Writes :file:`kernel.json`.  Passes if the Gram rank is :math:`N_0` and the
    pointwise decomposition residuals are below the appendix tolerance.

    """

    NAME = 'check-kernel'

    def __init__(self, run):
        super().__init__(run)
        self.config = make_configuration(run.n, run.k, run.h, run.delta, run.eps)
        self.gram = None
        self.appendix = ()

    def execute(self) -> bool:
        config = self.config
        scheme = QuadratureScheme.for_configuration(config, self.settings)
        self.gram = kernel_basis.gram_rank(config, scheme)
        sample = kernel_basis.sample_points(config, seed=self.run.seed)
        self.appendix = kernel_basis.appendix_max_residuals(config, sample)
        L_norms, L_converged = kernel_basis.residual_norms(config, scheme)
        basis = kernel_basis.KernelBasis(config)
        self.write_json('kernel.json', {
            'N0': basis.N0,
            'script_N': basis.script_N,
            'labels': basis.labels(),
            'rebasing_determinant': basis.rebasing_determinant(),
            'rank': self.gram.rank,
            'singular_values': self.gram.singular_values,
            'min_singular_ratio': self.gram.min_singular_ratio,
            'rank_sweep': {f'{t:g}': r for t, r in self.gram.rank_sweep.items()},
            'appendix_max_residuals': self.appendix,
            'kelvin_lemma': kernel_basis.kelvin_lemma_residual(config, sample),
            'L_residual_norms': L_norms,
            'converged': self.gram.converged and L_converged,
        })
        return self.gram.rank == basis.N0 and max(self.appendix) <= APPENDIX_TOLERANCE

    @property
    def summary(self) -> str:
        return (f"check-kernel n={self.config.n} k={self.config.k} h={self.config.h}: "
                f"rank {self.gram.rank} of {kernel_basis.N0(self.config.n)}, "
                f"appendix residual {max(self.appendix):.3g}")
