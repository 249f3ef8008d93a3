import logging

from bubbletower import command, nondegeneracy, reduction
from bubbletower.configuration import make_configuration
from bubbletower.errors import NoRootError
from bubbletower.quadrature import QuadratureScheme

_logger = logging.getLogger(__name__)


class Certify(command.Command):
    # language=rst
    """The full pipeline: solve the reduced system, then certify the root.

    If the reduced system has no root in the admissible box, the configured
    ``delta`` and ``eps`` are certified instead and the report says so.
    Writes :file:`report.json`; the command passes if the report does.

    """

    NAME = 'certify'

    def __init__(self, run):
        super().__init__(run)
        self.k = run.k
        make_configuration(run.n, run.k, run.h, run.delta, run.eps)
        self.report = None

    def execute(self) -> bool:
        run = self.run
        root = None
        try:
            solution = reduction.solve_reduced(run.n, self.k, run.h, self.settings)
            delta, eps = solution.delta_star, solution.eps_star
            root = {'delta_star': delta, 'eps_star': eps, 'genuine': solution.genuine,
                    'residuals': solution.residuals}
        except NoRootError as e:
            _logger.warning("%s; certifying delta=%g eps=%g instead", e, run.delta, run.eps)
            delta, eps = run.delta, run.eps
        config = make_configuration(run.n, self.k, run.h, delta, eps)
        scheme = QuadratureScheme.for_configuration(config, self.settings)
        self.report = nondegeneracy.certify(config, scheme, seed=run.seed)
        self.write_json('report.json', dict(self.report.to_mapping(), root=root))
        return self.report.passed

    @property
    def summary(self) -> str:
        r = self.report
        return (f"certify n={self.run.n} k={self.k} h={self.run.h}: rank {r.gram_rank} of {r.N0}, "
                f"maximal={r.maximal}, pass={r.passed}")
