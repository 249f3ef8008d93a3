import logging

from bubbletower import command, reduction
from bubbletower.configuration import make_configuration
from bubbletower.errors import NoRootError

_logger = logging.getLogger(__name__)


class SolveReduced(command.Command):
    # language=rst
    """Solves the two reduced equations for :math:`(\\delta^*, \\varepsilon^*)`.

    Writes :file:`reduced.json`.  Without a sign change in the admissible box
    the file holds the sampled coefficient table instead, and the command
    fails.

    """

    NAME = 'solve-reduced'

    def __init__(self, run):
        super().__init__(run)
        # Validates the ring sizes.
        self.k = run.k
        make_configuration(run.n, run.k, run.h, 1.0, 1.0)
        self.solution = None
        self.failure = None

    def execute(self) -> bool:
        run = self.run
        try:
            self.solution = reduction.solve_reduced(run.n, self.k, run.h, self.settings)
        except NoRootError as e:
            self.failure = str(e)
            self.write_json('reduced.json', {
                'n': run.n, 'k': self.k, 'h': run.h, 'q': self.settings.q,
                'failure': self.failure,
                'table': e.table,
            })
            return False
        self.write_json('reduced.json', self.solution.to_mapping())
        return self.solution.genuine

    @property
    def summary(self) -> str:
        if self.solution is None:
            return f"solve-reduced n={self.run.n} k={self.k} h={self.run.h}: {self.failure}"
        s = self.solution
        return (f"solve-reduced n={s.n} k={s.k} h={s.h}: delta*={s.delta_star:.8g} "
                f"eps*={s.eps_star:.8g} genuine={s.genuine}")
