import logging

import numpy as np

from bubbletower import command
from bubbletower.bubble import kelvin, squared_norm
from bubbletower.configuration import make_configuration, min_separation
from bubbletower.error_field import eval_Ustar
from bubbletower.kernel_basis import sample_points

_logger = logging.getLogger(__name__)

KELVIN_TOLERANCE = 1e-10


class Construct(command.Command):
    # language=rst
    """Builds the configuration and checks its exact invariants.

    Writes :file:`configuration.json`: the configuration, the separation of
    the centres and the residuals of :math:`|\\xi_j|^2 + \\mu^2 = 1` and of the
    Kelvin invariance of :math:`U_*`.

    """

    NAME = 'construct'

    def __init__(self, run):
        super().__init__(run)
        self.config = make_configuration(run.n, run.k, run.h, run.delta, run.eps)
        self.kelvin_residual = None

    def execute(self) -> bool:
        config = self.config
        radius = np.concatenate([
            squared_norm(config.xi) + config.mu ** 2, squared_norm(config.eta) + config.lam ** 2
        ])
        sample = sample_points(config, seed=self.run.seed)
        ustar = eval_Ustar(config, sample)
        self.kelvin_residual = float(
            np.max(np.abs(kelvin(lambda y: eval_Ustar(config, y), sample, config.n) - ustar)) /
            np.max(np.abs(ustar))
        )
        ring1, ring2, cross = min_separation(config)
        self.write_json('configuration.json', {
            'configuration': config.to_mapping(),
            'min_separation': {'ring1': ring1, 'ring2': ring2, 'cross': cross},
            'unit_sphere_residual': float(np.max(np.abs(radius - 1.0))),
            'kelvin_residual': self.kelvin_residual,
        })
        return self.kelvin_residual <= KELVIN_TOLERANCE

    @property
    def summary(self) -> str:
        return (f"construct n={self.config.n} k={self.config.k} h={self.config.h}: "
                f"mu={self.config.mu:.6g} lambda={self.config.lam:.6g}, "
                f"Kelvin residual {self.kelvin_residual:.3g}")
