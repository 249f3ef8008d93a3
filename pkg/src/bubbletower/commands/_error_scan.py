import logging

from bubbletower import command
from bubbletower.configuration import make_configuration
from bubbletower.error_field import ErrorScan as ErrorScanResult, error_scan

_logger = logging.getLogger(__name__)


class ErrorScan(command.Command):
    # language=rst
    """Weighted error norms over a list of ring sizes.

    Writes :file:`error_scan.csv` with the columns of
    :attr:`bubbletower.error_field.ErrorScan.CSV_COLUMNS`, one row per ring
    size and region, and :file:`error_scan.json` with the fitted exponents.

    """

    NAME = 'error-scan'

    def __init__(self, run):
        super().__init__(run)
        for k in run.ks:
            make_configuration(run.n, k, max(3, int(round(run.h_ratio * k))), run.delta, run.eps)
        self.result = None

    def execute(self) -> bool:
        run = self.run
        self.result = error_scan(run.n, run.ks, run.delta, run.eps, self.settings, run.h_ratio)
        self.write_csv('error_scan.csv', ErrorScanResult.CSV_COLUMNS, self.result.csv_rows())
        self.write_json('error_scan.json', {
            'n': self.result.n,
            'q': self.result.q,
            'ks': [row.k for row in self.result.rows],
            'fitted_exponents': self.result.fitted_exponents,
            'predicted_exponents': self.result.rows[0].predicted_exponents,
            'converged': all(row.converged for row in self.result.rows),
        })
        return True

    @property
    def summary(self) -> str:
        fitted = ', '.join(f'{region} {value:.3f}' for region, value in self.result.fitted_exponents.items())
        return f"error-scan n={self.run.n} k={list(self.run.ks)}: fitted exponents {fitted}"
