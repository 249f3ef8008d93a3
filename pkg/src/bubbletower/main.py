import argparse
import logging
import sys
import typing as T

import config_loader

import lab_utils
from . import commands, config
from .error_field import ErrorScan
from .errors import BubbletowerError, DomainError

_logger = logging.getLogger(__name__)


EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2

EPILOG = f"""\
output files (in --out):
  construct        configuration.json
  error-scan       error_scan.csv, error_scan.json
  solve-reduced    reduced.json
  check-kernel     kernel.json
  circulant-check  circulant.json
  certify          report.json
  every command    run_config.json, loadable with --config

error_scan.csv columns, after '# key=value' provenance lines:
  {', '.join(ErrorScan.CSV_COLUMNS)}
  region is one of exterior, ring1, ring2; fitted_exponent is the log-log
  slope of norm against k over the scanned ring sizes.

exit status: 0 on success, 1 if a check fails, 2 on a configuration error.
BUBBLETOWER_THREADS caps the number of worker threads.
"""

# flag → (config section, key)
_FLAGS = {
    'n': ('bubbletower', 'n'),
    'k': ('bubbletower', 'k'),
    'h': ('bubbletower', 'h'),
    'delta': ('bubbletower', 'delta'),
    'eps': ('bubbletower', 'eps'),
    'h_ratio': ('bubbletower', 'h_ratio'),
    'seed': ('bubbletower', 'seed'),
    'out': ('bubbletower', 'out'),
    'q': ('quadrature', 'q'),
    'alpha_bar': ('quadrature', 'alpha_bar'),
    'alpha_hat': ('quadrature', 'alpha_hat'),
    'rel_tol': ('quadrature', 'rel_tol'),
    'radial_nodes': ('quadrature', 'radial_nodes'),
    'angular_degree': ('quadrature', 'angular_degree'),
    'max_refine': ('quadrature', 'max_refine'),
    'cutoff_orientation': ('quadrature', 'cutoff_orientation'),
}


def _ring_sizes(s: str) -> T.Union[int, T.List[int]]:
    try:
        sizes = lab_utils.parse_list(s, int)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None
    return sizes[0] if len(sizes) == 1 else list(sizes)


def argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='bubbletower',
        description="Numerical laboratory for nodal bubble-tower solutions of the "
                    "critical equation: construction, error norms, reduced system, "
                    "kernel and nondegeneracy checks.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('command', choices=config.COMMANDS)
    parser.add_argument('--config', metavar='PATH', help="YAML or JSON run file overlaid on the defaults")
    parser.add_argument('--n', type=int, help="dimension, ≥ 4")
    parser.add_argument('--k', type=_ring_sizes, metavar='K[,K...]',
                        help="ring-1 size; error-scan accepts a list such as 8,12,16,24")
    parser.add_argument('--h', type=int, help="ring-2 size, ≥ 3")
    parser.add_argument('--delta', type=float)
    parser.add_argument('--eps', type=float)
    parser.add_argument('--h-ratio', type=float, help="h = round(h_ratio k) in error-scan")
    parser.add_argument('--seed', type=int)
    parser.add_argument('--out', metavar='DIR')
    parser.add_argument('--q', type=float, help="norm exponent, in (n/2, n)")
    parser.add_argument('--alpha-bar', type=float, help="ring-1 ball radius factor")
    parser.add_argument('--alpha-hat', type=float, help="ring-2 ball radius factor")
    parser.add_argument('--rel-tol', type=float)
    parser.add_argument('--radial-nodes', type=int)
    parser.add_argument('--angular-degree', type=int)
    parser.add_argument('--max-refine', type=int)
    parser.add_argument('--cutoff-orientation', choices=('inner', 'outer'))
    return parser


def overrides(args: argparse.Namespace) -> T.Dict[str, T.Dict[str, T.Any]]:
    # language=rst
    """The configuration layer of the flags that were given."""
    result = {}
    for flag, (section, key) in _FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            result.setdefault(section, {})[key] = value
    return result


def main(argv: T.Optional[T.Sequence[str]]=None) -> int:
    # language=rst
    """The entry point of the laboratory.

    :returns int: the exit status of the process. See
        also the ``console_scripts`` in :file:`setup.py`.

    """
    args = argument_parser().parse_args(argv)
    try:
        loaded = config.load(args.config, overrides(args))
        run = config.run_config(loaded, args.command)
        command = commands.COMMANDS[args.command](run)
    except (config_loader.ConfigError, DomainError, FileNotFoundError) as e:
        _logger.error("Invalid configuration: %s", e)
        print(f"bubbletower: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        command.write_run_config()
        passed = command.execute()
    except (BubbletowerError, lab_utils.LabError, OSError) as e:
        _logger.error("Command %s failed: %s", args.command, e)
        print(f"bubbletower: {args.command} failed: {e}", file=sys.stderr)
        return EXIT_FAILED
    print(command.summary)
    return EXIT_OK if passed else EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
