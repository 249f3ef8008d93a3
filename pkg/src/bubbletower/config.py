"""
Module that loads the run configuration of the laboratory.

.. envvar:: CONFIG_PATH

    If set, the default configuration is loaded from this path.

.. envvar:: BUBBLETOWER_THREADS

    Caps the number of worker threads of every thread pool.

See also :mod:`config_loader`.

**Example usage**::

    from bubbletower import config
    run = config.run_config(config.load(), command='certify')


..  py:data:: CONFIG_SCHEMA_V1_PATH

    :vartype: `pathlib.Path`

..  py:data:: DEFAULT_CONFIG_PATHS

    :vartype: list[`pathlib.Path`]

    By default, this variable is initialized with:

        -   :file:`/etc/bubbletower.yml`
        -   :file:`config_default.yml` next to this module

"""

import dataclasses
import json
import logging
import logging.config
import os
import os.path
import pathlib
import typing as T

import config_loader
import jsonschema

from .frozen import frozen, thawed

_logger = logging.getLogger(__name__)


_PACKAGE_DIR = pathlib.Path(os.path.dirname(os.path.abspath(__file__)))

DEFAULT_CONFIG_PATHS = [
    pathlib.Path('/etc') / 'bubbletower.yml',
    _PACKAGE_DIR / 'config_default.yml',
]

CONFIG_SCHEMA_V1_PATH = _PACKAGE_DIR / 'config_schema_v1.json'

COMMANDS = ('construct', 'error-scan', 'solve-reduced', 'check-kernel', 'circulant-check', 'certify')


def _config_path() -> pathlib.Path:
    # language=rst
    """
    Determines which path to use for the configuration file.

    :raises: FileNotFoundError

    """
    config_paths = [pathlib.Path(os.getenv('CONFIG_PATH'))] \
        if os.getenv('CONFIG_PATH') \
        else DEFAULT_CONFIG_PATHS

    existing = [path for path in config_paths if path.is_file()]
    if not existing:
        paths_as_string = ' or '.join(str(p) for p in config_paths)
        raise FileNotFoundError(f"No configfile found at {paths_as_string}")
    return existing[0]


def worker_count() -> int:
    # language=rst
    """
    Maximum number of worker threads, from :envvar:`BUBBLETOWER_THREADS`.

    Defaults to the number of CPUs.

    :raises: config_loader.ConfigError

    """
    value = os.getenv('BUBBLETOWER_THREADS')
    if not value:
        return os.cpu_count() or 1
    try:
        count = int(value)
    except ValueError:
        count = 0
    if count < 1:
        raise config_loader.ConfigError(
            f"BUBBLETOWER_THREADS must be a positive integer, got {value!r}"
        )
    return count


def merged(base: T.Mapping, overlay: T.Mapping) -> dict:
    # language=rst
    """Deep merge of two (possibly frozen) mappings; *overlay* wins."""
    result = thawed(base)
    for key, value in overlay.items():
        if isinstance(value, T.Mapping) and isinstance(result.get(key), dict):
            result[key] = merged(result[key], value)
        else:
            result[key] = thawed(value)
    return result


def load(run_file: T.Optional[os.PathLike]=None,
         overrides: T.Optional[T.Mapping]=None) -> T.Mapping:
    # language=rst
    """
    Load and validate the configuration.

    The default file (see :data:`DEFAULT_CONFIG_PATHS`) is overlaid with the
    optional *run_file* and then with *overrides*, typically the command-line
    flags.  Every layer is validated against :data:`CONFIG_SCHEMA_V1_PATH`.

    :rtype: types.MappingProxyType
    :raises: config_loader.ConfigError, FileNotFoundError

    """
    config_path = _config_path()
    config = config_loader.load(config_path, CONFIG_SCHEMA_V1_PATH)
    if run_file is not None:
        config = merged(config, _load_run_file(pathlib.Path(run_file)))
    if overrides:
        config = merged(config, overrides)
        _validate_schema(config)
    logging.config.dictConfig(config['logging'])
    _logger.info("Loaded configuration from '%s'", os.path.abspath(config_path))
    # logging.config.dictConfig() needs a mutable mapping, so we only freeze
    # config *after* that call:
    config = frozen(config)
    _validate_ranges(config)
    return config


def _load_run_file(path: pathlib.Path) -> T.Mapping:
    # language=rst
    """
    Loads a run file.  JSON files, such as the :file:`run_config.json` of
    every command, are parsed with :mod:`json`; YAML reads ``1e-06`` as a
    string.

    :raises: config_loader.ConfigError, FileNotFoundError

    """
    if path.suffix != '.json':
        return config_loader.load(path, CONFIG_SCHEMA_V1_PATH)
    with open(path, encoding='utf-8') as f:
        try:
            layer = json.load(f)
        except ValueError as e:
            raise config_loader.ConfigError(f"{path}: {e}") from None
    _validate_schema(layer)
    return layer


def _validate_schema(config: T.Mapping):
    # language=rst
    """
    Validates an already parsed mapping, such as merged command-line flags.

    :raises: config_loader.ConfigError

    """
    with open(CONFIG_SCHEMA_V1_PATH) as f:
        schema = json.load(f)
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as e:
        path = '.'.join(str(p) for p in e.absolute_path)
        raise config_loader.ConfigError(f"{path}: {e.message}") from None


def _fail(message: str):
    raise config_loader.ConfigError(message)


def _validate_ranges(config: T.Mapping):
    # language=rst
    """
    Range checks that the JSON schema can't express.

    :raises: config_loader.ConfigError

    """
    params = config['bubbletower']
    n = params['n']
    if n < 4:
        _fail(f"n must be ≥ 4, got {n}")
    ks = params['k'] if isinstance(params['k'], tuple) else (params['k'],)
    if any(k < 3 for k in ks):
        _fail(f"k must be ≥ 3, got {list(ks)}")
    if params['h'] < 3:
        _fail(f"h must be ≥ 3, got {params['h']}")
    for name in ('delta', 'eps', 'h_ratio'):
        if not params[name] > 0:
            _fail(f"{name} must be > 0, got {params[name]}")
    quad = config['quadrature']
    if not n / 2 < quad['q'] < n:
        _fail(f"q must lie in the open interval (n/2, n) = ({n / 2}, {n}), got {quad['q']}")
    if not 0 < quad['rel_tol'] < 1:
        _fail(f"rel_tol must lie in (0, 1), got {quad['rel_tol']}")
    for name in ('alpha_bar', 'alpha_hat'):
        if not quad[name] > 0:
            _fail(f"{name} must be > 0, got {quad[name]}")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    # language=rst
    """
    The fully resolved parameters of one command.

    :meth:`to_mapping` gives a mapping that validates against the schema and
    loads back into an identical run.

    """
    command: str
    n: int
    ks: T.Tuple[int, ...]
    h: int
    delta: float
    eps: float
    h_ratio: float
    seed: int
    out: str
    quadrature: 'QuadratureSettings'

    @property
    def k(self) -> int:
        if len(self.ks) != 1:
            raise config_loader.ConfigError(
                f"command {self.command!r} needs a single k, got {list(self.ks)}"
            )
        return self.ks[0]

    def to_mapping(self) -> T.Dict[str, T.Any]:
        return {
            'bubbletower': {
                'n': self.n,
                'k': self.ks[0] if len(self.ks) == 1 else list(self.ks),
                'h': self.h,
                'delta': self.delta,
                'eps': self.eps,
                'h_ratio': self.h_ratio,
                'seed': self.seed,
                'out': self.out,
            },
            'quadrature': dataclasses.asdict(self.quadrature),
        }


def run_config(config: T.Mapping, command: str) -> RunConfig:
    # language=rst
    """
    Builds the :class:`RunConfig` of *command* from a loaded configuration.

    :raises: config_loader.ConfigError

    """
    # The quadrature module reads worker_count() from here.
    from .quadrature import QuadratureSettings

    if command not in COMMANDS:
        _fail(f"unknown command {command!r}")
    params = config['bubbletower']
    ks = params['k'] if isinstance(params['k'], tuple) else (params['k'],)
    return RunConfig(
        command=command,
        n=params['n'],
        ks=tuple(int(k) for k in ks),
        h=params['h'],
        delta=float(params['delta']),
        eps=float(params['eps']),
        h_ratio=float(params['h_ratio']),
        seed=params['seed'],
        out=params['out'],
        quadrature=QuadratureSettings(**config['quadrature']),
    )
