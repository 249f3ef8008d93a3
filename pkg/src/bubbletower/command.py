import abc
import csv
import logging
import pathlib
import typing as T

import lab_utils

from .config import RunConfig
from .quadrature import QuadratureSettings

_logger = logging.getLogger(__name__)


class Command(metaclass=abc.ABCMeta):
    # language=rst
    """Base class of the command-line workflows.

    A command is built from a resolved :class:`~bubbletower.config.RunConfig`.
    The constructor validates everything it can without numerical work, so
    domain errors surface before any quadrature starts.  :meth:`execute` does
    the work, writes its files into :attr:`out` and returns whether all checks
    of the command passed.

    Every file carries the provenance of the run: the resolved run
    configuration and its fingerprint.

    """

    NAME: str = None

    def __init__(self, run: RunConfig):
        self.__run = run
        self.__fingerprint = None
        self.__written = []

    @property
    def run(self) -> RunConfig:
        return self.__run

    @property
    def settings(self) -> QuadratureSettings:
        return self.__run.quadrature

    @property
    def out(self) -> pathlib.Path:
        return pathlib.Path(self.__run.out)

    @property
    def fingerprint(self) -> str:
        if self.__fingerprint is None:
            self.__fingerprint = lab_utils.Fingerprint().update(self.__run.to_mapping()).digest()
        return self.__fingerprint

    @property
    def written(self) -> T.List[pathlib.Path]:
        # language=rst
        """The files written so far, in order."""
        return list(self.__written)

    def provenance(self) -> T.Dict[str, T.Any]:
        return {
            'command': self.NAME,
            'fingerprint': self.fingerprint,
            'run_config': self.__run.to_mapping(),
        }

    def _path(self, name: str) -> pathlib.Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        self.__written.append(path)
        return path

    def write_json(self, name: str, payload: T.Mapping[str, T.Any]) -> pathlib.Path:
        # language=rst
        """Writes *payload* with a ``provenance`` member added."""
        path = self._path(name)
        document = dict(payload)
        document['provenance'] = self.provenance()
        path.write_text(lab_utils.json_dumps(document), encoding='utf-8')
        _logger.info("Wrote %s", path)
        return path

    def write_csv(self, name: str, columns: T.Sequence[str],
                  rows: T.Iterable[T.Mapping[str, T.Any]]) -> pathlib.Path:
        # language=rst
        """Writes *rows* under a header of ``# key=value`` provenance lines.

        The lines hold the fingerprint and every resolved parameter, with
        nested keys joined by dots.

        """
        path = self._path(name)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            f.write(f'# command={self.NAME}\n')
            f.write(f'# fingerprint={self.fingerprint}\n')
            for key, value in _flatten(self.__run.to_mapping()):
                f.write(f'# {key}={value}\n')
            writer = csv.DictWriter(f, fieldnames=list(columns))
            writer.writeheader()
            for row in rows:
                writer.writerow({column: row[column] for column in columns})
        _logger.info("Wrote %s", path)
        return path

    def write_run_config(self) -> pathlib.Path:
        # language=rst
        """Writes the resolved run configuration, loadable with ``--config``."""
        path = self._path('run_config.json')
        path.write_text(lab_utils.json_dumps(self.__run.to_mapping()), encoding='utf-8')
        return path

    @abc.abstractmethod
    def execute(self) -> bool:
        pass

    @property
    @abc.abstractmethod
    def summary(self) -> str:
        # language=rst
        """One line describing the outcome; only meaningful after :meth:`execute`."""


def _flatten(mapping: T.Mapping, prefix: str='') -> T.Iterator[T.Tuple[str, T.Any]]:
    for key, value in mapping.items():
        if isinstance(value, T.Mapping):
            yield from _flatten(value, f'{prefix}{key}.')
        elif isinstance(value, (list, tuple)):
            yield f'{prefix}{key}', ','.join(str(v) for v in value)
        else:
            yield f'{prefix}{key}', value
