# language=rst
"""
Exceptions raised by :mod:`bubbletower`.

Configuration problems are not listed here: they are reported as
:class:`config_loader.ConfigError`, like every other configuration error.

"""

import typing as T

import lab_utils


class BubbletowerError(Exception):
    """Base class of all domain errors."""


class DomainError(BubbletowerError, ValueError):
    # language=rst
    """Invalid mathematical input.

    Examples: a dimension below 4, the Kelvin transform at the origin, or an
    index that doesn't exist for the requested site.

    """


class QuadratureError(BubbletowerError):
    # language=rst
    """A quadrature scheme can't be built or applied.

    Raised for non-integrable decay declarations and for bubble patches that
    would overlap.

    """


# Raised by the generic circulant algebra; re-exported so callers only need
# this module.
ConsistencyError = lab_utils.ConsistencyError
ConvergenceError = lab_utils.ConvergenceError


class NoRootError(BubbletowerError):
    # language=rst
    """The reduced coefficients don't change sign in the admissible box.

    :ivar table: the sampled coefficient table, as a list of row mappings.

    """
    def __init__(self, message: str, table: T.Sequence[T.Mapping[str, float]]):
        super().__init__(message)
        self.table = tuple(table)
