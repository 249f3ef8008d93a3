# language=rst
"""
Immutable views of configuration layers and geometry arrays.

:func:`frozen` is applied to the merged configuration and to every array of a
:class:`~bubbletower.configuration.TowerConfiguration`; :func:`thawed` is its
inverse, used when a frozen layer has to be merged with another one::

    from bubbletower.frozen import frozen, thawed

    loaded = frozen(layer)
    layer = thawed(loaded)

"""

import dataclasses
import numbers
import types
import typing as T

import numpy as np


def _frozen_array(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        raise TypeError("Can't freeze an array of Python objects")
    if not a.flags.writeable and a.base is None:
        return a
    result = np.array(a)
    result.setflags(write=False)
    return result


def frozen(thing):
    # language=rst
    """Creates a deeply immutable copy of ``thing``.

    -   `numpy.ndarray` → read-only array that owns its data; arrays that
        already are read-only owners are returned as they are
    -   numpy scalars → the equal Python scalar, so that frozen layers compare
        equal to layers parsed from JSON
    -   mappings → `types.MappingProxyType`
    -   sets → `frozenset`
    -   lists and tuples → `tuple`
    -   frozen dataclass instances, strings, numbers and ``None`` → unchanged

    :raises: TypeError for anything else, including mutable dataclasses.

    """
    if isinstance(thing, np.ndarray):
        return _frozen_array(thing)
    if isinstance(thing, np.generic):
        return thing.item()
    if thing is None or isinstance(thing, (str, bool, numbers.Number)):
        return thing
    if dataclasses.is_dataclass(thing) and not isinstance(thing, type):
        if not type(thing).__dataclass_params__.frozen:
            raise TypeError(f"Can't freeze the mutable dataclass {type(thing).__name__}")
        return thing
    if isinstance(thing, T.Mapping):
        return types.MappingProxyType({key: frozen(value) for key, value in thing.items()})
    if isinstance(thing, T.AbstractSet):
        return frozenset(frozen(value) for value in thing)
    if isinstance(thing, (list, tuple)):
        return tuple(frozen(value) for value in thing)
    raise TypeError(f"Can't freeze object of type {type(thing)}: {thing!r}")


def thawed(thing):
    # language=rst
    """A mutable copy of a frozen configuration layer.

    Mappings become `dict` and tuples become `list`, the types
    :mod:`config_loader` and :mod:`json` produce; everything else is shared.

    """
    if isinstance(thing, T.Mapping):
        return {key: thawed(value) for key, value in thing.items()}
    if isinstance(thing, (list, tuple)):
        return [thawed(value) for value in thing]
    return thing
