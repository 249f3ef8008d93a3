"""Deterministic JSON output.

This module defines :func:`jsonable` and :func:`json_dumps`.

"""

import collections.abc
import dataclasses
import json
import logging
import math

import numpy as np

_logger = logging.getLogger(__name__)


def _encode_float(o: float):
    # JSON has no representation for NaN and the infinities.
    if math.isfinite(o):
        return o
    if o != o:
        return 'NaN'
    return 'Infinity' if o > 0 else '-Infinity'


def jsonable(obj):
    # language=rst
    """A copy of *obj* made of JSON types only.

    -   numpy scalars and arrays become Python numbers and lists;
    -   mappings (including frozen ones) become dicts;
    -   dataclasses become dicts of their fields;
    -   non-finite floats become the strings ``'NaN'``, ``'Infinity'`` and
        ``'-Infinity'``.

    :raises: TypeError for anything else.

    """
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _encode_float(float(obj))
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, collections.abc.Mapping):
        result = {}
        for key, value in obj.items():
            if not isinstance(key, str):
                raise TypeError(f"Dictionary key is not a string: {key!r}")
            result[key] = jsonable(value)
        return result
    if isinstance(obj, (collections.abc.Sequence, collections.abc.Set)):
        return [jsonable(value) for value in obj]
    raise TypeError(f"Don't know how to serialize object of class {type(obj)}: {obj!r}")


def json_dumps(obj) -> str:
    # language=rst
    """Serializes *obj* with sorted keys, so equal inputs give equal bytes."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + '\n'

