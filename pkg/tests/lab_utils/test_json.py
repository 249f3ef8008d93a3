import dataclasses
import json
import math
import types

import numpy as np
import pytest

from lab_utils import Fingerprint, json_dumps, jsonable


@dataclasses.dataclass(frozen=True)
class _Row:
    k: int
    norm: float


def test_jsonable():
    frozen = types.MappingProxyType({'a': (1, 2), 'b': np.float64(0.5)})
    assert jsonable(frozen) == {'a': [1, 2], 'b': 0.5}
    assert jsonable(np.arange(3)) == [0, 1, 2]
    assert jsonable(np.bool_(True)) is True
    assert jsonable(_Row(k=np.int64(8), norm=math.nan)) == {'k': 8, 'norm': 'NaN'}
    assert jsonable([math.inf, -math.inf]) == ['Infinity', '-Infinity']


def test_jsonable_rejects():
    with pytest.raises(TypeError):
        jsonable({1: 'a'})
    with pytest.raises(TypeError):
        jsonable(object())


def test_json_dumps_is_deterministic():
    a = json_dumps({'b': 1, 'a': [1.5, None]})
    b = json_dumps({'a': [1.5, None], 'b': 1})
    assert a == b
    assert a.endswith('\n')
    assert json.loads(a) == {'a': [1.5, None], 'b': 1}


def test_fingerprint():
    run = {'bubbletower': {'n': 4, 'k': 8}, 'quadrature': {'q': 3.0}}
    same = {'quadrature': {'q': 3.0}, 'bubbletower': {'k': 8, 'n': 4}}
    other = {'bubbletower': {'n': 4, 'k': 12}, 'quadrature': {'q': 3.0}}
    digest = Fingerprint().update(run).digest()
    assert digest == Fingerprint().update(same).digest()
    assert digest != Fingerprint().update(other).digest()
    # sha3-224 is 28 bytes.
    assert len(digest) == 40
