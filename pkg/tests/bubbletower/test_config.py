import dataclasses
import types

import config_loader
import numpy as np
import pytest
import yaml

from bubbletower import config
from bubbletower.frozen import frozen, thawed


@dataclasses.dataclass
class _Mutable:
    value: int = 0


@pytest.fixture(autouse=True)
def default_config_path(monkeypatch):
    monkeypatch.delenv('CONFIG_PATH', raising=False)
    monkeypatch.delenv('BUBBLETOWER_OUT', raising=False)


def test_default_config():
    run = config.run_config(config.load(), 'construct')
    assert (run.n, run.k, run.h) == (4, 8, 8)
    assert run.delta == run.eps == 1.0
    assert run.seed == 20170
    assert run.out == 'out'
    assert run.quadrature.radial_nodes == 32
    assert run.quadrature.cutoff_orientation == 'inner'


def test_loaded_config_is_frozen():
    loaded = config.load()
    assert isinstance(loaded, types.MappingProxyType)
    with pytest.raises(TypeError):
        loaded['bubbletower']['n'] = 5


def test_overrides():
    loaded = config.load(overrides={'bubbletower': {'n': 5, 'k': [8, 16]}, 'quadrature': {'q': 4.0}})
    run = config.run_config(loaded, 'error-scan')
    assert run.n == 5
    assert run.ks == (8, 16)
    assert run.h == 8
    assert run.quadrature.q == 4.0
    with pytest.raises(config_loader.ConfigError, match="needs a single k"):
        run.k


@pytest.mark.parametrize('overrides, message', [
    ({'bubbletower': {'n': 3}}, "n must be ≥ 4, got 3"),
    ({'bubbletower': {'k': [8, 2]}}, "k must be ≥ 3"),
    ({'bubbletower': {'h': 1}}, "h must be ≥ 3"),
    ({'bubbletower': {'delta': 0.0}}, "delta must be > 0"),
    ({'quadrature': {'q': 2.0}}, "open interval"),
    ({'quadrature': {'rel_tol': 2.0}}, "rel_tol"),
    ({'quadrature': {'alpha_hat': -1.0}}, "alpha_hat must be > 0"),
])
def test_out_of_range(overrides, message):
    with pytest.raises(config_loader.ConfigError, match=message):
        config.load(overrides=overrides)


@pytest.mark.parametrize('overrides', [
    {'bubbletower': {'colour': 'red'}},
    {'bubbletower': {'n': 'four'}},
    {'quadrature': {'cutoff_orientation': 'sideways'}},
    {'quadrature': {'radial_nodes': 1}},
])
def test_schema_violations(overrides):
    with pytest.raises(config_loader.ConfigError):
        config.load(overrides=overrides)


def test_unknown_command():
    with pytest.raises(config_loader.ConfigError, match="unknown command"):
        config.run_config(config.load(), 'dance')


def test_run_file_round_trip(tmp_path):
    original = config.run_config(config.load(overrides={'bubbletower': {'k': 12, 'out': str(tmp_path)}}),
                                 'certify')
    run_file = tmp_path / 'run.yml'
    run_file.write_text(yaml.safe_dump(original.to_mapping()))
    assert config.run_config(config.load(run_file), 'certify') == original


def test_missing_config_file(monkeypatch, tmp_path):
    monkeypatch.setenv('CONFIG_PATH', str(tmp_path / 'absent.yml'))
    with pytest.raises(FileNotFoundError, match="No configfile found"):
        config.load()


def test_worker_count(monkeypatch):
    monkeypatch.delenv('BUBBLETOWER_THREADS', raising=False)
    assert config.worker_count() >= 1
    monkeypatch.setenv('BUBBLETOWER_THREADS', '3')
    assert config.worker_count() == 3
    for value in ('0', '-2', 'many'):
        monkeypatch.setenv('BUBBLETOWER_THREADS', value)
        with pytest.raises(config_loader.ConfigError, match="BUBBLETOWER_THREADS"):
            config.worker_count()


def test_merged():
    base = frozen({'a': {'b': 1, 'c': [1, 2]}, 'd': 4})
    assert config.merged(base, {'a': {'c': [3]}}) == {'a': {'b': 1, 'c': [3]}, 'd': 4}


def test_frozen():
    thing = frozen({'list': [1, {'set'}], 'array': np.zeros(2)})
    assert isinstance(thing, types.MappingProxyType)
    assert thing['list'] == (1, frozenset({'set'}))
    with pytest.raises(ValueError):
        thing['array'][0] = 1.0


def test_frozen_numpy_values():
    source = np.arange(4.0)
    view = frozen(source[1:])
    assert view.base is None
    source[1] = 9.0
    assert view[0] == 1.0
    # A read-only array that owns its data is already frozen.
    assert frozen(view) is view
    scalar = frozen(np.float64(0.5))
    assert type(scalar) is float and scalar == 0.5
    with pytest.raises(TypeError, match="Python objects"):
        frozen(np.array([{}], dtype=object))


def test_frozen_dataclasses(coarse_settings):
    assert frozen({'settings': coarse_settings})['settings'] is coarse_settings
    with pytest.raises(TypeError, match="mutable dataclass"):
        frozen(_Mutable())


def test_thawed():
    layer = {'bubbletower': {'k': [8, 12]}, 'quadrature': {'q': 3.0}}
    thawed_layer = thawed(frozen(layer))
    assert thawed_layer == layer
    assert isinstance(thawed_layer['bubbletower'], dict)
    assert isinstance(thawed_layer['bubbletower']['k'], list)
