import json

import pytest

from bubbletower import main

COARSE = ['--radial-nodes', '8', '--angular-degree', '8']


@pytest.fixture(autouse=True)
def default_config_path(monkeypatch):
    monkeypatch.delenv('CONFIG_PATH', raising=False)


def test_construct(tmp_path, capsys):
    assert main.main(['construct', '--out', str(tmp_path)]) == main.EXIT_OK
    assert "construct n=4 k=8 h=8" in capsys.readouterr().out
    document = json.loads((tmp_path / 'configuration.json').read_text())
    assert document['configuration']['k'] == 8
    assert document['unit_sphere_residual'] < 1e-14
    assert document['kelvin_residual'] <= 1e-10
    provenance = document['provenance']
    assert provenance['command'] == 'construct'
    assert len(provenance['fingerprint']) == 40
    run_config = json.loads((tmp_path / 'run_config.json').read_text())
    assert provenance['run_config'] == run_config


def test_run_config_reloads(tmp_path):
    first, second = tmp_path / 'first', tmp_path / 'second'
    assert main.main(['construct', '--n', '5', '--delta', '0.5', '--out', str(first)]) == main.EXIT_OK
    assert main.main(['construct', '--config', str(first / 'run_config.json'),
                      '--out', str(second)]) == main.EXIT_OK
    reloaded = json.loads((second / 'configuration.json').read_text())
    assert reloaded['configuration']['n'] == 5
    assert reloaded['configuration']['delta'] == 0.5


@pytest.mark.parametrize('argv, message', [
    (['construct', '--n', '3'], "n must be ≥ 4"),
    (['construct', '--k', '3', '--delta', '10'], "mu="),
    (['construct', '--k', '8,12'], "needs a single k"),
    (['construct', '--q', '5'], "open interval"),
    (['certify', '--config', 'absent.json'], "absent.json"),
])
def test_configuration_errors(argv, message, tmp_path, capsys):
    assert main.main(argv + ['--out', str(tmp_path)]) == main.EXIT_CONFIG
    assert message in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / 'blocker'
    blocker.write_text('')
    assert main.main(['construct', '--out', str(blocker / 'out')]) == main.EXIT_FAILED
    assert "construct failed" in capsys.readouterr().err


def test_invalid_ring_sizes(capsys):
    with pytest.raises(SystemExit) as e:
        main.main(['error-scan', '--k', '8,,x'])
    assert e.value.code == 2
    assert "--k" in capsys.readouterr().err


def test_unknown_command(capsys):
    with pytest.raises(SystemExit):
        main.main(['dance'])


def test_overrides():
    args = main.argument_parser().parse_args(['error-scan', '--k', '8,12', '--alpha-bar', '0.5'])
    assert main.overrides(args) == {
        'bubbletower': {'k': [8, 12]},
        'quadrature': {'alpha_bar': 0.5},
    }


def test_error_scan_csv(tmp_path):
    assert main.main(['error-scan', '--k', '8', '--out', str(tmp_path)] + COARSE) == main.EXIT_OK
    lines = (tmp_path / 'error_scan.csv').read_text().splitlines()
    assert lines[0] == '# command=error-scan'
    assert lines[1].startswith('# fingerprint=')
    assert '# bubbletower.n=4' in lines
    assert '# quadrature.radial_nodes=8' in lines
    header = next(line for line in lines if not line.startswith('#'))
    assert header.split(',')[:2] == ['k', 'h']
    assert sum(1 for line in lines if not line.startswith('#')) == 4
    assert (tmp_path / 'error_scan.json').is_file()


@pytest.mark.slow
def test_check_kernel(tmp_path):
    assert main.main(['check-kernel', '--out', str(tmp_path)] + COARSE) in (main.EXIT_OK, main.EXIT_FAILED)
    document = json.loads((tmp_path / 'kernel.json').read_text())
    assert document['N0'] == 15
    assert document['provenance']['command'] == 'check-kernel'
    assert max(document['appendix_max_residuals']) <= 1e-8
