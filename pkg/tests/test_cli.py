import json

import numpy as np
import pandas as pd
import pytest

from cli import EXIT_CHECKS_FAILED, EXIT_CONFIG_ERROR, EXIT_OK, EXIT_STAGE_FAILED, build_parser, main, run
from lab_config import config
from run_config import parse_config

DISPERSION_RUN = """
[kernel]
family = exponential

[dispersion]
xi_min = -3
xi_max = 3
points = 25
"""


@pytest.fixture(autouse=True)
def restore_lab_config(monkeypatch):
    monkeypatch.setattr(config, 'tolerance_scale', config.tolerance_scale)
    monkeypatch.setattr(config, 'n_jobs', config.n_jobs)


def _write(tmp_path, text, name='run.ini'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return str(path)


def _summary(out_dir):
    return json.loads((out_dir / 'summary.json').read_text(encoding='utf-8'))


def test_dispersion_command(tmp_path):
    out = tmp_path / 'out'
    status = main(['dispersion', '--config', _write(tmp_path, DISPERSION_RUN), '--out', str(out)])
    assert status == EXIT_OK
    frame = pd.read_csv(out / 'dispersion.csv')
    assert list(frame.columns) == ['xi', 'FJ', 'phi', 'psi', 'psi_prime', 'group_velocity', 'phase_velocity']
    assert len(frame) == 25
    summary = _summary(out)
    assert summary['passed'] is True
    assert summary['command'] == 'dispersion'
    assert {check['name'] for check in summary['checks']} == {'psi_odd', 'psi_prime_sup', 'phi_min'}
    assert summary['profile']['c'] == pytest.approx(2.0 ** 0.5)


def test_outputs_are_deterministic(tmp_path):
    path = _write(tmp_path, DISPERSION_RUN)
    assert main(['dispersion', '--config', path, '--out', str(tmp_path / 'a')]) == EXIT_OK
    assert main(['dispersion', '--config', path, '--out', str(tmp_path / 'b')]) == EXIT_OK
    for name in ('dispersion.csv', 'summary.json'):
        assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()


def test_config_errors_exit_with_every_problem(tmp_path, capsys):
    path = _write(tmp_path, '[kernel]\nwidth = -1\n[grid]\nn = 3\n')
    assert main(['validate', '--config', path, '--out', str(tmp_path / 'out')]) == EXIT_CONFIG_ERROR
    err = capsys.readouterr().err
    assert 'kernel.width' in err
    assert 'grid.n' in err
    assert not (tmp_path / 'out').exists()


def test_missing_config_file(tmp_path):
    assert main(['evolve', '--config', str(tmp_path / 'nope.ini')]) == EXIT_CONFIG_ERROR


def test_stage_failure_names_the_stage(tmp_path):
    out = tmp_path / 'out'
    path = _write(tmp_path, '[grid]\nn = 16\n[evolve]\ntimes = 0, 50\n')
    assert main(['evolve', '--config', path, '--out', str(out)]) == EXIT_STAGE_FAILED
    summary = _summary(out)
    assert summary['passed'] is False
    assert summary['failed_stage'] == 'Compute'
    assert 'too small' in summary['error']


def test_evolve_command(tmp_path):
    out = tmp_path / 'out'
    path = _write(tmp_path, '[grid]\nn = 512\n[evolve]\ntimes = 0, 1, 5\n')
    assert main(['evolve', '--config', path, '--out', str(out)]) == EXIT_OK
    snapshot = pd.read_csv(out / 'snapshot_002.csv')
    assert list(snapshot.columns) == ['x', 'u', 'ut', 'Du']
    assert len(snapshot) == 512
    energy = pd.read_csv(out / 'energy.csv')
    assert list(energy['t']) == [0.0, 1.0, 5.0]
    assert _summary(out)['extra']['snapshots'] == ['snapshot_000.csv', 'snapshot_001.csv', 'snapshot_002.csv']


def test_validate_gaussian_passes(tmp_path):
    status, summary = run('validate', parse_config(''), str(tmp_path))
    failed = [check['name'] for check in summary['checks'] if not check['passed']]
    assert failed == []
    assert status == EXIT_OK
    assert (tmp_path / 'validation.csv').exists()
    assert (tmp_path / 'scaling.csv').exists()


def test_tolerance_scale_flag(tmp_path):
    main(['dispersion', '--config', _write(tmp_path, DISPERSION_RUN), '--out', str(tmp_path / 'o'),
          '--tolerance-scale', '10'])
    assert config.tolerance_scale == 10.0
    assert _summary(tmp_path / 'o')['numerics']['tolerance_scale'] == 10.0


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
    args = build_parser().parse_args(['ray-scan', '--verbose', '--out', 'x'])
    assert args.command == 'ray-scan'
    assert args.verbose


def test_validate_reports_a_lopsided_table(tmp_path):
    x = np.linspace(-8.0, 8.0, 801)
    values = np.exp(-x ** 2)
    values[300] += 0.05
    table = tmp_path / 'kernel.csv'
    pd.DataFrame({'x': x, 'J': values}).to_csv(table, index=False)
    out = tmp_path / 'out'
    path = _write(tmp_path, f'[kernel]\nfamily = tabulated\ntable = {table}\n')
    assert main(['validate', '--config', path, '--out', str(out)]) == EXIT_CHECKS_FAILED
    report = pd.read_csv(out / 'validation.csv')
    assert not bool(report.loc[report['check'] == 'evenness', 'passed'].iloc[0])
    summary = _summary(out)
    assert summary['profile'] is None
    assert summary['extra'] == {'profile_skipped': True}
    assert 'kernel_evenness' in {check['name'] for check in summary['checks'] if not check['passed']}
    assert not (out / 'scaling.csv').exists()


def test_validate_exponential_passes(tmp_path):
    status, summary = run('validate', parse_config('[kernel]\nfamily = exponential\n'), str(tmp_path))
    assert [check['name'] for check in summary['checks'] if not check['passed']] == []
    assert status == EXIT_OK
