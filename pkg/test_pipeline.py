#!/usr/bin/env python3
"""
运行配置、流水线与命令行测试脚本
测试内容：
1. YAML 配置解析与校验
2. build / flow / verify 流水线与报告
3. 产物导出、轨迹往返与退出码
"""

import os
import sys
from pathlib import Path

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pandas as pd
import pytest
import yaml
from numpy.testing import assert_allclose, assert_array_equal

from src.band_domain import edge_series
from src.cli_io import (
    CHECK_NAMES,
    Pipeline,
    RunReport,
    build_config,
    load_config,
    load_trajectory,
    resolve_checks,
    run_pipeline,
    trajectory_from_dict,
    trajectory_to_dict,
)
from src.coefficient_flow import NodeResiduals
from src.kdv_invariants import series_from_state
from src.main import EXIT_ABORT, EXIT_CONFIG, EXIT_FAILED, EXIT_OK, run
from src.utils.errors import ArtifactIoError, ConfigParseError, ConfigValidationError

RUNS = Path(__file__).parent / 'config' / 'runs'


def base_raw(**extra):
    raw = {'edges': [0, 1, 2], 'm': 1, 'seed': {'kind': 'diagonal', 'placement': [[1.5]]}}
    raw.update(extra)
    return raw


def write_config(tmp_path, name, raw):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw), encoding='utf-8')
    return path


@pytest.fixture(scope='module')
def scalar_flow(tmp_path_factory):
    out = tmp_path_factory.mktemp('scalar')
    cfg = load_config(RUNS / 'canonical_scalar.yaml')
    return cfg, run_pipeline(cfg, 'flow', out), out


def test_config_defaults():
    cfg = build_config(base_raw())
    assert cfg.K == 4
    assert cfg.checks == CHECK_NAMES
    assert cfg.lambda_probes == [0.5, 1.5, 3.0]
    assert cfg.x_grid['start'] == 0.0 and cfg.x_grid['count'] == 101
    assert cfg.seed_pencil() is None
    assert cfg.config_hash() == build_config(base_raw()).config_hash()
    assert cfg.config_hash() != build_config(base_raw(h=0.01)).config_hash()


@pytest.mark.parametrize('extra, error', [
    ({'colour': 'blue'}, ConfigParseError),
    ({'edges': [0, 1, 2, 3]}, ConfigValidationError),
    ({'m': 0}, ConfigValidationError),
    ({'x0': 0.05, 'x_grid': {'start': 0, 'stop': 1, 'count': 11}}, ConfigValidationError),
    ({'x_grid': {'start': 0, 'stop': 1, 'count': 3}}, ConfigValidationError),
    ({'z_probes': ['-1j']}, ConfigValidationError),
    ({'lambda_probes': [1.0]}, ConfigValidationError),
    ({'K': 1}, ConfigValidationError),
    ({'h': 0}, ConfigValidationError),
    ({'method': 'euler'}, ConfigValidationError),
    ({'tolerances': {'bogus': 1.0}}, ConfigValidationError),
    ({'tolerances': {'riccati': 0.0}}, ConfigValidationError),
    ({'epsilons': [2]}, ConfigValidationError),
    ({'seed': {'kind': 'magic'}}, ConfigValidationError),
    ({'seed': {'kind': 'diagonal', 'placement': [[1.4, 1.6]]}}, ConfigValidationError),
    ({'seed': {'kind': 'explicit', 'coefficients': [[[1]]]}}, ConfigValidationError),
    ({'schema_version': 2}, ConfigValidationError),
])
def test_config_validation(extra, error):
    with pytest.raises(error):
        build_config(base_raw(**extra))


def test_resolve_checks():
    assert resolve_checks(['lax', 'riccati']) == ['riccati', 'lax']
    assert 'skdv' not in resolve_checks(['-skdv'])
    assert len(resolve_checks(['-skdv'])) == len(CHECK_NAMES) - 1
    with pytest.raises(ConfigValidationError):
        resolve_checks(['nope'])


def test_load_config_errors(tmp_path):
    broken = tmp_path / 'broken.yaml'
    broken.write_text("edges: [0, 1, 2\nm: 1\n", encoding='utf-8')
    with pytest.raises(ConfigParseError) as info:
        load_config(broken)
    assert info.value.line is not None
    with pytest.raises(ConfigParseError):
        load_config(tmp_path / 'missing.yaml')


def test_explicit_seed_config():
    cfg = load_config(RUNS / 'nonabelian_2x2.yaml')
    F = cfg.seed_pencil()
    assert F.m == 2 and F.degree == 2
    assert cfg.K == 5


def test_run_report():
    report = RunReport(mode='build')
    report.add_check('riccati', 1e-5, 1e-3)
    report.add_check('lax', 1.0, 1e-3)
    assert report.failures == ['lax']
    assert not report.passed
    with pytest.raises(ValueError):
        report.add_check('lax', 0.0, 1.0)
    assert 'timing' not in report.to_dict()


def test_invalid_mode():
    with pytest.raises(ValueError):
        Pipeline(build_config(base_raw()), 'draw')


def test_build_mode():
    cfg = load_config(RUNS / 'canonical_scalar.yaml')
    result = run_pipeline(cfg, 'build')
    assert result.report.passed, result.report.failures
    assert result.trajectory is None
    assert {'herglotz_seed', 'dirichlet', 'quadruple', 'weyl_herglotz', 'density'} <= set(result.report.checks)
    assert result.report.info['nonabelian_probe_F'] == pytest.approx(0.0)


def test_nonabelian_build():
    cfg = load_config(RUNS / 'nonabelian_2x2.yaml')
    cfg.checks = resolve_checks(['dirichlet', 'quadruple', 'weyl_herglotz', 'density', 'schur'])
    result = run_pipeline(cfg, 'build')
    assert result.report.passed, result.report.failures
    assert result.report.info['seed_hyperbolicity'] == 'strongly'
    assert result.report.info['nonabelian_probe_F'] > 1e-3


def test_band_root_seed_stops():
    cfg = load_config(RUNS / 'band_root_seed.yaml')
    result = run_pipeline(cfg, 'flow')
    assert result.report.stopped_at == 'herglotz'
    assert not result.report.passed
    assert result.od is None
    assert not result.report.checks['herglotz_seed']['passed']


def test_flow_mode(scalar_flow):
    cfg, result, _ = scalar_flow
    report = result.report
    assert report.passed, {k: report.checks[k] for k in report.failures}
    assert len(result.trajectory) == cfg.x_grid['count']
    assert set(report.checks) == set(CHECK_NAMES)
    assert report.info['max_drift'] < 1e-8
    assert report.provenance['config_hash'] == cfg.config_hash()


def test_grid_check_criteria():
    """超出容差的差分残差：按二阶收敛时通过，不随网格下降时失败"""
    pipeline = Pipeline(build_config(base_raw()), 'flow')
    x = np.linspace(0.0, 1.0, 9)
    fine = NodeResiduals('lax', x, np.full(9, 0.01))
    pipeline._grid_check('lax', fine, NodeResiduals('lax', x[::2], np.full(5, 0.04)))
    check = pipeline.report.checks['lax']
    assert check['passed'] and check['criterion'] == 'convergence'
    assert check['observed_order'] == pytest.approx(2.0)

    pipeline._grid_check('skdv', NodeResiduals('skdv', x, np.full(9, 0.01)),
                         NodeResiduals('skdv', x[::2], np.full(5, 0.011)))
    check = pipeline.report.checks['skdv']
    assert not check['passed'] and check['criterion'] == 'absolute'

    pipeline._grid_check('riccati', NodeResiduals('riccati', x, np.full(9, 1e-6)), None)
    assert pipeline.report.checks['riccati']['passed']
    assert pipeline.report.checks['riccati']['observed_order'] is None


def test_nonabelian_flow():
    cfg = load_config(RUNS / 'nonabelian_2x2.yaml')
    result = run_pipeline(cfg, 'flow')
    report = result.report
    assert report.passed, {k: report.checks[k] for k in report.failures}
    for name in ('riccati', 'lax', 'series_routes', 'skdv'):
        assert report.checks[name]['observed_order'] > 1.5


def test_diagonal_matches_scalar_runs(tmp_path):
    """对角 2×2 运行的逐项表格等于两个标量运行"""
    cfg = load_config(RUNS / 'diagonal_2x2.yaml')
    cfg.checks = resolve_checks(['hermiticity'])
    diag = run_pipeline(cfg, 'flow', tmp_path / 'diag')
    potential = pd.read_csv(tmp_path / 'diag' / 'potential.csv')
    density = pd.read_csv(tmp_path / 'diag' / 'density.csv')
    es = edge_series(diag.bs, 4)
    assert_allclose(potential['re_Q_12'], 0.0, atol=1e-10)
    assert_allclose(potential['re_Q_21'], 0.0, atol=1e-10)

    for r, mu in enumerate((1.25, 1.75)):
        raw = base_raw(seed={'kind': 'diagonal', 'placement': [[mu]]}, x_grid=dict(cfg.x_grid),
                       h=cfg.h, checks=['hermiticity'])
        out = tmp_path / f'scalar_{r}'
        single = run_pipeline(build_config(raw), 'flow', out)
        single_potential = pd.read_csv(out / 'potential.csv')
        single_density = pd.read_csv(out / 'density.csv')

        assert_allclose(potential['x'], single_potential['x'])
        assert_allclose(potential[f're_Q_{r + 1}{r + 1}'], single_potential['re_Q_11'], atol=1e-9)
        for i in (1, 2):
            for j in (1, 2):
                column = f're_D_{(i - 1) * 2 + r + 1}{(j - 1) * 2 + r + 1}'
                assert_allclose(density[column], single_density[f're_D_{i}{j}'], atol=1e-9)
        for k in (1, 2):
            for node in (0, len(diag.trajectory) // 2, -1):
                expected = series_from_state(single.trajectory.states[node], es, 2).Rhat[k][0, 0]
                actual = series_from_state(diag.trajectory.states[node], es, 2).Rhat[k][r, r]
                assert actual == pytest.approx(expected, abs=1e-9)


def test_exported_files(scalar_flow):
    cfg, result, out = scalar_flow
    for name in ('potential.csv', 'trajectory.json', 'density.csv', 'report.json', 'timing.json'):
        assert (out / name).exists()
    frame = pd.read_csv(out / 'potential.csv')
    assert list(frame.columns) == ['x', 're_Q_11', 'im_Q_11']
    assert len(frame) == cfg.x_grid['count']
    np.testing.assert_allclose(frame['re_Q_11'], result.trajectory.potentials()[:, 0, 0].real, rtol=1e-15)
    density = pd.read_csv(out / 'density.csv')
    assert list(density['lam']) == cfg.lambda_probes
    assert list(density['outside_bands']) == [0, 1, 0]
    residuals = pd.read_csv(out / 'residuals.csv')
    assert list(residuals.columns) == ['check', 'x', 'value']
    assert {'lax', 'skdv'} <= set(residuals['check'])
    assert (residuals['check'] == 'lax').sum() == cfg.x_grid['count'] - 4


def test_trajectory_round_trip(scalar_flow):
    _, result, out = scalar_flow
    traj, bs = load_trajectory(out / 'trajectory.json')
    assert bs.edges == result.bs.edges
    assert_array_equal(traj.grid, result.trajectory.grid)
    assert_array_equal(traj.potentials(), result.trajectory.potentials())
    for a, b in zip(traj.states, result.trajectory.states):
        assert_array_equal(a.G1, b.G1)
        assert_array_equal(a.H, b.H)


def test_trajectory_schema_version(scalar_flow):
    _, result, _ = scalar_flow
    data = trajectory_to_dict(result.trajectory.slice(0, 3), result.bs)
    data['schema_version'] = 99
    with pytest.raises(ArtifactIoError):
        trajectory_from_dict(data)
    data['schema_version'] = 1
    del data['states']
    with pytest.raises(ArtifactIoError):
        trajectory_from_dict(data)


def test_verify_mode(scalar_flow):
    cfg, _, out = scalar_flow
    traj, _ = load_trajectory(out / 'trajectory.json')
    result = run_pipeline(cfg, 'verify', trajectory=traj)
    assert result.report.passed, result.report.failures
    assert 'riccati' in result.report.checks and 'trace' in result.report.checks


def test_report_is_deterministic(tmp_path):
    cfg = load_config(RUNS / 'canonical_scalar.yaml')
    cfg.checks = resolve_checks(['riccati', 'hermiticity', 'trace'])
    run_pipeline(cfg, 'flow', tmp_path / 'a')
    run_pipeline(cfg, 'flow', tmp_path / 'b')
    assert (tmp_path / 'a' / 'report.json').read_bytes() == (tmp_path / 'b' / 'report.json').read_bytes()
    assert (tmp_path / 'a' / 'potential.csv').read_bytes() == (tmp_path / 'b' / 'potential.csv').read_bytes()


def test_exit_codes(tmp_path):
    config = str(RUNS / 'canonical_scalar.yaml')
    assert run(['build', '--config', config, '--out', str(tmp_path / 'ok'), '--quiet']) == EXIT_OK
    assert run(['flow', '--config', str(RUNS / 'band_root_seed.yaml'),
                '--out', str(tmp_path / 'bad'), '--quiet']) == EXIT_FAILED
    assert run(['build', '--config', config, '--checks', 'nope', '--quiet']) == EXIT_CONFIG
    assert run(['build', '--config', str(tmp_path / 'missing.yaml'), '--quiet']) == EXIT_CONFIG
    assert run(['build', '--config', config, '--h', '-1', '--quiet']) == EXIT_CONFIG


def test_exit_code_on_drift(tmp_path):
    raw = base_raw(x_grid={'start': 0, 'stop': 1, 'count': 5}, h=0.25,
                   tolerances={'drift_abort': 1e-12}, checks=['hermiticity'])
    path = write_config(tmp_path, 'drift.yaml', raw)
    assert run(['flow', '--config', str(path), '--out', str(tmp_path / 'out'), '--quiet']) == EXIT_ABORT


def test_verify_command(tmp_path):
    config = str(RUNS / 'canonical_scalar.yaml')
    out = tmp_path / 'run'
    assert run(['flow', '--config', config, '--out', str(out), '--checks', 'riccati,hermiticity', '--quiet']) == EXIT_OK
    assert run(['verify', '--config', config, '--out', str(out), '--checks', 'riccati', '--quiet']) == EXIT_OK
    other = str(RUNS / 'diagonal_2x2.yaml')
    assert run(['verify', '--config', other, '--out', str(out), '--quiet']) == EXIT_CONFIG
    missing = str(tmp_path / 'nowhere' / 'trajectory.json')
    assert run(['verify', '--config', config, '--trajectory', missing, '--quiet']) == EXIT_CONFIG


if __name__ == "__main__":
    pytest.main([__file__])
