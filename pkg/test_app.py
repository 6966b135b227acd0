"""
命令行测试：退出码、输出文件、日志
"""

import numpy as np
import pytest

from app import main
from reports import read_json, write_json
from rigged_sphere import NonOverlappingMaps
from schiffer import default_config
from series_core import PowerSeries
from welding import CircleHomeo

PUNCTURES = [0j, 1 + 0j, 0.5 + 0.8j, -0.6 + 0.5j]


def test_norm_of_cubic(isolated_logs):
    write_json('z3.json', PowerSeries.polynomial([0.0, 0.0, 0.0, 1.0], 8).to_json())
    assert main(['norm', '--input', 'z3.json', '--output', 'out.json']) == 0
    result = read_json('out.json')
    # ‖z³‖ = sqrt(π/4)
    assert result['norm'] == pytest.approx(np.sqrt(np.pi / 4), rel=1e-12)
    assert result['converged'] is True
    assert len(list((isolated_logs / 'logs').glob('*.log'))) == 1


def test_dirichlet_norm_by_key(isolated_logs):
    data = PowerSeries.polynomial([0.0, 1.0], 8).to_json()
    data['norm'] = 'dirichlet'
    write_json('z.json', data)
    assert main(['norm', '--input', 'z.json', '--output', 'out.json']) == 0
    assert read_json('out.json')['norm'] == pytest.approx(np.sqrt(np.pi))


def test_input_errors_exit_with_two(isolated_logs):
    assert main(['norm', '--input', 'missing.json']) == 2
    assert main(['norm']) == 2
    assert main(['bogus']) == 2
    assert main(['norm', '--samples', '100']) == 2
    assert main(['norm', '--tol', '-1']) == 2
    (isolated_logs / 'broken.json').write_text('{not json', encoding='utf-8')
    assert main(['norm', '--input', 'broken.json']) == 2
    data = PowerSeries.identity(8).to_json()
    data['norm'] = 'sobolev'
    write_json('kind.json', data)
    assert main(['norm', '--input', 'kind.json']) == 2


def test_bad_config_exits_with_two(isolated_logs):
    (isolated_logs / 'bad.yaml').write_text('- just\n- a list\n', encoding='utf-8')
    write_json('z.json', PowerSeries.identity(8).to_json())
    assert main(['norm', '--input', 'z.json', '--config', 'bad.yaml']) == 2


def test_weld_rotation(isolated_logs):
    write_json('h.json', CircleHomeo.rotation(0.3).to_json())
    assert main(['weld', '--input', 'h.json', '--output', 'pair.json']) == 0
    pair = read_json('pair.json')
    assert pair['residual'] < 1e-10
    re, im = pair['F']['coeffs'][1]
    assert complex(re, im) == pytest.approx(np.exp(0.3j), abs=1e-12)


def test_weld_numerical_failure_exits_with_one(isolated_logs):
    write_json('h.json', CircleHomeo.sine(0.6).to_json())
    assert main(['weld', '--input', 'h.json', '--output', 'pair.json']) == 1
    assert read_json('pair.json')['error'] == 'PreconditionError'


def test_chi_reports_membership(isolated_logs):
    write_json('f.json', PowerSeries.polynomial([0.0, 1.0, 0.1, 0.05], 64).to_json())
    assert main(['chi', '--input', 'f.json', '--output', 'chi.json']) == 0
    result = read_json('chi.json')
    assert result['membership']['verdict'] == 'member'
    assert result['coords']['d'] == [1.0, 0.0]


def test_equiv_of_identical_maps(isolated_logs):
    maps = NonOverlappingMaps([PowerSeries.polynomial([p, 0.1, 0.01], 64) for p in PUNCTURES], PUNCTURES)
    write_json('a.json', maps.to_json())
    assert main(['equiv', '--input', 'a.json', '--input', 'a.json', '--output', 'eq.json']) == 0
    assert read_json('eq.json')['equivalent'] is True
    assert main(['equiv', '--input', 'a.json']) == 2


@pytest.mark.parametrize('command, payload', [
    ('weld', {'margin': None}),
    ('weld', {'displacement': [[1.0]]}),
    ('weld', [[0.0, 0.0]]),
    ('norm', {'kind': 'weird', 'coeffs': [[0, 0], [1, 0]]}),
    ('norm', [[0, 0], [1, 0]]),
    ('norm', {'coeffs': [[0, 0], [1, 0]], 'norm': 'besov', 'p': 'two'}),
    ('schiffer-sweep', ['inf']),
])
def test_malformed_input_exits_with_two(isolated_logs, command, payload):
    write_json('bad.json', payload)
    assert main([command, '--input', 'bad.json']) == 2


def test_sample_count_follows_truncation(isolated_logs):
    data = PowerSeries.polynomial([0.0, 1.0], 8).to_json()
    data['norm'] = 'sup_hyp'
    write_json('z.json', data)
    # M = 1024 < 2N
    assert main(['norm', '--input', 'z.json', '--truncation', '600']) == 2
    (isolated_logs / 'small.yaml').write_text('series:\n  truncation: 64\n  samples: 96\n', encoding='utf-8')
    assert main(['norm', '--input', 'z.json', '--config', 'small.yaml']) == 2


def test_truncation_from_config_resizes_input(isolated_logs):
    (isolated_logs / 'short.yaml').write_text('series:\n  truncation: 3\n', encoding='utf-8')
    write_json('z3.json', PowerSeries.polynomial([0.0, 0.0, 0.0, 1.0], 8).to_json())
    assert main(['norm', '--input', 'z3.json', '--output', 'out.json', '--config', 'short.yaml']) == 0
    assert read_json('out.json')['norm'] == 0.0


def test_schiffer_guard_from_config(isolated_logs):
    (isolated_logs / 'tight.yaml').write_text('schiffer:\n  guard: 0.1\n', encoding='utf-8')
    config = default_config().with_epsilon([0.01]).to_json()
    del config['guard']
    write_json('sphere.json', config)
    # |ε/r²| = 0.16 在默认阈值 0.3 之内，但超过 0.1
    assert main(['schiffer-sweep', '--input', 'sphere.json', '--output', 'sw',
                 '--config', 'tight.yaml']) == 1
    assert read_json('sw.json')['error'] == 'PreconditionError'
