###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

import json

import numpy as np
import pytest

import eddyprobe
from eddyprobe import artifacts
from eddyprobe.config import load_config


@pytest.fixture(scope='module')
def config():
    return load_config(seed=3)


def test_matrix_exact_round_trip(config, tmp_path):
    rng = np.random.default_rng(11)
    data = rng.normal(size=(64, 64)) * 10.0**rng.uniform(-12, 3, size=(64, 64))
    path = artifacts.write_matrix(tmp_path / 'a.csv', data, config)
    np.testing.assert_array_equal(artifacts.read_matrix(path).data, data)


def test_matrix_header(config, tmp_path):
    path = artifacts.write_matrix(tmp_path / 'a.csv', np.eye(4), config,
                                  acquisition='hadamard')
    with open(path) as file:
        lines = [file.readline() for _ in range(3)]
    assert lines[0] == (f'# eddyprobe {eddyprobe.__version__} '
                        f'config={config.digest()} seed=3\n')
    assert lines[1] == '# acquisition=hadamard\n'
    assert lines[2] == '# N=4 M=4\n'


def test_matrix_shape_mismatch(config, tmp_path):
    path = artifacts.write_matrix(tmp_path / 'a.csv', np.ones((3, 2)), config)
    text = path.read_text().replace('# N=3 M=2', '# N=2 M=2')
    path.write_text(text)
    with pytest.raises(ValueError, match='expected a 2x2 matrix'):
        artifacts.read_matrix(path)


def test_same_bytes(config, tmp_path):
    columns = {'ratio': [0.5, 1.0], 'pod': [0.05, np.float64(0.7)]}
    first = artifacts.write_csv(tmp_path / 'one.csv', columns, config, delta='0.05')
    second = artifacts.write_csv(tmp_path / 'two.csv', columns, config, delta='0.05')
    assert first.read_bytes() == second.read_bytes()


def test_json_meta(config, tmp_path):
    path = artifacts.write_json(tmp_path / 'r.json', {'R': np.float64(2.5),
                                                     'sv': np.arange(3.0)},
                                config, trials=10)
    data = json.loads(path.read_text())
    assert data['R'] == 2.5
    assert data['sv'] == [0.0, 1.0, 2.0]
    assert data['meta'] == {'version': eddyprobe.__version__,
                            'config': config.digest(), 'seed': 3, 'trials': 10}
