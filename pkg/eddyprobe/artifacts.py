###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""Result files.

CSV files start with ``#`` comment lines (tool version, configuration digest,
seed, then artifact metadata); JSON files carry the same data under
``"meta"``.  Nothing time-dependent is written, so a given configuration and
seed always produce the same bytes.
"""

import io
import json
import logging
import pathlib

# Requirements
import numpy as np
import pandas as pd
import safer

# Project
import eddyprobe
from eddyprobe.forward import ResponseMatrix


logger = logging.getLogger('artifacts')

FLOAT_FORMAT = '%.17g'


def meta(config, **extra):
    data = {'version': eddyprobe.__version__, 'config': config.digest(),
            'seed': config.seed}
    data.update(extra)
    return data


def header_lines(config, **extra):
    lines = [f'# eddyprobe {eddyprobe.__version__} config={config.digest()} '
             f'seed={config.seed}']
    lines += [f'# {key}={value}' for (key, value) in extra.items()]
    return lines


def _write_text(path, text):
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with safer.open(path, 'w', newline='') as file:
        file.write(text)
    logger.info(f'Written {path}')
    return path


def write_csv(path, columns, config, **extra):
    """Write a table (a mapping of column name to values) as CSV."""
    frame = pd.DataFrame(columns)
    buffer = io.StringIO()
    buffer.write('\n'.join(header_lines(config, **extra)) + '\n')
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return _write_text(path, buffer.getvalue())


def write_json(path, record, config, **extra):
    data = dict(record)
    data['meta'] = meta(config, **extra)
    return _write_text(path, json.dumps(data, indent=2, default=jsonable) + '\n')


def jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, pathlib.Path):
        return str(obj)
    raise TypeError(f'cannot serialize {type(obj).__name__}')


def write_matrix(path, matrix, config, **extra):
    """Write a response matrix: one row per receiver, one column per source."""
    data = matrix.data if isinstance(matrix, ResponseMatrix) else np.asarray(matrix)
    N, M = data.shape
    buffer = io.StringIO()
    lines = header_lines(config, **extra) + [f'# N={N} M={M}']
    buffer.write('\n'.join(lines) + '\n')
    pd.DataFrame(data).to_csv(buffer, index=False, header=False,
                              float_format=FLOAT_FORMAT, lineterminator='\n')
    return _write_text(path, buffer.getvalue())


def read_matrix(path):
    """Read a matrix written by `write_matrix`."""
    path = pathlib.Path(path)
    shape = None
    with open(path) as file:
        for line in file:
            if not line.startswith('#'):
                break
            words = dict(word.split('=', 1) for word in line[1:].split()
                         if '=' in word)
            if 'N' in words and 'M' in words:
                shape = (int(words['N']), int(words['M']))
    data = pd.read_csv(path, comment='#', header=None,
                       float_precision='round_trip').to_numpy(dtype=float)
    if shape is not None and data.shape != shape:
        raise ValueError(f'{path}: expected a {shape[0]}x{shape[1]} matrix, '
                         f'got {data.shape[0]}x{data.shape[1]}')
    return ResponseMatrix(data)
