###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

import pathlib

# Requirements
import numpy as np
import pydantic

# Project
from eddyprobe import utils
from eddyprobe.acquisition import is_power_of_two
from eddyprobe.forward import SensorArray
from eddyprobe.models import ScenarioConfig


def _location(loc):
    return '.'.join(str(part) for part in loc)


def _resolve(path, base):
    if path is None:
        return None
    path = pathlib.Path(path).expanduser()
    return path if path.is_absolute() else base / path


def _resolve_paths(config, base):
    inclusion = config.inclusion.model_copy(update={
        'tensors': _resolve(config.inclusion.tensors, base),
        'm_table': _resolve(config.inclusion.m_table, base),
    })
    tracy_widom = config.tracy_widom.model_copy(update={
        'cache': _resolve(config.tracy_widom.cache, base),
    })
    output = config.output.model_copy(update={
        'directory': _resolve(config.output.directory, base),
    })
    return config.model_copy(update={'inclusion': inclusion,
                                     'tracy_widom': tracy_widom,
                                     'output': output})


def check_invariants(config):
    """Cross-field violations of `config` as ``(location, message)`` pairs."""
    errors = []
    array_conf = config.array
    M = array_conf.source_count**2
    N = array_conf.receiver_count**2
    if config.noise.acquisition == 'hadamard' and not is_power_of_two(M):
        errors.append(('array.source_count',
                       f'Hadamard acquisition needs a power-of-two number of '
                       f'sources, got M={M}'))
    if N < M:
        errors.append(('array.receiver_count',
                       f'there must be at least as many receivers as sources '
                       f'(N={N}, M={M})'))

    sensors = np.vstack([
        SensorArray.plane(array_conf.extent, array_conf.source_count, array_conf.height),
        SensorArray.plane(array_conf.extent, array_conf.receiver_count, array_conf.height),
    ])
    imaging = config.imaging
    inside = np.all((sensors >= imaging.lower) & (sensors <= imaging.upper), axis=1)
    if np.any(inside):
        first = tuple(float(v) for v in sensors[np.argmax(inside)])
        errors.append(('imaging', f'the search box contains a sensor at {first}'))
    center = np.asarray(config.inclusion.center)
    if np.any(np.linalg.norm(sensors - center, axis=1) < 1e-12):
        errors.append(('inclusion.center', 'the inclusion coincides with a sensor'))

    inclusion = config.inclusion
    if inclusion.mode == 'tensor' and inclusion.tensors is not None \
            and not inclusion.tensors.is_file():
        errors.append(('inclusion.tensors', f'no such file: {inclusion.tensors}'))
    if inclusion.m_table is not None and not inclusion.m_table.is_file():
        errors.append(('inclusion.m_table', f'no such file: {inclusion.m_table}'))
    return errors


def load_config(path=None, seed=None):
    """Load and validate a scenario configuration file.

    Without `path` the defaults are returned.  Relative paths in the file are
    resolved against its directory.  The seed is taken from `seed`, else
    from the ``EDDYPROBE_SEED`` environment variable, else from the file.
    All violations found are reported together in one `ConfigError`.
    """
    if path is None:
        data, base = {}, pathlib.Path.cwd()
    else:
        path = pathlib.Path(path)
        if not path.is_file():
            raise utils.ConfigError([('', f'no such configuration file: {path}')])
        try:
            data = utils.read_toml(path)
        except ValueError as exc:
            raise utils.ConfigError([('', f'cannot parse {path}: {exc}')])
        base = path.resolve().parent

    seed = utils.seed_from_env() if seed is None else seed
    if seed is not None:
        data = dict(data)
        data['noise'] = dict(data.get('noise', {}), seed=seed)

    try:
        config = ScenarioConfig.model_validate(data)
    except pydantic.ValidationError as exc:
        raise utils.ConfigError(
            (_location(error['loc']), error['msg']) for error in exc.errors())

    config = _resolve_paths(config, base)
    errors = check_invariants(config)
    if errors:
        raise utils.ConfigError(errors)
    return config
