###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

import argparse
import contextlib
import logging
import os
import pathlib

try:
    import tomllib as toml
except ImportError:
    import tomli as toml


#
# Errors
#

class NumericalError(Exception):
    """A computation could not produce a meaningful result."""


class ConfigError(Exception):
    """The scenario configuration is invalid.

    The `errors` attribute holds ``(location, message)`` pairs, one per
    violation found.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f'{loc}: {msg}' if loc else msg for (loc, msg) in self.errors]
        super().__init__('invalid configuration:\n  ' + '\n  '.join(lines))


#
# Context managers
#

@contextlib.contextmanager
def log_exception(logger, message):
    try:
        yield
    except Exception:
        logger.exception(message)


#
# Configuration file
#

conf_file_name = 'eddyprobe.toml'
seed_env_var = 'EDDYPROBE_SEED'


def read_toml(path):
    """Parse the TOML file at `path` into a dictionary.

    A missing file yields an empty dictionary.
    """
    try:
        with open(path, 'rb') as conf_file:
            return toml.load(conf_file)
    except FileNotFoundError:
        return {}


def seed_from_env(default=None):
    """Get the RNG seed override from the environment, if any."""
    value = os.environ.get(seed_env_var)
    if value is None or not value.strip():
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError([(seed_env_var, f'not an integer: {value!r}')])


#
# Command line helpers
#

def point_type(string):
    """Parse ``x,y,z`` into a tuple of floats."""
    parts = [float(p) for p in string.split(',')]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f'expected x,y,z, got {string!r}')
    return tuple(parts)


def cross_section_type(string):
    """Parse ``axis=value`` (e.g. ``z=0``) into ``(axis_index, value)``."""
    try:
        axis, value = string.split('=', maxsplit=1)
        return 'xyz'.index(axis.strip().lower()), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f'expected axis=value with axis in x, y, z, got {string!r}')


def get_parser(loglevel=None):
    parser = argparse.ArgumentParser()
    parser.add_argument('--config', default=None, type=pathlib.Path,
                        help=("path to the scenario configuration file "
                              f"(defaults to {conf_file_name} if it exists)"))
    parser.add_argument('--seed', default=None, type=int,
                        help=f"RNG seed (overrides {seed_env_var} and the "
                             "configuration file)")
    parser.add_argument('--out', default=None, type=pathlib.Path,
                        help="output directory for artifacts")
    parser.add_argument('--loglevel', default=loglevel,
                        help="logging level (defaults to the configuration's, or warning)")
    return parser


def run_parser(parser, args=None):
    args = parser.parse_args(args)

    # Logging
    loglevel = (args.loglevel or 'warning').upper()
    logging.basicConfig(level=loglevel)

    # Configuration file
    if args.config is None and pathlib.Path(conf_file_name).is_file():
        args.config = pathlib.Path(conf_file_name)

    return args
