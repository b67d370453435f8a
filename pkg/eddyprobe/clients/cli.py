###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

import functools
import json
import logging
import pathlib
import sys

# Requirements
import numpy as np
import pandas as pd
import rich

# Project
from eddyprobe import acquisition, artifacts, characterization, detection
from eddyprobe import experiments, imaging, tracywidom
from eddyprobe import utils
from eddyprobe.config import load_config
from eddyprobe.models import MusicSummary, NoiseModel


logger = logging.getLogger('cli')

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def handle_errors(func):
    @functools.wraps(func)
    def wrapper(args):
        try:
            return func(args)
        except utils.ConfigError as error:
            print('Error:', error, file=sys.stderr)
            sys.exit(EXIT_CONFIG)
        except utils.NumericalError as error:
            print('Error:', error, file=sys.stderr)
            sys.exit(EXIT_NUMERICAL)
        except (ValueError, FileNotFoundError) as error:
            print('Error:', error, file=sys.stderr)
            sys.exit(EXIT_CONFIG)

    return wrapper


def get_scenario(args):
    config = load_config(args.config, args.seed)
    if args.loglevel is None:
        logging.getLogger().setLevel(config.output.loglevel.upper())
    return experiments.build_scenario(config)


def measured(args, scenario):
    if args.matrix is not None:
        return artifacts.read_matrix(args.matrix)
    return scenario.measure()


def show(args, data):
    if args.json:
        print(json.dumps(data, default=artifacts.jsonable))
        return

    rich.print(data)


def show_paths(args, paths):
    if args.json:
        print(json.dumps({name: str(path) for (name, path) in paths.items()}))
        return

    for name, path in paths.items():
        print(f'{name}: {path}')


@handle_errors
def cmd_synthesize(args):
    scenario = get_scenario(args)
    config = scenario.config
    A0 = scenario.A0
    out = experiments.output_dir(config, args.out)
    path = artifacts.write_matrix(out / 'a0.csv', A0, config)
    show(args, {'path': str(path), 'N': A0.N, 'M': A0.M,
                'sigma1': A0.singular_values[0],
                'significant': A0.numerical_rank()})


@handle_errors
def cmd_acquire(args):
    scenario = get_scenario(args)
    config = scenario.config
    if args.matrix is None:
        A_meas = scenario.measure()
        sigma_n = scenario.noise_level()
    else:
        A0 = artifacts.read_matrix(args.matrix)
        noise = config.noise
        sigma1 = A0.singular_values[0]
        sigma_n = noise.sigma_n if noise.sigma_n is not None else sigma1 / noise.ratio
        A_meas = acquisition.acquire(
            A0, NoiseModel(sigma_n=sigma_n, seed=config.seed),
            noise.acquisition)
    out = experiments.output_dir(config, args.out)
    path = artifacts.write_matrix(out / 'a-meas.csv', A_meas, config,
                                  sigma_n=repr(sigma_n),
                                  acquisition=config.noise.acquisition)
    show(args, {'path': str(path), 'sigma_n': sigma_n,
                'acquisition': config.noise.acquisition})


@handle_errors
def cmd_detect(args):
    scenario = get_scenario(args)
    config = scenario.config
    delta = config.detection.delta if args.delta is None else args.delta
    outcome = detection.detect(measured(args, scenario), delta, scenario.tw_table())
    record = {'R': outcome.R, 'r_delta': outcome.r_delta,
              'decision': outcome.decision, 'sigma1': outcome.sigma1_measured,
              'delta': outcome.delta, 'M': outcome.M, 'N': outcome.N}
    out = experiments.output_dir(config, args.out)
    artifacts.write_json(out / 'detect.json', record, config)
    show(args, record)


@handle_errors
def cmd_music(args):
    scenario = get_scenario(args)
    config = scenario.config
    A_meas = measured(args, scenario)
    grid = None
    if args.cross_section is not None:
        axis, value = args.cross_section
        grid = scenario.section_grid(axis, value)
    image = scenario.image(A_meas, grid)
    summary = MusicSummary(argmax=image.argmax,
                           refined_argmax=imaging.locate(image, refine=True),
                           peak_value=image.peak_value,
                           peak_to_median=image.peak_to_median())
    out = experiments.output_dir(config, args.out)
    artifacts.write_csv(out / 'music.csv', image.table(), config)
    artifacts.write_json(out / 'music.json', summary.model_dump(), config)
    show(args, summary.model_dump())


def read_estimates(path):
    frame = pd.read_csv(path, comment='#', float_precision='round_trip')
    return list(zip(frame['omega'], frame['c_hat']))


@handle_errors
def cmd_characterize(args):
    scenario = get_scenario(args)
    config = scenario.config
    A_meas = measured(args, scenario)
    z_hat = args.z
    if z_hat is None:
        z_hat = imaging.locate(scenario.image(A_meas), refine=config.imaging.refine)
    estimate = characterization.fit_strength(A_meas, z_hat, scenario.array)
    record = {'z': list(z_hat), 'c_hat': estimate.c_hat,
              'residual': estimate.residual_norm, 'n_obs': estimate.n_obs}

    if args.estimates is not None:
        m_table = args.m_table or config.inclusion.m_table
        if m_table is None:
            raise utils.ConfigError([('inclusion.m_table',
                                      'a table is needed for the multi-frequency fit')])
        estimates = read_estimates(args.estimates)
        estimates.append((config.inclusion.omega, estimate.c_hat))
        conf = config.inclusion
        fit = characterization.multi_frequency_fit(
            estimates, characterization.MTable.load(m_table), conf.mu0,
            np.geomspace(conf.sigma_star / 10, conf.sigma_star * 10, 201),
            np.geomspace(conf.alpha / 10, conf.alpha * 10, 201))
        record.update(sigma_hat=fit.sigma_hat, alpha_hat=fit.alpha_hat)

    out = experiments.output_dir(config, args.out)
    artifacts.write_json(out / 'characterize.json', record, config)
    show(args, record)


@handle_errors
def cmd_pod_curve(args):
    scenario = get_scenario(args)
    config = scenario.config
    conf = config.detection
    delta = conf.delta if args.delta is None else args.delta
    ratios = conf.ratios if args.ratio is None else args.ratio
    trials = conf.trials if args.trials is None else args.trials
    workers = conf.workers if args.workers is None else args.workers
    curve = experiments.pod_curve(scenario, [delta], ratios, trials, workers)[delta]
    out = experiments.output_dir(config, args.out)
    path = artifacts.write_csv(out / 'pod-curve.csv', curve, config,
                               delta=f'{delta:g}', trials=trials)
    show(args, {'path': str(path), **curve})


@handle_errors
def cmd_tw_table(args):
    config = load_config(args.config, args.seed)
    table = tracywidom.shared_table(config.tracy_widom.cache,
                                    config.tracy_widom.tolerance)
    out = experiments.output_dir(config, args.out)
    path = table.save(out / 'tw1-table.csv', artifacts.header_lines(config))
    show(args, {'path': str(path), 'mean': table.mean(),
                'variance': table.variance(),
                'quantiles': {str(p): table.quantile(p) for p in (0.9, 0.95, 0.99)}})


@handle_errors
def cmd_spectrum(args):
    config = get_scenario(args).config
    show_paths(args, experiments.run_spectrum_study(config, args.out))


@handle_errors
def cmd_noisy_music(args):
    config = get_scenario(args).config
    ratios = experiments.NOISY_IMAGING_RATIOS if args.ratio is None else args.ratio
    show_paths(args, experiments.run_noisy_imaging_study(config, ratios, args.out))


@handle_errors
def cmd_pod_study(args):
    config = get_scenario(args).config
    paths = experiments.run_pod_study(config, args.delta, args.ratio, args.trials,
                                      args.workers, args.out)
    show_paths(args, paths)


def main():
    parser = utils.get_parser()
    subparsers = parser.add_subparsers(required=True)

    # synthesize
    help = 'Compute the noiseless response matrix of the scenario.'
    subparser = subparsers.add_parser('synthesize', help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.set_defaults(func=cmd_synthesize)

    # acquire
    help = 'Simulate a noisy acquisition of the response matrix.'
    subparser = subparsers.add_parser('acquire', help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.add_argument('--matrix', type=pathlib.Path,
                           help='noiseless matrix CSV (default: synthesize it)')
    subparser.set_defaults(func=cmd_acquire)

    # detect
    help = 'Run the singular value ratio test on a measured matrix.'
    subparser = subparsers.add_parser('detect', help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.add_argument('--matrix', type=pathlib.Path,
                           help='measured matrix CSV (default: acquire one)')
    subparser.add_argument('--delta', type=float, help='false alarm rate')
    subparser.set_defaults(func=cmd_detect)

    # music
    help = 'Image a measured matrix with MUSIC.'
    subparser = subparsers.add_parser('music', help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.add_argument('--matrix', type=pathlib.Path)
    subparser.add_argument('--cross-section', type=utils.cross_section_type,
                           help='restrict the scan to a plane, e.g. z=0')
    subparser.set_defaults(func=cmd_music)

    # characterize
    help = 'Estimate the inclusion strength (and size and conductivity).'
    subparser = subparsers.add_parser('characterize', help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.add_argument('--matrix', type=pathlib.Path)
    subparser.add_argument('--z', type=utils.point_type,
                           help='inclusion location x,y,z (default: MUSIC peak)')
    subparser.add_argument('--m-table', type=pathlib.Path)
    subparser.add_argument('--estimates', type=pathlib.Path,
                           help='CSV of (omega, c_hat) at other frequencies')
    subparser.set_defaults(func=cmd_characterize)

    # pod-curve
    help = 'Theoretical and Monte Carlo probability of detection.'
    subparser = subparsers.add_parser('pod-curve', help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.add_argument('--delta', type=float)
    subparser.add_argument('--ratio', type=float, action='append')
    subparser.add_argument('--trials', type=int)
    subparser.add_argument('--workers', type=int)
    subparser.set_defaults(func=cmd_pod_curve)

    # tw-table
    help = 'Tabulate the type-1 Tracy-Widom distribution.'
    subparser = subparsers.add_parser('tw-table', help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.set_defaults(func=cmd_tw_table)

    # studies
    help = 'Singular values of the noiseless matrix and its MUSIC section.'
    subparser = subparsers.add_parser('fig6-1', aliases=['spectrum'], help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.set_defaults(func=cmd_spectrum)

    help = 'MUSIC sections at several noise levels.'
    subparser = subparsers.add_parser('fig6-2', aliases=['noisy-music'], help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.add_argument('--ratio', type=float, action='append')
    subparser.set_defaults(func=cmd_noisy_music)

    help = 'Probability of detection curves for several false alarm rates.'
    subparser = subparsers.add_parser('fig6-3', aliases=['pod-study'], help=help)
    subparser.add_argument('--json', action='store_true')
    subparser.add_argument('--delta', type=float, action='append')
    subparser.add_argument('--ratio', type=float, action='append')
    subparser.add_argument('--trials', type=int)
    subparser.add_argument('--workers', type=int)
    subparser.set_defaults(func=cmd_pod_study)

    # Go
    args = utils.run_parser(parser)
    args.func(args)


if __name__ == '__main__':
    main()
