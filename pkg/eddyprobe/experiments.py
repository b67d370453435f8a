###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""Scenario assembly and the end-to-end numerical studies.

The studies write their results under the output directory and return a
mapping of artifact names to paths.
"""

import dataclasses
import functools
import logging
import pathlib

import numpy as np

from eddyprobe import acquisition, artifacts, detection, imaging, tracywidom, utils
from eddyprobe.characterization import MTable
from eddyprobe.forward import (PolarizationData, SensorArray, derive_params,
                               response_matrix)
from eddyprobe.models import InclusionModel, NoiseModel, ScenarioConfig


logger = logging.getLogger('experiments')

NOISY_IMAGING_RATIOS = (10.0, 20.0, 30.0)
MIN_POD_TRIALS = 100


@dataclasses.dataclass(frozen=True)
class Scenario:
    """Physical objects described by a configuration."""
    config: ScenarioConfig
    inclusion: InclusionModel
    polarization: PolarizationData
    array: SensorArray
    grid: imaging.SearchGrid

    @functools.cached_property
    def A0(self):
        return response_matrix(self.array, self.inclusion, self.polarization)

    @property
    def sigma1(self):
        return float(self.A0.singular_values[0])

    def noise_level(self):
        noise = self.config.noise
        return noise.sigma_n if noise.sigma_n is not None else self.sigma1 / noise.ratio

    def tw_table(self):
        conf = self.config.tracy_widom
        return tracywidom.shared_table(conf.cache, conf.tolerance)

    def measure(self, sigma_n=None, trial=None):
        """One noisy acquisition of ``A₀`` with the configured method."""
        sigma_n = self.noise_level() if sigma_n is None else sigma_n
        noise = NoiseModel(sigma_n=sigma_n, seed=self.config.seed)
        rng = acquisition.trial_generator(self.config.seed, trial)
        return acquisition.acquire(self.A0, noise, self.config.noise.acquisition, rng)

    def signal_rank(self, A_meas):
        rank = self.config.imaging.rank
        if rank == 'auto':
            rank = detection.estimate_signal_rank(
                A_meas, self.config.detection.delta, self.tw_table())
            logger.info(f'Estimated signal rank: {rank}')
        return min(max(rank, 1), A_meas.M)

    def image(self, A_meas, grid=None):
        """MUSIC image of `A_meas` on `grid` (the configured search grid by default)."""
        grid = self.grid if grid is None else grid
        P = imaging.signal_projector(A_meas, self.signal_rank(A_meas))
        image = imaging.music_scan(grid, P, self.array.receivers, self.array.q)
        if self.config.imaging.stages == 2:
            image = imaging.refine_scan(image, P, self.array.receivers, self.array.q)
        return image

    def section_grid(self, axis, value=None):
        """The search grid flattened to the plane ``coordinate[axis] == value``.

        The plane goes through the inclusion center by default.
        """
        value = self.inclusion.z[axis] if value is None else value
        conf = self.config.imaging
        lower, upper = list(conf.lower), list(conf.upper)
        lower[axis] = upper[axis] = value
        return imaging.SearchGrid.cube(lower, upper, conf.resolution)


def polarization_for(config, inclusion):
    conf = config.inclusion
    if conf.mode == 'tensor':
        return PolarizationData.load(conf.tensors)
    if conf.m_table is not None:
        nu = derive_params(inclusion).nu
        return PolarizationData.sphere(complex(MTable.load(conf.m_table)(nu)))
    return PolarizationData.sphere(complex(*conf.polarization))


def build_scenario(config) -> Scenario:
    conf = config.inclusion
    inclusion = InclusionModel(z=conf.center, alpha=conf.alpha, mu0=conf.mu0,
                               mu_star=conf.mu_star, sigma_star=conf.sigma_star,
                               omega=conf.omega)
    array_conf = config.array
    array = SensorArray.planar(array_conf.extent, array_conf.source_count,
                               array_conf.receiver_count, array_conf.height,
                               array_conf.p, array_conf.q)
    imaging_conf = config.imaging
    grid = imaging.SearchGrid.cube(imaging_conf.lower, imaging_conf.upper,
                                   imaging_conf.resolution)
    return Scenario(config, inclusion, polarization_for(config, inclusion),
                    array, grid)


def output_dir(config, out=None):
    path = pathlib.Path(out) if out is not None else config.output.directory
    path.mkdir(parents=True, exist_ok=True)
    return path


#
# Studies
#

def run_spectrum_study(config, out=None):
    """Singular values of ``A₀`` and its noiseless MUSIC section through the inclusion."""
    scenario = build_scenario(config)
    out = output_dir(config, out)
    sv = scenario.A0.singular_values
    with np.errstate(divide='ignore'):
        log_sv = np.log10(sv)
    paths = {}
    paths['singular_values'] = artifacts.write_csv(
        out / 'spectrum-singular-values.csv',
        {'index': np.arange(1, len(sv) + 1), 'value': sv, 'log10_value': log_sv},
        config, N=scenario.A0.N, M=scenario.A0.M,
        significant=scenario.A0.numerical_rank())

    image = scenario.image(scenario.A0, scenario.section_grid(2))
    paths['music_z'] = artifacts.write_csv(
        out / 'spectrum-music-z.csv', image.table(), config,
        section=f'z={scenario.inclusion.z[2]:g}')
    logger.info(f'Spectrum study: {scenario.A0.numerical_rank()} significant '
                f'singular values, MUSIC peak at {image.argmax}')
    return paths


def run_noisy_imaging_study(config, ratios=NOISY_IMAGING_RATIOS, out=None):
    """MUSIC sections of one noisy acquisition per signal-to-noise ratio.

    For each ratio ``σ₁^{A₀} / σ_n`` the planes ``z = z_c`` and ``x = x_c``
    through the inclusion center are imaged; a summary table records the
    peak sharpness.
    """
    if any(ratio <= 0 for ratio in ratios):
        raise ValueError(f'ratios must be positive, got {ratios}')
    scenario = build_scenario(config)
    out = output_dir(config, out)
    paths = {}
    summary = {'ratio': [], 'sigma_n': [], 'peak_to_median': [],
               'argmax_x': [], 'argmax_y': [], 'argmax_z': []}
    failed = []
    for trial, ratio in enumerate(ratios):
        done = False
        with utils.log_exception(logger, f'Imaging failed for ratio {ratio:g}'):
            sigma_n = scenario.sigma1 / ratio
            A_meas = scenario.measure(sigma_n, trial)
            z_image = scenario.image(A_meas, scenario.section_grid(2))
            x_image = scenario.image(A_meas, scenario.section_grid(0))
            paths[f'music_z_{ratio:g}'] = artifacts.write_csv(
                out / f'noisy-music-r{ratio:g}-z.csv', z_image.table(), config,
                ratio=f'{ratio:g}', sigma_n=repr(sigma_n))
            paths[f'music_x_{ratio:g}'] = artifacts.write_csv(
                out / f'noisy-music-r{ratio:g}-x.csv', x_image.table(), config,
                ratio=f'{ratio:g}', sigma_n=repr(sigma_n))
            summary['ratio'].append(ratio)
            summary['sigma_n'].append(sigma_n)
            summary['peak_to_median'].append(z_image.peak_to_median())
            for axis, name in enumerate('xyz'):
                summary[f'argmax_{name}'].append(z_image.argmax[axis])
            logger.info(f'Ratio {ratio:g}: peak-to-median '
                        f'{z_image.peak_to_median():.4g} at {z_image.argmax}')
            done = True
        if not done:
            failed.append(ratio)

    paths['summary'] = artifacts.write_csv(out / 'noisy-music-summary.csv',
                                           summary, config)
    if failed:
        raise utils.NumericalError(f'imaging failed for ratios {failed}')
    return paths


def pod_curve(scenario, deltas, ratios, trials, workers=1):
    """POD versus ``σ₁^{A₀} / σ_n`` for each false alarm rate in `deltas`.

    Every ratio reuses one Monte Carlo sample of the statistic for all the
    rates, and the same trial streams serve every ratio.
    """
    A0 = scenario.A0
    tw = scenario.tw_table()
    seed = scenario.config.seed
    method = scenario.config.noise.acquisition
    thresholds = {delta: detection.threshold(delta, A0.M, A0.gamma, tw)
                  for delta in deltas}
    curves = {delta: {'ratio': [], 'pod_theoretical': [], 'pod_empirical': [],
                      'stderr': []} for delta in deltas}
    for ratio in ratios:
        sigma_n = scenario.sigma1 / ratio
        samples = detection.ratio_samples(A0, sigma_n, trials, seed, workers, method)
        for delta in deltas:
            pod, stderr = detection.alarm_rate(samples, thresholds[delta])
            theory = detection.pod_theoretical(scenario.sigma1, sigma_n, A0.gamma,
                                               A0.M, delta, tw)
            curve = curves[delta]
            curve['ratio'].append(ratio)
            curve['pod_theoretical'].append(theory)
            curve['pod_empirical'].append(pod)
            curve['stderr'].append(stderr)
        logger.info(f'POD at ratio {ratio:g} done ({trials} trials)')
    return curves


def run_pod_study(config, deltas=None, ratios=None, trials=None, workers=None,
                  out=None):
    """Empirical and theoretical POD curves, one CSV per false alarm rate."""
    conf = config.detection
    deltas = conf.deltas if deltas is None else deltas
    ratios = conf.ratios if ratios is None else ratios
    trials = conf.trials if trials is None else trials
    workers = conf.workers if workers is None else workers
    if trials < MIN_POD_TRIALS:
        raise ValueError(f'at least {MIN_POD_TRIALS} trials are needed, got {trials}')

    scenario = build_scenario(config)
    out = output_dir(config, out)
    curves = pod_curve(scenario, deltas, ratios, trials, workers)
    paths = {}
    for delta, curve in curves.items():
        columns = {key: curve[key] for key in
                   ('ratio', 'pod_empirical', 'stderr', 'pod_theoretical')}
        paths[f'pod_{delta:g}'] = artifacts.write_csv(
            out / f'pod-delta-{delta:g}.csv', columns, config,
            delta=f'{delta:g}', trials=trials)
    return paths
