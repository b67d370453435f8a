###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

import numpy as np
import pydantic
import pytest

from eddyprobe import acquisition, detection
from eddyprobe.forward import ResponseMatrix, SensorArray, response_matrix
from eddyprobe.forward import PolarizationData
from eddyprobe.models import DetectionOutcome, InclusionModel, NoiseModel


@pytest.fixture(scope='module')
def small_A0():
    """Noiseless 64x64 response of the default sphere."""
    array = SensorArray.planar((-2, 2), 8, 8, 1.0)
    incl = InclusionModel(z=(0, 0, 0), alpha=0.01, mu0=1.2566e-6, mu_star=1.2566e-6,
                          sigma_star=5.96e7, omega=133.5)
    return response_matrix(array, incl, PolarizationData.sphere())


def test_ratio_statistic_example():
    sv = np.array([1.0] + [0.0] * 2 + [1.0] * 253)
    # dof = 256 - 12 = 244
    assert detection.ratio_statistic(sv, 256, 1.0) == pytest.approx(0.9821, abs=1e-4)
    assert detection.ratio_statistic(sv, 256, 1.0) == pytest.approx(np.sqrt(244 / 253))


def test_ratio_statistic_scale_invariant():
    rng = np.random.default_rng(0)
    sv = np.sort(rng.uniform(size=64))[::-1]
    R = detection.ratio_statistic(sv, 64, 1.0)
    assert detection.ratio_statistic(7.5 * sv, 64, 1.0) == pytest.approx(R, rel=1e-12)


def test_ratio_statistic_degenerate():
    with pytest.raises(detection.DegenerateStatisticError):
        detection.ratio_statistic(np.array([3.0, 2.0, 1.0] + [0.0] * 61), 64, 1.0)
    # Too few degrees of freedom
    with pytest.raises(detection.DegenerateStatisticError):
        detection.ratio_statistic(np.ones(8), 8, 1.0)
    with pytest.raises(ValueError):
        detection.ratio_statistic(np.ones(4), 4, 1.0)
    with pytest.raises(ValueError):
        detection.ratio_statistic(np.ones(10), 12, 1.0)


def test_ratio_statistic_noise_only():
    M = 256
    rng = acquisition.trial_generator(8)
    samples = [detection.ratio_statistic(
        np.linalg.svd(acquisition.noise_only(M, M, 1.0, rng), compute_uv=False), M, 1.0)
        for _ in range(200)]
    assert np.mean(samples) == pytest.approx(1.981, abs=0.01)


@pytest.mark.parametrize('delta, r', [(0.05, 2.0153), (0.01, 2.0316)])
def test_threshold(tw_table, delta, r):
    assert detection.threshold(delta, 256, 1.0, tw_table) == pytest.approx(r, abs=1e-3)


def test_threshold_limits(tw_table):
    assert detection.threshold(0.05, 1e12, 1.0, tw_table) == pytest.approx(2, abs=1e-6)
    assert detection.threshold(0.05, 256, 4.0, tw_table) == pytest.approx(1.5, abs=0.02)
    # Decreasing in delta
    thresholds = [detection.threshold(delta, 256, 1.0, tw_table)
                  for delta in (0.01, 0.05, 0.10)]
    assert thresholds == sorted(thresholds, reverse=True)


def test_pod_theoretical(tw_table):
    # Below the critical level the test does no better than chance
    assert detection.pod_theoretical(0.9, 1.0, 1.0, 256, 0.05, tw_table) == 0.05
    assert detection.pod_theoretical(1.0, 1.0, 1.0, 256, 0.05, tw_table) == 0.05
    assert detection.pod_theoretical(2.2, 1.0, 1.0, 256, 0.05, tw_table) \
        == pytest.approx(1, abs=1e-6)

    ratios = np.linspace(0.5, 3, 26)
    pods = [detection.pod_theoretical(ratio, 1.0, 1.0, 256, 0.05, tw_table)
            for ratio in ratios]
    assert all(0.05 <= pod <= 1 for pod in pods)
    assert np.all(np.diff(pods) >= 0)

    with pytest.raises(ValueError):
        detection.pod_theoretical(2.0, 1.0, 1.0, 256, 1.5, tw_table)


def test_outcome_strict_decision():
    fields = dict(R=2.0, r_delta=2.0, delta=0.05, sigma1_measured=1.0, M=64, N=64)
    assert DetectionOutcome(decision=False, **fields).decision is False
    with pytest.raises(pydantic.ValidationError):
        DetectionOutcome(decision=True, **fields)


def test_false_alarm_calibration(tw_table):
    # Noise only.  The finite-size shift of the edge at this M makes the
    # test slightly conservative.
    M = 256
    trials = 2000
    samples = detection.ratio_samples(np.zeros((M, M)), 1.0, trials, 21)
    rates = []
    for delta in (0.01, 0.05, 0.10):
        rate, stderr = detection.alarm_rate(
            samples, detection.threshold(delta, M, 1.0, tw_table))
        binomial = np.sqrt(delta * (1 - delta) / trials)
        assert delta / 5 <= rate <= delta + 3 * binomial
        rates.append(rate)
    assert rates == sorted(rates)


def test_ratio_samples_reproducible(small_A0):
    sigma_n = small_A0.singular_values[0] / 2
    serial = detection.ratio_samples(small_A0, sigma_n, 20, 5)
    threaded = detection.ratio_samples(small_A0, sigma_n, 20, 5, workers=4)
    np.testing.assert_array_equal(serial, threaded)
    assert not np.array_equal(serial, detection.ratio_samples(small_A0, sigma_n, 20, 6))


def test_ratio_samples_degenerate():
    samples = detection.ratio_samples(np.zeros((16, 16)), 0.0, 3, 0)
    assert np.all(np.isnan(samples))
    with pytest.raises(detection.DegenerateStatisticError):
        detection.alarm_rate(samples, 2.0)


def test_alarm_rate():
    rate, stderr = detection.alarm_rate([1.0, 3.0, np.nan, 2.0, 2.5], 2.0)
    assert rate == 0.5
    assert stderr == pytest.approx(0.25)


@pytest.mark.parametrize('ratio', [0.5, 2.0, 3.0])
def test_pod_empirical_matches_theory(tw_table, small_A0, ratio):
    sigma1 = small_A0.singular_values[0]
    sigma_n = sigma1 / ratio
    pod, stderr = detection.pod_empirical(small_A0, sigma_n, 0.05, 300, 13, tw_table)
    theory = detection.pod_theoretical(sigma1, sigma_n, 1.0, small_A0.M, 0.05, tw_table)
    assert abs(pod - theory) < max(0.05, 3 * stderr)


def test_pod_empirical_default_array(tw_table, default_scenario):
    A0 = default_scenario.A0
    sigma1 = A0.singular_values[0]
    pod, _ = detection.pod_empirical(A0, sigma1 / 2.2, 0.05, 200, 17, tw_table)
    assert pod == pytest.approx(1, abs=0.02)


def test_detect(tw_table, small_A0):
    noise = NoiseModel(sigma_n=small_A0.singular_values[0] / 10, seed=3)
    A_meas = acquisition.acquire_hadamard(small_A0, noise)
    outcome = detection.detect(A_meas, 0.05, tw_table)
    assert outcome.decision
    assert (outcome.M, outcome.N) == (64, 64)
    assert outcome.sigma1_measured == A_meas.singular_values[0]

    with pytest.raises(detection.DegenerateStatisticError):
        detection.detect(small_A0, 0.05, tw_table)


def test_estimate_signal_rank(tw_table, default_scenario):
    A0 = default_scenario.A0
    assert detection.estimate_signal_rank(A0, 0.01, tw_table) == 3

    noise = NoiseModel(sigma_n=A0.singular_values[0] / 10, seed=1)
    A_meas = acquisition.acquire_hadamard(A0, noise)
    assert detection.estimate_signal_rank(A_meas, 0.01, tw_table) == 3

    assert detection.estimate_signal_rank(ResponseMatrix(np.zeros((16, 16))),
                                          0.01, tw_table) == 0
