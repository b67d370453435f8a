###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

import numpy as np
import pytest
import scipy.integrate

from eddyprobe import acquisition, randmat
from eddyprobe.forward import ResponseMatrix
from eddyprobe.models import NoiseModel
from eddyprobe.randmat import QuarterCircleLaw


def test_density_values():
    law = QuarterCircleLaw(gamma=1, sigma_n=1)
    assert law.support == (0, 2)
    assert law.density(2.0) == 0
    assert law.density(np.sqrt(2)) == pytest.approx(np.sqrt(2) / np.pi, rel=1e-12)
    assert law.density(np.sqrt(2)) == pytest.approx(0.45016, abs=1e-5)
    np.testing.assert_array_equal(law.density([-1.0, 2.5]), [0, 0])


@pytest.mark.parametrize('gamma', [1, 2, 4])
@pytest.mark.parametrize('sigma_n', [1, 0.3])
def test_density_integrates_to_one(gamma, sigma_n):
    law = QuarterCircleLaw(gamma, sigma_n)
    total, _ = scipy.integrate.quad(law.density, *law.support, epsabs=1e-13, limit=200)
    assert total == pytest.approx(1, abs=1e-8)


def test_cdf():
    law = QuarterCircleLaw(gamma=2, sigma_n=1)
    lo, hi = law.support
    assert law.cdf(lo) == 0
    assert law.cdf(hi) == 1
    values = law.cdf(np.linspace(lo, hi, 21))
    assert np.all(np.diff(values) > 0)


def test_law_validation():
    with pytest.raises(ValueError):
        QuarterCircleLaw(gamma=0.5, sigma_n=1)
    with pytest.raises(ValueError):
        QuarterCircleLaw(gamma=1, sigma_n=0)


def test_empirical_distance():
    law = QuarterCircleLaw(gamma=1, sigma_n=1)
    rng = acquisition.trial_generator(0)
    distances = [randmat.empirical_cdf_distance(
        np.linalg.svd(acquisition.noise_only(256, 256, 1.0, rng), compute_uv=False), law)
        for _ in range(20)]
    assert np.mean(distances) < 0.05

    # A point mass at the lower edge is far from the law
    assert randmat.empirical_cdf_distance(np.zeros(10), law) == pytest.approx(1)


def test_normalized_l2_statistic():
    N = M = 256
    rng = acquisition.trial_generator(1)
    stats = [randmat.normalized_l2_statistic(
        np.linalg.svd(acquisition.noise_only(N, M, 1.0, rng), compute_uv=False),
        1.0, N / M) for _ in range(1000)]
    assert abs(np.mean(stats)) < 0.2 * np.sqrt(2)
    assert np.var(stats) == pytest.approx(2, rel=0.15)


def test_spiked_prediction_values():
    prediction = randmat.spiked_prediction(10.0, 1.0, 1.0)
    assert prediction.regime == 'supercritical'
    assert prediction.alpha_spike == pytest.approx(1.0100, abs=1e-4)
    assert prediction.beta_spike == pytest.approx(0.9900, abs=1e-4)
    assert prediction.predicted_sigma1 == pytest.approx(10.1, rel=1e-12)

    prediction = randmat.spiked_prediction(1e6, 1.0, 2.0)
    assert prediction.alpha_spike == pytest.approx(1, abs=1e-9)
    assert prediction.beta_spike == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize('gamma, sigma1', [(1, 1.0), (16, 2.0)])
def test_spiked_prediction_critical(gamma, sigma1):
    prediction = randmat.spiked_prediction(sigma1, 1.0, gamma)
    assert prediction.beta_spike == pytest.approx(0, abs=1e-12)
    assert prediction.regime == 'subcritical'
    assert prediction.predicted_sigma1 == pytest.approx(np.sqrt(gamma) + 1)


def test_spiked_prediction_no_signal():
    prediction = randmat.spiked_prediction(0.0, 1.0, 1.0)
    assert prediction.regime == 'subcritical'
    assert prediction.predicted_sigma1 == 2
    with pytest.raises(ValueError):
        randmat.spiked_prediction(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        randmat.spiked_prediction(-1.0, 1.0, 1.0)


def test_spiked_monte_carlo():
    # Rank-one A₀ so the top singular value is a single isolated spike
    N = M = 256
    rng = np.random.default_rng(3)
    u = rng.normal(size=N)
    v = rng.normal(size=M)
    A0 = ResponseMatrix(np.outer(u / np.linalg.norm(u), v / np.linalg.norm(v)))
    sigma_n = 0.1
    noise = NoiseModel(sigma_n=sigma_n)
    top = [acquisition.acquire_hadamard(A0, noise,
                                        acquisition.trial_generator(2, t)).singular_values[0]
           for t in range(1000)]
    prediction = randmat.spiked_prediction(1.0, sigma_n, 1.0)
    assert np.mean(top) == pytest.approx(prediction.predicted_sigma1, rel=0.01)
    assert np.var(top) == pytest.approx(sigma_n**2 * prediction.beta_spike / M, rel=0.2)


def test_max_singular_value_law():
    location, scale = randmat.max_singular_value_law(1.0, 1.0, 256)
    assert location == 2
    assert scale == pytest.approx(0.015625, rel=1e-12)
    with pytest.raises(ValueError):
        randmat.max_singular_value_law(1.0, 1.0, 3)


def test_max_singular_value_monte_carlo(tw_table):
    M = 256
    location, scale = randmat.max_singular_value_law(1.0, 1.0, M)
    rng = acquisition.trial_generator(4)
    top = np.array([np.linalg.svd(acquisition.noise_only(M, M, 1.0, rng),
                                  compute_uv=False)[0] for _ in range(500)])
    stderr = top.std(ddof=1) / np.sqrt(len(top))
    assert abs(top.mean() - (location + scale * tw_table.mean())) < 3 * stderr
    assert top.std() == pytest.approx(scale * np.sqrt(tw_table.variance()), rel=0.25)
