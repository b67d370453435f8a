###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

import numpy as np
import pytest

from eddyprobe import acquisition, forward, geometry, imaging
from eddyprobe.forward import PolarizationData, ResponseMatrix, SensorArray
from eddyprobe.imaging import MusicImage, SearchGrid
from eddyprobe.models import InclusionModel, NoiseModel


ARRAY = SensorArray.planar((-2, 2), 16, 16, 1.0)
BOX = ((-0.5, -0.5, -0.5), (0.5, 0.5, 0.5))


def inclusion(z):
    return InclusionModel(z=z, alpha=0.01, mu0=1.2566e-6, mu_star=1.2566e-6,
                          sigma_star=5.96e7, omega=133.5)


def synthesize(z):
    return forward.response_matrix(ARRAY, inclusion(z), PolarizationData.sphere())


def scan(A, grid, rank=3):
    P = imaging.signal_projector(A, rank)
    return imaging.music_scan(grid, P, ARRAY.receivers, ARRAY.q)


def distance(a, b):
    return np.linalg.norm(np.subtract(a, b))


def test_search_grid():
    grid = SearchGrid.cube(*BOX, 21)
    assert grid.shape == (21, 21, 21)
    assert grid.size == 9261
    assert grid.spacing == pytest.approx((0.05, 0.05, 0.05))
    nodes = grid.nodes()
    assert nodes.shape == (9261, 3)
    np.testing.assert_array_equal(nodes[0], [-0.5, -0.5, -0.5])
    np.testing.assert_allclose(nodes[1], [-0.5, -0.5, -0.45])
    assert grid.point((20, 0, 0)) == (0.5, -0.5, -0.5)
    np.testing.assert_array_equal(grid.contains([[0, 0, 0], [0, 0, 1]]), [True, False])


def test_search_grid_sections():
    grid = SearchGrid.cube((-0.5, -0.5, 0.0), (0.5, 0.5, 0.0), 11)
    assert grid.shape == (11, 11, 1)
    assert grid.spacing[2] == 0
    grid = SearchGrid((0.1, 0.2, 0.3), (0.1, 0.2, 0.3), (1, 1, 1))
    assert grid.nodes().tolist() == [[0.1, 0.2, 0.3]]
    with pytest.raises(ValueError):
        SearchGrid((0, 0, 0), (0, 1, 1), (2, 5, 5))
    with pytest.raises(ValueError):
        SearchGrid((0, 0, 0), (1, 1, 1), (1, 5, 5))
    with pytest.raises(ValueError):
        SearchGrid((1, 0, 0), (0, 1, 1), (5, 5, 5))


def test_signal_projector():
    A0 = synthesize((0, 0, 0))
    P = imaging.signal_projector(A0, 3)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(P, P.T, atol=1e-14)
    assert np.trace(P) == pytest.approx(3)
    with pytest.raises(ValueError):
        imaging.signal_projector(A0, 0)
    with pytest.warns(imaging.RankDeficiencyWarning):
        imaging.signal_projector(A0, 4)


def test_steering_vectors_in_signal_space():
    z = (0.1, -0.2, 0.15)
    P = imaging.signal_projector(synthesize(z), 3)
    g = forward.steering_vectors(ARRAY.receivers, ARRAY.q, z)
    assert g.shape == (256, 3)
    for g_l in g.T:
        residual = np.linalg.norm(g_l - P @ g_l) / np.linalg.norm(g_l)
        assert residual < 1e-8


def test_music_value_limits():
    z = (0.0, 0.0, 0.0)
    assert imaging.music_value(z, np.eye(256), ARRAY.receivers, ARRAY.q) \
        == imaging.VALUE_CAP
    norm2 = np.sum(forward.steering_vectors(ARRAY.receivers, ARRAY.q, z)**2)
    assert imaging.music_value(z, np.zeros((256, 256)), ARRAY.receivers, ARRAY.q) \
        == pytest.approx(norm2**-0.5, rel=1e-12)


def test_music_value_coincident():
    with pytest.raises(geometry.CoincidentPointsError):
        imaging.music_value(ARRAY.receivers[3], np.zeros((256, 256)),
                            ARRAY.receivers, ARRAY.q)


def test_scan_matches_pointwise():
    grid = SearchGrid.cube((-0.5, -0.5, 0.0), (0.5, 0.5, 0.0), 5)
    P = imaging.signal_projector(synthesize((0.1, 0.1, 0.0)), 3)
    image = imaging.music_scan(grid, P, ARRAY.receivers, ARRAY.q, batch_size=7)
    for node, value in zip(grid.nodes(), image.values.ravel()):
        expected = imaging.music_value(node, P, ARRAY.receivers, ARRAY.q)
        assert value == pytest.approx(expected, rel=1e-10)


def test_noiseless_peak(default_scenario):
    image = default_scenario.image(default_scenario.A0)
    assert image.grid.shape == (21, 21, 21)
    assert distance(image.argmax, (0, 0, 0)) <= 0.05 + 1e-12


def test_noiseless_peak_translated():
    z = (0.1, -0.2, 0.15)
    image = scan(synthesize(z), SearchGrid.cube(*BOX, 21))
    assert distance(image.argmax, z) <= 0.05


def test_noiseless_peak_random_positions():
    rng = np.random.default_rng(2024)
    grid = SearchGrid.cube(*BOX, 21)
    errors = [distance(scan(synthesize(tuple(z)), grid).argmax, z)
              for z in rng.uniform(-0.45, 0.45, size=(20, 3))]
    assert max(errors) <= 0.05


def test_refined_location():
    z = (0.013, -0.021, 0.017)
    image = scan(synthesize(z), SearchGrid.cube(*BOX, 21))
    coarse = imaging.locate(image)
    refined = imaging.locate(image, refine=True)
    assert coarse == image.argmax
    assert distance(refined, z) < distance(coarse, z)
    assert np.max(np.abs(np.subtract(refined, z))) < 0.05 / 2


def test_refine_scan():
    z = (0.013, -0.021, 0.017)
    A0 = synthesize(z)
    P = imaging.signal_projector(A0, 3)
    image = imaging.music_scan(SearchGrid.cube(*BOX, 11), P, ARRAY.receivers, ARRAY.q)
    fine = imaging.refine_scan(image, P, ARRAY.receivers, ARRAY.q)
    assert fine.grid.spacing == pytest.approx((0.02, 0.02, 0.02))
    assert distance(fine.argmax, z) < distance(image.argmax, z)


def test_scale_invariance():
    A0 = synthesize((0, 0, 0))
    noise = NoiseModel(sigma_n=A0.singular_values[0] / 10, seed=4)
    A_meas = acquisition.acquire_hadamard(A0, noise)
    grid = SearchGrid.cube((-0.5, -0.5, 0.0), (0.5, 0.5, 0.0), 11)
    values = scan(A_meas, grid).values
    for factor in (2.0, -0.5):
        np.testing.assert_allclose(scan(A_meas.scaled(factor), grid).values, values,
                                   rtol=1e-10)


def test_noisy_peak():
    A0 = synthesize((0, 0, 0))
    sigma_n = A0.singular_values[0] / 10
    grid = SearchGrid.cube(*BOX, 21)
    hits = 0
    for trial in range(100):
        A_meas = acquisition.acquire(A0, NoiseModel(sigma_n=sigma_n), 'hadamard',
                                     acquisition.trial_generator(6, trial))
        hits += distance(scan(A_meas, grid).argmax, (0, 0, 0)) <= 2 * 0.05
    assert hits >= 95


def test_peak_sharpness():
    A0 = synthesize((0, 0, 0))
    grid = SearchGrid.cube((-0.5, -0.5, 0.0), (0.5, 0.5, 0.0), 21)
    noise_only = ResponseMatrix(acquisition.noise_only(256, 256, 1.0,
                                                       acquisition.trial_generator(1)))
    baseline = scan(noise_only, grid).peak_to_median()
    assert baseline < 5

    sharpness = []
    for ratio in (10, 20, 30):
        noise = NoiseModel(sigma_n=A0.singular_values[0] / ratio)
        ratios = [scan(acquisition.acquire_hadamard(
                      A0, noise, acquisition.trial_generator(7, seed)), grid
                  ).peak_to_median() for seed in range(5)]
        sharpness.append(np.mean(ratios))
    assert sharpness == sorted(sharpness)
    assert sharpness[0] > baseline


def test_image_helpers():
    grid = SearchGrid.cube((0, 0, 0), (1, 1, 1), 3)
    values = np.ones(grid.shape)
    values[1, 2, 0] = values[2, 0, 1] = 4.0
    image = MusicImage(grid, values)
    # Ties go to the first node in C order
    assert image.argmax_index == (1, 2, 0)
    assert image.argmax == (0.5, 1.0, 0.0)
    assert image.peak_value == 4
    assert image.peak_to_median() == 4
    assert imaging.locate(image) == (0.5, 1.0, 0.0)

    section = image.cross_section(2, 0.1)
    assert section.grid.shape == (3, 3, 1)
    assert section.argmax == (0.5, 1.0, 0.0)
    table = image.table()
    assert list(table) == ['x', 'y', 'z', 'value']
    assert len(table['value']) == 27

    single = MusicImage(SearchGrid((0.2, 0.2, 0.2), (0.2, 0.2, 0.2), (1, 1, 1)), [3.0])
    assert imaging.locate(single, refine=True) == (0.2, 0.2, 0.2)
    assert imaging.peak_to_median([0.0, 0.0, 1.0]) == np.inf
