###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""Noisy measurement of response matrices.

Noise is real, white and Gaussian.  Every random draw comes from a
`numpy.random.Generator`; Monte Carlo trials get independent streams derived
from ``(seed, trial)`` so results do not depend on scheduling.
"""

import logging

import numpy as np
import scipy.linalg

from eddyprobe.forward import ResponseMatrix
from eddyprobe.models import NoiseModel
from eddyprobe.utils import NumericalError


logger = logging.getLogger('acquire')


class UnsupportedOrderError(NumericalError, ValueError):
    """No Hadamard matrix construction is available for the requested order."""


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def hadamard(M):
    """Sylvester Hadamard matrix of order `M` (an integer array).

    Only powers of two are supported.  The result satisfies ``HᵀH = M I``
    and is symmetric.
    """
    if not is_power_of_two(M):
        raise UnsupportedOrderError(
            f"Hadamard order must be a power of two, got {M}")
    return scipy.linalg.hadamard(M, dtype=np.int64)


def trial_generator(seed, trial=None):
    """Random generator for `trial` of a run seeded with `seed`.

    Streams of distinct trials are independent.  Without `trial`, the
    generator of the whole run is returned.
    """
    if trial is None:
        return np.random.default_rng(np.random.SeedSequence(seed))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _as_matrix(A0):
    return A0 if isinstance(A0, ResponseMatrix) else ResponseMatrix(A0)


def acquire_standard(A0, noise: NoiseModel, rng=None):
    """Measure `A0` one source at a time: ``A_meas = A₀ + W``.

    Entries of ``W`` are independent with variance ``σ_n²``.
    """
    A0 = _as_matrix(A0)
    if noise.sigma_n == 0:
        return A0
    rng = trial_generator(noise.seed) if rng is None else rng
    W = rng.normal(0.0, noise.sigma_n, size=A0.data.shape)
    return ResponseMatrix(A0.data + W)


def acquire_hadamard(A0, noise: NoiseModel, rng=None):
    """Measure `A0` with Hadamard-multiplexed sources.

    All sources emit at once with the ±1 signs of one row of ``H`` per
    experiment, so the recorded matrix is ``B = A₀Hᵀ + W``.  It is decoded
    as ``B H / M = A₀ + W H / M``; the decoded noise has entry variance
    ``σ_n² / M``.
    """
    A0 = _as_matrix(A0)
    H = hadamard(A0.M)
    if noise.sigma_n == 0:
        return A0
    rng = trial_generator(noise.seed) if rng is None else rng
    W = rng.normal(0.0, noise.sigma_n, size=A0.data.shape)
    return ResponseMatrix(A0.data + (W @ H) / A0.M)


def acquire(A0, noise: NoiseModel, method='hadamard', rng=None):
    if method == 'hadamard':
        return acquire_hadamard(A0, noise, rng)
    elif method == 'standard':
        return acquire_standard(A0, noise, rng)
    raise ValueError(f"unknown acquisition method {method!r}")


def noise_only(N, M, sigma_n, rng):
    """Decoded Hadamard noise of an ``N x M`` acquisition without inclusion.

    Entries are independent with variance ``σ_n² / M``; `M` need not be a
    power of two.
    """
    return rng.normal(0.0, sigma_n / np.sqrt(M), size=(N, M))
