###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""Inclusion detection by a singular value ratio test.

The test compares the top singular value of the measured matrix with the
noise level estimated from the singular values past the third.  Thresholds
come from the type-1 Tracy-Widom law and assume Hadamard acquisition (noise
entry variance ``σ_n² / M``).
"""

import concurrent.futures
import logging

import numpy as np
import scipy.stats

from eddyprobe import acquisition, randmat, tracywidom
from eddyprobe.forward import ResponseMatrix
from eddyprobe.models import DetectionOutcome, NoiseModel
from eddyprobe.utils import NumericalError


logger = logging.getLogger('detect')

SIGNAL_RANK = 3


class DegenerateStatisticError(NumericalError, ArithmeticError):
    """The ratio statistic is undefined for the given singular values."""


def _degrees_of_freedom(M, gamma):
    return M - SIGNAL_RANK * (1 + gamma**-0.5)**2


def _noise_level(sv, M, gamma):
    dof = _degrees_of_freedom(M, gamma)
    if dof <= 0:
        raise DegenerateStatisticError(
            f"M={M} is too small for gamma={gamma}: {dof:g} degrees of freedom")
    # Below numpy.linalg.matrix_rank's default tolerance a singular value is zero
    floor = sv[0] * max(M, gamma * M) * np.finfo(float).eps
    tail = np.sum(np.where(sv[SIGNAL_RANK:] > floor, sv[SIGNAL_RANK:], 0.0)**2)
    if tail == 0:
        raise DegenerateStatisticError(
            f"singular values past the {SIGNAL_RANK}rd are all zero "
            "(noiseless data)")
    return np.sqrt(tail / dof)


def ratio_statistic(singular_values, M, gamma):
    """Top singular value over the truncated noise level estimate.

    ``R = σ₁ / [Σ_{j>3} σ_j² / (M - 3(1 + γ^{-1/2})²)]^{1/2}``.  Scale
    invariant.
    """
    sv = np.asarray(singular_values, dtype=float)
    if len(sv) != M:
        raise ValueError(f"expected {M} singular values, got {len(sv)}")
    if M <= SIGNAL_RANK + 1:
        raise ValueError(f"M must be at least {SIGNAL_RANK + 2}, got {M}")
    return float(sv[0] / _noise_level(sv, M, gamma))


def _table(tw):
    return tracywidom.shared_table() if tw is None else tw


def threshold(delta, M, gamma, tw=None):
    """Neyman-Pearson threshold ``r_δ`` of the ratio test at false alarm rate `delta`."""
    g = gamma**-0.5
    quantile = _table(tw).quantile(1 - delta)
    return float(1 + g + g * (1 + g)**(1 / 3) * quantile / (2 * M**(2 / 3)))


def pod_theoretical(sigma1_A0, sigma_n, gamma, M, delta, tw=None):
    """Asymptotic probability of detection of the ratio test.

    Equals `delta` below the critical level ``γ^{1/4} σ_n``.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    prediction = randmat.spiked_prediction(sigma1_A0, sigma_n, gamma)
    if prediction.regime == 'subcritical':
        return float(delta)
    r_delta = threshold(delta, M, gamma, tw)
    score = np.sqrt(M) * (sigma1_A0 * prediction.alpha_spike / sigma_n
                          - np.sqrt(gamma) * r_delta) / np.sqrt(prediction.beta_spike)
    return float(max(scipy.stats.norm.cdf(score), delta))


def ratio_samples(A0, sigma_n, trials, master_seed, workers=1,
                  method='hadamard'):
    """Ratio statistics of `trials` noisy acquisitions of `A0`.

    Trial ``t`` draws from ``trial_generator(master_seed, t)``, so the
    sample does not depend on `workers`.  Degenerate trials yield NaN.
    """
    A0 = A0 if isinstance(A0, ResponseMatrix) else ResponseMatrix(A0)
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    noise = NoiseModel(sigma_n=sigma_n, seed=master_seed)

    def trial(t):
        rng = acquisition.trial_generator(master_seed, t)
        A_meas = acquisition.acquire(A0, noise, method, rng)
        try:
            return ratio_statistic(A_meas.singular_values, A_meas.M, A_meas.gamma)
        except DegenerateStatisticError as exc:
            logger.warning(f"Skipping trial {t}: {exc}")
            return np.nan

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            samples = list(executor.map(trial, range(trials)))
    else:
        samples = [trial(t) for t in range(trials)]
    return np.array(samples)


def alarm_rate(samples, r_delta):
    """Fraction of finite `samples` above `r_delta`, and its binomial stderr."""
    samples = np.asarray(samples, dtype=float)
    samples = samples[np.isfinite(samples)]
    if samples.size == 0:
        raise DegenerateStatisticError("no trial produced a ratio statistic")
    rate = np.count_nonzero(samples > r_delta) / samples.size
    return float(rate), float(np.sqrt(rate * (1 - rate) / samples.size))


def pod_empirical(A0, sigma_n, delta, trials, master_seed, tw=None, workers=1,
                  method='hadamard'):
    """Monte Carlo probability of detection: ``(pod_hat, stderr)``."""
    A0 = A0 if isinstance(A0, ResponseMatrix) else ResponseMatrix(A0)
    r_delta = threshold(delta, A0.M, A0.gamma, tw)
    samples = ratio_samples(A0, sigma_n, trials, master_seed, workers, method)
    return alarm_rate(samples, r_delta)


def detect(A_meas, delta, tw=None) -> DetectionOutcome:
    """Run the ratio test on a measured matrix."""
    A_meas = A_meas if isinstance(A_meas, ResponseMatrix) else ResponseMatrix(A_meas)
    sv = A_meas.singular_values
    R = ratio_statistic(sv, A_meas.M, A_meas.gamma)
    r_delta = threshold(delta, A_meas.M, A_meas.gamma, tw)
    outcome = DetectionOutcome(R=R, r_delta=r_delta, decision=R > r_delta,
                               delta=delta, sigma1_measured=sv[0],
                               M=A_meas.M, N=A_meas.N)
    logger.info(f"R={R:.6g} r_delta={r_delta:.6g} -> "
                f"{'alarm' if outcome.decision else 'no alarm'}")
    return outcome


def estimate_signal_rank(A_meas, delta, tw=None):
    """Number of singular values that pass the ratio test individually.

    Each ``σ_j`` is compared with ``r_δ`` times the truncated noise level.
    Noiseless data falls back to the numerical rank.
    """
    A_meas = A_meas if isinstance(A_meas, ResponseMatrix) else ResponseMatrix(A_meas)
    sv = A_meas.singular_values
    try:
        level = _noise_level(sv, A_meas.M, A_meas.gamma)
    except DegenerateStatisticError:
        return A_meas.numerical_rank()
    r_delta = threshold(delta, A_meas.M, A_meas.gamma, tw)
    return int(np.count_nonzero(sv > r_delta * level))
