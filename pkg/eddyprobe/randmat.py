###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""Limiting singular value laws of noisy response matrices.

Noise matrices follow the Hadamard convention: ``N x M`` with independent
entries of variance ``σ_n² / M``.
"""

import dataclasses

import numpy as np
import scipy.integrate

from eddyprobe.models import SpikedPrediction


@dataclasses.dataclass(frozen=True)
class QuarterCircleLaw:
    """Deformed quarter-circle law of the singular values of a noise matrix."""
    gamma: float
    sigma_n: float

    def __post_init__(self):
        if not self.gamma >= 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not self.sigma_n > 0:
            raise ValueError(f"sigma_n must be positive, got {self.sigma_n}")

    @property
    def support(self):
        root = np.sqrt(self.gamma)
        return (self.sigma_n * (root - 1), self.sigma_n * (root + 1))

    def density(self, sigma):
        return quarter_circle_density(sigma, self)

    def cdf(self, sigma):
        return quarter_circle_cdf(sigma, self)


def quarter_circle_density(sigma, law):
    """Density of the law at `sigma` (scalar or array); zero off support."""
    s = np.asarray(sigma, dtype=float) / law.sigma_n
    root = np.sqrt(law.gamma)
    lo, hi = (root - 1)**2, (root + 1)**2
    s2 = s * s
    inside = (s2 > lo) & (s2 < hi) & (s > 0)
    safe = np.where(inside, s, 1.0)
    value = np.sqrt(np.clip(hi - s2, 0, None) * np.clip(s2 - lo, 0, None)) / (np.pi * safe)
    density = np.where(inside, value, 0.0) / law.sigma_n
    return density if density.ndim else float(density)


def _integrated(sigma, law):
    lo, hi = law.support
    if sigma <= lo:
        return 0.0
    if sigma >= hi:
        return 1.0
    value, _ = scipy.integrate.quad(quarter_circle_density, lo, sigma, args=(law,),
                                    epsabs=1e-12, limit=200)
    return min(max(value, 0.0), 1.0)


def quarter_circle_cdf(sigma, law):
    """Integrated law ``Λ(σ)``: the limiting fraction of singular values <= σ."""
    sigma = np.asarray(sigma, dtype=float)
    values = np.array([_integrated(s, law) for s in sigma.ravel()])
    return values.reshape(sigma.shape) if sigma.ndim else float(values[0])


def empirical_cdf_distance(singular_values, law):
    """Sup-distance between the empirical counting measure and `law`.

    Both one-sided limits of the empirical step function are compared at
    every jump.
    """
    sv = np.sort(np.asarray(singular_values, dtype=float))
    n = len(sv)
    expected = quarter_circle_cdf(sv, law)
    above = np.arange(1, n + 1) / n
    below = np.arange(0, n) / n
    return float(max(np.max(np.abs(above - expected)),
                     np.max(np.abs(below - expected))))


def normalized_l2_statistic(singular_values, sigma_n, gamma):
    """``M [(1/M) Σ σ_j² - γ σ_n²]``, asymptotically ``N(0, 2γσ_n⁴)``."""
    sv = np.asarray(singular_values, dtype=float)
    M = len(sv)
    return float(M * (np.sum(sv**2) / M - gamma * sigma_n**2))


def spiked_prediction(sigma1_A0, sigma_n, gamma) -> SpikedPrediction:
    """Asymptotic behavior of the top singular value of ``A₀ + W``.

    Above the critical level ``γ^{1/4} σ_n`` the top singular value
    separates from the noise bulk: it concentrates at ``σ₁ α`` with
    Gaussian fluctuations of variance ``σ_n² β / M``.  Below it, it sticks
    to the bulk edge ``σ_n (√γ + 1)``.
    """
    if sigma1_A0 < 0:
        raise ValueError(f"sigma1_A0 must be nonnegative, got {sigma1_A0}")
    if not sigma_n > 0:
        raise ValueError(f"sigma_n must be positive, got {sigma_n}")
    if not gamma >= 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")

    edge = sigma_n * (np.sqrt(gamma) + 1)
    if sigma1_A0 == 0:
        return SpikedPrediction(alpha_spike=np.inf, beta_spike=-np.inf,
                                predicted_sigma1=edge, regime='subcritical')

    t2 = (sigma_n / sigma1_A0)**2
    alpha = np.sqrt(1 + (1 + gamma) * t2 + gamma * t2 * t2)
    beta = (1 - gamma * t2 * t2) / alpha
    if sigma1_A0 > gamma**0.25 * sigma_n:
        return SpikedPrediction(alpha_spike=alpha, beta_spike=beta,
                                predicted_sigma1=sigma1_A0 * alpha,
                                regime='supercritical')
    return SpikedPrediction(alpha_spike=alpha, beta_spike=beta,
                            predicted_sigma1=edge, regime='subcritical')


def max_singular_value_law(sigma_n, gamma, M):
    """Location and scale of the top singular value of a noise matrix.

    ``σ₁ ≈ location + scale · Z₁`` with ``Z₁`` of type-1 Tracy-Widom law.
    """
    if M < 4:
        raise ValueError(f"M must be at least 4, got {M}")
    location = sigma_n * (np.sqrt(gamma) + 1)
    scale = sigma_n * (1 + gamma**-0.5)**(1 / 3) / (2 * M**(2 / 3))
    return float(location), float(scale)
