###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""Least-squares characterization of a located inclusion.

Imaginary-part data only determines the strength ``k α⁵ Re(𝓜)``.  Strengths
measured at several frequencies separate conductivity from size through the
dependence of 𝓜 on ``ν = ω μ₀ σ α²``.
"""

import dataclasses
import functools
import logging
import pathlib

import numpy as np
import pandas as pd
import scipy.interpolate

from eddyprobe import forward
from eddyprobe.models import FrequencyFit, StrengthEstimate
from eddyprobe.utils import NumericalError


logger = logging.getLogger('charact')


class DegenerateModelError(NumericalError, ArithmeticError):
    """The unit-strength model matrix vanishes."""


class NonIdentifiableError(NumericalError, ValueError):
    """The data cannot separate conductivity from size."""


class TableRangeError(NumericalError, ValueError):
    """The 𝓜(ν) table does not cover the required ν range."""


def fit_strength(A_meas, z_hat, array) -> StrengthEstimate:
    """Scalar least-squares fit ``A_meas ≈ c G`` with ``G = unit_response(array, z_hat)``."""
    A = A_meas.data if isinstance(A_meas, forward.ResponseMatrix) else np.asarray(A_meas, float)
    G = forward.unit_response(array, z_hat)
    if A.shape != G.shape:
        raise ValueError(f"matrix shape {A.shape} does not match the array {G.shape}")
    norm2 = np.sum(G * G)
    if norm2 == 0:
        raise DegenerateModelError(f"unit response vanishes at {tuple(z_hat)}")
    c_hat = np.sum(G * A) / norm2
    residual = np.linalg.norm(A - c_hat * G)
    logger.info(f"Strength at {tuple(z_hat)}: c_hat={c_hat:.6g}, residual={residual:.3g}")
    return StrengthEstimate(c_hat=c_hat, residual_norm=residual, n_obs=A.size)


@dataclasses.dataclass(frozen=True)
class MTable:
    """Tabulated sphere polarization coefficient ``𝓜(ν)``.

    Values are interpolated monotonically between nodes; a single-node
    table only answers at its own ν.
    """
    nu: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        nu = np.array(self.nu, dtype=float).ravel()
        m = np.array(self.m, dtype=complex).ravel()
        if nu.size == 0 or nu.shape != m.shape:
            raise ValueError("nu and m must be nonempty and of equal length")
        if np.any(np.diff(nu) <= 0) or nu[0] <= 0:
            raise ValueError("nu must be positive and strictly increasing")
        nu.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, 'nu', nu)
        object.__setattr__(self, 'm', m)

    @classmethod
    def load(cls, path):
        """Read a CSV file with columns ``nu, re_m, im_m``."""
        frame = pd.read_csv(pathlib.Path(path), comment='#',
                            float_precision='round_trip').sort_values('nu')
        return cls(frame['nu'].to_numpy(),
                   frame['re_m'].to_numpy() + 1j * frame['im_m'].to_numpy())

    @property
    def nu_range(self):
        return float(self.nu[0]), float(self.nu[-1])

    def covers(self, nu):
        nu = np.asarray(nu, dtype=float)
        lo, hi = self.nu_range
        return bool(np.all((nu >= lo * (1 - 1e-12)) & (nu <= hi * (1 + 1e-12))))

    @functools.cached_property
    def _interpolators(self):
        if self.nu.size == 1:
            return None
        return (scipy.interpolate.PchipInterpolator(self.nu, self.m.real),
                scipy.interpolate.PchipInterpolator(self.nu, self.m.imag))

    def re(self, nu):
        nu = np.asarray(nu, dtype=float)
        if not self.covers(nu):
            lo, hi = self.nu_range
            raise TableRangeError(f"nu in [{np.min(nu):.4g}, {np.max(nu):.4g}] "
                                  f"is not covered by the table [{lo:.4g}, {hi:.4g}]")
        if self._interpolators is None:
            return np.full(nu.shape, self.m[0].real)
        return self._interpolators[0](np.clip(nu, *self.nu_range))

    def __call__(self, nu):
        real = self.re(nu)
        if self._interpolators is None:
            return real + 1j * self.m[0].imag
        imag = self._interpolators[1](np.clip(np.asarray(nu, float), *self.nu_range))
        return real + 1j * imag


def strength_model(omega, sigma, alpha, mu0, mtable):
    """Strength ``ω μ₀ σ α⁵ Re 𝓜(ω μ₀ σ α²)`` (broadcasts over its inputs)."""
    k = omega * mu0 * sigma
    return k * alpha**5 * mtable.re(k * alpha**2)


def multi_frequency_fit(estimates, mtable, mu0, sigma_grid, alpha_grid) -> FrequencyFit:
    """Grid search of ``(σ, α)`` matching strengths measured at several frequencies.

    `estimates` holds ``(omega, c_hat)`` pairs.  The objective is the sum of
    squared strength mismatches.
    """
    estimates = np.asarray(estimates, dtype=float).reshape(-1, 2)
    omegas, c_hats = estimates[:, 0], estimates[:, 1]
    if np.unique(omegas).size < 2:
        raise NonIdentifiableError(
            "at least two distinct frequencies are needed to separate "
            "conductivity from size")
    sigma_grid = np.asarray(sigma_grid, dtype=float)
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    if sigma_grid.size == 0 or alpha_grid.size == 0:
        raise ValueError("empty search grid")

    omega = omegas[:, None, None]
    sigma = sigma_grid[None, :, None]
    alpha = alpha_grid[None, None, :]
    model = strength_model(omega, sigma, alpha, mu0, mtable)
    objective = np.sum((c_hats[:, None, None] - model)**2, axis=0)
    i, j = np.unravel_index(int(np.argmin(objective)), objective.shape)
    fit = FrequencyFit(sigma_hat=sigma_grid[i], alpha_hat=alpha_grid[j],
                       objective=objective[i, j])
    logger.info(f"Multi-frequency fit over {len(omegas)} frequencies: "
                f"sigma={fit.sigma_hat:.4g}, alpha={fit.alpha_hat:.4g}")
    return fit
