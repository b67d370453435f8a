###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""Type-1 Tracy-Widom distribution, tabulated from Painlevé II.

The CDF is ``F₁(z) = exp(-½ ∫_z^∞ φ(x) + (x - z) φ(x)² dx)``, with ``φ`` the
Hastings-McLeod solution of ``φ'' = xφ + 2φ³`` (``φ ~ Ai`` at +∞).  ``φ`` is
integrated backward from ``X_START`` together with the quadratures

    q(z) = ∫_z^∞ φ,   U(z) = ∫_z^∞ (x - z) φ²,   V(z) = ∫_z^∞ φ²

so that ``F₁ = exp(-½ (q + U))`` and ``F₁' = ½ F₁ (φ + V)``.  The backward
problem is unstable on the left (perturbations grow like
``exp(0.94 |x|^{3/2})``), so below ``X_SWITCH`` the asymptotic expansion of
``φ`` replaces the solver.
"""

import dataclasses
import functools
import logging
import pathlib
import threading

import numpy as np
import pandas as pd
import safer
import scipy.integrate
import scipy.interpolate
import scipy.optimize
import scipy.special

from eddyprobe.utils import NumericalError


logger = logging.getLogger('tw')

TABLE_VERSION = 1
X_START = 8.0
AIRY_SPAN = 16.0
X_SWITCH = -6.0
Z_MIN = -10.0
Z_MAX = 8.0
STEP = 0.01
P_MIN = 1e-6
DEFAULT_TOLERANCE = 1e-10


class IntegrationError(NumericalError, RuntimeError):
    """The Painlevé II solver did not reach the requested tolerance."""


class OutOfRangeError(NumericalError, ValueError):
    """A probability lies outside the tabulated range."""


def _airy(t):
    return scipy.special.airy(t)[0]


def _tail_integral(fun, x):
    # Ai(X_START + AIRY_SPAN) is below 1e-27 Ai(X_START)
    value, _ = scipy.integrate.quad(fun, x, x + AIRY_SPAN, epsabs=0,
                                    epsrel=1e-12, limit=200)
    return value


def _airy_tail(x):
    """Initial state ``(φ, φ', q, U, V)`` at `x`, where ``φ = Ai``."""
    ai, aip, _, _ = scipy.special.airy(x)
    q = _tail_integral(_airy, x)
    U = _tail_integral(lambda t: (t - x) * _airy(t)**2, x)
    V = _tail_integral(lambda t: _airy(t)**2, x)
    return np.array([ai, aip, q, U, V])


def _painleve(x, y):
    phi, dphi, _, _, V = y
    return [dphi, x * phi + 2 * phi**3, -phi, -V, -phi**2]


def hastings_mcleod_asymptotic(x):
    """Leading terms of ``φ(x)`` for ``x → -∞``."""
    x = np.asarray(x, dtype=float)
    x3 = x**3
    series = 1 + 1 / (8 * x3) - 73 / (128 * x3**2) + 10657 / (1024 * x3**3)
    return np.sqrt(-x / 2) * series


def _left_quadratures(x, y):
    phi = hastings_mcleod_asymptotic(x)
    _, _, V = y
    return [-phi, -V, -phi**2]


def _solve(fun, t_span, y0, t_eval, tolerance):
    solution = scipy.integrate.solve_ivp(
        fun, t_span, y0, method='DOP853', t_eval=t_eval,
        rtol=tolerance, atol=tolerance * 1e-4)
    if not solution.success:
        raise IntegrationError(f"integration over {t_span} failed: "
                               f"{solution.message}")
    logger.debug(f"Integrated {t_span}: {solution.nfev} evaluations")
    return solution


@dataclasses.dataclass(frozen=True)
class TracyWidomTable:
    """Tabulated type-1 Tracy-Widom CDF and density on an ascending grid.

    Values outside the grid are clamped to 0 and 1 (CDF) or 0 (density).
    """
    z: np.ndarray
    cdf_values: np.ndarray
    pdf_values: np.ndarray
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        for name in ('z', 'cdf_values', 'pdf_values'):
            array = np.array(getattr(self, name), dtype=float)
            array.flags.writeable = False
            object.__setattr__(self, name, array)
        if not (self.z.shape == self.cdf_values.shape == self.pdf_values.shape):
            raise ValueError("table columns must have equal lengths")
        if np.any(np.diff(self.z) <= 0):
            raise ValueError("table grid must be strictly increasing")

    @property
    def z_min(self):
        return float(self.z[0])

    @property
    def z_max(self):
        return float(self.z[-1])

    @functools.cached_property
    def _cdf(self):
        return scipy.interpolate.PchipInterpolator(self.z, self.cdf_values,
                                                   extrapolate=False)

    @functools.cached_property
    def _pdf(self):
        return scipy.interpolate.PchipInterpolator(self.z, self.pdf_values,
                                                   extrapolate=False)

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        value = np.clip(self._cdf(np.clip(z, self.z_min, self.z_max)), 0, 1)
        value = np.where(z < self.z_min, 0.0, np.where(z > self.z_max, 1.0, value))
        return value if value.ndim else float(value)

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.z_min) & (z <= self.z_max)
        value = np.where(inside, self._pdf(np.clip(z, self.z_min, self.z_max)), 0.0)
        value = np.maximum(value, 0.0)
        return value if value.ndim else float(value)

    def quantile(self, p):
        """Inverse of `cdf` for ``P_MIN < p < 1 - P_MIN``."""
        if not P_MIN < p < 1 - P_MIN:
            raise OutOfRangeError(f"probability {p} outside ({P_MIN}, {1 - P_MIN})")
        if not self.cdf(self.z_min) <= p <= self.cdf(self.z_max):
            raise OutOfRangeError(f"probability {p} is not reached on "
                                  f"[{self.z_min:g}, {self.z_max:g}]")
        return scipy.optimize.brentq(lambda z: self.cdf(z) - p,
                                     self.z_min, self.z_max, xtol=1e-12)

    def mean(self):
        return float(scipy.integrate.simpson(self.z * self.pdf_values, x=self.z))

    def variance(self):
        mean = self.mean()
        return float(scipy.integrate.simpson((self.z - mean)**2 * self.pdf_values,
                                             x=self.z))

    def header(self):
        return (f"# tw1-table version={TABLE_VERSION} tolerance={self.tolerance!r} "
                f"x_start={X_START:g} z_min={self.z_min:g} z_max={self.z_max:g}")

    def save(self, path, preamble=()):
        """Write the table as CSV (``z,cdf,pdf``) after its metadata line.

        `preamble` lines (without the trailing newline) go first.
        """
        frame = pd.DataFrame({'z': self.z, 'cdf': self.cdf_values,
                              'pdf': self.pdf_values})
        path = pathlib.Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with safer.open(path, 'w', newline='') as file:
            file.write(''.join(line + '\n' for line in preamble))
            file.write(self.header() + '\n')
            frame.to_csv(file, index=False, float_format='%.17g', lineterminator='\n')
        logger.info(f"Tracy-Widom table written to {path}")
        return path

    @classmethod
    def load(cls, path, tolerance=DEFAULT_TOLERANCE):
        """Read a table written by `save`.

        Return None if the file is missing or was built with another format
        version or tolerance.
        """
        path = pathlib.Path(path)
        if not path.is_file():
            return None
        meta = {}
        with open(path) as file:
            for line in file:
                if not line.startswith('#'):
                    break
                meta = meta or _parse_header(line)
        if meta.get('version') != str(TABLE_VERSION) \
                or float(meta.get('tolerance', 'nan')) != tolerance:
            logger.info(f"Stale Tracy-Widom table at {path}, ignoring")
            return None
        frame = pd.read_csv(path, comment='#', float_precision='round_trip')
        return cls(frame['z'].to_numpy(), frame['cdf'].to_numpy(),
                   frame['pdf'].to_numpy(), tolerance=tolerance)


def _parse_header(line):
    if not line.startswith('# tw1-table'):
        return {}
    items = (word.split('=', 1) for word in line.split()[2:] if '=' in word)
    return dict(items)


def build_table(tolerance=DEFAULT_TOLERANCE, z_min=Z_MIN, z_max=Z_MAX, step=STEP):
    """Tabulate the type-1 Tracy-Widom CDF and density on ``[z_min, z_max]``."""
    if z_max > X_START or z_min >= X_SWITCH:
        raise ValueError(f"table range must satisfy z_min < {X_SWITCH} and "
                         f"z_max <= {X_START}")
    count = int(round((z_max - z_min) / step)) + 1
    z = np.linspace(z_min, z_max, count)
    right = z[z >= X_SWITCH][::-1]
    left = z[z < X_SWITCH][::-1]

    solution = _solve(_painleve, (X_START, right[-1]), _airy_tail(X_START),
                      right, tolerance)
    phi, _, q, U, V = solution.y
    tail = _solve(_left_quadratures, (right[-1], z_min), solution.y[2:, -1],
                  left, tolerance)
    phi = np.concatenate([phi, hastings_mcleod_asymptotic(left)])[::-1]
    q = np.concatenate([q, tail.y[0]])[::-1]
    U = np.concatenate([U, tail.y[1]])[::-1]
    V = np.concatenate([V, tail.y[2]])[::-1]

    cdf = np.exp(-0.5 * (q + U))
    pdf = np.maximum(0.5 * cdf * (phi + V), 0.0)
    cdf = np.clip(np.maximum.accumulate(cdf), 0.0, 1.0)
    logger.info(f"Built Tracy-Widom table on [{z_min:g}, {z_max:g}] "
                f"({count} nodes, tolerance {tolerance:g})")
    return TracyWidomTable(z, cdf, pdf, tolerance=tolerance)


_tables = {}
_tables_lock = threading.Lock()


def shared_table(cache=None, tolerance=DEFAULT_TOLERANCE):
    """The process-wide table for `tolerance`, built at most once.

    With a `cache` path the table is read from there when valid, and written
    there otherwise.
    """
    with _tables_lock:
        table = _tables.get(tolerance)
        if table is None:
            table = TracyWidomTable.load(cache, tolerance) if cache else None
            if table is None:
                table = build_table(tolerance)
                if cache:
                    table.save(cache)
            else:
                logger.info(f"Tracy-Widom table loaded from {cache}")
            _tables[tolerance] = table
        return table


def tw1_cdf(z):
    return shared_table().cdf(z)


def tw1_quantile(p):
    return shared_table().quantile(p)
