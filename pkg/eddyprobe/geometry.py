###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""Laplace Green's function, its derivatives and magnetic dipole fields.

Points are anything convertible to a float array of shape ``(3,)`` (in
meters).  All functions are pure; the Hessian is always evaluated from its
closed form.
"""

import numpy as np

from eddyprobe.utils import NumericalError


EPS_GEOM = 1e-12
"""Minimal distance (m) between evaluation and source points."""

_FOUR_PI = 4 * np.pi


class CoincidentPointsError(NumericalError, ValueError):
    """Two points are closer than `EPS_GEOM`."""


def as_point(x, name='point'):
    point = np.asarray(x, dtype=float)
    if point.shape != (3,):
        raise ValueError(f"{name} must have 3 coordinates, got shape {point.shape}")
    if not np.all(np.isfinite(point)):
        raise ValueError(f"{name} has non-finite coordinates: {point}")
    return point


def as_points(xs, name='points'):
    points = np.asarray(xs, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {points.shape}")
    if not np.all(np.isfinite(points)):
        raise ValueError(f"{name} have non-finite coordinates")
    return points


def _offset(x, y):
    r = as_point(x, 'x') - as_point(y, 'y')
    dist = np.linalg.norm(r)
    if dist < EPS_GEOM:
        raise CoincidentPointsError(f"points {tuple(x)} and {tuple(y)} coincide")
    return r, dist


def green_scalar(x, y):
    """Fundamental solution of the Laplace equation, ``1/(4π|x-y|)``."""
    _, dist = _offset(x, y)
    return 1 / (_FOUR_PI * dist)


def green_hessian(x, y):
    """Hessian of `green_scalar` with respect to `x` (a symmetric 3x3 array).

    Entry ``(i, j)`` is ``(3 r_i r_j - |r|² δ_ij) / (4π |r|⁵)`` with
    ``r = x - y``.
    """
    r, dist = _offset(x, y)
    return (3 * np.outer(r, r) - dist**2 * np.eye(3)) / (_FOUR_PI * dist**5)


def green_hessians(xs, y, role='point'):
    """Stack of Hessians ``D²G(x_n, y)`` for the rows `x_n` of `xs`.

    Return an array of shape ``(n, 3, 3)``.  `role` names the points in the
    error raised when one of them coincides with `y`.
    """
    xs = as_points(xs)
    y = as_point(y, 'y')
    r = xs - y
    dist = np.linalg.norm(r, axis=1)
    close = np.flatnonzero(dist < EPS_GEOM)
    if close.size:
        raise CoincidentPointsError(
            f"{role} {close[0]} at {tuple(xs[close[0]])} coincides "
            f"with {tuple(y)}")
    return _hessian_stack(r, dist)


def _hessian_stack(r, dist):
    outer = 3 * r[..., :, None] * r[..., None, :]
    diag = (dist**2)[..., None, None] * np.eye(3)
    return (outer - diag) / (_FOUR_PI * dist**5)[..., None, None]


def green_hessian_table(xs, ys, role='point', other='search point'):
    """Hessians ``D²G(x_n, y_b)`` for all pairs, shaped ``(len(ys), len(xs), 3, 3)``."""
    xs = as_points(xs)
    ys = as_points(ys)
    r = xs[None, :, :] - ys[:, None, :]
    dist = np.linalg.norm(r, axis=2)
    close = np.argwhere(dist < EPS_GEOM)
    if close.size:
        b, n = close[0]
        raise CoincidentPointsError(
            f"{role} {n} at {tuple(xs[n])} coincides with {other} {tuple(ys[b])}")
    return _hessian_stack(r, dist)


def dipole_field(x, s, p):
    """Magnetic field at `x` of a unit magnetic dipole at `s` pointing along `p`.

    This is ``D²G(x, s) p``.
    """
    p = as_point(p, 'p')
    if not np.isclose(np.linalg.norm(p), 1.0, rtol=0, atol=1e-12):
        raise ValueError(f"dipole direction must be a unit vector, got {p}")
    return green_hessian(x, s) @ p
