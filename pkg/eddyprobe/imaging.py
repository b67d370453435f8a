###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""MUSIC localization of an inclusion from a measured response matrix.

The range of the leading left singular vectors of the measured matrix is
compared with the receiver-side steering vectors ``g_l(z_s)``, ``l = 1..3``,
of each search point; the imaging functional peaks where they lie in that
range.
"""

import dataclasses
import functools
import logging
import warnings

import numpy as np

from eddyprobe import geometry
from eddyprobe.forward import ResponseMatrix


logger = logging.getLogger('music')

VALUE_CAP = 1e30
RANK_WARN_RTOL = 1e-12
BATCH_SIZE = 512


class RankDeficiencyWarning(RuntimeWarning):
    """The signal subspace includes numerically null directions."""


@dataclasses.dataclass(frozen=True)
class SearchGrid:
    """Axis-aligned box sampled at `counts` nodes per axis.

    An axis with ``lower == upper`` has a single node, which gives plane and
    line cross-sections.  Nodes are ordered C-style over ``(x, y, z)``.
    """
    lower: tuple
    upper: tuple
    counts: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in geometry.as_point(self.lower, 'lower'))
        upper = tuple(float(v) for v in geometry.as_point(self.upper, 'upper'))
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != 3:
            raise ValueError(f"counts needs one value per axis, got {counts}")
        for axis, (lo, hi, count) in enumerate(zip(lower, upper, counts)):
            if lo > hi:
                raise ValueError(f"axis {axis}: lower {lo} exceeds upper {hi}")
            if lo == hi and count != 1:
                raise ValueError(f"axis {axis}: a flat axis takes exactly 1 node")
            if lo < hi and count < 2:
                raise ValueError(f"axis {axis}: at least 2 nodes needed, got {count}")
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)
        object.__setattr__(self, 'counts', counts)

    @classmethod
    def cube(cls, lower, upper, resolution):
        """Grid with `resolution` nodes on every non-flat axis."""
        counts = tuple(1 if lo == hi else resolution for (lo, hi) in zip(lower, upper))
        return cls(tuple(lower), tuple(upper), counts)

    @property
    def shape(self):
        return self.counts

    @property
    def size(self):
        return int(np.prod(self.counts))

    @property
    def spacing(self):
        return tuple(0.0 if count == 1 else (hi - lo) / (count - 1)
                     for (lo, hi, count) in zip(self.lower, self.upper, self.counts))

    @property
    def axes(self):
        return tuple(np.linspace(lo, hi, count)
                     for (lo, hi, count) in zip(self.lower, self.upper, self.counts))

    def nodes(self):
        """Node coordinates as an ``(size, 3)`` array."""
        mesh = np.meshgrid(*self.axes, indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1)

    def point(self, index):
        return tuple(float(axis[i]) for (axis, i) in zip(self.axes, index))

    def contains(self, points):
        """Mask of `points` inside the closed box."""
        points = geometry.as_points(points)
        return np.all((points >= self.lower) & (points <= self.upper), axis=1)


@dataclasses.dataclass(frozen=True)
class MusicImage:
    grid: SearchGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(self.grid.shape)
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @functools.cached_property
    def argmax_index(self):
        """Index of the largest value; ties go to the smallest flat index."""
        flat = int(np.argmax(self.values))
        return tuple(int(i) for i in np.unravel_index(flat, self.grid.shape))

    @property
    def argmax(self):
        return self.grid.point(self.argmax_index)

    @property
    def peak_value(self):
        return float(self.values[self.argmax_index])

    def peak_to_median(self):
        return peak_to_median(self.values)

    def cross_section(self, axis, value):
        """Sub-image on the grid plane nearest to ``coordinate[axis] == value``."""
        index = int(np.argmin(np.abs(self.grid.axes[axis] - value)))
        at = self.grid.axes[axis][index]
        lower = list(self.grid.lower)
        upper = list(self.grid.upper)
        counts = list(self.grid.counts)
        lower[axis] = upper[axis] = at
        counts[axis] = 1
        grid = SearchGrid(tuple(lower), tuple(upper), tuple(counts))
        values = np.take(self.values, [index], axis=axis)
        return MusicImage(grid, values)

    def table(self):
        """Columns ``x, y, z, value`` in node order."""
        nodes = self.grid.nodes()
        return {'x': nodes[:, 0], 'y': nodes[:, 1], 'z': nodes[:, 2],
                'value': self.values.ravel()}


def peak_to_median(values):
    values = np.asarray(values, dtype=float)
    median = np.median(values)
    return float(np.max(values) / median) if median > 0 else np.inf


def signal_projector(A_meas, rank=3):
    """Orthogonal projector ``U_r U_rᵀ`` on the leading left singular vectors."""
    A_meas = A_meas if isinstance(A_meas, ResponseMatrix) else ResponseMatrix(A_meas)
    if not 1 <= rank <= min(A_meas.N, A_meas.M):
        raise ValueError(f"rank must lie in [1, {min(A_meas.N, A_meas.M)}], got {rank}")
    sv = A_meas.singular_values
    if sv[0] == 0 or sv[rank - 1] / sv[0] < RANK_WARN_RTOL:
        message = (f"signal rank {rank} exceeds the numerical rank "
                   f"(sigma_{rank}/sigma_1 = {sv[rank - 1] / sv[0] if sv[0] else 0:.3g})")
        logger.warning(message)
        warnings.warn(message, RankDeficiencyWarning, stacklevel=2)
    U = A_meas.left_vectors[:, :rank]
    return U @ U.T


def _steering(nodes, receivers, q):
    hessians = geometry.green_hessian_table(receivers, nodes, role='receiver')
    return np.einsum('bnij,nj->bni', hessians, np.asarray(q, dtype=float))


def _values(nodes, P, receivers, q):
    g = _steering(nodes, receivers, q)
    residual = g - np.einsum('nk,bkl->bnl', P, g)
    denominator = np.sum(residual**2, axis=(1, 2))
    with np.errstate(divide='ignore'):
        values = np.where(denominator > 0, denominator**-0.5, VALUE_CAP)
    return np.minimum(values, VALUE_CAP)


def music_value(z_s, P, receivers, q):
    """Imaging functional ``[Σ_l ‖(I - P) g_l(z_s)‖²]^{-1/2}``, capped at `VALUE_CAP`."""
    node = geometry.as_point(z_s, 'search point')[None, :]
    return float(_values(node, P, receivers, q)[0])


def music_scan(grid, P, receivers, q, batch_size=BATCH_SIZE):
    """Evaluate the imaging functional at every node of `grid`."""
    nodes = grid.nodes()
    values = np.empty(len(nodes))
    for start in range(0, len(nodes), batch_size):
        stop = start + batch_size
        values[start:stop] = _values(nodes[start:stop], P, receivers, q)
    image = MusicImage(grid, values)
    logger.info(f"Scanned {grid.size} nodes, peak {image.peak_value:.4g} "
                f"at {image.argmax}")
    return image


def _parabola_offset(f_minus, f_0, f_plus, h):
    curvature = f_minus - 2 * f_0 + f_plus
    if curvature >= 0:
        return 0.0
    offset = 0.5 * h * (f_minus - f_plus) / curvature
    return float(np.clip(offset, -h / 2, h / 2))


def locate(image, refine=False):
    """Grid point of the image maximum.

    With `refine`, a parabola through the log-values of the peak and its two
    neighbors shifts each coordinate by at most half a grid spacing; axes
    where the peak lies on the boundary are left unchanged.
    """
    index = image.argmax_index
    point = list(image.argmax)
    if not refine:
        return tuple(point)
    logs = np.log(np.maximum(image.values, np.finfo(float).tiny))
    for axis, h in enumerate(image.grid.spacing):
        i = index[axis]
        if h == 0 or i == 0 or i == image.grid.counts[axis] - 1:
            continue
        around = [list(index) for _ in range(3)]
        for k, shift in enumerate((-1, 0, 1)):
            around[k][axis] = i + shift
        f_minus, f_0, f_plus = (logs[tuple(idx)] for idx in around)
        point[axis] += _parabola_offset(f_minus, f_0, f_plus, h)
    return tuple(point)


def refine_scan(image, P, receivers, q, resolution=None):
    """Second, finer scan around the peak of `image`.

    The new box spans one coarse spacing on each side of the peak, clipped
    to the coarse box, with `resolution` nodes per axis (default: the coarse
    counts).
    """
    grid = image.grid
    center = image.argmax
    lower, upper, counts = [], [], []
    for axis, h in enumerate(grid.spacing):
        if h == 0:
            lower.append(center[axis])
            upper.append(center[axis])
            counts.append(1)
            continue
        lower.append(max(center[axis] - h, grid.lower[axis]))
        upper.append(min(center[axis] + h, grid.upper[axis]))
        counts.append(resolution or grid.counts[axis])
    fine = SearchGrid(tuple(lower), tuple(upper), tuple(counts))
    return music_scan(fine, P, receivers, q)
