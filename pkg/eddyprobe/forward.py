###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

"""Leading-order synthesis of eddy-current responses of a small inclusion.

The inclusion perturbs the field of a magnetic dipole source by a term of
order α³ (α⁵ for the conductive part of a sphere) that is fully described by
its polarization data.  Only the imaginary part of the measured field carries
the conductive signature, so synthesized response matrices are real.
"""

import dataclasses
import functools
import logging

import numpy as np

from eddyprobe import geometry
from eddyprobe.models import DerivedParams, InclusionModel


logger = logging.getLogger('forward')

REFERENCE_M = complex(-0.4110, -0.0387)
"""Conductivity polarization coefficient of a unit sphere at ν = 1.

Computed by an edge element solution of the interface cell problem for
μ* = μ₀; used by the shipped scenario and the 𝓜(ν) table.
"""

RANK_RTOL = 1e-8
"""Singular values below ``RANK_RTOL * σ₁`` are not significant."""


#
# Polarization data
#

@dataclasses.dataclass(frozen=True)
class PolarizationData:
    """Polarization data of an inclusion.

    Exactly one of `scalar_m` (sphere mode) or `conductivity_tensors`
    (tensor mode, shape ``(3, 3, 3, 3)``, indexed ``[l, l', :, :]``) is set.
    `magnetic_tensor` is optional and real.
    """
    scalar_m: complex | None = None
    conductivity_tensors: np.ndarray | None = None
    magnetic_tensor: np.ndarray | None = None

    def __post_init__(self):
        if (self.scalar_m is None) == (self.conductivity_tensors is None):
            raise ValueError("exactly one of scalar_m and conductivity_tensors "
                             "must be given")
        if self.scalar_m is not None:
            object.__setattr__(self, 'scalar_m', complex(self.scalar_m))
        if self.conductivity_tensors is not None:
            tensors = np.array(self.conductivity_tensors, dtype=complex)
            if tensors.shape != (3, 3, 3, 3):
                raise ValueError(f"conductivity tensors must have shape "
                                 f"(3, 3, 3, 3), got {tensors.shape}")
            tensors.flags.writeable = False
            object.__setattr__(self, 'conductivity_tensors', tensors)
        if self.magnetic_tensor is not None:
            magnetic = np.array(self.magnetic_tensor, dtype=float)
            if magnetic.shape != (3, 3):
                raise ValueError(f"magnetic tensor must have shape (3, 3), "
                                 f"got {magnetic.shape}")
            magnetic.flags.writeable = False
            object.__setattr__(self, 'magnetic_tensor', magnetic)

    @property
    def mode(self):
        return 'sphere' if self.scalar_m is not None else 'tensor'

    @classmethod
    def sphere(cls, m=REFERENCE_M):
        return cls(scalar_m=m)

    @classmethod
    def tensors(cls, conductivity, magnetic=None):
        return cls(conductivity_tensors=conductivity, magnetic_tensor=magnetic)

    @classmethod
    def sphere_equivalent(cls, m=REFERENCE_M):
        """Tensor-mode data reproducing a sphere of coefficient `m`.

        ``𝕄^(l,l') = m e_l e_l'ᵀ``, so that
        ``Σ (D²G)_{ll'} 𝕄^(l,l') H = m D²G H``.
        """
        eye = np.eye(3)
        conductivity = complex(m) * np.einsum('la,mb->lmab', eye, eye)
        return cls(conductivity_tensors=conductivity)

    @classmethod
    def load(cls, path):
        """Load tensor-mode data from an ``.npz`` file.

        The file holds ``conductivity`` and, optionally, ``magnetic``.
        """
        with np.load(path) as data:
            magnetic = data['magnetic'] if 'magnetic' in data else None
            return cls.tensors(data['conductivity'], magnetic)


#
# Sensors
#

@dataclasses.dataclass(frozen=True)
class SensorArray:
    """Magnetic dipole sources and receivers.

    `sources` and `p` have shape ``(M, 3)``, `receivers` and `q` have shape
    ``(N, 3)``; rows of `p` and `q` are unit vectors.
    """
    sources: np.ndarray
    p: np.ndarray
    receivers: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        for name in ('sources', 'p', 'receivers', 'q'):
            value = geometry.as_points(getattr(self, name), name).copy()
            value.flags.writeable = False
            object.__setattr__(self, name, value)
        if self.p.shape != self.sources.shape:
            raise ValueError("one source direction is needed per source")
        if self.q.shape != self.receivers.shape:
            raise ValueError("one receiver direction is needed per receiver")
        for name in ('p', 'q'):
            norms = np.linalg.norm(getattr(self, name), axis=1)
            if not np.allclose(norms, 1, rtol=0, atol=1e-9):
                raise ValueError(f"directions {name} must be unit vectors")
        if self.N < self.M:
            raise ValueError(f"there must be at least as many receivers as "
                             f"sources (N={self.N}, M={self.M})")

    @property
    def M(self):
        return len(self.sources)

    @property
    def N(self):
        return len(self.receivers)

    @property
    def gamma(self):
        return self.N / self.M

    @staticmethod
    def plane(extent, count, height):
        """Row-major ``count`` x ``count`` grid on ``extent² x {height}``."""
        ticks = np.linspace(extent[0], extent[1], count)
        yy, xx = np.meshgrid(ticks, ticks, indexing='ij')
        return np.column_stack([xx.ravel(), yy.ravel(),
                                np.full(count * count, float(height))])

    @classmethod
    def planar(cls, extent=(-2.0, 2.0), source_count=16, receiver_count=None,
               height=1.0, p=(0, 0, 1), q=(0, 0, 1)):
        """Square planar source and receiver arrays at the same height.

        Sensor ``n`` of a ``c`` x ``c`` array sits at row ``n // c`` (y) and
        column ``n % c`` (x).  With equal counts the arrays coincide.
        """
        if receiver_count is None:
            receiver_count = source_count
        sources = cls.plane(extent, source_count, height)
        receivers = cls.plane(extent, receiver_count, height)
        return cls(sources=sources, p=np.tile(np.asarray(p, float), (len(sources), 1)),
                   receivers=receivers,
                   q=np.tile(np.asarray(q, float), (len(receivers), 1)))


#
# Response matrices
#

@dataclasses.dataclass(frozen=True)
class ResponseMatrix:
    """A real ``N x M`` response matrix (receivers x sources) and its SVD."""
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError(f"response matrix must be 2D, got {data.shape}")
        data.flags.writeable = False
        object.__setattr__(self, 'data', data)

    @property
    def N(self):
        return self.data.shape[0]

    @property
    def M(self):
        return self.data.shape[1]

    @property
    def gamma(self):
        return self.N / self.M

    @functools.cached_property
    def singular_values(self):
        return np.linalg.svd(self.data, compute_uv=False)

    @functools.cached_property
    def svd(self):
        """Thin SVD ``(U, s, Vt)`` of the data."""
        return np.linalg.svd(self.data, full_matrices=False)

    @property
    def left_vectors(self):
        return self.svd[0]

    def numerical_rank(self, rtol=RANK_RTOL):
        sv = self.singular_values
        if sv[0] == 0:
            return 0
        return int(np.count_nonzero(sv > rtol * sv[0]))

    def scaled(self, factor):
        return ResponseMatrix(self.data * factor)


#
# Formulas
#

def derive_params(incl: InclusionModel) -> DerivedParams:
    k = incl.omega * incl.mu0 * incl.sigma_star
    return DerivedParams(k=k, nu=k * incl.alpha**2, skin_depth=np.sqrt(2 / k),
                         mu_ratio=incl.mu_star / incl.mu0)


def _require_mode(pol, mode):
    if pol.mode != mode:
        raise ValueError(f"{mode} mode polarization data is needed, "
                         f"got {pol.mode} mode")


def sphere_perturbation(x, s, p, q, incl, pol):
    """Perturbation ``q·(H_α - H₀)(x)`` for a source at `s` along `p`.

    Return the complex value ``i k α⁵ 𝓜 (D²G(x, z) q)ᵀ (D²G(z, s) p)``.
    """
    _require_mode(pol, 'sphere')
    z = incl.z
    k = derive_params(incl).k
    receiver_side = geometry.green_hessian(x, z) @ geometry.as_point(q, 'q')
    source_side = geometry.green_hessian(z, s) @ geometry.as_point(p, 'p')
    return 1j * k * incl.alpha**5 * pol.scalar_m * (receiver_side @ source_side)


def general_perturbation(x, incl, pol, H0_at_z, DH0_at_z=None):
    """Perturbed field ``(H_α - H₀)(x)`` of an arbitrarily shaped inclusion.

    `H0_at_z` is the incident field at the inclusion center.  `DH0_at_z`,
    its Jacobian there, is only checked: it enters the expansion at higher
    order than the terms kept here.

    Return a complex 3-vector.
    """
    _require_mode(pol, 'tensor')
    h0 = np.asarray(H0_at_z, dtype=float)
    if h0.shape != (3,):
        raise ValueError(f"H0_at_z must be a 3-vector, got shape {h0.shape}")
    if DH0_at_z is not None and np.shape(DH0_at_z) != (3, 3):
        raise ValueError(f"DH0_at_z must be 3x3, got shape {np.shape(DH0_at_z)}")
    hess = geometry.green_hessian(x, incl.z)
    nu = derive_params(incl).nu
    alpha3 = incl.alpha**3
    field = 1j * nu * alpha3 * np.einsum('lm,lmab,b->a', hess,
                                         pol.conductivity_tensors, h0)
    if pol.magnetic_tensor is not None:
        field = field + alpha3 * (hess @ (pol.magnetic_tensor @ h0))
    return field


def steering_vectors(points, directions, z, role='receiver'):
    """Rows ``D²G(x_n, z) d_n`` for sensor positions `points`."""
    hessians = geometry.green_hessians(points, z, role=role)
    return np.einsum('nij,nj->ni', hessians, directions)


def unit_response(array, z):
    """Unit-strength kernel ``(D²G(r_n, z) q)ᵀ (D²G(z, s_m) p)`` as N x M."""
    receiver_side = steering_vectors(array.receivers, array.q, z, 'receiver')
    source_side = steering_vectors(array.sources, array.p, z, 'source')
    return receiver_side @ source_side.T


def complex_response(array, incl, pol):
    """Complex perturbations ``q_n·(H_α - H₀)^(m)(r_n)`` as an N x M array."""
    params = derive_params(incl)
    if pol.mode == 'sphere':
        scale = 1j * params.k * incl.alpha**5 * pol.scalar_m
        return scale * unit_response(array, incl.z)
    z = incl.z
    receiver_hess = geometry.green_hessians(array.receivers, z, role='receiver')
    incident = steering_vectors(array.sources, array.p, z, 'source')
    alpha3 = incl.alpha**3
    fields = 1j * params.nu * alpha3 * np.einsum(
        'nlm,lmab,kb->nka', receiver_hess, pol.conductivity_tensors, incident)
    if pol.magnetic_tensor is not None:
        fields = fields + alpha3 * np.einsum(
            'nac,cb,kb->nka', receiver_hess, pol.magnetic_tensor, incident)
    return np.einsum('nka,na->nk', fields, array.q)


def response_matrix(array, incl, pol):
    """Imaginary-part response matrix ``A₀`` (receivers x sources).

    In sphere mode ``A₀[n, m] = k α⁵ Re(𝓜) (D²G(r_n, z) q)ᵀ (D²G(z, s_m) p)``.
    """
    if pol.mode == 'sphere':
        scale = derive_params(incl).k * incl.alpha**5 * pol.scalar_m.real
        data = scale * unit_response(array, incl.z)
    else:
        data = complex_response(array, incl, pol).imag
    logger.debug(f"Synthesized {data.shape[0]}x{data.shape[1]} response matrix")
    return ResponseMatrix(data)


def closed_form_singular_values(array, incl, pol):
    """Componentwise singular value estimates of ``A₀`` (sphere mode).

    This is exact only when the three source-side and the three
    receiver-side component vectors are orthogonal families; use the SVD of
    `response_matrix` otherwise.
    """
    _require_mode(pol, 'sphere')
    z = incl.z
    scale = derive_params(incl).k * incl.alpha**5 * abs(pol.scalar_m.real)
    receiver_side = steering_vectors(array.receivers, array.q, z, 'receiver')
    source_side = steering_vectors(array.sources, array.p, z, 'source')
    return (scale * np.linalg.norm(source_side, axis=0)
            * np.linalg.norm(receiver_side, axis=0))
