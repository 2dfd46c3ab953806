"""Extrinsic geometry of a star-shaped radial graph in hyperbolic space.

The surface is ``{(r(x), x) : x in S^2}`` in the warped metric
``dr^2 + sinh(r)^2 g_S2``.  All tensors are stored by components in the
orthonormal frame of the round sphere, so Kronecker deltas are literal
identities.  The substituted variable ``vphi`` solves
``d vphi / d r = 1 / sinh r``, i.e. ``vphi = log tanh(r / 2) < 0``.
"""
from dataclasses import dataclass
from math import comb

import numpy as np

from . import sphgrid
from .errors import ConeExit, DomainError
from .params import FlowParams


def vphi_of_r(r):
    """``log(1 - 2 / (e^r + 1))``, evaluated through ``log1p`` for accuracy."""
    r = np.asarray(r, dtype=float)
    return np.log1p(-2.0 / (np.exp(r) + 1.0))


def r_of_vphi(v):
    """Inverse of :func:`vphi_of_r`: ``log(2 / (1 - e^v) - 1)``."""
    v = np.asarray(v, dtype=float)
    return np.log1p(np.exp(v)) - np.log(-np.expm1(v))


@dataclass(frozen=True)
class RadialField:
    r: np.ndarray
    sinh_r: np.ndarray
    cosh_r: np.ndarray
    vphi: np.ndarray


def radial_from_values(grid, r):
    """Wrap node values of r, caching sinh, cosh and vphi."""
    r = grid.check_field(r)
    if np.any(r <= 0.0):
        raise DomainError("radial function must be positive")
    r = r.copy()
    return RadialField(r, np.sinh(r), np.cosh(r), vphi_of_r(r))


@dataclass(frozen=True)
class GeometryState:
    """Per-node geometry, stored as component arrays.

    ``g``, ``g_inv`` and ``h`` are available stacked as ``(..., 2, 2)``
    arrays through the properties of the same name.
    """

    u: np.ndarray
    omega: np.ndarray
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    h11: np.ndarray
    h12: np.ndarray
    h22: np.ndarray
    kappa1: np.ndarray  # smaller principal curvature
    kappa2: np.ndarray
    sigma_k: np.ndarray
    speed: np.ndarray
    grad_sq: np.ndarray  # |grad r|^2 on the round sphere
    grad_vphi_sq: np.ndarray  # |grad vphi|^2 = |grad r|^2 / sinh(r)^2

    @staticmethod
    def _stack(a11, a12, a22):
        return np.stack([np.stack([a11, a12], -1), np.stack([a12, a22], -1)], -2)

    @property
    def g(self):
        return self._stack(self.g11, self.g12, self.g22)

    @property
    def g_inv(self):
        det = self.g11 * self.g22 - self.g12**2
        return self._stack(self.g22 / det, -self.g12 / det, self.g11 / det)

    @property
    def h(self):
        return self._stack(self.h11, self.h12, self.h22)

    @property
    def kappa(self):
        return np.stack([self.kappa1, self.kappa2], -1)


def curvature_speed(sigma_k, sinh_r, params, check=True):
    """``sinh(r)^(alpha/beta) * sigma_k^(1/beta)``.

    With ``check`` set, a nonpositive ``sigma_k`` raises :class:`ConeExit`
    when ``1/beta`` is not an integer (the power is then undefined).
    """
    a_b = params.alpha / params.beta
    if params.inv_beta_is_integer:
        p = int(round(1.0 / params.beta))
        return sinh_r**a_b * sigma_k**p
    if check:
        bad = sigma_k <= 0.0
        if np.any(bad):
            idx = np.unravel_index(np.argmax(bad), np.shape(sigma_k))
            raise ConeExit(tuple(int(i) for i in idx), float(np.asarray(sigma_k)[idx]))
    return sinh_r**a_b * sigma_k ** (1.0 / params.beta)


def _require_surface_dim(params):
    if params.n != 2:
        raise DomainError("the PDE geometry is implemented for n = 2 only")


def geometry_from_derivatives(sinh_r, cosh_r, grad, hess, params):
    """Geometry from node values of r and its frame derivatives.

    Split out from :func:`geometry` so analytic derivatives can be fed in
    directly (used by convergence oracles).
    """
    _require_surface_dim(params)
    r1, r2 = grad
    a11, a12, a22 = hess
    phi, dphi = sinh_r, cosh_r
    phi2 = phi * phi
    if r2 is None and a12 is None:
        return _geometry_diagonal(phi, dphi, phi2, r1, a11, a22, params)
    grad_sq = r1 * r1 + r2 * r2
    root = np.sqrt(phi2 + grad_sq)
    omega = root / phi
    u = phi / omega

    g11 = phi2 + r1 * r1
    g12 = r1 * r2
    g22 = phi2 + r2 * r2

    inv_root = 1.0 / root
    diag = phi2 * dphi
    h11 = (-phi * a11 + 2.0 * dphi * r1 * r1 + diag) * inv_root
    h12 = (-phi * a12 + 2.0 * dphi * r1 * r2) * inv_root
    h22 = (-phi * a22 + 2.0 * dphi * r2 * r2 + diag) * inv_root

    # h v = kappa g v for a 2x2 symmetric pair
    det_g = g11 * g22 - g12 * g12
    tr = (g11 * h22 + g22 * h11 - 2.0 * g12 * h12) / det_g
    det = (h11 * h22 - h12 * h12) / det_g
    disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
    k1 = 0.5 * (tr - disc)
    k2 = 0.5 * (tr + disc)

    sig = tr if params.k == 1 else det
    speed = curvature_speed(sig, phi, params)
    return GeometryState(
        u, omega, g11, g12, g22, h11, h12, h22, k1, k2, sig, speed, grad_sq, grad_sq / phi2
    )


def _geometry_diagonal(phi, dphi, phi2, r1, a11, a22, params):
    # r_2 = Hess_12 = 0: g and h are diagonal, curvatures are the ratios
    r1_sq = r1 * r1
    root = np.sqrt(phi2 + r1_sq)
    omega = root / phi
    g11 = phi2 + r1_sq
    diag = phi2 * dphi
    h11 = (-phi * a11 + 2.0 * dphi * r1_sq + diag) / root
    h22 = (-phi * a22 + diag) / root
    ka = h11 / g11
    kb = h22 / phi2
    sig = ka + kb if params.k == 1 else ka * kb
    speed = curvature_speed(sig, phi, params)
    zero = np.zeros_like(phi)
    return GeometryState(
        phi / omega, omega, g11, zero, phi2, h11, zero, h22,
        np.minimum(ka, kb), np.maximum(ka, kb), sig, speed, r1_sq, r1_sq / phi2,
    )


def geometry(grid, rf, params):
    """Support function, metric, second fundamental form, curvatures and speed."""
    grad, hess = sphgrid.derivatives(grid, rf.r, sparse=True)
    return geometry_from_derivatives(rf.sinh_r, rf.cosh_r, grad, hess, params)


def sphere_geometry(a, params):
    """Closed-form values on the geodesic sphere of radius ``a``."""
    coth = np.cosh(a) / np.sinh(a)
    sig = comb(params.n, params.k) * coth**params.k
    return {
        "kappa": coth,
        "u": np.sinh(a),
        "sigma_k": sig,
        "speed": np.sinh(a) ** (params.alpha / params.beta) * sig ** (1.0 / params.beta),
    }


def _vphi_form(grid, rf):
    (v1, v2), (b11, b12, b22) = sphgrid.derivatives(grid, rf.vphi)
    s = np.sinh(-rf.vphi)
    coth = np.cosh(-rf.vphi) / s
    omega = np.sqrt(1.0 + v1 * v1 + v2 * v2)
    pre = 1.0 / (s * omega)
    h11 = pre * (-b11 + coth * (v1 * v1 + 1.0))
    h12 = pre * (-b12 + coth * v1 * v2)
    h22 = pre * (-b22 + coth * (v2 * v2 + 1.0))
    inv_s2 = 1.0 / (s * s)
    g11 = inv_s2 * (1.0 + v1 * v1)
    g12 = inv_s2 * v1 * v2
    g22 = inv_s2 * (1.0 + v2 * v2)
    return (g11, g12, g22), (h11, h12, h22)


def geometry_vphi_crosscheck(grid, rf, params=None, return_sigma=False):
    """Max-norm discrepancy between the r-form and vphi-form of g and h.

    The two forms agree identically for exact derivatives, so the result is
    pure discretization error, O(h^2).  With ``return_sigma`` the maximum
    discrepancy of sigma_k (default k = 1 when ``params`` is None) is
    returned as a second value.
    """
    if params is None:
        params = FlowParams(2, 1, 3.0, 1.0)
    geo = geometry(grid, rf, params)
    (g11, g12, g22), (h11, h12, h22) = _vphi_form(grid, rf)
    res = max(
        float(np.max(np.abs(a - b)))
        for a, b in (
            (geo.g11, g11), (geo.g12, g12), (geo.g22, g22),
            (geo.h11, h11), (geo.h12, h12), (geo.h22, h22),
        )
    )
    if not return_sigma:
        return res
    det_g = g11 * g22 - g12 * g12
    if params.k == 1:
        sig = (g11 * h22 + g22 * h11 - 2.0 * g12 * h12) / det_g
    else:
        sig = (h11 * h22 - h12 * h12) / det_g
    return res, float(np.max(np.abs(sig - geo.sigma_k)))
