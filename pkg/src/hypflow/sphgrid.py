"""Finite-difference discretizations of the round 2-sphere.

Two layouts are supported:

``axisymmetric``
    Fields depend on colatitude only.  Nodes ``theta_j = j h``, ``j = 0..N-1``,
    include both poles; regularity there is imposed by mirror ghost nodes
    (odd derivatives of a smooth axisymmetric function vanish at the poles).

``latlon``
    Full lat-lon lattice with staggered colatitudes ``theta_j = (j + 1/2) h``
    so no node sits on a pole, and periodic longitude.  The ghost row beyond a
    pole is the first ring shifted by half a turn (the same points on the
    sphere), which needs an even number of longitudes.

Derivatives are returned as components in the orthonormal frame
``(e_theta, e_phi / sin theta)``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

AXISYMMETRIC = "axisymmetric"
LATLON = "latlon"

_MODE_ALIASES = {
    "axisymmetric": AXISYMMETRIC,
    "axisym": AXISYMMETRIC,
    "axisymmetric1d": AXISYMMETRIC,
    "1d": AXISYMMETRIC,
    "latlon": LATLON,
    "latlon2d": LATLON,
    "2d": LATLON,
}


def canonical_mode(mode):
    try:
        return _MODE_ALIASES[str(mode).strip().lower()]
    except KeyError:
        raise DomainError(f"unknown grid mode {mode!r}") from None


@dataclass(frozen=True)
class Grid:
    """Immutable sphere grid.

    Parameters
    ----------
    mode : str
        ``"axisymmetric"`` or ``"latlon"`` (aliases accepted).
    n_theta : int
        Number of colatitude nodes, at least 8.
    n_phi : int
        Number of longitudes for ``latlon`` (even, at least 8); ignored for
        the axisymmetric layout.
    """

    mode: str
    n_theta: int
    n_phi: int = 0
    theta: np.ndarray = field(init=False, repr=False, compare=False)
    phi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mode = canonical_mode(self.mode)
        object.__setattr__(self, "mode", mode)
        if self.n_theta < 8:
            raise DomainError("n_theta must be at least 8")
        if mode == AXISYMMETRIC:
            object.__setattr__(self, "n_phi", 1)
            theta = np.linspace(0.0, np.pi, self.n_theta)
            phi = np.zeros(1)
        else:
            if self.n_phi < 8 or self.n_phi % 2:
                raise DomainError("latlon grids need an even n_phi >= 8")
            h = np.pi / self.n_theta
            theta = (np.arange(self.n_theta) + 0.5) * h
            phi = np.arange(self.n_phi) * (2.0 * np.pi / self.n_phi)
        theta.flags.writeable = False
        phi.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def axisymmetric(cls, n_theta):
        return cls(AXISYMMETRIC, n_theta)

    @classmethod
    def latlon(cls, n_theta, n_phi=None):
        return cls(LATLON, n_theta, 2 * n_theta if n_phi is None else n_phi)

    @property
    def is_axisymmetric(self):
        return self.mode == AXISYMMETRIC

    @property
    def shape(self):
        if self.is_axisymmetric:
            return (self.n_theta,)
        return (self.n_theta, self.n_phi)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def h_theta(self):
        if self.is_axisymmetric:
            return np.pi / (self.n_theta - 1)
        return np.pi / self.n_theta

    @property
    def h_phi(self):
        return 2.0 * np.pi / self.n_phi if not self.is_axisymmetric else 0.0

    @property
    def h(self):
        """Nominal spacing used in error envelopes (the colatitude step)."""
        return self.h_theta

    def mesh(self):
        """Colatitude and longitude arrays broadcast to the field shape."""
        if self.is_axisymmetric:
            return self.theta.copy(), np.zeros(self.shape)
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    def refined(self):
        """Grid with half the spacing in every direction."""
        if self.is_axisymmetric:
            return Grid(AXISYMMETRIC, 2 * self.n_theta - 1)
        return Grid(LATLON, 2 * self.n_theta, 2 * self.n_phi)

    def min_spacing(self):
        """Smallest unit-sphere node spacing, per node (``min(h_t, sin t h_p)``)."""
        if self.is_axisymmetric:
            return np.full(self.shape, self.h_theta)
        sin_t = np.sin(self.theta)[:, None]
        return np.minimum(self.h_theta, sin_t * self.h_phi) * np.ones(self.shape)

    def check_field(self, f):
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise DomainError(f"field shape {f.shape} does not match grid {self.shape}")
        if not np.all(np.isfinite(f)):
            raise DomainError("field has non-finite values")
        return f

    # cached trig factors used by the stencils
    def _trig(self):
        cache = self.__dict__.get("_trig_cache")
        if cache is None:
            if self.is_axisymmetric:
                t = self.theta[1:-1]
                cache = (None, np.cos(t) / np.sin(t))
            else:
                s = np.sin(self.theta)[:, None]
                cache = (1.0 / s, (np.cos(self.theta) / np.sin(self.theta))[:, None])
            object.__setattr__(self, "_trig_cache", cache)
        return cache


def _derivs_axisym(grid, f):
    h = grid.h_theta
    ft = np.empty_like(f)
    ftt = np.empty_like(f)
    ft[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    ft[0] = ft[-1] = 0.0
    ftt[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    # mirror ghosts f[-1] = f[1], f[N] = f[N-2]
    ftt[0] = 2.0 * (f[1] - f[0]) / (h * h)
    ftt[-1] = 2.0 * (f[-2] - f[-1]) / (h * h)
    return ft, ftt


def _pad_latlon(f):
    half = f.shape[1] // 2
    north = np.roll(f[:1], half, axis=1)
    south = np.roll(f[-1:], half, axis=1)
    g = np.concatenate([north, f, south], axis=0)
    return np.concatenate([g[:, -1:], g, g[:, :1]], axis=1)


def _derivs_latlon(grid, f):
    ht, hp = grid.h_theta, grid.h_phi
    g = _pad_latlon(f)
    c = g[1:-1, 1:-1]
    ft = (g[2:, 1:-1] - g[:-2, 1:-1]) / (2.0 * ht)
    fp = (g[1:-1, 2:] - g[1:-1, :-2]) / (2.0 * hp)
    ftt = (g[2:, 1:-1] - 2.0 * c + g[:-2, 1:-1]) / (ht * ht)
    fpp = (g[1:-1, 2:] - 2.0 * c + g[1:-1, :-2]) / (hp * hp)
    ftp = (g[2:, 2:] - g[2:, :-2] - g[:-2, 2:] + g[:-2, :-2]) / (4.0 * ht * hp)
    return ft, fp, ftt, fpp, ftp


def gradient(grid, f):
    """Frame components ``(grad_1 f, grad_2 f)`` of the round-sphere gradient."""
    f = grid.check_field(f)
    if grid.is_axisymmetric:
        ft, _ = _derivs_axisym(grid, f)
        return ft, np.zeros_like(f)
    inv_sin, _ = grid._trig()
    ft, fp, *_ = _derivs_latlon(grid, f)
    return ft, fp * inv_sin


def hessian(grid, f):
    """Covariant Hessian in the orthonormal frame as ``(H11, H12, H22)``."""
    return derivatives(grid, f)[1]


def derivatives(grid, f, check=True, sparse=False):
    """Gradient and Hessian together: ``((g1, g2), (H11, H12, H22))``.

    With ``sparse`` the components that vanish identically on the
    axisymmetric layout (``g2`` and ``H12``) are returned as ``None``.
    """
    if check:
        f = grid.check_field(f)
    if grid.is_axisymmetric:
        ft, ftt = _derivs_axisym(grid, f)
        _, cot = grid._trig()
        h22 = np.empty_like(f)
        h22[1:-1] = cot * ft[1:-1]
        # cot(theta) f_theta -> f_theta_theta at a pole
        h22[0] = ftt[0]
        h22[-1] = ftt[-1]
        zero = None if sparse else np.zeros_like(f)
        return (ft, zero), (ftt, zero, h22)
    inv_sin, cot = grid._trig()
    ft, fp, ftt, fpp, ftp = _derivs_latlon(grid, f)
    h12 = (ftp - cot * fp) * inv_sin
    h22 = fpp * inv_sin**2 + cot * ft
    return (ft, fp * inv_sin), (ftt, h12, h22)


def laplacian(grid, f):
    """Discrete Laplace-Beltrami ``f_tt + cot t f_t + f_pp / sin^2 t``."""
    f = grid.check_field(f)
    if grid.is_axisymmetric:
        ft, ftt = _derivs_axisym(grid, f)
        out = np.empty_like(f)
        _, cot = grid._trig()
        out[1:-1] = ftt[1:-1] + cot * ft[1:-1]
        out[0] = 2.0 * ftt[0]
        out[-1] = 2.0 * ftt[-1]
        return out
    inv_sin, cot = grid._trig()
    ft, _, ftt, fpp, _ = _derivs_latlon(grid, f)
    return ftt + cot * ft + fpp * inv_sin**2


def reduce(grid, f, which):
    """Exact ``min``, ``max`` or ``maxabs`` of a field over all nodes."""
    f = grid.check_field(f)
    if which == "min":
        return float(f.min())
    if which == "max":
        return float(f.max())
    if which == "maxabs":
        return float(np.abs(f).max())
    raise DomainError(f"unknown reduction {which!r}")
