"""Time integration of the radial flow and its restriction to round spheres.

The star-shaped surface is evolved through its radial function only:

    dr/dt = -sinh(r)^(alpha/beta) * sigma_k(kappa)^(1/beta) * omega + gamma * sinh(r)

with ``omega = sqrt(1 + |grad vphi|^2)``.  Spatially constant data stays
constant and follows the scalar sphere ODE exactly.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import diagnostics
from .errors import ConeExit, DomainError, InitRejected, NotInRegime
from . import sphgrid
from .hypgeom import (
    GeometryState,
    RadialField,
    geometry,
    geometry_from_derivatives,
    radial_from_values,
)
from .params import FlowParams

logger = logging.getLogger(__name__)

CONVERGED = "Converged"
TIME_LIMIT = "TimeLimit"
CONE_EXIT = "ConeExit"

MEAN_CONVEX = "mean_convex"
UNIFORMLY_CONVEX = "uniformly_convex"
UNCHECKED = "unchecked"
MODES = (MEAN_CONVEX, UNIFORMLY_CONVEX, UNCHECKED)

NEAR_BOUNDARY = 1e-8

__all__ = [
    "FlowParams", "FlowState", "StoppingRule", "RunResult",
    "eta", "r_hat", "sphere_ode_rhs", "integrate_sphere_ode",
    "rhs", "stable_dt", "step", "run", "make_state", "check_initial",
]


# -- sphere analysis --------------------------------------------------------

def eta(R, params):
    """``sinh(R)^((alpha-k-beta)/beta) * cosh(R)^(k/beta)``."""
    p = (params.alpha - params.k - params.beta) / params.beta
    return math.sinh(R) ** p * math.cosh(R) ** (params.k / params.beta)


def r_hat(params, variant="exact"):
    """Radius of the stationary sphere.

    ``variant="exact"`` solves ``eta(R) = gamma^((beta-1)/beta)``, the true
    equilibrium of :func:`sphere_ode_rhs`.  ``variant="paper"`` solves
    ``eta(R) = 1``; the two agree when ``beta == 1``.
    """
    if not params.has_equilibrium:
        raise NotInRegime(
            f"alpha={params.alpha} <= k + beta={params.k + params.beta}: no equilibrium sphere"
        )
    if variant == "exact":
        log_target = (params.beta - 1.0) / params.beta * math.log(params.gamma)
    elif variant == "paper":
        log_target = 0.0
    else:
        raise DomainError(f"unknown r_hat variant {variant!r}")
    p = (params.alpha - params.k - params.beta) / params.beta
    q = params.k / params.beta

    def f(R):
        return p * math.log(math.sinh(R)) + q * math.log(math.cosh(R)) - log_target

    lo, hi = 0.5, 1.0
    while f(lo) > 0.0:
        lo *= 0.5
    while f(hi) < 0.0:
        hi *= 2.0
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def sphere_ode_rhs(a, params):
    """``-sinh(a)^(alpha/beta) (gamma coth^k a)^(1/beta) + gamma sinh(a)``."""
    if np.any(np.asarray(a) <= 0):
        raise DomainError("sphere radius must be positive")
    s = np.sinh(a)
    sig = params.gamma * (np.cosh(a) / s) ** params.k
    return -(s ** (params.alpha / params.beta)) * sig ** (1.0 / params.beta) + params.gamma * s


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_sphere_ode(a0, params, t_end, dt, stride=1):
    """Classical RK4 for the sphere ODE.

    ``dt`` is either a fixed step (the last step is shortened to land on
    ``t_end``) or an explicit sequence of step sizes, in which case
    ``t_end`` is ignored.  Returns ``(t, a)`` sampled every ``stride`` steps,
    always including both endpoints.
    """
    if a0 <= 0:
        raise DomainError("a0 must be positive")
    if np.ndim(dt) == 0:
        if dt <= 0:
            raise DomainError("dt must be positive")
        n_full = int(math.floor(t_end / dt * (1 + 1e-12)))
        steps = [dt] * n_full
        rest = t_end - n_full * dt
        if rest > 1e-12 * dt:
            steps.append(rest)
    else:
        steps = [float(d) for d in dt]

    def f(y):
        return sphere_ode_rhs(y, params)

    t, a = 0.0, float(a0)
    ts, as_ = [t], [a]
    for i, h in enumerate(steps, 1):
        a = float(_rk4(f, a, h))
        t += h
        if i % stride == 0 or i == len(steps):
            ts.append(t)
            as_.append(a)
    return np.array(ts), np.array(as_)


# -- PDE --------------------------------------------------------------------

@dataclass(frozen=True)
class FlowState:
    """Solution snapshot; ``geo`` always matches ``rf``."""

    grid: object
    t: float
    rf: RadialField
    geo: GeometryState
    step_count: int = 0


def make_state(grid, r, params, t=0.0, step_count=0):
    rf = radial_from_values(grid, r)
    return FlowState(grid, float(t), rf, geometry(grid, rf, params), step_count)


def rhs(grid, rf, params, geo=None):
    """Right-hand side of the radial PDE at every node."""
    if geo is None:
        geo = geometry(grid, rf, params)
    return -geo.speed * geo.omega + params.gamma * rf.sinh_r


def diffusion_max(state, params):
    """Largest nodal diffusion coefficient of the linearized operator.

    ``(1/beta) sinh^(alpha/beta) sigma_k^(1/beta - 1) * max eig(d sigma_k / d kappa)``.
    The ``omega`` factor of the PDE cancels against the normalization of the
    second fundamental form, so no gradient correction appears.
    """
    geo = state.geo
    sig = np.abs(geo.sigma_k)
    if params.k == 1:
        lam = np.ones_like(sig)
    else:
        lam = np.maximum(np.abs(geo.kappa1), np.abs(geo.kappa2))
    d = (
        state.rf.sinh_r ** (params.alpha / params.beta)
        * sig ** (1.0 / params.beta - 1.0)
        * lam
        / params.beta
    )
    return float(np.max(d))


def stable_dt(state, params, safety=0.2):
    """Explicit time step ``safety * h_min^2 / D_max``.

    ``h_min`` is the smallest physical node spacing (``sinh r`` times the
    unit-sphere spacing).  Scales as ``h^2`` under refinement.
    """
    h_min = float(np.min(state.rf.sinh_r * state.grid.min_spacing()))
    d = diffusion_max(state, params)
    if d <= 0.0:
        return math.inf
    return safety * h_min * h_min / d


def step(state, params, dt, safety=0.2, enforce_stability=True):
    """One classical RK4 step of the radial PDE.

    Raises :class:`ConeExit` (with the pre-step ``state`` attached) if any
    stage leaves the region where the speed is defined.
    """
    if enforce_stability:
        limit = stable_dt(state, params, safety)
        if dt > limit * (1.0 + 1e-12):
            raise DomainError(f"dt={dt:.3e} exceeds the stable step {limit:.3e}")
    grid = state.grid

    def f(r):
        if not r.min() > 0.0:
            raise DomainError("radial function must be positive")
        sinh_r = np.sinh(r)
        grad, hess = sphgrid.derivatives(grid, r, check=False, sparse=True)
        geo = geometry_from_derivatives(sinh_r, np.cosh(r), grad, hess, params)
        return -geo.speed * geo.omega + params.gamma * sinh_r

    r = state.rf.r
    try:
        k1 = rhs(grid, state.rf, params, state.geo)
        k2 = f(r + 0.5 * dt * k1)
        k3 = f(r + 0.5 * dt * k2)
        k4 = f(r + dt * k3)
        r_new = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return make_state(grid, r_new, params, state.t + dt, state.step_count + 1)
    except ConeExit as exc:
        exc.state = state
        raise
    except DomainError as exc:
        # a stage produced r <= 0: the surface collapsed onto the origin
        raise ConeExit((), float("nan"), state) from exc


# -- driver -----------------------------------------------------------------

@dataclass(frozen=True)
class StoppingRule:
    tol_grad: float = 1e-8
    tol_r: float = 1e-6
    t_max: float = 100.0


@dataclass
class RunResult:
    grid: object
    params: FlowParams
    mode: str
    status: str
    records: list
    final_state: FlowState = None
    r_hat: float = None
    r_hat_paper: float = None
    t_exit: float = 0.0
    cone_exit: ConeExit = field(default=None, repr=False)
    dts: list = field(default_factory=list, repr=False)

    @property
    def steps(self):
        return 0 if self.final_state is None else self.final_state.step_count


def check_initial(geo, rf, mode):
    """Validate positivity and the convexity condition selected by ``mode``."""
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}")
    if np.any(rf.r <= 0):
        i = int(np.argmin(rf.r))
        raise InitRejected("radial function must be positive", np.unravel_index(i, rf.r.shape), rf.r.flat[i])
    if mode == MEAN_CONVEX:
        sig1 = geo.kappa1 + geo.kappa2
        if np.any(sig1 <= 0):
            i = int(np.argmin(sig1))
            raise InitRejected("not mean convex: sigma_1 <= 0", np.unravel_index(i, sig1.shape), sig1.flat[i])
    elif mode == UNIFORMLY_CONVEX:
        if np.any(geo.kappa1 <= 0):
            i = int(np.argmin(geo.kappa1))
            raise InitRejected(
                "not uniformly convex: kappa_min <= 0", np.unravel_index(i, geo.kappa1.shape), geo.kappa1.flat[i]
            )


def _converged(state, rh, stop):
    if rh is None:
        return False
    grad = math.sqrt(float(np.max(state.geo.grad_vphi_sq)))
    return grad < stop.tol_grad and float(np.max(np.abs(state.rf.r - rh))) < stop.tol_r


def run(grid, r0, params, stop=None, mode=UNCHECKED, safety=0.2, record_stride=50):
    """Evolve ``r0`` until convergence, the time limit or a cone exit.

    Returns a :class:`RunResult`; invalid initial data raises
    :class:`InitRejected`.
    """
    stop = stop or StoppingRule()
    if record_stride < 1:
        raise DomainError("record_stride must be >= 1")
    r0 = grid.check_field(r0)
    if np.any(r0 <= 0):
        i = int(np.argmin(r0))
        raise InitRejected("radial function must be positive", np.unravel_index(i, r0.shape), r0.flat[i])
    rh = r_hat(params) if params.has_equilibrium else None
    rh_paper = r_hat(params, "paper") if params.has_equilibrium else None
    result = RunResult(grid, params, mode, CONE_EXIT, [], None, rh, rh_paper)

    rf = radial_from_values(grid, r0)
    try:
        geo = geometry(grid, rf, params)
    except ConeExit as exc:
        if mode != UNCHECKED:
            raise InitRejected("initial data outside the cone", exc.node, exc.value) from exc
        result.cone_exit = exc
        return result
    check_initial(geo, rf, mode)
    if not params.theorem_regime:
        logger.warning("parameters outside the convergence regime: %s", params)

    state = FlowState(grid, 0.0, rf, geo, 0)
    records = result.records
    records.append(diagnostics.record(state, params, rh))
    warned = False
    status = None
    while status is None:
        if _converged(state, rh, stop):
            status = CONVERGED
            break
        if state.t >= stop.t_max:
            status = TIME_LIMIT
            break
        dt = min(stable_dt(state, params, safety), stop.t_max - state.t)
        try:
            state = step(state, params, dt, enforce_stability=False)
        except ConeExit as exc:
            result.cone_exit = exc
            result.t_exit = state.t
            status = CONE_EXIT
            break
        result.dts.append(dt)
        if not warned and float(np.min(state.geo.sigma_k)) < NEAR_BOUNDARY:
            logger.warning("sigma_k below %g at t=%g: near the cone boundary", NEAR_BOUNDARY, state.t)
            warned = True
        if state.step_count % record_stride == 0:
            records.append(diagnostics.record(state, params, rh))
    if records[-1].t != state.t:
        records.append(diagnostics.record(state, params, rh))
    result.status = status
    result.final_state = state
    if status != CONE_EXIT:
        result.t_exit = state.t
    return result

