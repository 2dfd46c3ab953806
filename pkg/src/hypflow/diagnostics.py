"""Per-step monitors and post-hoc checks of the a priori estimates.

Every ``verify_*`` function is a pure function of a recorded trajectory and
returns :class:`CheckResult` objects.  Where the estimates only promise
"some constant depending on the initial surface", the checks use a concrete
factor-2 envelope around the larger (or smaller) of the initial value and
the value on the equilibrium sphere.
"""
import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import hypgeom, symfunc
from .sphgrid import Grid

CONE_EXIT = "ConeExit"


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    r_min: float
    r_max: float
    pinching: float
    grad_vphi_sq_max: float
    sigma_k_min: float
    sigma_k_max: float
    kappa_min: float
    kappa_max: float
    u_min: float
    u_max: float
    osc: float
    dist_rhat: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def values(self):
        return astuple(self)


def record(state, params, r_hat=None):
    """Reduce a flow state to one :class:`DiagnosticsRecord`.

    ``dist_rhat`` is NaN when no equilibrium radius is supplied.
    """
    r = state.rf.r
    geo = state.geo
    r_min, r_max = float(r.min()), float(r.max())
    return DiagnosticsRecord(
        t=float(state.t),
        r_min=r_min,
        r_max=r_max,
        pinching=r_max / r_min,
        grad_vphi_sq_max=float(geo.grad_vphi_sq.max()),
        sigma_k_min=float(geo.sigma_k.min()),
        sigma_k_max=float(geo.sigma_k.max()),
        kappa_min=float(geo.kappa1.min()),
        kappa_max=float(geo.kappa2.max()),
        u_min=float(geo.u.min()),
        u_max=float(geo.u.max()),
        osc=r_max - r_min,
        dist_rhat=float(np.max(np.abs(r - r_hat))) if r_hat is not None else math.nan,
    )


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check.

    ``margin`` is the worst signed slack over the trajectory (negative means
    violated), relative to the bound where the bound is a scale, absolute
    otherwise; ``time`` is where the worst case occurred.
    """

    name: str
    passed: bool
    margin: float
    time: float

    def __post_init__(self):
        # keep numpy scalars out of serialized reports
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "margin", float(self.margin))
        object.__setattr__(self, "time", float(self.time))

    def as_dict(self):
        return {"passed": self.passed, "margin": self.margin, "time": self.time}


class VerificationReport(dict):
    """Mapping of check name to :class:`CheckResult`; each name appears once."""

    def add(self, result):
        if result.name in self:
            raise ValueError(f"duplicate check {result.name!r}")
        self[result.name] = result
        return result

    @property
    def all_passed(self):
        return all(c.passed for c in self.values())

    def as_dict(self):
        return {name: c.as_dict() for name, c in self.items()}

    def lines(self):
        return [
            f"{'PASS' if c.passed else 'FAIL'}  {name:<28} margin={c.margin:.3e} t={c.time:.6g}"
            for name, c in self.items()
        ]


def _worst(name, margins, times):
    margins = np.asarray(margins, dtype=float)
    i = int(np.argmin(margins))
    return CheckResult(name, bool(np.all(margins >= 0.0)), float(margins[i]), float(times[i]))


def _times(records):
    return np.array([rec.t for rec in records])


def c0_envelope(records, r_hat, h):
    """Lower and upper C0 bounds: initial extent and r_hat, widened by 10 h^2."""
    eps = 10.0 * h * h
    first = records[0]
    return min(first.r_min, r_hat) - eps, max(first.r_max, r_hat) + eps


def verify_c0(records, r_hat, h, name="c0_sandwich"):
    lo, hi = c0_envelope(records, r_hat, h)
    margins = [min(rec.r_min - lo, hi - rec.r_max) for rec in records]
    return _worst(name, margins, _times(records))


def verify_gradient_monotone(records, slack=1e-12, name="gradient_monotone"):
    """max |grad vphi|^2 must not increase between consecutive records."""
    vals = np.array([rec.grad_vphi_sq_max for rec in records])
    if len(vals) < 2:
        return CheckResult(name, True, math.inf, records[0].t if records else 0.0)
    margins = slack - np.diff(vals)
    return _worst(name, margins, _times(records)[1:])


def fit_decay_rate(records, field="osc"):
    """Least-squares slope of ``log(value)`` against ``t`` over the last half.

    Returns ``None`` (no signal) when fewer than 10 positive values remain
    in the fitting window.
    """
    t = _times(records)
    v = np.array([getattr(rec, field) for rec in records], dtype=float)
    half = len(v) // 2
    t, v = t[half:], v[half:]
    keep = np.isfinite(v) & (v > 0.0)
    if np.count_nonzero(keep) < 10:
        return None
    t, v = t[keep], v[keep]
    slope, _ = np.polyfit(t, np.log(v), 1)
    return float(slope)


def _rel(value, bound):
    return value / abs(bound) if bound != 0 else value


def verify_bounds_suite(result, mode=None):
    """Check the curvature, speed and support-function envelopes of a run.

    ``result`` is a :class:`hypflow.flow.RunResult`.  A run that ended by
    leaving the cone fails every check at its exit time.
    """
    mode = mode or result.mode
    names = ["sigma_k_lower", "sigma_k_upper", "support_lower"]
    if mode == "uniformly_convex":
        names.append("kappa_lower")
    elif mode == "mean_convex":
        names.append("kappa_upper")
    report = VerificationReport()
    records = result.records
    if result.status == CONE_EXIT or not records or result.r_hat is None:
        for name in names:
            report.add(CheckResult(name, False, -math.inf, result.t_exit))
        return report

    rh = result.r_hat
    sph = hypgeom.sphere_geometry(rh, result.params)
    first = records[0]
    t = _times(records)
    col = {name: np.array([getattr(rec, name) for rec in records]) for name in DiagnosticsRecord.columns()}

    lo = 0.5 * min(first.sigma_k_min, sph["sigma_k"])
    report.add(_worst("sigma_k_lower", _rel(col["sigma_k_min"] - lo, lo), t))
    hi = 2.0 * max(first.sigma_k_max, sph["sigma_k"])
    report.add(_worst("sigma_k_upper", _rel(hi - col["sigma_k_max"], hi), t))
    lo = 0.5 * min(first.u_min, math.sinh(rh))
    report.add(_worst("support_lower", _rel(col["u_min"] - lo, lo), t))
    if mode == "uniformly_convex":
        r_up = max(first.r_max, rh)
        lo = 0.5 * min(first.kappa_min, 1.0 / math.tanh(r_up))
        report.add(_worst("kappa_lower", _rel(col["kappa_min"] - lo, lo), t))
    elif mode == "mean_convex":
        hi = 2.0 * max(first.kappa_max, 1.0 / math.tanh(rh))
        report.add(_worst("kappa_upper", _rel(hi - col["kappa_max"], hi), t))
    return report


def verify_run(result, decay_field="osc"):
    """All regime checks for a finished run, in a fixed order."""
    report = VerificationReport()
    records = result.records
    if result.r_hat is not None and records:
        report.add(verify_c0(records, result.r_hat, result.grid.h))
    elif result.r_hat is not None:
        report.add(CheckResult("c0_sandwich", False, -math.inf, result.t_exit))
    if records:
        report.add(verify_gradient_monotone(records))
    for c in verify_bounds_suite(result).values():
        report.add(c)
    rate = fit_decay_rate(records, decay_field) if records else None
    if result.status == "Converged" and len(records) > 1:
        ok = rate is not None and rate < 0.0
        report.add(CheckResult("decay_rate_negative", ok, -rate if rate is not None else -math.inf, records[-1].t))
    return report, rate


# -- identity suite ---------------------------------------------------------

def _random_cone_vector(rng, n, k):
    while True:
        x = rng.normal(1.0, 1.0, size=n) * rng.uniform(0.1, 3.0)
        if symfunc.in_cone(k, x):
            return x


def _random_cone_matrix(rng, n, k):
    lam = _random_cone_vector(rng, n, k)
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    w = (q * lam) @ q.T
    return 0.5 * (w + w.T)


def random_smooth_profile(rng, base=1.0, modes=4, amp=0.05):
    """Axisymmetric ``r(theta) = base + sum a_j cos(j theta)`` as a callable."""
    a = rng.uniform(-amp, amp, size=modes) / np.arange(1, modes + 1)

    def f(theta):
        j = np.arange(1, modes + 1)
        return base + np.cos(np.multiply.outer(theta, j)) @ a

    return f


def identity_suite(samples=1000, seed=0, crosscheck_n=65):
    """Randomized checks of the symmetric-function identities and of the two
    radial-graph formulations.

    Trace identities: residual <= 1e-10 (1 + |W|^3).  Maclaurin: gap >= -1e-12
    on the cone, and |gap| <= 1e-10 max(1, sigma_m) on isotropic vectors.  Cross-check: the
    r-form/vphi-form discrepancy must shrink by a factor in [3.5, 4.5] when
    the grid spacing is halved.
    """
    rng = np.random.default_rng(seed)
    report = VerificationReport()

    worst = math.inf
    for _ in range(samples):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n + 1))
        w = _random_cone_matrix(rng, n, k)
        tol = 1e-10 * (1.0 + np.linalg.norm(w, 2) ** 3)
        res = max(symfunc.trace_residuals(k, w))
        worst = min(worst, (tol - res) / tol)
    report.add(CheckResult("trace_identities", worst >= 0.0, worst, 0.0))

    worst = math.inf
    for _ in range(samples):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(2, n + 1))
        l = int(rng.integers(1, m))
        x = _random_cone_vector(rng, n, m - 1)
        gap = symfunc.maclaurin_gap(l, m, x)
        worst = min(worst, gap + 1e-12)
    report.add(CheckResult("maclaurin_nonnegative", worst >= 0.0, worst, 0.0))

    worst = math.inf
    for _ in range(samples):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(2, n + 1))
        l = int(rng.integers(1, m))
        c = rng.uniform(0.1, 5.0)
        x = np.full(n, c)
        tol = 1e-10 * max(1.0, symfunc.sigma(m, x))
        gap = symfunc.maclaurin_gap(l, m, x)
        worst = min(worst, (tol - abs(gap)) / tol)
    report.add(CheckResult("maclaurin_equality", worst >= 0.0, worst, 0.0))

    coarse = Grid.axisymmetric(crosscheck_n)
    fine = coarse.refined()
    lo_ratio, hi_ratio = math.inf, -math.inf
    for _ in range(samples):
        prof = random_smooth_profile(rng, base=rng.uniform(0.3, 2.0))
        res = []
        for grid in (coarse, fine):
            rf = hypgeom.radial_from_values(grid, prof(grid.theta))
            res.append(hypgeom.geometry_vphi_crosscheck(grid, rf))
        ratio = res[0] / res[1]
        lo_ratio, hi_ratio = min(lo_ratio, ratio), max(hi_ratio, ratio)
    margin = min(lo_ratio - 3.5, 4.5 - hi_ratio)
    report.add(CheckResult("vphi_crosscheck_order", margin >= 0.0, margin, 0.0))
    return report
