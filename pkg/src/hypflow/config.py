"""Run configuration: a flat ``key = value`` text format.

One pair per line, ``#`` starts a comment, sections are dotted prefixes::

    n = 2
    k = 1
    alpha = 3
    beta = 1
    grid.mode = axisymmetric
    grid.n_theta = 128
    initial.kind = harmonic
    initial.base = rhat        # the exact equilibrium radius
    initial.eps = 0.1
    mode = mean_convex
    output.csv = run.csv
    output.json = run.json
"""
import logging
import math
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.special import lpmv

from . import flow
from .errors import ConeExit, ConfigError, DomainError, InitRejected
from .hypgeom import geometry, radial_from_values
from .params import FlowParams
from .sphgrid import Grid, canonical_mode

logger = logging.getLogger(__name__)

RHAT = "rhat"


def _float_or_rhat(text):
    if text.strip().lower() == RHAT:
        return RHAT
    return float(text)


def _float_list(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


# key -> (converter, default); REQUIRED marks keys without a default
REQUIRED = object()
SCHEMA = {
    "n": (int, REQUIRED),
    "k": (int, REQUIRED),
    "alpha": (float, REQUIRED),
    "beta": (float, REQUIRED),
    "grid.mode": (str, "axisymmetric"),
    "grid.n_theta": (int, 128),
    "grid.n_phi": (int, 0),
    "initial.kind": (str, REQUIRED),
    "initial.a": (_float_or_rhat, None),
    "initial.base": (_float_or_rhat, None),
    "initial.eps": (float, 0.0),
    "initial.l": (int, 2),
    "initial.m": (int, 0),
    "initial.path": (str, None),
    "stopping.tol_grad": (float, 1e-8),
    "stopping.tol_r": (float, 1e-6),
    "stopping.t_max": (float, 100.0),
    "integrator.safety": (float, 0.2),
    "integrator.record_stride": (int, 50),
    "mode": (str, "unchecked"),
    "output.csv": (str, None),
    "output.json": (str, None),
    "sweep.alpha": (_float_list, ()),
    "sweep.beta": (_float_list, ()),
}

INITIAL_KINDS = ("constant", "harmonic", "node_values")


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    a: object = None
    base: object = None
    eps: float = 0.0
    l: int = 2
    m: int = 0
    path: str = None


@dataclass(frozen=True)
class RunConfig:
    params: FlowParams
    grid: Grid
    initial: InitialSpec
    stop: flow.StoppingRule = field(default_factory=flow.StoppingRule)
    safety: float = 0.2
    record_stride: int = 50
    mode: str = "unchecked"
    csv_path: str = None
    json_path: str = None
    sweep_alpha: tuple = ()
    sweep_beta: tuple = ()
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def _read_pairs(text, origin=None):
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        lineno = origin or lineno
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError("unknown key", key, lineno)
        if key in pairs:
            raise ConfigError("duplicate key", key, lineno)
        pairs[key] = (value, lineno)
    return pairs


def parse_config(text, overrides=()):
    """Parse configuration text into a :class:`RunConfig`.

    ``overrides`` are extra ``key=value`` strings applied after the text;
    errors there report the line as ``override``.
    """
    pairs = _read_pairs(text)
    for item in overrides:
        extra = _read_pairs(item, origin="override")
        for key, val in extra.items():
            pairs[key] = val

    values = {}
    lines = {}
    for key, (conv, default) in SCHEMA.items():
        if key in pairs:
            text_value, line = pairs[key]
            lines[key] = line
            try:
                values[key] = conv(text_value)
            except ValueError:
                raise ConfigError(f"cannot parse {text_value!r} as {conv.__name__.strip('_')}", key, line) from None
        elif default is REQUIRED:
            raise ConfigError("missing required key", key)
        else:
            values[key] = default

    def fail(message, key):
        raise ConfigError(message, key, lines.get(key))

    for key in ("alpha", "beta", "stopping.tol_grad", "stopping.tol_r", "stopping.t_max",
                "integrator.safety", "initial.eps"):
        if not math.isfinite(values[key]):
            fail(f"{key} must be finite", key)
    for key in ("alpha", "beta"):
        if values[key] <= 0:
            fail(f"{key} must be positive", key)
    if values["integrator.safety"] <= 0:
        fail("integrator.safety must be positive", "integrator.safety")
    if values["integrator.record_stride"] < 1:
        fail("integrator.record_stride must be >= 1", "integrator.record_stride")
    if values["stopping.t_max"] < 0:
        fail("stopping.t_max must be nonnegative", "stopping.t_max")
    try:
        params = FlowParams(values["n"], values["k"], values["alpha"], values["beta"])
    except DomainError as exc:
        key = "n" if "n must" in str(exc) else "k"
        fail(str(exc), key)
    if not params.theorem_regime:
        logger.warning(
            "alpha=%g, k=%d, beta=%g is outside the convergence regime (alpha > k + beta, 0 < beta <= 1)",
            params.alpha, params.k, params.beta,
        )

    try:
        mode = canonical_mode(values["grid.mode"])
    except DomainError as exc:
        fail(str(exc), "grid.mode")
    n_phi = values["grid.n_phi"] or 2 * values["grid.n_theta"]
    try:
        grid = Grid(mode, values["grid.n_theta"], n_phi)
    except DomainError as exc:
        fail(str(exc), "grid.n_theta")

    kind = values["initial.kind"]
    if kind not in INITIAL_KINDS:
        fail(f"initial.kind must be one of {', '.join(INITIAL_KINDS)}", "initial.kind")
    need = {"constant": "initial.a", "harmonic": "initial.base", "node_values": "initial.path"}[kind]
    if values[need] is None:
        raise ConfigError(f"initial.kind = {kind} needs {need}", need)
    if kind == "harmonic":
        l, m = values["initial.l"], values["initial.m"]
        if l < 0 or abs(m) > l:
            fail("need l >= 0 and |m| <= l", "initial.m")
        if grid.is_axisymmetric and m != 0:
            fail("axisymmetric grids need m = 0", "initial.m")
    initial = InitialSpec(
        kind, values["initial.a"], values["initial.base"], values["initial.eps"],
        values["initial.l"], values["initial.m"], values["initial.path"],
    )

    run_mode = values["mode"]
    if run_mode not in flow.MODES:
        fail(f"mode must be one of {', '.join(flow.MODES)}", "mode")

    return RunConfig(
        params=params,
        grid=grid,
        initial=initial,
        stop=flow.StoppingRule(values["stopping.tol_grad"], values["stopping.tol_r"], values["stopping.t_max"]),
        safety=values["integrator.safety"],
        record_stride=values["integrator.record_stride"],
        mode=run_mode,
        csv_path=values["output.csv"],
        json_path=values["output.json"],
        sweep_alpha=values["sweep.alpha"],
        sweep_beta=values["sweep.beta"],
        raw={k: pairs[k][0] for k in pairs},
    )


def real_sph_harm(l, m, theta, phi):
    """Orthonormal real spherical harmonic, without the Condon-Shortley phase.

    ``m > 0`` uses ``cos(m phi)``, ``m < 0`` uses ``sin(|m| phi)``.
    """
    am = abs(m)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * factorial(l - am) / factorial(l + am))
    # scipy's lpmv carries the (-1)^m phase
    p = (-1) ** am * lpmv(am, l, np.cos(theta))
    if m == 0:
        return norm * p
    if m > 0:
        return math.sqrt(2) * norm * p * np.cos(am * phi)
    return math.sqrt(2) * norm * p * np.sin(am * phi)


def _resolve(value, params):
    if value == RHAT:
        return flow.r_hat(params)
    return float(value)


def make_initial(config, grid=None):
    """Initial radial function on ``grid`` (default: the config grid).

    The result is checked for positivity and for the convexity selected by
    ``config.mode``; violations raise :class:`InitRejected`.
    """
    grid = grid or config.grid
    spec = config.initial
    params = config.params
    if spec.kind == "constant":
        r = np.full(grid.shape, _resolve(spec.a, params))
    elif spec.kind == "harmonic":
        theta, phi = grid.mesh()
        base = _resolve(spec.base, params)
        r = base * (1.0 + spec.eps * real_sph_harm(spec.l, spec.m, theta, phi))
    else:
        data = np.loadtxt(spec.path, dtype=float).ravel()
        if data.size != grid.size:
            raise InitRejected(f"node_values file has {data.size} values, grid needs {grid.size}")
        r = data.reshape(grid.shape)
    validate_initial(grid, r, params, config.mode)
    return r


def validate_initial(grid, r, params, mode):
    if not np.all(np.isfinite(r)):
        raise InitRejected("initial data has non-finite values")
    if np.any(r <= 0):
        i = int(np.argmin(r))
        raise InitRejected("radial function must be positive", np.unravel_index(i, r.shape), r.flat[i])
    if mode == flow.UNCHECKED:
        return
    rf = radial_from_values(grid, r)
    try:
        geo = geometry(grid, rf, params)
    except ConeExit as exc:
        raise InitRejected("initial data outside the cone", exc.node, exc.value) from exc
    flow.check_initial(geo, rf, mode)
