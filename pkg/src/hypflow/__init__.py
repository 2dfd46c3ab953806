"""Curvature flow of star-shaped surfaces in hyperbolic 3-space, by radial graph."""
from .errors import ConeExit, ConfigError, DomainError, InitRejected, NotInRegime
from .flow import FlowState, RunResult, StoppingRule, r_hat, run, sphere_ode_rhs
from .params import FlowParams
from .sphgrid import Grid

__version__ = "0.1.0"

__all__ = [
    "ConeExit", "ConfigError", "DomainError", "InitRejected", "NotInRegime",
    "FlowParams", "FlowState", "Grid", "RunResult", "StoppingRule",
    "r_hat", "run", "sphere_ode_rhs",
]
