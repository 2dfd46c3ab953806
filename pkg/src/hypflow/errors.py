"""Exception types raised by the simulator."""


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class ConePreconditionError(DomainError):
    """Curvature vector is not in the Garding cone an operation requires."""


class NotInRegime(DomainError):
    """Flow parameters violate ``alpha > k + beta``; no equilibrium sphere exists."""


class ConeExit(RuntimeError):
    """The evolving surface left the cone where the speed is defined.

    ``node`` is the index (tuple) of the first offending grid node and
    ``value`` the curvature function evaluated there.  The integrator attaches
    the last valid state as ``state`` before re-raising.
    """

    def __init__(self, node, value, state=None):
        super().__init__(f"sigma_k = {value:.6g} <= 0 at node {node}")
        self.node = node
        self.value = value
        self.state = state


class InitRejected(ValueError):
    """Initial data fails positivity or the requested convexity condition."""

    def __init__(self, condition, node=None, value=None):
        msg = condition
        if node is not None:
            msg += f" (worst node {node}, value {value:.6g})"
        super().__init__(msg)
        self.condition = condition
        self.node = node
        self.value = value


class ConfigError(ValueError):
    """Malformed run configuration."""

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line
