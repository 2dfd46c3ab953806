"""Flow parameters ``(n, k, alpha, beta)`` and derived constants."""
from dataclasses import dataclass, field
from math import comb, isfinite

from .errors import DomainError


@dataclass(frozen=True)
class FlowParams:
    """Parameters of the speed ``sinh(r)^(alpha/beta) * sigma_k^(1/beta)``.

    ``gamma`` is the binomial coefficient C(n, k), fixed by ``n`` and ``k``.
    Parameters outside the convergence regime (``alpha > k + beta`` and
    ``0 < beta <= 1``) are accepted; ``theorem_regime`` reports which case
    applies.
    """

    n: int
    k: int
    alpha: float
    beta: float
    gamma: int = field(init=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise DomainError("n must be an integer >= 2")
        if isinstance(self.k, bool) or int(self.k) != self.k or not 1 <= self.k <= self.n:
            raise DomainError(f"k must be an integer in 1..{self.n}")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not isfinite(v) or v <= 0:
                raise DomainError(f"{name} must be positive")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "gamma", comb(self.n, self.k))

    @property
    def theorem_regime(self):
        return self.alpha > self.k + self.beta and 0.0 < self.beta <= 1.0

    @property
    def has_equilibrium(self):
        """A unique equilibrium sphere exists iff ``alpha > k + beta``."""
        return self.alpha > self.k + self.beta

    @property
    def inv_beta_is_integer(self):
        q = 1.0 / self.beta
        return abs(q - round(q)) < 1e-12
