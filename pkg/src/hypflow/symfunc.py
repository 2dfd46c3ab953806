"""Elementary symmetric polynomials, Garding cones and related identities.

Curvature vectors are arrays whose *last* axis holds the n principal
curvatures; every function broadcasts over leading axes so a whole grid of
nodes can be handled in one call.
"""
from math import comb

import numpy as np

from .errors import ConePreconditionError, DomainError


def _as_kappa(kappa):
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim == 0 or kappa.shape[-1] < 1:
        raise DomainError("curvature vector must have at least one entry")
    if not np.all(np.isfinite(kappa)):
        raise DomainError("curvature vector has non-finite entries")
    return kappa


def elementary_symmetric(kappa):
    """Return all of sigma_0 .. sigma_n stacked along a new last axis.

    Uses the one-variable-at-a-time expansion
    ``sigma_m(x) = sigma_m(x | i) + x_i * sigma_{m-1}(x | i)``, which costs
    O(n^2) per vector and never enumerates subsets.
    """
    kappa = _as_kappa(kappa)
    n = kappa.shape[-1]
    e = np.zeros(kappa.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        x = kappa[..., i]
        for m in range(i + 1, 0, -1):
            e[..., m] += x * e[..., m - 1]
    return e


def _sigma_ext(k, e):
    # sigma_l := 0 outside 0..n
    n = e.shape[-1] - 1
    if k < 0 or k > n:
        return np.zeros(e.shape[:-1])
    return e[..., k]


def sigma(k, kappa):
    """k-th elementary symmetric polynomial of ``kappa`` (sigma_0 = 1)."""
    kappa = _as_kappa(kappa)
    n = kappa.shape[-1]
    if not 0 <= k <= n:
        raise DomainError(f"k={k} outside 0..{n}")
    e = elementary_symmetric(kappa)[..., k]
    return float(e) if e.ndim == 0 else e


def sigma_grad(k, kappa):
    """Gradient of sigma_k: component i is sigma_{k-1} with kappa_i deleted."""
    kappa = _as_kappa(kappa)
    n = kappa.shape[-1]
    if not 1 <= k <= n:
        raise DomainError(f"k={k} outside 1..{n}")
    if n == 1:
        return np.ones_like(kappa)
    out = np.empty_like(kappa)
    for i in range(n):
        rest = np.delete(kappa, i, axis=-1)
        out[..., i] = elementary_symmetric(rest)[..., k - 1]
    return out


def in_cone(k, kappa):
    """True iff sigma_1 .. sigma_k are all strictly positive."""
    kappa = _as_kappa(kappa)
    n = kappa.shape[-1]
    if not 1 <= k <= n:
        raise DomainError(f"k={k} outside 1..{n}")
    e = elementary_symmetric(kappa)
    ok = np.all(e[..., 1:k + 1] > 0.0, axis=-1)
    return bool(ok) if ok.ndim == 0 else ok


def maclaurin_gap(l, m, kappa):
    """``C(n,m) (sigma_l / C(n,l))^(m/l) - sigma_m``; nonnegative on the cone.

    Requires ``1 <= l < m <= n`` and ``kappa`` in the cone of order ``m - 1``.
    Vanishes exactly for isotropic vectors ``c (1, ..., 1)``.
    """
    kappa = _as_kappa(kappa)
    n = kappa.shape[-1]
    if not 1 <= l < m <= n:
        raise DomainError(f"need 1 <= l < m <= n, got l={l}, m={m}, n={n}")
    if not np.all(in_cone(m - 1, kappa)):
        raise ConePreconditionError(f"kappa not in the order-{m - 1} cone")
    e = elementary_symmetric(kappa)
    gap = comb(n, m) * (e[..., l] / comb(n, l)) ** (m / l) - e[..., m]
    return float(gap) if np.ndim(gap) == 0 else gap


def sigma_dot(k, w):
    """Matrix derivative d sigma_k(W) / d W_ij for symmetric ``w``.

    Built in the eigenbasis, where it is diagonal with entries
    ``sigma_{k-1}(lambda | i)``, and rotated back.
    """
    w = _check_symmetric(w)
    lam, q = np.linalg.eigh(w)
    d = sigma_grad(k, lam)
    return (q * d) @ q.T


def _check_symmetric(w):
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DomainError("expected a square matrix")
    if not np.array_equal(w, w.T):
        raise DomainError("matrix is not symmetric")
    return w


def trace_residuals(k, w):
    """Residuals of the three trace identities for sigma_k at ``w``.

    Returns ``(|S:W^2 - (s1 sk - (k+1) s_{k+1})|, |S:W - k sk|,
    |tr S - (n-k+1) s_{k-1}|)`` where ``S`` is :func:`sigma_dot`.  The
    contractions are taken in the original basis, the sigmas from the
    spectrum, so the two sides are computed along different routes.
    """
    w = _check_symmetric(w)
    n = w.shape[0]
    if not 1 <= k <= n:
        raise DomainError(f"k={k} outside 1..{n}")
    lam = np.linalg.eigvalsh(w)
    if not in_cone(k, lam):
        raise ConePreconditionError(f"eigenvalues not in the order-{k} cone")
    s = sigma_dot(k, w)
    e = elementary_symmetric(lam)
    r_sq = abs(np.sum(s * (w @ w)) - (e[1] * e[k] - (k + 1) * _sigma_ext(k + 1, e)))
    r_lin = abs(np.sum(s * w) - k * e[k])
    r_id = abs(np.trace(s) - (n - k + 1) * e[k - 1])
    return float(r_sq), float(r_lin), float(r_id)
