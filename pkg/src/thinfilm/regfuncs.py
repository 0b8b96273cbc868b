"""Pointwise mobility, potential and entropy functions.

All functions take positive heights (scalars or arrays) and are vectorized
with numpy. Absolute values are dropped: the regularized flow keeps the
film strictly positive, so evaluation at ``z <= 0`` is a
:class:`~thinfilm.errors.DomainError`.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate

from .errors import DegenerateDenominator, DomainError, NonIntegrableAtZero
from .params import DENOM_TOL, denominator_ok


def _positive(z):
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("height must be strictly positive")
    return z


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def f_eps(z, n, s, eps):
    """Regularized mobility ``z**(s+n) / (z**s + eps*z**n)``.

    Behaves like ``z**n`` for ``z**(s-n) >> eps`` and like ``z**s / eps``
    near zero.
    """
    z = _positive(z)
    # same fraction divided through by z**s; no overflow for large z
    return _out(z**n / (1.0 + eps * z ** (n - s)))


def f_delta_eps(z, n, s, eps, delta):
    return _out(np.asarray(f_eps(z, n, s, eps)) + delta)


def f_eps_prime(z, n, s, eps):
    """Derivative of :func:`f_eps` via ``f' = n f/z + eps (s-n) z**-(s+1) f**2``."""
    z = _positive(z)
    f = np.asarray(f_eps(z, n, s, eps))
    return _out(n * f / z + eps * (s - n) * z ** (-(s + 1.0)) * f * f)


def Dpp_eps(z, m, n, eps):
    """Saturated porous-media weight ``z**(m-n) / (1 + eps z**(m-n))``."""
    z = _positive(z)
    w = z ** (m - n)
    return _out(w / (1.0 + eps * w))


def Dpp_eps_prime(z, m, n, eps):
    z = _positive(z)
    q = m - n
    w = z**q
    return _out(q * z ** (q - 1.0) / (1.0 + eps * w) ** 2)


def G0_beta(z, n, beta):
    """Entropy density whose second derivative is ``z**(beta - n)``.

    Uses ``z ln z - z`` when ``beta - n = -1`` and ``-ln z`` when
    ``beta - n = -2``; a pure power otherwise.
    """
    z = _positive(z)
    p = beta - n
    if abs(p + 1.0) <= DENOM_TOL:
        return _out(z * np.log(z) - z)
    if abs(p + 2.0) <= DENOM_TOL:
        return _out(-np.log(z))
    return _out(z ** (p + 2.0) / ((p + 2.0) * (p + 1.0)))


def Dtilde0(z, alpha, m, n):
    """``z**(p+2) / ((p+1)(p+2))`` with ``p = alpha + m - n``.

    No logarithmic branch exists for this potential, so ``p in {-1, -2}``
    raises :class:`DegenerateDenominator`.
    """
    p = alpha + m - n
    if not denominator_ok(p):
        raise DegenerateDenominator(f"alpha + m - n = {p!r}")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("height must be nonnegative")
    return _out(z ** (p + 2.0) / ((p + 1.0) * (p + 2.0)))


def D0(z, m, n):
    return Dtilde0(z, 0.0, m, n)


def Dtilde0_prime(z, alpha, m, n):
    p = alpha + m - n
    if not denominator_ok(p):
        raise DegenerateDenominator(f"alpha + m - n = {p!r}")
    z = _positive(z)
    return _out(z ** (p + 1.0) / (p + 1.0))


def _dtilde_eps_scalar(z, p, q, eps, epsabs):
    if z == 0.0:
        return 0.0
    c = eps * z**q

    # D(z) = int_0^z (z-u) u^alpha D''(u) du ;  u = z t
    #      = z^(p+2) int_0^1 t^p (1-t) / (1 + eps z^q t^q) dt
    def g(t):
        return 1.0 / (1.0 + c * t**q) if t > 0 else (1.0 if q > 0 else 0.0)

    scale = z ** (p + 2.0)
    tol = epsabs / scale if scale > 0 else epsabs
    val, err = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(p, 1.0),
                              epsabs=tol, epsrel=1e-13, limit=200)
    return scale * val


def Dtilde_eps(z, alpha, m, n, eps, epsabs=1e-12):
    """Potential with second derivative ``z**alpha * Dpp_eps(z)``, based at 0.

    Fixed by ``D(0) = D'(0) = 0`` and computed as the single integral
    ``int_0^z (z - u) u**alpha Dpp_eps(u) du`` with an adaptive
    algebraic-weight rule, so the ``u**(alpha+m-n)`` endpoint behaviour is
    integrated exactly. Reduces to :func:`Dtilde0` at ``eps = 0``.
    """
    p = alpha + m - n
    if p <= -1.0:
        raise NonIntegrableAtZero(f"alpha + m - n = {p!r} <= -1")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("height must be nonnegative")
    if eps == 0.0:
        return Dtilde0(z, alpha, m, n)
    q = m - n
    flat = z.ravel()
    uniq, inv = np.unique(flat, return_inverse=True)
    vals = np.array([_dtilde_eps_scalar(float(u), p, q, eps, epsabs) for u in uniq])
    return _out(vals[inv].reshape(z.shape))
