"""Face averages of a cell-wise mobility, with derivatives for the Jacobian."""

from __future__ import annotations

import numpy as np

from .grid import up

_T, _W = np.polynomial.legendre.leggauss(8)
_T = 0.5 * (_T + 1.0)
_W = 0.5 * _W


def face_mobility(h, fn, dfn=None, how="arithmetic"):
    """Average ``fn`` from cells ``i, i+1`` onto face ``i + 1/2``.

    ``entropic`` is the inverse mean of ``1/fn`` along the segment between
    the two heights (8-point Gauss-Legendre), which reduces to the
    logarithmic mean for ``fn(z) = z``; with that choice the discrete
    entropy ``sum h log h`` is dissipated exactly.

    Returns ``M`` or, if ``dfn`` is given, ``(M, dM/dh_i, dM/dh_{i+1})``.
    """
    hr = up(h)
    if how == "arithmetic":
        fl, fr = fn(h), fn(hr)
        M = 0.5 * (fl + fr)
        if dfn is None:
            return M
        return M, 0.5 * dfn(h), 0.5 * dfn(hr)
    if how == "harmonic":
        fl, fr = fn(h), fn(hr)
        s = fl + fr
        M = 2.0 * fl * fr / s
        if dfn is None:
            return M
        return M, 2.0 * fr**2 * dfn(h) / s**2, 2.0 * fl**2 * dfn(hr) / s**2
    if how == "entropic":
        z = h[None, :] + _T[:, None] * (hr - h)[None, :]
        fz = fn(z)
        M = 1.0 / np.sum(_W[:, None] / fz, axis=0)
        if dfn is None:
            return M
        g = _W[:, None] * dfn(z) / fz**2
        dl = M**2 * np.sum(g * (1.0 - _T[:, None]), axis=0)
        dr = M**2 * np.sum(g * _T[:, None], axis=0)
        return M, dl, dr
    raise ValueError(f"unknown averaging {how!r}")
