"""Sum-of-squares coefficient algebra and the dissipation region.

The time derivative of the alpha-energy is written as

    -(R + alpha S + kappa L)^2 + beta (S + (alpha+n-3)/5 L)^2
        + gamma L^2 + mu N^2 + eps k1 I1 + eps^2 k2 I2,

an identity for every real ``kappa``. A point ``(n, alpha)`` belongs to
the dissipation region when some ``kappa`` makes ``beta <= 0`` and
``gamma <= 0`` at the same time.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import QuadratureFailure
from .regfuncs import Dpp_eps, f_eps, f_eps_prime


@dataclass(frozen=True)
class DecompCoeffs:
    beta_c: float
    gamma_c: float
    mu_c: float
    k1: float
    k2: float


def coeffs(alpha, n, s, a1, kappa) -> DecompCoeffs:
    al, k = alpha, kappa
    c = al + n - 3.0
    d = al - (2.0 * n - 1.0) / 3.0
    beta_c = al / 2.0 * (5.0 * al - 3.0) - 6.0 * k
    gamma_c = k * k - 6.0 / 25.0 * k * c * d - 3.0 / 50.0 * al * c * d
    mu_c = a1 * (2.0 * k - al / 2.0 * (al - 1.0))
    k1 = 2.0 / 25.0 * (s - n) * (
        5.0 * k * (al - s + 3.0 * n - 5.0)
        + 5.0 * al / 4.0 * (al - 1.0) * (s - 2.0 * al - 3.0 * n + 5.0)
        + c * (al / 2.0 * (5.0 * al - 3.0) - 6.0 * k)
    )
    k2 = (s - n) ** 2 / 5.0 * (4.0 * k - al * (al - 1.0))
    return DecompCoeffs(beta_c, gamma_c, mu_c, k1, k2)


# ------------------------------------------------------------------ region

def beta_kappa_min(alpha):
    """``beta <= 0`` exactly when ``kappa >= alpha (5 alpha - 3) / 12``."""
    return alpha * (5.0 * alpha - 3.0) / 12.0


def mu_kappa_min(alpha):
    """``mu <= 0`` for ``a1 <= 0`` exactly when ``kappa >= alpha (alpha-1) / 4``."""
    return alpha * (alpha - 1.0) / 4.0


def _gamma_roots(alpha, n):
    """Roots of ``gamma(kappa) = kappa^2 + B kappa + C`` (NaN if complex)."""
    alpha = np.asarray(alpha, dtype=float)
    n = np.asarray(n, dtype=float)
    c = alpha + n - 3.0
    d = alpha - (2.0 * n - 1.0) / 3.0
    B = -6.0 / 25.0 * c * d
    C = -3.0 / 50.0 * alpha * c * d
    disc = B * B - 4.0 * C
    with np.errstate(invalid="ignore", divide="ignore"):
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        # cancellation-free pair: q and C/q
        q = -0.5 * (B + np.copysign(sq, B))
        r1 = q
        r2 = np.where(q != 0, C / np.where(q != 0, q, 1.0), 0.0)
    lo = np.fmin(r1, r2)
    hi = np.fmax(r1, r2)
    bad = disc < 0
    return np.where(bad, np.nan, lo), np.where(bad, np.nan, hi)


def _feasible_arrays(alpha, n):
    glo, ghi = _gamma_roots(alpha, n)
    lo = np.fmax(glo, beta_kappa_min(np.asarray(alpha, dtype=float)))
    lo = np.where(np.isnan(glo), np.nan, lo)
    feasible = ~np.isnan(glo) & (lo <= ghi)
    lo = np.where(feasible, lo, np.nan)
    hi = np.where(feasible, ghi, np.nan)
    return feasible, lo, hi


def feasible_kappa(alpha, n) -> Optional[tuple[float, float]]:
    """Closed interval of ``kappa`` with ``beta <= 0`` and ``gamma <= 0``.

    Returns ``None`` when the interval is empty. A degenerate interval
    ``(k, k)`` is still feasible (a marginal point).
    """
    feas, lo, hi = _feasible_arrays(alpha, n)
    if not bool(feas):
        return None
    return float(lo), float(hi)


def in_envelope(n, alpha):
    """The ``(n, alpha)`` ranges for which the energy theorem is claimed.

    ``0 <= alpha < 1`` with ``1/2 < n < 3``, or ``3/2 - n < alpha < 0``
    with ``3/2 < n < 3``.
    """
    n = np.asarray(n, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    pos = (alpha >= 0) & (alpha < 1) & (n > 0.5) & (n < 3)
    neg = (alpha < 0) & (alpha > 1.5 - n) & (n > 1.5) & (n < 3)
    return pos | neg


@dataclass(frozen=True)
class RegionResult:
    n: float
    alpha: float
    feasible: bool
    kappa_interval: Optional[tuple[float, float]]
    mu_sign_ok_for_stable: bool

    @property
    def marginal(self) -> bool:
        return self.feasible and self.kappa_interval[0] == self.kappa_interval[1]

    @property
    def in_envelope(self) -> bool:
        return bool(in_envelope(self.n, self.alpha))


def classify_point(n, alpha) -> RegionResult:
    iv = feasible_kappa(alpha, n)
    mu_ok = iv is not None and iv[1] >= mu_kappa_min(alpha)
    return RegionResult(float(n), float(alpha), iv is not None, iv, bool(mu_ok))


@dataclass
class RegionScan:
    """Rasterized feasibility over an ``(n, alpha)`` rectangle.

    Arrays are indexed ``[i_alpha, i_n]``.
    """

    n: np.ndarray
    alpha: np.ndarray
    feasible: np.ndarray
    kappa_lo: np.ndarray
    kappa_hi: np.ndarray
    mu_flag: np.ndarray

    @property
    def marginal(self) -> np.ndarray:
        return self.feasible & (self.kappa_lo == self.kappa_hi)

    def result(self, i_alpha: int, i_n: int) -> RegionResult:
        f = bool(self.feasible[i_alpha, i_n])
        iv = (float(self.kappa_lo[i_alpha, i_n]), float(self.kappa_hi[i_alpha, i_n])) if f else None
        return RegionResult(float(self.n[i_n]), float(self.alpha[i_alpha]), f, iv,
                            bool(self.mu_flag[i_alpha, i_n]))

    def results(self):
        for ia in range(self.alpha.size):
            for jn in range(self.n.size):
                yield self.result(ia, jn)

    def boundary(self) -> np.ndarray:
        """Closed polyline around the feasible set, as ``(n, alpha)`` rows.

        Upper edge left to right, then lower edge right to left, using the
        extreme feasible alpha of each n-column.
        """
        cols = np.flatnonzero(self.feasible.any(axis=0))
        if cols.size == 0:
            return np.empty((0, 2))
        upper, lower = [], []
        for j in cols:
            a = self.alpha[self.feasible[:, j]]
            upper.append((self.n[j], a.max()))
            lower.append((self.n[j], a.min()))
        poly = upper + lower[::-1]
        poly.append(poly[0])
        return np.array(poly)

    def reference_line(self) -> np.ndarray:
        """Samples of the dashed line ``alpha = 3/2 - n`` inside the window."""
        a = 1.5 - self.n
        keep = (a >= self.alpha.min()) & (a <= self.alpha.max())
        return np.column_stack([self.n[keep], a[keep]])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "alpha", "feasible", "kappa_lo", "kappa_hi", "mu_flag"])
            for ia, al in enumerate(self.alpha):
                for jn, nv in enumerate(self.n):
                    f = bool(self.feasible[ia, jn])
                    w.writerow([repr(float(nv)), repr(float(al)), int(f),
                                repr(float(self.kappa_lo[ia, jn])) if f else "",
                                repr(float(self.kappa_hi[ia, jn])) if f else "",
                                int(bool(self.mu_flag[ia, jn]))])


def region_scan(n_range=(0.4, 3.1), alpha_range=(-1.0, 1.0), resolution=(271, 201)) -> RegionScan:
    """Evaluate feasibility on a ``resolution = (n_count, alpha_count)`` grid."""
    if np.ndim(resolution) == 0:
        resolution = (int(resolution), int(resolution))
    rn, ra = (int(r) for r in resolution)
    if rn < 2 or ra < 2:
        raise ValueError("resolution must be >= 2 per axis")
    n = np.linspace(n_range[0], n_range[1], rn)
    alpha = np.linspace(alpha_range[0], alpha_range[1], ra)
    A, Nn = np.meshgrid(alpha, n, indexing="ij")
    feas, lo, hi = _feasible_arrays(A, Nn)
    with np.errstate(invalid="ignore"):
        mu = feas & (hi >= mu_kappa_min(A))
    return RegionScan(n, alpha, feas, lo, hi, mu)


GNUPLOT_SCRIPT = """\
# feasible region: alpha versus n
set datafile separator ','
set xlabel 'n'
set ylabel 'alpha'
set key outside
plot '{region}' every ::1 using 1:($3 > 0 ? $2 : 1/0) with points pt 5 ps 0.3 lc rgb '#9999cc' title 'feasible', \\
     '{boundary}' every ::1 using 1:2 with lines lw 2 lc rgb 'black' title 'boundary', \\
     '{reference}' every ::1 using 1:2 with lines dt 2 lc rgb 'red' title 'alpha = 3/2 - n'
"""


# ---------------------------------------------------- identity verification

def _quad(values, period):
    total = float(np.mean(values)) * period
    if not math.isfinite(total):
        raise QuadratureFailure("non-finite integrand")
    return total


class _Quantities:
    """Weighted integrands of a profile for the identity checks."""

    def __init__(self, alpha, n, s, eps, a1, m, profile, nodes):
        x = profile.nodes(nodes)
        h, hx, hxx, hxxx = profile.derivs(x)
        if np.any(h <= 0):
            raise QuadratureFailure("profile must be strictly positive")
        self.P = profile.period
        f = np.asarray(f_eps(h, n, s, eps))
        fp = np.asarray(f_eps_prime(h, n, s, eps))
        D = np.asarray(Dpp_eps(h, m, n, eps))
        self.r = np.sqrt(h**alpha * f) * (hxxx + a1 * D * hx)
        self.sv = np.sqrt(h ** (alpha - 2) * f) * hx * hxx
        self.l = np.sqrt(h ** (alpha - 4) * f) * hx**3
        self.nn = np.sqrt(h ** (alpha - 2) * f * D) * hx**2
        self.i1 = h ** (alpha - s - 4) * f**2 * hx**6
        self.i2 = h ** (alpha - 2 * s - 4) * f**3 * hx**6
        self.j = h ** (alpha - s - 3) * f**2 * hx**4 * hxx
        self.sl_a = h ** (alpha - 4) * f * hx**6
        self.sl_b = h ** (alpha - 3) * fp * hx**6

    def q(self, v):
        return _quad(v, self.P)


def _chain_residual(chain):
    sums = [sum(terms) for terms in chain]
    scale = max(sum(abs(t) for t in terms) for terms in chain)
    if scale == 0.0:
        return 0.0
    return max(abs(s - sums[0]) for s in sums[1:]) / scale


def ibp_chains(alpha, n, s, eps, a1, profile, m=None, nodes=512):
    """Term lists of both sides of the two integration-by-parts chains."""
    m = n + 2.0 if m is None else m
    Q = _Quantities(alpha, n, s, eps, a1, m, profile, nodes)
    q = Q.q
    SL, RL = q(Q.sv * Q.l), q(Q.r * Q.l)
    S2, L2, N2 = q(Q.sv**2), q(Q.l**2), q(Q.nn**2)
    I1, I2, J = q(Q.i1), q(Q.i2), q(Q.j)
    c3, c2 = alpha + n - 3.0, alpha + n - 2.0
    sn = s - n
    h4 = [
        [SL],
        [-(alpha - 3.0) / 5.0 * q(Q.sl_a), -q(Q.sl_b) / 5.0],
        [-c3 / 5.0 * L2, -eps * sn / 5.0 * I1],
    ]
    h5 = [
        [RL],
        [-c2 * SL, -eps * sn * J, -3.0 * S2, a1 * N2],
        [c2 * c3 / 5.0 * L2, -3.0 * S2, a1 * N2, -eps * sn * J, eps * sn * c2 / 5.0 * I1],
        [c2 * c3 / 5.0 * L2, -3.0 * S2, a1 * N2,
         eps * sn * (2 * alpha + 3 * n - s - 5) / 5.0 * I1, 2.0 / 5.0 * eps**2 * sn**2 * I2],
    ]
    return h4, h5


def verify_ibp(alpha, n, s, eps, a1, test_profile, m=None, nodes=512):
    """Relative residuals of the two integration-by-parts chains.

    Every expression in each chain is evaluated by periodic trapezoidal
    quadrature on ``nodes`` points (spectrally accurate for smooth periodic
    integrands) and compared with the first; residuals are normalized by
    the largest sum of absolute term values in the chain.

    Returns
    -------
    (float, float)
        Residual of the ``SL`` chain and of the ``RL`` chain.
    """
    h4, h5 = ibp_chains(alpha, n, s, eps, a1, test_profile, m, nodes)
    return _chain_residual(h4), _chain_residual(h5)


def decomposition_terms(alpha, n, s, a1, kappa, test_profile, eps=0.1, m=None, nodes=512):
    m = n + 2.0 if m is None else m
    Q = _Quantities(alpha, n, s, eps, a1, m, test_profile, nodes)
    q = Q.q
    R2, RS, RL = q(Q.r**2), q(Q.r * Q.sv), q(Q.r * Q.l)
    L2, N2, I1, I2 = q(Q.l**2), q(Q.nn**2), q(Q.i1), q(Q.i2)
    cf = coeffs(alpha, n, s, a1, kappa)
    lhs = [-R2, -2.0 * alpha * RS, -alpha / 2.0 * (alpha - 1.0) * RL]
    rhs = [
        -q((Q.r + alpha * Q.sv + kappa * Q.l) ** 2),
        cf.beta_c * q((Q.sv + (alpha + n - 3.0) / 5.0 * Q.l) ** 2),
        cf.gamma_c * L2,
        cf.mu_c * N2,
        eps * cf.k1 * I1,
        eps**2 * cf.k2 * I2,
    ]
    return lhs, rhs


def verify_decomposition(alpha, n, s, a1, kappa, test_profile, eps=0.1, m=None, nodes=512):
    """Relative gap between the direct energy-rate expression and the
    sum-of-squares form, which must vanish for every ``kappa``."""
    lhs, rhs = decomposition_terms(alpha, n, s, a1, kappa, test_profile, eps, m, nodes)
    scale = sum(abs(t) for t in lhs) + sum(abs(t) for t in rhs)
    if scale == 0.0:
        return 0.0
    return abs(sum(lhs) - sum(rhs)) / scale
