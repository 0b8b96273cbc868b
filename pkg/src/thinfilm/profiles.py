"""Initial data and analytic test profiles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid


@dataclass(frozen=True)
class TrigProfile:
    """``h(x) = c0 + sum_k a_k cos(k w x) + b_k sin(k w x)``, ``w = pi/L``.

    Periodic on ``(-L, L)`` with exact derivatives up to third order.
    """

    c0: float
    a: tuple = ()
    b: tuple = ()
    L: float = np.pi

    @property
    def period(self) -> float:
        return 2.0 * self.L

    def nodes(self, count: int) -> np.ndarray:
        return -self.L + self.period * np.arange(count) / count

    def derivs(self, x):
        """Return ``(h, h_x, h_xx, h_xxx)`` at ``x``."""
        x = np.asarray(x, dtype=float)
        w = np.pi / self.L
        out = [np.full_like(x, self.c0), np.zeros_like(x), np.zeros_like(x), np.zeros_like(x)]
        K = max(len(self.a), len(self.b))
        a = tuple(self.a) + (0.0,) * (K - len(self.a))
        b = tuple(self.b) + (0.0,) * (K - len(self.b))
        for k in range(1, K + 1):
            ak, bk = a[k - 1], b[k - 1]
            if ak == 0.0 and bk == 0.0:
                continue
            kw = k * w
            c, s = np.cos(kw * x), np.sin(kw * x)
            out[0] += ak * c + bk * s
            out[1] += kw * (-ak * s + bk * c)
            out[2] += kw**2 * (-ak * c - bk * s)
            out[3] += kw**3 * (ak * s - bk * c)
        return tuple(out)

    def __call__(self, x):
        return self.derivs(x)[0]


def sine_profile() -> TrigProfile:
    """``2 + sin x`` on ``(-pi, pi)``."""
    return TrigProfile(2.0, (0.0,), (1.0,))


def random_trig_profile(rng: np.random.Generator, max_mode: int = 3,
                        min_height: float = 0.5, L: float = np.pi) -> TrigProfile:
    K = int(rng.integers(1, max_mode + 1))
    a = rng.uniform(-1.0, 1.0, K)
    b = rng.uniform(-1.0, 1.0, K)
    c0 = min_height + float(np.sum(np.abs(a) + np.abs(b))) * rng.uniform(1.0, 2.0)
    return TrigProfile(c0, tuple(a), tuple(b), L)


# grid initial data

def constant(grid: Grid, c: float) -> np.ndarray:
    return np.full(grid.N, float(c))


def cosine(grid: Grid, c: float, A: float, k: float = 1.0) -> np.ndarray:
    """``c + A cos(k pi x / a)``."""
    return c + A * np.cos(k * np.pi * grid.x / grid.a)


def compact_bump(grid: Grid, c: float, w: float) -> np.ndarray:
    """``max(0, c (1 - (x/w)^2))^2``; zero outside ``|x| < w``."""
    return np.maximum(0.0, c * (1.0 - (grid.x / w) ** 2)) ** 2


def near_touchdown(grid: Grid, hmin: float = 1e-4, amp: float = 0.8,
                   power: float = 5.0 / 3.0) -> np.ndarray:
    """``hmin + amp |x|^power``: a film almost touching down at ``x = 0``.

    With ``power = 5/3`` and mobility exponent ``n = 1`` the weight
    ``h^(n-4) h_x^6 dx`` spreads log-uniformly over heights, which makes
    the regularization error terms scale with their sharp eps exponent.
    """
    return hmin + amp * np.abs(grid.x) ** power
