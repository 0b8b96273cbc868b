"""Periodic 1-D mesh, film state and the finite-difference stencils.

Face ``i`` sits at ``x_i + dx/2`` (between cells ``i`` and ``i+1``). The
solver flux and every functional share these stencils, so the discrete
energy bookkeeping closes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import ValidatedConfig


@dataclass(frozen=True)
class Grid:
    a: float
    N: int

    @property
    def dx(self) -> float:
        return 2.0 * self.a / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.a + self.dx * np.arange(self.N)

    @property
    def length(self) -> float:
        return 2.0 * self.a

    @classmethod
    def from_config(cls, cfg: ValidatedConfig) -> "Grid":
        return cls(cfg.disc.a, cfg.disc.N)


@dataclass(frozen=True)
class State:
    t: float
    h: np.ndarray = field(repr=False)
    grid: Grid = None

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        if self.grid is None:
            raise ValueError("State needs a grid")
        if h.shape != (self.grid.N,):
            raise ValueError(f"h has shape {h.shape}, grid has N={self.grid.N}")

    def with_h(self, h, t=None) -> "State":
        return State(self.t if t is None else t, h, self.grid)

    def shift(self, k: int) -> "State":
        return self.with_h(np.roll(self.h, k))


def up(v, k=1):
    """``v[i + k]`` with periodic wrap."""
    return np.roll(v, -k)


# face stencils (value at i + 1/2)

def face_dx(h, dx):
    return (up(h) - h) / dx


def face_dxxx(h, dx):
    # difference form: exactly zero on constants
    return ((up(h, 2) - up(h, -1)) - 3.0 * (up(h) - h)) / dx**3


def face_mean(v):
    return 0.5 * (v + up(v))


def face_div(F, dx):
    """``(F_{i+1/2} - F_{i-1/2}) / dx`` at cell ``i``."""
    return (F - up(F, -1)) / dx


# centered cell stencils

def cell_dx(h, dx):
    return (up(h) - up(h, -1)) / (2.0 * dx)


def cell_dxx(h, dx):
    return ((up(h) - h) - (h - up(h, -1))) / dx**2


def cell_dxxx(h, dx):
    return ((up(h, 2) - up(h, -2)) - 2.0 * (up(h) - up(h, -1))) / (2.0 * dx**3)
