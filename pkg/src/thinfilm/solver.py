"""Mass-conservative backward-Euler solver for the regularized film equation

    h_t + ( f_de(h) (h_xxx + a1 D''_e(h) h_x) )_x = 0

on a periodic grid. The flux lives on faces, so cell updates telescope
and the total mass is conserved by construction. Each step is a Newton
iteration whose Jacobian is cyclic pentadiagonal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import functionals
from .banded import solve_cyclic_penta
from .errors import (NegativeInitialData, NewtonDiverged, NonPositiveHeight,
                     PositivityLost, StepFloor)
from .grid import Grid, State, face_div, face_dx, face_dxxx, face_mean, up
from .mobility import face_mobility
from .params import RegParams, ValidatedConfig
from .regfuncs import Dpp_eps, Dpp_eps_prime, f_delta_eps, f_eps_prime

log = logging.getLogger(__name__)

# a step that converges in this many iterations lets dt grow
EASY_ITERATIONS = 3
DT_GROWTH = 1.2


@dataclass(frozen=True)
class StepStats:
    dt: float
    iterations: int
    residual: float
    mass_drift: float


def lift_initial_data(h0, reg: RegParams, grid: Grid, t: float = 0.0) -> State:
    """Add the constant lift ``eps**theta`` to nonnegative initial data."""
    h0 = np.asarray(h0, dtype=float)
    if not np.all(np.isfinite(h0)) or np.any(h0 < 0):
        raise NegativeInitialData("initial data must be finite and nonnegative")
    h = h0 + (reg.eps**reg.theta if reg.eps > 0 else 0.0)
    if np.any(h <= 0):
        raise NonPositiveHeight("lifted initial data is not strictly positive; use eps > 0")
    return State(t, h, grid)


class FilmOperator:
    """Discrete flux, residual and Jacobian for one validated config."""

    def __init__(self, cfg: ValidatedConfig):
        self.cfg = cfg
        self.grid = Grid.from_config(cfg)
        mp, rp = cfg.model, cfg.reg
        n, m, s, eps, delta = mp.n, mp.m, rp.s, rp.eps, rp.delta
        self.a1 = mp.a1
        self.how = cfg.disc.mobility_averaging
        self.mob = lambda z: f_delta_eps(z, n, s, eps, delta)
        self.dmob = lambda z: f_eps_prime(z, n, s, eps)
        self.w = lambda z: Dpp_eps(z, m, n, eps)
        self.dw = lambda z: Dpp_eps_prime(z, m, n, eps)

    def _check(self, h):
        if np.any(~(h > 0)):
            raise NonPositiveHeight("film height must stay positive")

    def flux(self, h):
        self._check(h)
        dx = self.grid.dx
        M = face_mobility(h, self.mob, how=self.how)
        core = face_dxxx(h, dx)
        if self.a1 != 0.0:
            core = core + self.a1 * face_mean(self.w(h)) * face_dx(h, dx)
        return M * core

    def residual(self, h, h_old, dt):
        return h - h_old + dt * face_div(self.flux(h), self.grid.dx)

    def residual_floor(self, h, dt):
        """Size of the rounding error committed when evaluating the residual.

        The third-difference stencil cancels terms of size ``8 h / dx**3``,
        so the residual cannot be resolved below roughly
        ``u * h * dt * M * 16 / dx**4`` (``u`` the unit roundoff).
        """
        dx = self.grid.dx
        M = face_mobility(h, self.mob, how=self.how)
        hmax = float(np.max(np.abs(h)))
        stiff = float(np.max(M)) * 16.0 / dx**4
        if self.a1 != 0.0:
            stiff += abs(self.a1) * float(np.max(M * face_mean(self.w(h)))) * 4.0 / dx**2
        return 64.0 * np.finfo(float).eps * hmax * (1.0 + dt * stiff)

    def flux_partials(self, h):
        """``dF_{i+1/2} / dh_{i+o}`` for ``o = -1, 0, 1, 2`` (rows of the result)."""
        self._check(h)
        dx = self.grid.dx
        M, Ml, Mr = face_mobility(h, self.mob, self.dmob, how=self.how)
        T = face_dxxx(h, dx)
        c3 = 1.0 / dx**3
        A = np.empty((4, h.size))
        if self.a1 != 0.0:
            wv, dwv = self.w(h), self.dw(h)
            P = face_mean(wv)
            G = face_dx(h, dx)
            Q = T + self.a1 * P * G
            A[0] = -M * c3
            A[1] = Ml * Q + M * (3.0 * c3 + self.a1 * (0.5 * dwv * G - P / dx))
            A[2] = Mr * Q + M * (-3.0 * c3 + self.a1 * (0.5 * up(dwv) * G + P / dx))
            A[3] = M * c3
        else:
            A[0] = -M * c3
            A[1] = Ml * T + 3.0 * M * c3
            A[2] = Mr * T - 3.0 * M * c3
            A[3] = M * c3
        return A

    def jacobian(self, h, dt):
        """Wrapped diagonals ``J[i, i+k]``, ``k = -2..2``, of the residual."""
        A = self.flux_partials(h)
        c = dt / self.grid.dx
        N = h.size
        d = np.zeros((5, N))
        d[2] = 1.0
        for k in range(-2, 3):
            row = k + 2
            if -1 <= k <= 2:
                d[row] += c * A[k + 1]
            if -1 <= k + 1 <= 2:
                d[row] -= c * np.roll(A[k + 2], 1)
        return d

    def fd_jacobian(self, h, dt, rel_step=1e-6):
        """Central-difference Jacobian in the same banded layout."""
        N = h.size
        eta = rel_step * float(np.max(np.abs(h)))
        zero = np.zeros(N)
        p = next((q for q in range(5, N + 1) if N % q == 0), N)
        fd = np.zeros((5, N))
        rows = np.arange(N)
        for color in range(p):
            e = np.zeros(N)
            e[color::p] = eta
            dr = (self.residual(h + e, zero, dt) - self.residual(h - e, zero, dt)) / (2 * eta)
            for k in range(-2, 3):
                hit = (rows + k) % N % p == color
                fd[k + 2, hit] = dr[hit]
        return fd

    def jacobian_error(self, h, dt) -> float:
        """Max entry error of the analytic Jacobian, relative to its largest entry."""
        J = self.jacobian(h, dt)
        return float(np.max(np.abs(J - self.fd_jacobian(h, dt))) / np.max(np.abs(J)))


def flux(state: State, cfg: ValidatedConfig) -> np.ndarray:
    """Face fluxes ``F_{i+1/2}`` of the regularized equation."""
    return FilmOperator(cfg).flux(state.h)


def linear_rate(cfg: ValidatedConfig, c: float, k: int) -> float:
    """Decay rate of mode ``cos(k pi x / a)`` linearized about the constant ``c``.

    The discrete symbol of the face stencils is ``sigma = 2 sin(w dx / 2) / dx``
    with ``w = k pi / a``, giving ``f_de(c) (sigma**4 - a1 D''_e(c) sigma**2)``.
    Negative values mean growth. One backward-Euler step multiplies the
    mode by ``1 / (1 + dt * rate)``.
    """
    mp, rp = cfg.model, cfg.reg
    grid = Grid.from_config(cfg)
    w = k * np.pi / grid.a
    sigma = 2.0 * np.sin(0.5 * w * grid.dx) / grid.dx
    M = float(f_delta_eps(c, mp.n, rp.s, rp.eps, rp.delta))
    W = float(Dpp_eps(c, mp.m, mp.n, rp.eps))
    return M * (sigma**4 - mp.a1 * W * sigma**2)


def step(state: State, cfg: ValidatedConfig, dt: float, op: Optional[FilmOperator] = None):
    """One backward-Euler step solved by Newton's method.

    Converged when the max-norm residual is below ``newton_tol`` or below
    the rounding floor of the residual evaluation, whichever is larger.
    Every Newton update conserves mass exactly (the Jacobian's column sums
    are 1), so the tolerance does not affect mass conservation.

    Raises
    ------
    NewtonDiverged
        No convergence within ``newton_max_iter`` or a non-finite iterate.
    PositivityLost
        An iterate reached ``h <= 0``.

    Either way the caller should retry with a smaller ``dt``.
    """
    op = op or FilmOperator(cfg)
    tol, maxit = cfg.disc.newton_tol, cfg.disc.newton_max_iter
    h_old = state.h
    h = h_old.copy()
    r = op.residual(h, h_old, dt)
    target = max(tol, op.residual_floor(h_old, dt))
    for it in range(1, maxit + 1):
        delta = solve_cyclic_penta(op.jacobian(h, dt), -r)
        h = h + delta
        if not np.all(np.isfinite(h)):
            raise NewtonDiverged(f"non-finite iterate at iteration {it}")
        if np.any(h <= 0):
            raise PositivityLost(f"min h = {h.min():.3e} at iteration {it}")
        r = op.residual(h, h_old, dt)
        res = float(np.max(np.abs(r)))
        if not np.isfinite(res):
            raise NewtonDiverged(f"non-finite residual at iteration {it}")
        if res <= target:
            dx = state.grid.dx
            drift = float((np.sum(h) - np.sum(h_old)) * dx)
            return state.with_h(h, state.t + dt), StepStats(dt, it, res, drift)
    raise NewtonDiverged(f"residual {res:.3e} > {target:.1e} after {maxit} iterations")


@dataclass
class Trajectory:
    config: ValidatedConfig
    states: list = field(default_factory=list)
    records: list = field(default_factory=list)
    stats: list = field(default_factory=list)
    aborted: bool = False
    abort_reason: str = ""
    jacobian_error: Optional[float] = None

    @property
    def final(self) -> State:
        return self.states[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


Observer = Callable[[State, functionals.FunctionalRecord, Optional[StepStats]], None]


def run(cfg: ValidatedConfig, h0, observers: Sequence[Observer] = (), *, lift: bool = True,
        snapshot_every: int = 1, check_jacobian: bool = True, jacobian_tol: float = 1e-5,
        fixed_dt: bool = False) -> Trajectory:
    """Integrate from ``h0`` to ``t_end`` with adaptive backward Euler.

    ``dt`` starts at ``dt0``, grows by 1.2 after easy Newton solves and is
    halved on failure. If it would drop below ``dt_min`` the run stops and
    the partial trajectory is returned with ``aborted`` set. A functional
    record is taken (and every observer called) after each accepted step;
    states are kept every ``snapshot_every`` steps plus the last one.

    With ``fixed_dt`` the step stays at ``dt0`` (the last one is shortened
    to land on ``t_end``).
    """
    grid = Grid.from_config(cfg)
    if isinstance(h0, State):
        state = h0
    elif lift:
        state = lift_initial_data(h0, cfg.reg, grid)
    else:
        state = State(0.0, h0, grid)
        if np.any(state.h <= 0):
            raise NonPositiveHeight("initial data must be strictly positive")
    op = FilmOperator(cfg)
    traj = Trajectory(cfg)
    disc = cfg.disc

    if check_jacobian:
        traj.jacobian_error = op.jacobian_error(state.h, disc.dt0)
        if traj.jacobian_error > jacobian_tol:
            raise RuntimeError(f"analytic Jacobian disagrees with finite differences "
                               f"({traj.jacobian_error:.2e})")

    def accept(st, stats):
        rec = functionals.evaluate(st, cfg)
        traj.records.append(rec)
        if stats is not None:
            traj.stats.append(stats)
        for obs in observers:
            obs(st, rec, stats)
        return rec

    accept(state, None)
    traj.states.append(state)
    dt = disc.dt0
    t_end = disc.t_end
    nsteps = 0
    while state.t < t_end:
        remaining = t_end - state.t
        last = dt >= remaining
        dt_try = remaining if last else dt
        try:
            new, stats = step(state, cfg, dt_try, op)
        except (NewtonDiverged, PositivityLost) as exc:
            if fixed_dt:
                traj.aborted, traj.abort_reason = True, f"{type(exc).__name__}: {exc}"
                break
            dt = 0.5 * dt_try
            log.debug("t=%.6g: %s; dt -> %.3e", state.t, exc, dt)
            if dt < disc.dt_min:
                traj.aborted = True
                traj.abort_reason = f"{StepFloor.__name__}: dt < dt_min at t={state.t!r}"
                break
            continue
        if last:
            new = new.with_h(new.h, t_end)
        state = new
        nsteps += 1
        accept(state, stats)
        if nsteps % snapshot_every == 0 or state.t >= t_end:
            traj.states.append(state)
        if not fixed_dt and not last and stats.iterations <= EASY_ITERATIONS:
            dt = min(DT_GROWTH * dt, disc.dt_max)
    if traj.states[-1] is not state:
        traj.states.append(state)
    return traj
