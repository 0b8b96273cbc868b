"""Conserved and dissipated quantities evaluated on grid states.

Face quantities (energies, dissipation, ``R2``) use the solver's flux
stencils; the remaining weighted norms use centered cell stencils. All
sums are midpoint rules over the periodic cells.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import laugesen
from .grid import State, cell_dx, cell_dxx, face_dx, face_dxxx, face_mean
from .mobility import face_mobility
from .params import ModelParams, RegParams, ValidatedConfig
from .regfuncs import D0, Dpp_eps, Dtilde0, Dtilde_eps, G0_beta, f_delta_eps, f_eps


@dataclass(frozen=True)
class FunctionalRecord:
    t: float
    mass: float
    surface_energy: float
    E0: float
    E0_alpha: float
    E_eps_alpha: float
    entropy_beta: float
    R2: float
    S2: float
    L2: float
    N2: float
    dissipation: float
    dissipation_reg: float
    eps_term: float

    @classmethod
    def columns(cls):
        return [f.name for f in dataclasses.fields(cls)]

    def as_dict(self):
        return dataclasses.asdict(self)


def _sum(v, dx):
    return float(np.sum(v) * dx)


def mass(state: State) -> float:
    return _sum(state.h, state.grid.dx)


def surface_energy(state: State) -> float:
    """``int h_x^2 dx`` with face differences."""
    return _sum(face_dx(state.h, state.grid.dx) ** 2, state.grid.dx)


def _potential_sum(state, model, antideriv):
    if model.a1 == 0.0:
        return 0.0
    return model.a1 * _sum(antideriv(state.h), state.grid.dx)


def energy_E0(state: State, model: ModelParams) -> float:
    """``int (h_x^2 / 2 - a1 D0(h)) dx``; the potential term is skipped when ``a1 = 0``."""
    pot = _potential_sum(state, model, lambda h: D0(h, model.m, model.n))
    return 0.5 * surface_energy(state) - pot


def energy_E0_alpha(state: State, model: ModelParams) -> float:
    h, dx = state.h, state.grid.dx
    grad = 0.5 * _sum(face_mean(h**model.alpha) * face_dx(h, dx) ** 2, dx)
    pot = _potential_sum(state, model, lambda z: Dtilde0(z, model.alpha, model.m, model.n))
    return grad - pot


def energy_E_eps_alpha(state: State, model: ModelParams, reg: RegParams) -> float:
    """Alpha-energy with the saturated potential; equals :func:`energy_E0_alpha` at ``eps = 0``."""
    if model.a1 == 0.0 or reg.eps == 0.0:
        return energy_E0_alpha(state, model)
    h, dx = state.h, state.grid.dx
    grad = 0.5 * _sum(face_mean(h**model.alpha) * face_dx(h, dx) ** 2, dx)
    pot = _potential_sum(state, model,
                         lambda z: Dtilde_eps(z, model.alpha, model.m, model.n, reg.eps))
    return grad - pot


def entropy_beta(state: State, model: ModelParams) -> float:
    return _sum(G0_beta(state.h, model.n, model.beta_ent), state.grid.dx)


def rsln(state: State, model: ModelParams, reg: RegParams):
    """Squared weighted norms ``(R2, S2, L2, N2)`` with the eps-mobility (no delta)."""
    h, dx = state.h, state.grid.dx
    al, n, s, eps = model.alpha, model.n, reg.s, reg.eps
    f = np.asarray(f_eps(h, n, s, eps))
    D = np.asarray(Dpp_eps(h, model.m, n, eps))
    hxf = face_dx(h, dx)
    flux_core = face_dxxx(h, dx) + model.a1 * face_mean(D) * hxf
    R2 = _sum(face_mean(h**al * f) * flux_core**2, dx)
    hx, hxx = cell_dx(h, dx), cell_dxx(h, dx)
    S2 = _sum(h ** (al - 2) * f * hx**2 * hxx**2, dx)
    L2 = _sum(h ** (al - 4) * f * hx**6, dx)
    N2 = _sum(h ** (al - 2) * f * D * hx**4, dx)
    return R2, S2, L2, N2


def dissipation_integral(state: State, model: ModelParams, averaging: str = "arithmetic") -> float:
    """Spatial integrand of the classical dissipation, ``int h^n (h_xxx + a1 h^(m-n) h_x)^2``.

    The film is strictly positive, so the restriction to ``{h > 0}`` is vacuous.
    """
    h, dx = state.h, state.grid.dx
    M = face_mobility(h, lambda z: z**model.n, how=averaging)
    core = face_dxxx(h, dx)
    if model.a1 != 0.0:
        core = core + model.a1 * face_mean(h ** (model.m - model.n)) * face_dx(h, dx)
    return _sum(M * core**2, dx)


def dissipation_reg(state: State, cfg: ValidatedConfig) -> float:
    """Dissipation with the solver's regularized mobility and weight."""
    model, reg = cfg.model, cfg.reg
    h, dx = state.h, state.grid.dx
    M = face_mobility(h, lambda z: f_delta_eps(z, model.n, reg.s, reg.eps, reg.delta),
                      how=cfg.disc.mobility_averaging)
    core = face_dxxx(h, dx)
    if model.a1 != 0.0:
        D = Dpp_eps(h, model.m, model.n, reg.eps)
        core = core + model.a1 * face_mean(D) * face_dx(h, dx)
    return _sum(M * core**2, dx)


def default_kappa(model: ModelParams) -> float:
    """``model.kappa`` if given, else the midpoint of the feasible interval,
    else the value that removes the eps^2 term."""
    if model.kappa is not None:
        return model.kappa
    iv = laugesen.feasible_kappa(model.alpha, model.n)
    if iv is not None:
        return 0.5 * (iv[0] + iv[1])
    return laugesen.mu_kappa_min(model.alpha)


def eps_term_integral(state: State, model: ModelParams, reg: RegParams, kappa: float) -> float:
    """``int (k1 eps h^(a-s-4) f^2 + k2 eps^2 h^(a-2s-4) f^3) h_x^6 dx`` (signed)."""
    if reg.eps == 0.0:
        return 0.0
    h, dx = state.h, state.grid.dx
    al, n, s, eps = model.alpha, model.n, reg.s, reg.eps
    cf = laugesen.coeffs(al, n, s, model.a1, kappa)
    f = np.asarray(f_eps(h, n, s, eps))
    hx6 = cell_dx(h, dx) ** 6
    dens = cf.k1 * eps * h ** (al - s - 4) * f**2 + cf.k2 * eps**2 * h ** (al - 2 * s - 4) * f**3
    return _sum(dens * hx6, dx)


def evaluate(state: State, cfg: ValidatedConfig) -> FunctionalRecord:
    model, reg = cfg.model, cfg.reg
    R2, S2, L2, N2 = rsln(state, model, reg)
    return FunctionalRecord(
        t=float(state.t),
        mass=mass(state),
        surface_energy=surface_energy(state),
        E0=energy_E0(state, model),
        E0_alpha=energy_E0_alpha(state, model),
        E_eps_alpha=energy_E_eps_alpha(state, model, reg),
        entropy_beta=entropy_beta(state, model),
        R2=R2, S2=S2, L2=L2, N2=N2,
        dissipation=dissipation_integral(state, model, cfg.disc.mobility_averaging),
        dissipation_reg=dissipation_reg(state, cfg),
        eps_term=eps_term_integral(state, model, reg, default_kappa(model)),
    )


def time_integral(records, name: str) -> float:
    """Right-endpoint sum ``sum_k (t_k - t_{k-1}) q_k``.

    Backward Euler evaluates the flux at the new time level, so this is the
    rule under which the discrete energy identity is exact up to the
    scheme's own numerical dissipation.
    """
    total = 0.0
    for prev, cur in zip(records, records[1:]):
        total += (cur.t - prev.t) * getattr(cur, name)
    return total
