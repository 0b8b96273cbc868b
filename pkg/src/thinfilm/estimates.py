"""Empirical checks of the a priori energy bounds on computed trajectories.

The bounds carry existential constants, so nothing here compares against a
numeric constant. Each check fits the smallest constant that makes the
stated envelope dominate the measured trace and reports the envelope shape.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import laugesen
from .errors import InsufficientDecay, OutOfTheorem, ThetaOutOfRange
from .functionals import eps_term_integral
from .grid import State, cell_dx
from .params import ModelParams, RegParams

CASES = ("stable", "m>n+2", "m<n+2:A", "m<n+2:B", "m=n+2")

# |m - (n + 2)| below this counts as the critical exponent
CRITICAL_TOL = 1e-12


def classify_case(model: ModelParams) -> str:
    """Which energy bound applies to ``model``.

    Raises
    ------
    OutOfTheorem
        For ``m < n + 2`` and ``alpha <= 2n - 3m - 2``, where no bound is stated.
    """
    n, m, al = model.n, model.m, model.alpha
    if model.a1 <= 0:
        return "stable"
    if abs(m - (n + 2)) <= CRITICAL_TOL:
        return "m=n+2"
    if m > n + 2:
        return "m>n+2"
    if al > 2 * n - 3 * m - 1:
        return "m<n+2:A"
    if al > 2 * n - 3 * m - 2:
        return "m<n+2:B"
    raise OutOfTheorem(f"m < n + 2 and alpha = {al} <= 2n - 3m - 2 = {2 * n - 3 * m - 2}: "
                       "no energy bound is available")


@dataclass
class BoundReport:
    """Measured alpha-energy trace against a fitted envelope.

    ``envelope[k] = E(0) + C * shape[k]``; ``violations`` counts trace
    points above the envelope by more than ``slack``.
    """

    case: str
    times: list
    trace: list
    shape: list
    constants: dict
    violations: int
    slack: float
    mass: float
    linear_ok: bool = True
    notes: list = field(default_factory=list)

    @property
    def envelope(self) -> list:
        C = self.constants.get("C", 0.0)
        e0 = self.trace[0] if self.trace else 0.0
        return [e0 + C * g for g in self.shape]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["envelope"] = self.envelope
        return d

    def to_json(self, **kw) -> str:
        kw.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kw)


def _slack(trace) -> float:
    return 1e-6 * max(1.0, abs(trace[0]))


def check_monotone_energy(trajectory, model: ModelParams, name: str = "E0_alpha") -> BoundReport:
    """Count steps on which the energy trace rises by more than the slack.

    The slack is ``1e-6 * max(1, |E(0)|)`` and absorbs time-discretization
    error. Violations are recorded, never raised.
    """
    times = [float(t) for t in trajectory.times]
    trace = [float(v) for v in trajectory.series(name)]
    slack = _slack(trace)
    bad = sum(1 for a, b in zip(trace, trace[1:]) if b > a + slack)
    notes = []
    if model.a1 > 0:
        notes.append("a1 > 0: monotonicity is not asserted by the bound")
    if laugesen.feasible_kappa(model.alpha, model.n) is None:
        notes.append(f"alpha = {model.alpha} lies outside the dissipation region for n = {model.n}")
    mass = float(trajectory.series("mass")[0])
    return BoundReport("stable", times, trace, [0.0] * len(times), {"C": 0.0}, bad, slack,
                       mass, linear_ok=True, notes=notes)


def growth_exponents(model: ModelParams, case: Optional[str] = None) -> dict:
    """Mass exponents of the growth envelope for each branch."""
    n, m, al = model.n, model.m, model.alpha
    case = case or classify_case(model)
    if case == "m<n+2:A":
        return {"p1": (2 * al + 5 * m - 3 * n + 4) / (n + 2 - m), "p2": al + 3 * m - 2 * n + 2}
    if case == "m<n+2:B":
        return {"p": al + 3 * m - 2 * n + 2}
    if case == "m=n+2":
        return {"p": al + n + 8}
    if case == "m>n+2":
        return {"q": al + 3 * m - 2 * n + 2}
    return {}


class PowerIntegral:
    """Observer collecting ``int h^q dx`` at every accepted record."""

    def __init__(self, q):
        self.q = q
        self.values = []

    def __call__(self, state, record, stats):
        self.values.append(float(np.sum(state.h**self.q) * state.grid.dx))


def envelope_shape(trajectory, model: ModelParams, case: Optional[str] = None,
                   densities=None) -> np.ndarray:
    """Unit-constant growth envelope ``g(t)`` of the branch.

    ``m > n + 2``: the running right-endpoint integral of ``int h^q dx``,
    taken from ``densities`` (one value per record, e.g. gathered by
    :class:`PowerIntegral`) or else from the stored snapshots. Otherwise
    ``t`` times a power of the mass (both constants of the ``m < n + 2``
    branch are taken equal, so a single constant is fitted).
    """
    case = case or classify_case(model)
    t = trajectory.times
    M = float(trajectory.series("mass")[0])
    ex = growth_exponents(model, case)
    if case == "stable":
        return np.zeros_like(t)
    if case == "m>n+2":
        q = ex["q"]
        if densities is None:
            densities = [float(np.sum(s.h**q) * s.grid.dx) for s in _states_at_records(trajectory)]
        dens = densities
        out = np.zeros_like(t)
        out[1:] = np.cumsum(np.diff(t) * np.asarray(dens)[1:])
        return out
    if case == "m<n+2:A":
        return t * (M ** ex["p1"] + M ** ex["p2"])
    return t * M ** ex["p"]


def _states_at_records(trajectory):
    states = {s.t: s for s in trajectory.states}
    out = []
    for t in trajectory.times:
        if t not in states:
            raise ValueError("the m > n + 2 envelope needs a snapshot at every record "
                             "(run with snapshot_every=1)")
        out.append(states[t])
    return out


def _fit_constant(excess, g):
    mask = g > 0
    if not np.any(mask):
        return 0.0
    return max(0.0, float(np.max(excess[mask] / g[mask])))


def check_growth_bound(trajectory, model: ModelParams, name: str = "E0_alpha",
                       densities=None) -> BoundReport:
    """Fit the smallest ``C`` with ``E(t) <= E(0) + C g(t)`` on the trace.

    ``C`` is fitted on the whole trace and reported. The shape test refits
    on the first half of the time window and counts later points the early
    envelope misses by more than 20%; ``linear_ok`` holds when there are
    none, i.e. the excess grows no faster than the envelope.
    """
    case = classify_case(model)
    if case == "stable":
        raise OutOfTheorem("a1 <= 0: use check_monotone_energy")
    t = trajectory.times
    trace = trajectory.series(name)
    g = envelope_shape(trajectory, model, case, densities)
    excess = trace - trace[0]
    slack = _slack(trace)
    C = _fit_constant(excess - slack, g)
    half = t <= 0.5 * t[-1]
    C_early = _fit_constant(excess[half] - slack, g[half])
    late = ~half
    bad = int(np.sum(excess[late] > 1.2 * C_early * g[late] + slack))
    notes = []
    if case == "m=n+2":
        notes.append("critical mass is not quantified; mass recorded only")
    return BoundReport(case, [float(x) for x in t], [float(x) for x in trace],
                       [float(x) for x in g], {"C": C, "C_early": C_early, **growth_exponents(model, case)},
                       bad, slack, float(trajectory.series("mass")[0]), linear_ok=bad == 0, notes=notes)


# interpolation bookkeeping

def gn_theta(a, b, d, i, j, N=1):
    """Interpolation exponent ``(1/b + i/N - 1/a) / (1/b + j/N - 1/d)``.

    Raises
    ------
    ValueError
        Preconditions ``a > 1, 0 < b < a, d > 1, 0 <= i < j`` fail.
    ThetaOutOfRange
        The exponent is outside ``[i/j, 1)``. The preconditions alone do not
        exclude this when ``i > 0`` or ``N > 1``.
    """
    if not (a > 1 and 0 < b < a and d > 1 and 0 <= i < j and N >= 1):
        raise ValueError(f"inadmissible tuple a={a}, b={b}, d={d}, i={i}, j={j}, N={N}")
    theta = (1.0 / b + i / N - 1.0 / a) / (1.0 / b + j / N - 1.0 / d)
    if not (i / j <= theta < 1.0):
        raise ThetaOutOfRange(f"theta = {theta!r} not in [{i / j}, 1)")
    return theta


def holder_chain_tuple(alpha, n, m):
    """``(a, b, d, i, j, N)`` for ``v = h^((alpha+n+2)/6)`` in the growth estimate."""
    k = alpha + n + 2
    return 6.0 * (alpha + 3 * m - 2 * n + 2) / k, 6.0 / k, 6.0, 0, 1, 1


def holder_terms(state: State, model: ModelParams, hx=None):
    """``(I1, I2, I3)``: integrals of ``h^(a+m-2) h_x^4``, ``h^(a+n-4) h_x^6``, ``h^(a+3m-2n+2)``."""
    h, dx = state.h, state.grid.dx
    if hx is None:
        hx = cell_dx(h, dx)
    al, n, m = model.alpha, model.n, model.m
    I1 = float(np.sum(h ** (al + m - 2) * hx**4) * dx)
    I2 = float(np.sum(h ** (al + n - 4) * hx**6) * dx)
    I3 = float(np.sum(h ** (al + 3 * m - 2 * n + 2)) * dx)
    return I1, I2, I3


def check_holder_step(state: State, model: ModelParams, hx=None) -> float:
    """``I2^(2/3) I3^(1/3) - I1``; nonnegative by Hölder with exponents 3/2 and 3."""
    I1, I2, I3 = holder_terms(state, model, hx)
    return I2 ** (2.0 / 3.0) * I3 ** (1.0 / 3.0) - I1


# decay

@dataclass
class DecayFit:
    C: float
    p: float
    times: list
    norms: list
    window: tuple
    passes: bool
    in_remark_range: bool
    in_dissipation_region: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(d["p"]):
            d["p"] = "inf"
        return d


def sup_deviation(state: State) -> float:
    h = state.h
    return float(np.max(np.abs(h - np.mean(h))))


def decay_diagnostic(trajectory, model: ModelParams, min_points: int = 4,
                     p_required: float = 0.25) -> DecayFit:
    """Fit ``||h - mean||_inf <= C (1 + t)^(-p)`` on the late half of log-time.

    Points at the rounding floor (below ``1e-13`` times the mean) are
    dropped. A trace that reaches the floor inside the window decays faster
    than any power and is reported with ``p = inf``.

    Raises
    ------
    InsufficientDecay
        Fewer than ``min_points`` snapshots in the window.
    """
    states = trajectory.states
    t = np.array([s.t for s in states])
    norms = np.array([sup_deviation(s) for s in states])
    hbar = float(np.mean(states[0].h))
    floor = 1e-13 * max(hbar, 1e-300)
    in_remark = (model.n - 4) / 2 <= model.alpha < 0
    in_region = laugesen.feasible_kappa(model.alpha, model.n) is not None
    notes = []
    if model.a1 > 0:
        notes.append("a1 > 0: no decay is asserted")
    if not in_remark:
        notes.append("alpha outside the range (n-4)/2 <= alpha < 0 of the decay statement")
    if in_remark and not in_region:
        notes.append("alpha inside the decay range but outside the dissipation region")
    tmax = t[-1]
    if tmax <= 0:
        raise InsufficientDecay("trajectory has no time extent")
    lo = math.expm1(0.5 * math.log1p(tmax))
    win = t >= lo
    if np.all(norms <= floor):
        return DecayFit(0.0, math.inf, t.tolist(), norms.tolist(), (lo, tmax), True,
                        in_remark, in_region, notes + ["state is constant to rounding"])
    if np.sum(win) < min_points:
        raise InsufficientDecay(f"{int(np.sum(win))} snapshots in the window t >= {lo:.4g}; "
                                f"need {min_points}")
    usable = win & (norms > floor)
    if np.sum(usable) < np.sum(win):
        notes.append("deviation reached the rounding floor inside the window")
        if np.sum(usable) < 2:
            return DecayFit(float(np.max(norms[win])), math.inf, t.tolist(), norms.tolist(),
                            (lo, tmax), True, in_remark, in_region, notes)
    X = np.log1p(t[usable])
    Y = np.log(norms[usable])
    if np.ptp(X) == 0:
        raise InsufficientDecay("window has a single time level")
    slope, icpt = np.polyfit(X, Y, 1)
    p = -float(slope)
    # smallest C making the fitted rate an envelope over the window
    C = float(np.max(norms[usable] * (1 + t[usable]) ** p))
    return DecayFit(C, p, t.tolist(), norms.tolist(), (lo, tmax), p >= p_required,
                    in_remark, in_region, notes)


# eps scaling

@dataclass
class EpsSweep:
    eps: list
    values: list
    slope: float
    expected: float

    @property
    def rel_error(self) -> float:
        return abs(self.slope - self.expected) / abs(self.expected)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rel_error"] = self.rel_error
        return d


def eps_sweep(state: State, model: ModelParams, reg: RegParams,
              eps_values: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
              kappa: Optional[float] = None) -> EpsSweep:
    """Log-log slope of ``|eps_term_integral|`` against ``eps`` on a frozen state.

    The bound predicts the exponent ``alpha / (s - n)``. ``kappa`` defaults
    to 0.
    """
    kappa = 0.0 if kappa is None else kappa
    vals = [abs(eps_term_integral(state, model, replace(reg, eps=float(e)), kappa))
            for e in eps_values]
    slope = float(np.polyfit(np.log(eps_values), np.log(vals), 1)[0])
    return EpsSweep([float(e) for e in eps_values], vals, slope,
                    model.alpha / (reg.s - model.n))


__all__ = [
    "CASES", "classify_case", "BoundReport", "check_monotone_energy", "check_growth_bound",
    "growth_exponents", "PowerIntegral", "envelope_shape", "gn_theta", "holder_chain_tuple", "holder_terms",
    "check_holder_step", "DecayFit", "sup_deviation", "decay_diagnostic", "EpsSweep",
    "eps_sweep",
]
