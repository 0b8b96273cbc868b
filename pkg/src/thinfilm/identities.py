"""Identity suite: integration-by-parts chains, the sum-of-squares
decomposition and the eps-scaling sweep, gathered into one report.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import laugesen, profiles
from .estimates import eps_sweep
from .grid import Grid, State
from .params import ModelParams, RegParams

TOL = 1e-7
# node pairs for the convergence check; residuals already below FLOOR are
# at rounding level and cannot shrink further
DOUBLING = ((16, 32), (32, 64))
FLOOR = 1e-12
SHRINK = 10.0
SWEEP_TOL = 0.2


def _draw_params(rng):
    n = float(rng.uniform(0.6, 3.0))
    return {
        "alpha": float(rng.uniform(-1.0, 1.0)),
        "n": n,
        "s": float(rng.integers(4, 7)),
        "a1": float(rng.choice([-1.0, 0.0, 1.0])),
        "eps": float(rng.uniform(0.01, 0.5)),
        "m": float(rng.uniform(0.5 * n + 0.1, n + 3.0)),
    }


SINE_PARAMS = {"alpha": 0.2, "n": 1.0, "s": 4.0, "a1": 1.0, "eps": 0.1, "m": 3.0}


def residuals(p, profile, kappa, nodes):
    r4, r5 = laugesen.verify_ibp(p["alpha"], p["n"], p["s"], p["eps"], p["a1"], profile,
                                 p["m"], nodes)
    d = laugesen.verify_decomposition(p["alpha"], p["n"], p["s"], p["a1"], kappa, profile,
                                      p["eps"], p["m"], nodes)
    return {"ibp_SL": r4, "ibp_RL": r5, "decomposition": d}


def _doubling(p, profile, kappa):
    out = []
    for lo, hi in DOUBLING:
        a, b = residuals(p, profile, kappa, lo), residuals(p, profile, kappa, hi)
        for name in a:
            if a[name] <= FLOOR:
                continue
            ratio = a[name] / b[name] if b[name] > 0 else float("inf")
            out.append({"identity": name, "nodes": [lo, hi], "coarse": a[name], "fine": b[name],
                        "ratio": ratio, "ok": ratio >= SHRINK})
    return out


def _profile_dict(pr):
    return {"c0": pr.c0, "a": list(pr.a), "b": list(pr.b), "L": pr.L}


def sweep_state(N=4096):
    """Frozen near-touchdown state on ``(-pi, pi)`` for the eps sweep."""
    g = Grid(np.pi, N)
    return State(0.0, profiles.near_touchdown(g), g)


def identity_report(seed=0, n_random=20, n_kappa=5, nodes=512, sweep=True) -> dict:
    """Run every identity on ``2 + sin x`` and ``n_random`` seeded profiles.

    Each profile gets its own random exponents and ``n_kappa`` random
    ``kappa``. The report is a plain dict; ``passed`` is true iff every
    residual is at most ``TOL``, every node doubling above the rounding
    floor shrinks the residual ``SHRINK`` times, and the eps sweep slope is
    within ``SWEEP_TOL`` of its predicted value. ``first_failure`` names the
    first check that failed.
    """
    rng = np.random.default_rng(seed)
    cases = [("sine", profiles.sine_profile(), dict(SINE_PARAMS))]
    for k in range(n_random):
        pr = profiles.random_trig_profile(rng)
        cases.append((f"random-{k}", pr, _draw_params(rng)))
    report_cases = []
    first = None
    worst = 0.0
    for name, pr, p in cases:
        kappas = [float(x) for x in rng.uniform(-1.0, 1.0, n_kappa)]
        entries = []
        for kap in kappas:
            r = residuals(p, pr, kap, nodes)
            entries.append({"kappa": kap, **r})
            for ident, v in r.items():
                worst = max(worst, v)
                if first is None and not v <= TOL:
                    first = f"{ident} on {name} (kappa={kap!r}): residual {v:.3e} > {TOL:g}"
        dbl = _doubling(p, pr, kappas[0])
        for d in dbl:
            if first is None and not d["ok"]:
                first = (f"{d['identity']} on {name}: doubling {d['nodes']} shrank only "
                         f"{d['ratio']:.2f}x")
        report_cases.append({"profile": name, "coefficients": _profile_dict(pr), "params": p,
                             "residuals": entries, "doubling": dbl})
    report = {"seed": seed, "nodes": nodes, "tolerance": TOL, "cases": report_cases,
              "max_residual": worst}
    if sweep:
        model = ModelParams(n=1.0, m=1.0, a1=0.0, alpha=0.5, beta_ent=0.5)
        sw = eps_sweep(sweep_state(), model, RegParams(s=4.0), kappa=0.0)
        ok = sw.rel_error <= SWEEP_TOL
        report["eps_sweep"] = {**sw.to_dict(), "ok": ok}
        if first is None and not ok:
            first = f"eps sweep slope {sw.slope:.4f} vs {sw.expected:.4f}"
    report["passed"] = first is None
    report["first_failure"] = first
    return report
