import numpy as np
import pytest
from scipy import integrate

from thinfilm import functionals as F
from thinfilm import laugesen, profiles
from thinfilm.grid import Grid, State
from thinfilm.params import DiscParams, ModelParams, RegParams, default_config
from thinfilm.regfuncs import f_eps
from thinfilm.solver import run


def quad(fun, a=np.pi):
    return integrate.quad(fun, -a, a, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def state(fn, N=256, a=np.pi):
    g = Grid(a, N)
    return State(0.0, fn(g.x), g)


def test_mass():
    assert F.mass(state(lambda x: np.ones_like(x), 16, 1.0)) == pytest.approx(2.0, rel=1e-15)
    a = 1.7
    assert F.mass(state(lambda x: 2 + np.sin(np.pi * x / a), 64, a)) == pytest.approx(4 * a, rel=1e-14)


def test_energy_E0_cosine_second_order():
    A, k = 0.3, 2
    exact = 0.5 * A**2 * k**2 * np.pi  # |Omega| / 2 = pi
    errs = [abs(F.energy_E0(state(lambda x: 1 + A * np.cos(k * x), N), ModelParams()) - exact)
            for N in (64, 128, 256)]
    assert np.all(np.log2(np.array(errs[:-1]) / np.array(errs[1:])) > 1.9)
    assert F.energy_E0(state(lambda x: 0 * x + 0.7), ModelParams()) == 0.0


def test_alpha_energy_consistency_and_sign():
    s = state(lambda x: 1 + 0.4 * np.cos(x), 128)
    for model in (ModelParams(n=1, m=3, a1=1), ModelParams(n=2, m=1.5, a1=-1)):
        assert F.energy_E0_alpha(s, model) == pytest.approx(F.energy_E0(s, model), rel=1e-14)
    neg = ModelParams(n=1, m=2, a1=-1, alpha=0.3)
    assert F.energy_E0_alpha(s, neg) >= 0


def test_alpha_energy_oracle():
    model = ModelParams(n=1, alpha=1.0)
    oracle = quad(lambda x: 0.5 * (1 + 0.1 * np.cos(x)) * (0.1 * np.sin(x)) ** 2)
    val = F.energy_E0_alpha(state(lambda x: 1 + 0.1 * np.cos(x), 4096), model)
    assert val == pytest.approx(oracle, rel=1e-6)


def test_eps_energy():
    s = state(lambda x: 1 + 0.4 * np.cos(x), 64)
    model = ModelParams(n=1, m=3, a1=1, alpha=0.2)
    assert F.energy_E_eps_alpha(s, model, RegParams(eps=0.0)) == F.energy_E0_alpha(s, model)
    assert F.energy_E_eps_alpha(s, model, RegParams(eps=1e-12)) == pytest.approx(
        F.energy_E0_alpha(s, model), abs=1e-9)
    flat = ModelParams(n=1, m=3, a1=0, alpha=0.2)
    assert F.energy_E_eps_alpha(s, flat, RegParams(eps=0.5)) == F.energy_E0_alpha(s, flat)
    gaps = [abs(F.energy_E_eps_alpha(s, model, RegParams(eps=e)) - F.energy_E0_alpha(s, model))
            for e in (1e-3, 1e-2, 1e-1, 1.0)]
    assert np.all(np.diff(gaps) > 0)


def test_rsln_constant_and_nonnegative():
    model, reg = ModelParams(n=1.5, m=2, a1=1, alpha=0.3), RegParams(eps=0.1)
    assert F.rsln(state(lambda x: 0 * x + 1.2, 32), model, reg) == (0.0, 0.0, 0.0, 0.0)
    rng = np.random.default_rng(0)
    for _ in range(5):
        pr = profiles.random_trig_profile(rng)
        vals = F.rsln(state(pr, 64), model, reg)
        assert all(v >= 0 for v in vals)


def test_rsln_oracle():
    model, reg = ModelParams(n=1, alpha=0.0), RegParams(s=4, eps=0.0)
    h = lambda x: 2 + np.sin(x)
    R = quad(lambda x: h(x) * np.cos(x) ** 2)
    S = quad(lambda x: h(x) ** -1 * np.cos(x) ** 2 * np.sin(x) ** 2)
    L = quad(lambda x: h(x) ** -3 * np.cos(x) ** 6)
    vals = F.rsln(state(h, 8192), model, reg)
    for got, want in zip(vals[:3], (R, S, L)):
        assert got == pytest.approx(want, rel=1e-6)


def test_R2_is_dissipation_when_flat():
    cfg = default_config(model=ModelParams(n=1.5, alpha=0.0), reg=RegParams(eps=0.2),
                         disc=DiscParams(N=64))
    s = state(lambda x: 1 + 0.5 * np.sin(x), 64)
    assert F.rsln(s, cfg.model, cfg.reg)[0] == pytest.approx(F.dissipation_reg(s, cfg), rel=1e-13)


def test_dissipation():
    model = ModelParams(n=2)
    assert F.dissipation_integral(state(lambda x: 0 * x + 1.0), model) == 0.0
    s = state(lambda x: 2 + np.sin(x), 4096)
    want = quad(lambda x: (2 + np.sin(x)) ** 2 * np.cos(x) ** 2)
    assert F.dissipation_integral(s, model) == pytest.approx(want, rel=1e-5)


def test_quadrature_order_all_functionals():
    model = ModelParams(n=1.2, m=2.5, a1=1, alpha=0.3, beta_ent=0.4)
    reg = RegParams(eps=0.05)
    names = ["surface_energy", "E0", "E0_alpha", "R2", "S2", "L2", "N2", "dissipation"]
    vals = {}
    for N in (64, 128, 256, 512):
        cfg = default_config(model=model, reg=reg, disc=DiscParams(N=N))
        rec = F.evaluate(state(lambda x: 1.5 + 0.5 * np.cos(x) + 0.2 * np.sin(2 * x), N), cfg)
        vals[N] = rec
    for name in names:
        v = [getattr(vals[N], name) for N in (64, 128, 256, 512)]
        d = np.abs(np.diff(v))
        assert np.log2(d[-2] / d[-1]) >= 1.9, name


def test_eps_term():
    s = state(lambda x: 1 + 0.5 * np.cos(x), 64)
    model = ModelParams(n=1, alpha=0.5)
    assert F.eps_term_integral(s, model, RegParams(eps=0.0), 0.1) == 0.0
    kap = model.alpha * (model.alpha - 1) / 4
    cf = laugesen.coeffs(0.5, 1, 4, 0.0, kap)
    assert cf.k2 == 0.0
    eps = 0.1
    f = f_eps(s.h, 1, 4, eps)
    hx = (np.roll(s.h, -1) - np.roll(s.h, 1)) / (2 * s.grid.dx)
    only_k1 = np.sum(cf.k1 * eps * s.h ** (0.5 - 8) * f**2 * hx**6) * s.grid.dx
    assert F.eps_term_integral(s, model, RegParams(eps=eps), kap) == pytest.approx(only_k1, rel=1e-13)


def test_default_kappa():
    assert F.default_kappa(ModelParams(alpha=0.2, kappa=0.01)) == 0.01
    lo, hi = laugesen.feasible_kappa(0.2, 1.0)
    assert F.default_kappa(ModelParams(alpha=0.2, n=1.0)) == pytest.approx(0.5 * (lo + hi))
    assert F.default_kappa(ModelParams(alpha=0.9, n=0.5)) == laugesen.mu_kappa_min(0.9)


def test_dissipation_ledger_inequality():
    cfg = default_config(model=ModelParams(n=1), disc=DiscParams(N=128, t_end=0.5))
    tr = run(cfg, profiles.cosine(Grid.from_config(cfg), 1, 0.5))
    E = tr.series("E0")
    assert E[0] - E[-1] >= (1 - 1e-3) * F.time_integral(tr.records, "dissipation")


def test_time_integral_right_endpoint():
    class R:
        def __init__(self, t, q):
            self.t, self.q = t, q
    recs = [R(0, 5.0), R(1, 1.0), R(3, 2.0)]
    assert F.time_integral(recs, "q") == 1.0 * 1 + 2 * 2.0


def test_record_columns():
    cfg = default_config(disc=DiscParams(N=16))
    rec = F.evaluate(state(lambda x: 1 + 0.1 * np.cos(x), 16), cfg)
    assert rec.columns()[0] == "t" and "E0_alpha" in rec.as_dict()
    assert rec.mass > 0
