import numpy as np
import pytest

from thinfilm import profiles
from thinfilm.errors import NegativeInitialData, NonPositiveHeight, PositivityLost
from thinfilm.functionals import mass
from thinfilm.grid import Grid, State, face_dxxx
from thinfilm.params import DiscParams, ModelParams, RegParams, default_config
from thinfilm.solver import FilmOperator, flux, lift_initial_data, linear_rate, run, step


def cfg_of(N=64, **model):
    return default_config(model=ModelParams(**model), disc=DiscParams(N=N))


def test_lift_initial_data():
    reg = RegParams(eps=1e-4, theta=0.3)
    g = Grid(np.pi, 16)
    s = lift_initial_data(np.zeros(16), reg, g)
    assert np.allclose(s.h, 1e-4**0.3) and s.h[0] == pytest.approx(6.30957e-2, rel=1e-5)
    h0 = profiles.cosine(g, 1, 0.5)
    assert np.array_equal(lift_initial_data(h0, RegParams(), g).h, h0)
    lifted = lift_initial_data(h0, reg, g)
    assert mass(lifted) - mass(State(0, h0, g)) == pytest.approx(2 * np.pi * 1e-4**0.3, rel=1e-12)
    with pytest.raises(NegativeInitialData):
        lift_initial_data(-h0, reg, g)
    with pytest.raises(NonPositiveHeight):
        lift_initial_data(np.zeros(16), RegParams(), g)


def test_flux_constant_is_zero():
    cfg = cfg_of(n=2, a1=1, m=2)
    g = Grid.from_config(cfg)
    assert np.array_equal(flux(State(0, np.full(g.N, 0.7), g), cfg), np.zeros(g.N))


def test_flux_unit_mobility_is_third_difference():
    cfg = default_config(model=ModelParams(n=1), reg=RegParams(delta=1.0, eps=1e12),
                         disc=DiscParams(N=64))
    g = Grid.from_config(cfg)
    h = 2 + np.sin(g.x)
    F = flux(State(0, h, g), cfg)
    assert np.allclose(F, face_dxxx(h, g.dx), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("how", ["arithmetic", "harmonic", "entropic"])
def test_flux_reflection_antisymmetry(how):
    cfg = default_config(model=ModelParams(n=1.5, m=2, a1=1), disc=DiscParams(N=32, mobility_averaging=how))
    g = Grid.from_config(cfg)
    rng = np.random.default_rng(0)
    h = 1 + 0.3 * rng.uniform(size=g.N)
    hr = h[(-np.arange(g.N)) % g.N]
    F, Fr = flux(State(0, h, g), cfg), flux(State(0, hr, g), cfg)
    assert np.allclose(Fr, -F[(-np.arange(g.N) - 1) % g.N], rtol=1e-12, atol=1e-12)


def test_flux_rejects_nonpositive():
    cfg = cfg_of()
    g = Grid.from_config(cfg)
    h = np.ones(g.N)
    h[3] = 0.0
    with pytest.raises(NonPositiveHeight):
        flux(State(0, h, g), cfg)


def test_constant_state_is_fixed_point():
    cfg = cfg_of(n=2, m=2, a1=1)
    g = Grid.from_config(cfg)
    s = State(0, np.full(g.N, 1.3), g)
    new, stats = step(s, cfg, 0.01)
    assert np.array_equal(new.h, s.h)
    assert stats.iterations == 1 and new.t == 0.01


@pytest.mark.parametrize("how", ["arithmetic", "harmonic", "entropic"])
@pytest.mark.parametrize("model,reg", [
    (ModelParams(n=1, m=1, a1=0), RegParams()),
    (ModelParams(n=2.5, m=3, a1=1), RegParams(eps=0.05, delta=0.01)),
    (ModelParams(n=1, m=3.5, a1=-1), RegParams(eps=1e-3, s=5, theta=0.2)),
])
def test_analytic_jacobian(how, model, reg):
    cfg = default_config(model=model, reg=reg, disc=DiscParams(N=40, mobility_averaging=how))
    g = Grid.from_config(cfg)
    h = 1 + 0.4 * np.cos(g.x) + 0.1 * np.sin(3 * g.x)
    assert FilmOperator(cfg).jacobian_error(h, 1e-3) < 1e-5


def test_mass_exact_and_positivity_rejection():
    cfg = cfg_of()
    g = Grid.from_config(cfg)
    s = State(0, profiles.cosine(g, 1, 0.999), g)
    new, stats = step(s, cfg, 1.0)
    assert abs(np.sum(new.h) - np.sum(s.h)) * g.dx <= cfg.disc.newton_tol * g.dx * g.N
    assert abs(stats.mass_drift) < 1e-13
    with pytest.raises(PositivityLost):
        step(s, cfg, 100.0)


def test_translation_equivariance():
    cfg = cfg_of(n=1.5, m=2, a1=1)
    g = Grid.from_config(cfg)
    h = 1 + 0.3 * np.cos(g.x) + 0.2 * np.sin(2 * g.x)
    s = State(0, h, g)
    a, _ = step(s.shift(5), cfg, 1e-3)
    b, _ = step(s, cfg, 1e-3)
    # equal up to the Newton tolerance (the iterates see permuted rounding)
    assert np.max(np.abs(a.h - b.shift(5).h)) < 1e-10


def test_single_mode_decay_factor():
    cfg = default_config(model=ModelParams(n=1), disc=DiscParams(N=64))
    g = Grid.from_config(cfg)
    c, A, k, dt = 1.0, 1e-6, 2, 1e-3
    s = State(0, c + A * np.cos(k * g.x), g)
    new, _ = step(s, cfg, dt)
    amp = np.abs(np.fft.rfft(new.h)[k]) / (g.N / 2)
    assert amp / A == pytest.approx(1 / (1 + dt * linear_rate(cfg, c, k)), rel=1e-6)
    # continuum symbol k^4 is close on a resolved mode
    assert amp / A == pytest.approx(1 / (1 + dt * k**4), rel=1e-3)


def test_long_wave_instability_grows():
    cfg = default_config(model=ModelParams(n=1, m=3, a1=1), disc=DiscParams(a=8.0, N=64))
    g = Grid.from_config(cfg)
    c, A, k = 1.0, 1e-6, 1
    assert linear_rate(cfg, c, k) < 0
    s = State(0, c + A * np.cos(k * np.pi * g.x / g.a), g)
    new, _ = step(s, cfg, 0.01)
    assert np.abs(np.fft.rfft(new.h)[k]) > np.abs(np.fft.rfft(s.h)[k])


def test_run_t_end_zero():
    cfg = default_config(disc=DiscParams(N=32, t_end=0.0))
    tr = run(cfg, profiles.cosine(Grid.from_config(cfg), 1, 0.5))
    assert len(tr.records) == 1 and len(tr.states) == 1 and not tr.aborted


def test_run_relaxes_and_conserves():
    cfg = default_config(model=ModelParams(n=1), disc=DiscParams(N=64, t_end=2.0))
    g = Grid.from_config(cfg)
    seen = []
    tr = run(cfg, profiles.cosine(g, 1, 0.5), [lambda st, rec, stats: seen.append(rec.t)],
             snapshot_every=5)
    assert seen == list(tr.times)
    assert tr.times[-1] == 2.0 and not tr.aborted
    dev = [np.max(np.abs(s.h - s.h.mean())) for s in tr.states]
    assert np.all(np.diff(dev) < 0)
    M = tr.series("mass")
    assert np.max(np.abs(M - M[0])) / M[0] <= 1e-10
    assert len(tr.states) == len(tr.stats) // 5 + (1 if len(tr.stats) % 5 else 0) + 1
    assert tr.jacobian_error < 1e-5
    # dt grows from dt0 on easy steps
    assert tr.stats[-2].dt > 10 * cfg.disc.dt0


def test_run_step_floor_abort():
    cfg = default_config(model=ModelParams(n=1, m=3, a1=1),
                         disc=DiscParams(a=8.0, N=128, t_end=50.0, dt_min=1e-6, dt_max=0.1))
    tr = run(cfg, profiles.cosine(Grid.from_config(cfg), 1, 0.1))
    assert tr.aborted and tr.abort_reason.startswith("StepFloor")
    assert 0 < tr.final.t < 50.0
    M = tr.series("mass")
    assert np.max(np.abs(M - M[0])) / M[0] <= 1e-10


@pytest.mark.parametrize("how", ["arithmetic", "harmonic", "entropic"])
def test_energy_dissipated_each_averaging(how):
    cfg = default_config(model=ModelParams(n=1, beta_ent=0.5),
                         disc=DiscParams(N=64, t_end=0.5, mobility_averaging=how))
    tr = run(cfg, profiles.cosine(Grid.from_config(cfg), 1, 0.6))
    assert np.all(np.diff(tr.series("E0")) <= 0)
    assert np.all(np.diff(tr.series("entropy_beta")) <= 1e-14)


def test_refinement_order():
    finals = []
    for N in (32, 64, 128):
        dt = 1e-3 * (32 / N) ** 2
        cfg = default_config(model=ModelParams(n=1),
                             disc=DiscParams(N=N, t_end=0.05, dt0=dt, dt_max=dt, dt_min=dt / 4))
        g = Grid.from_config(cfg)
        tr = run(cfg, profiles.cosine(g, 1, 0.5), fixed_dt=True, check_jacobian=False)
        finals.append(np.sqrt(np.sum(tr.final.h**2) * g.dx))
    d = np.abs(np.diff(finals))
    assert np.log2(d[0] / d[1]) >= 1.8
