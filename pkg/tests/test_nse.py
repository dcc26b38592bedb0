import numpy as np
import pytest

from stochflow.dyadic import DyadicTime, dyadic
from stochflow.errors import ConfigError, DivergenceError
from stochflow.flow_core import flow_residual
from stochflow.models import nse as nm
from stochflow.models.nse import (
    NSEConfig,
    NSEModel,
    bilinear_b,
    default_nse_config,
    energy_diagnostics,
    estimate_beta,
    leray_project,
    load_field,
    random_divfree,
    save_field,
    shear_mode,
    taylor_green,
)
from stochflow.wiener import NoiseRealization

OM = NoiseRealization(8, 0, num_components=2)


def _model(**kw):
    return NSEModel(default_nse_config(**kw))


class TestLeray:
    def test_divfree_left_unchanged(self):
        u = random_divfree(16, 1)
        assert np.max(np.abs(leray_project(u) - u)) <= 1e-13 * np.max(np.abs(u))

    def test_gradient_killed(self):
        g = nm.grid_for(16)
        scalar = random_divfree(16, 2)[0]
        grad = np.stack([g.kx * scalar, g.ky * scalar])
        assert np.max(np.abs(leray_project(grad))) <= 1e-13 * max(np.max(np.abs(grad)), 1e-30)

    def test_output_divergence(self):
        raw = np.stack([random_divfree(16, 3)[0], random_divfree(16, 4)[1]])
        out = leray_project(raw)
        assert nm.divergence_residual(out) <= 1e-13 * max(np.max(np.abs(out)), 1e-30)

    def test_idempotent(self):
        raw = np.stack([random_divfree(16, 5)[0], random_divfree(16, 6)[1]])
        once = leray_project(raw)
        twice = leray_project(once)
        assert np.max(np.abs(twice - once)) <= 1e-14 * max(np.max(np.abs(once)), 1e-30)


class TestBilinear:
    def test_shear_self_advection_vanishes(self):
        u = shear_mode(16)
        assert np.max(np.abs(bilinear_b(u, u))) == 0.0

    def test_taylor_green_is_pure_gradient(self):
        for n in (16, 32):
            tg = taylor_green(n)
            assert np.max(np.abs(bilinear_b(tg, tg))) <= 1e-10

    def test_resolution_agreement(self):
        b16 = bilinear_b(taylor_green(16), taylor_green(16))
        b32 = bilinear_b(taylor_green(32), taylor_green(32))
        assert np.max(np.abs(b16)) <= 1e-10 and np.max(np.abs(b32)) <= 1e-10

    def test_orthogonality_random_fields(self):
        for seed in range(5):
            u = random_divfree(16, 10 + seed)
            v = random_divfree(16, 20 + seed)
            ip = abs(nm.inner_h(bilinear_b(u, v), v))
            assert ip <= 1e-10 * np.sqrt(nm.norm_v_sq(u)) * nm.norm_v_sq(v)

    def test_energy_neutral_explicit_step(self):
        # one explicit advection step changes the energy only through the
        # exact square term; the cross term is dealiased-orthogonal
        u = random_divfree(16, 30)
        h = 2.0**-6
        b = bilinear_b(u, u)
        stepped = u - h * b
        change = nm.norm_h_sq(stepped) - nm.norm_h_sq(u)
        square_term = h * h * nm.norm_h_sq(b)
        assert abs(change - square_term) <= 1e-10 * h * nm.norm_v_sq(u) ** 1.5


def test_parseval_roundtrip():
    u = random_divfree(16, 7)
    phys = nm.to_phys(u)
    phys_energy = (2 * np.pi) ** 2 * np.mean(np.sum(phys**2, axis=0))
    assert phys_energy == pytest.approx(nm.norm_h_sq(u), rel=1e-10)


def test_poincare_term_by_term():
    for seed in range(5):
        u = random_divfree(16, 40 + seed)
        assert nm.norm_h_sq(u) <= nm.norm_v_sq(u)


class TestEvolve:
    def test_single_mode_decay_factor(self):
        cfg = default_nse_config(noise_modes=(), forcing_field=taylor_green(16, 0.0),
                                 viscosity=0.2)
        model = NSEModel(cfg)
        u0 = shear_mode(16)  # single |k|=1 mode, B(u,u) = 0 exactly
        t1 = DyadicTime(1, cfg.level)
        u1 = model.evolve_field(OM, dyadic(0), t1, u0)
        factor = 1.0 / (1.0 + cfg.viscosity * cfg.step)
        assert np.max(np.abs(u1 - factor * u0)) <= 1e-15

    def test_zero_input_energy_monotone(self):
        cfg = default_nse_config(noise_modes=(), forcing_field=taylor_green(16, 0.0))
        model = NSEModel(cfg)
        _, trace = model.evolve_trace(OM, dyadic(0), dyadic(2), taylor_green(16, 1.0))
        energies = trace.u_h_sq
        assert np.all(np.diff(energies) <= 1e-12)

    def test_invariants_after_steps(self):
        model = _model()
        u1 = model.evolve_field(OM, dyadic(-1), dyadic(1), taylor_green(16, 1.0))
        assert nm.reality_residual(u1) == 0.0
        assert np.max(np.abs(u1[:, 0, 0])) == 0.0
        assert nm.divergence_residual(u1) <= 1e-12 * np.max(np.abs(u1))
        nm.check_field(u1, 1e-10)

    def test_composition_bit_exact(self):
        model = _model()
        u0 = taylor_green(16, 0.5)
        rng = np.random.default_rng(0)
        for _ in range(5):
            base = int(rng.integers(-32, 0))
            s = DyadicTime(base, 5)
            r = s + DyadicTime(int(rng.integers(0, 32)), 5)
            t = r + DyadicTime(int(rng.integers(0, 32)), 5)
            direct = model.evolve_field(OM, s, t, u0)
            composed = model.evolve_field(OM, r, t, model.evolve_field(OM, s, r, u0))
            assert np.array_equal(direct, composed)

    def test_flow_residual_vector_interface(self):
        model = _model()
        x = model.pack(taylor_green(16, 0.5))
        res = flow_residual(model, OM, dyadic(-1), dyadic(0), dyadic(1), [x])
        assert res == 0.0

    def test_poincare_along_trajectory(self):
        model = _model()
        _, trace = model.evolve_trace(OM, dyadic(0), dyadic(1), taylor_green(16, 1.0))
        assert np.all(trace.v_h_sq <= trace.v_v_sq)

    def test_blowup_reports_step(self):
        cfg = default_nse_config(guard=1e-6)
        model = NSEModel(cfg)
        with pytest.raises(DivergenceError) as err:
            model.evolve_field(OM, dyadic(0), dyadic(1), taylor_green(16, 1.0))
        assert err.value.step is not None

    def test_noise_key_surgery_outside_history_window(self):
        model = _model()
        s, t = dyadic(-1), dyadic(1)
        u0 = taylor_green(16, 0.5)
        base = model.evolve_field(OM, s, t, u0)
        future = OM.with_unit_surgery(0, 1, 0.5).with_unit_surgery(1, 2, -0.25)
        assert np.array_equal(model.evolve_field(future, s, t, u0), base)
        cut = model.ou_cfg.cutoff_horizon
        ancient = OM.with_unit_surgery(0, -1 - cut - 2, 1.0)
        assert np.array_equal(model.evolve_field(ancient, s, t, u0), base)
        recent = OM.with_unit_surgery(0, 0, 0.5)
        assert not np.array_equal(model.evolve_field(recent, s, t, u0), base)


class TestBeta:
    def test_zero_mode(self):
        assert estimate_beta(0.0 * shear_mode(16)) == 0.0

    def test_scaling_linear(self):
        phi = shear_mode(16, 0.05)
        b1 = estimate_beta(phi)
        b3 = estimate_beta(3.0 * phi)
        assert abs(b3 - 3.0 * b1) <= 1e-8 * max(3.0 * b1, 1e-30)
        bneg = estimate_beta(-2.0 * phi)
        assert abs(bneg - 2.0 * b1) <= 1e-8 * max(2.0 * b1, 1e-30)

    def test_bound_holds_on_random_sample(self):
        phi = shear_mode(16, 0.05)
        beta = estimate_beta(phi)
        for seed in range(200):
            u = random_divfree(16, 100 + seed)
            q = abs(nm.inner_h(bilinear_b(u, phi), u))
            assert q <= beta * nm.norm_h_sq(u) * (1 + 1e-8)


class TestDiagnostics:
    def test_pure_decay_slack_nonnegative(self):
        cfg = default_nse_config(noise_modes=(), forcing_field=taylor_green(16, 0.0))
        model = NSEModel(cfg)
        _, trace = model.evolve_trace(OM, dyadic(0), dyadic(2), taylor_green(16, 1.0))
        diag = energy_diagnostics(cfg, trace, beta_hat=0.0)
        assert np.all(diag.lhs <= 1e-8)
        assert np.all(diag.slack >= 0.0)
        assert np.allclose(diag.slack, -diag.lhs, atol=1e-12)
        assert np.all(diag.g_surrogate == 0.0)

    def test_no_noise_terms_reduce(self):
        cfg = default_nse_config(noise_modes=())
        model = NSEModel(cfg)
        _, trace = model.evolve_trace(OM, dyadic(0), dyadic(1), taylor_green(16, 1.0))
        assert np.all(trace.z_abs_sum == 0.0)
        diag = energy_diagnostics(cfg, trace, beta_hat=0.0)
        h = cfg.step
        manual = (np.diff(trace.v_h_sq) / h
                  + 0.25 * cfg.viscosity * trace.v_v_sq[1:]
                  + 0.25 * cfg.viscosity * trace.v_h_sq[1:])
        assert np.allclose(diag.lhs, manual, atol=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            nm.NSETrace(6, np.zeros(4), np.zeros(4), np.zeros(3), np.zeros(4),
                        np.zeros(4), np.zeros(4))

    def test_absorbing_radius_experiment_converges(self):
        model = _model(viscosity=0.25)
        om = NoiseRealization(100, 0, num_components=2)
        out = nm.absorbing_radius_experiment(model, om, dyadic(0), (1.0, 10.0),
                                             lookbacks=(4, 16, 32))
        assert out["t_star"] is not None
        assert out["gaps"][32] <= 0.05


def test_snapshot_roundtrip(tmp_path):
    u = random_divfree(16, 55)
    path = tmp_path / "field.txt"
    save_field(path, u, time=1.5, seed=9)
    again, t, seed = load_field(path)
    assert np.array_equal(again, u)
    assert t == 1.5 and seed == 9


def test_config_stability_guard():
    with pytest.raises(ConfigError):
        default_nse_config(level=1)


def test_state_packing_roundtrip():
    model = _model()
    u = random_divfree(16, 60)
    assert np.array_equal(model.unpack(model.pack(u)), u)
