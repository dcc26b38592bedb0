import numpy as np
import pytest

from stochflow.dyadic import DyadicTime, dyadic
from stochflow.errors import ConfigError, UnsupportedCaseError
from stochflow.esm import (
    AttractorCloud,
    PullbackSchedule,
    attractor_invariance_residual,
    esm_mean,
    esm_residual,
    hausdorff_distance,
    martingale_mean_flatness,
    martingale_trace,
    pullback_attractor,
    pullback_measure,
    pullback_point,
    select_trajectory,
)
from stochflow.flow_core import IdentityFlow, ScalarExpFlow, ShiftFlow, evolve_batch, tanh_coordinate
from stochflow.measure import (
    ConstantFamily,
    EmpiricalMeasure,
    GaussianFamily,
    RandomMeasure,
    distance,
    gaussian_draw,
    mixture,
)
from stochflow.models import FourierForcing, LinearOUModel
from stochflow.wiener import NoiseRealization, RealizationStream

OM = NoiseRealization(314, 0)
T0 = dyadic(0)


def _linear(level=6, rate=0.5, sigma=0.3):
    return LinearOUModel(rate=rate, sigma=sigma,
                         forcing=FourierForcing(cos_coeffs=(1.0,)), grid_level=level)


def _schedule(anchor=T0, depth=6, coeff=2, tol=0.02):
    return PullbackSchedule.geometric(anchor, depth, dyadic(coeff), tol)


class TestSchedule:
    def test_geometric_shape(self):
        sched = _schedule(depth=4, coeff=1)
        assert [s.value for s in sched.starts] == [-1.0, -2.0, -4.0, -8.0]

    def test_validation(self):
        with pytest.raises(ConfigError):
            PullbackSchedule(T0, (dyadic(-1),))
        with pytest.raises(ConfigError):
            PullbackSchedule(T0, (dyadic(-2), dyadic(-1)))
        with pytest.raises(ConfigError):
            PullbackSchedule(T0, (dyadic(1), dyadic(-1)))


class TestPullbackMeasure:
    def test_identity_constant_family(self):
        rho = gaussian_draw(0.0, 1.0, 128, salt=2)
        mu, diag = pullback_measure(IdentityFlow(1, 6), OM, _schedule(),
                                    ConstantFamily(rho), 128)
        assert diag.converged
        assert all(d == 0.0 for d in diag.distances)
        assert np.array_equal(mu.particles, rho.particles)

    def test_linear_contraction_converges_with_spread_law(self):
        model = _linear()
        sched = _schedule()
        family = GaussianFamily(lambda t: 0.0, 1.0, salt=5)
        mu, diag = pullback_measure(model, OM, sched, family, 512)
        assert diag.converged
        # spread of each iterate contracts by exactly the decay factor
        for s in diag.starts_used:
            rho = family.sample(s, 512)
            pushed = evolve_batch(model, OM, s, T0, rho.particles)
            got = EmpiricalMeasure(pushed, rho.weights).spread()
            want = np.exp(-model.rate * (T0.value - s.value)) * rho.spread()
            assert got == pytest.approx(want, rel=1e-10)

    def test_shift_flow_reports_divergence(self):
        family = GaussianFamily(lambda t: 2.0, 0.5, salt=6)
        mu, diag = pullback_measure(ShiftFlow(6), OM, _schedule(), family, 64)
        assert not diag.converged
        assert "exhausted" in diag.message
        # iterate means march off linearly with the lookback
        means = []
        for s in diag.starts_used:
            rho = family.sample(s, 64)
            pushed = evolve_batch(ShiftFlow(6), OM, s, T0, rho.particles)
            means.append(pushed.mean())
        diffs = np.diff(means)
        assert np.all(diffs > 0.9)

    def test_adaptedness_future_surgery_bit_identical(self):
        model = _linear()
        family = GaussianFamily(lambda t: 0.0, 1.0, salt=7)
        mu, _ = pullback_measure(model, OM, _schedule(), family, 256)
        future = OM.with_unit_surgery(0, 0, 0.6)  # increments in [0,1), after t=0
        mu2, _ = pullback_measure(model, future, _schedule(), family, 256)
        assert np.array_equal(mu.particles, mu2.particles)
        past = OM.with_unit_surgery(0, -3, 0.6)
        mu3, _ = pullback_measure(model, past, _schedule(), family, 256)
        assert not np.array_equal(mu.particles, mu3.particles)


class TestMartingale:
    def test_identity_constant_exact(self):
        rho = gaussian_draw(0.0, 1.0, 64, salt=8)
        f = tanh_coordinate(0)
        trace = martingale_trace(IdentityFlow(1, 6), OM, T0, f,
                                 ConstantFamily(rho), [dyadic(1), dyadic(2), dyadic(4)], 64)
        assert np.all(trace.values == trace.values[0])
        assert trace.function_id == f.id

    def test_ensemble_mean_flat_for_evolution_family(self):
        model = _linear()
        analytic = GaussianFamily(model.periodic_mean, model.stationary_std, salt=9)
        report = martingale_mean_flatness(
            model, RealizationStream(77), T0, tanh_coordinate(0), analytic,
            [dyadic(1), dyadic(2), dyadic(4), dyadic(8)],
            n_realizations=300, n_particles=128,
        )
        assert report["max_gap_in_stderr"] <= 4.0

    def test_lookbacks_must_increase(self):
        with pytest.raises(ConfigError):
            martingale_trace(IdentityFlow(1, 6), OM, T0, tanh_coordinate(0),
                             ConstantFamily(gaussian_draw(0, 1, 8, salt=1)),
                             [dyadic(2), dyadic(1)], 8)


class TestAttractor:
    def test_decaying_flow_collapses_to_origin(self):
        model = ScalarExpFlow(-1.0, 6)
        box = np.linspace(-1, 1, 41)[:, None]
        cloud = pullback_attractor(model, OM, T0, [box], _schedule(coeff=1))
        assert cloud.converged
        assert np.max(np.abs(cloud.particles)) <= 0.02

    def test_linear_noise_contraction_diameter(self):
        model = _linear()
        box = np.linspace(-1, 1, 33)[:, None]
        sched = _schedule(coeff=2)
        cloud = pullback_attractor(model, OM, T0, [box], sched)
        assert cloud.converged
        deepest = sched.starts[len(cloud.history)].value
        bound = np.exp(-model.rate * (T0.value - deepest)) * 2.0
        assert cloud.diameter <= bound * (1 + 1e-10)

    def test_expanding_flow_does_not_converge(self):
        model = ScalarExpFlow(+1.0, 6)
        box = np.linspace(-1, 1, 9)[:, None]
        cloud = pullback_attractor(model, OM, T0, [box], _schedule(coeff=1))
        assert not cloud.converged

    def test_invariance_identity_exact_zero(self):
        cloud = AttractorCloud(T0, np.array([[0.0], [1.0]]), [], converged=True)
        cloud_s = AttractorCloud(dyadic(-1), np.array([[0.0], [1.0]]), [], converged=True)
        res = attractor_invariance_residual(IdentityFlow(1, 6), OM, dyadic(-1), T0,
                                            cloud_s, cloud)
        assert res == 0.0

    def test_invariance_linear_contraction(self):
        model = _linear()
        box = np.linspace(-1, 1, 17)[:, None]
        s_t = dyadic(-1)
        tol = 0.02
        cloud_t = pullback_attractor(model, OM, T0, [box], _schedule(T0, 7, 2, tol))
        cloud_s = pullback_attractor(model, OM, s_t, [box], _schedule(s_t, 7, 2, tol))
        assert cloud_t.converged and cloud_s.converged
        res = attractor_invariance_residual(model, OM, s_t, T0, cloud_s, cloud_t)
        assert res <= 2 * tol

    def test_unconverged_rejected(self):
        bad = AttractorCloud(T0, np.zeros((1, 1)), [], converged=False)
        with pytest.raises(ConfigError):
            attractor_invariance_residual(IdentityFlow(1, 6), OM, dyadic(-1), T0, bad, bad)


class TestSelectTrajectory:
    def test_decaying_deterministic_is_zero(self):
        model = ScalarExpFlow(-1.0, 6)
        times = [T0, dyadic(1), dyadic(2)]
        traj = select_trajectory(model, OM, times, _schedule(coeff=1, depth=7))
        assert np.max(np.abs(traj.states)) <= 1e-6
        assert traj.consistency_residual(model, OM) <= 1e-10

    def test_linear_forced_matches_quadrature(self):
        lvl = 12
        model = _linear(level=lvl)
        sched = PullbackSchedule.geometric(T0, 7, dyadic(1))
        traj = select_trajectory(model, OM, [T0], sched)
        x_star = traj.states[0][0]
        from stochflow.wiener import increments
        import scipy.integrate
        a, sigma = model.rate, model.sigma
        h = 2.0**-lvl
        s0 = T0 - 64
        dw = increments(OM, 0, s0, T0, lvl)
        lefts = np.arange(s0.value, T0.value, h)
        noise = sigma * np.dot(np.exp(-a * (0.0 - lefts)), dw)
        det = scipy.integrate.quad(lambda u: np.exp(a * u) * np.cos(u), -120, 0,
                                   limit=400)[0]
        assert abs(x_star - (noise + det)) <= 1e-4

    def test_expanding_flow_refused(self):
        model = ScalarExpFlow(+0.5, 6)
        with pytest.raises(UnsupportedCaseError):
            select_trajectory(model, OM, [T0], _schedule(coeff=1))

    def test_consistency_along_times(self):
        model = _linear()
        times = [T0, dyadic(1, 1), dyadic(2)]
        traj = select_trajectory(model, OM, times, _schedule(depth=7))
        assert traj.consistency_residual(model, OM) <= 1e-10


class TestEsmMeanResidual:
    def test_mean_of_identical_members(self):
        rho = gaussian_draw(0.0, 1.0, 64, salt=11)
        fam = RandomMeasure({i: rho for i in range(5)}, 5)
        assert distance(esm_mean(fam), rho) == pytest.approx(0.0, abs=1e-12)

    def test_identity_flow_nonuniqueness_mean(self):
        # two-point mixtures with weights alpha / 1-alpha on two halves of the
        # ensemble average to the half-half measure for every alpha
        x1, x2 = EmpiricalMeasure.dirac([0.0]), EmpiricalMeasure.dirac([1.0])
        for alpha in (0.0, 0.3, 1.0):
            members = {}
            for i in range(10):
                w = alpha if i < 5 else 1 - alpha
                members[i] = mixture([x1, x2], [w, 1 - w])
            mean = esm_mean(RandomMeasure(members, 10))
            target = mixture([x1, x2], [0.5, 0.5])
            assert distance(mean, target) == pytest.approx(0.0, abs=1e-12)

    def test_pullback_ensemble_mean_matches_analytic_gaussian(self):
        model = _linear()
        sched = _schedule(depth=7)
        n = 400
        points = np.array([
            pullback_point(model, NoiseRealization(550, i), T0, sched)[0]
            for i in range(n)
        ])
        ensemble = RandomMeasure(
            {i: EmpiricalMeasure.dirac([points[i]]) for i in range(n)}, n)
        mean = esm_mean(ensemble)
        m0, std = model.periodic_mean(0.0), model.stationary_std
        baseline = distance(gaussian_draw(m0, std, n, salt=21),
                            gaussian_draw(m0, std, n, salt=22))
        got = distance(mean, gaussian_draw(m0, std, n, salt=23))
        assert got <= 4 * baseline

    def test_esm_residual_analytic_vs_wrong_family(self):
        # transport over a full period so a wrong variance cannot relax back;
        # the closed-form distance between N(m, v) and N(m, 2v) sizes the margin
        from test_measure import gaussian_energy_distance

        model = _linear(sigma=1.0)
        n = 8192
        two_pi = DyadicTime(int(round(2 * np.pi * 64)), 6)
        pairs = [(T0 - two_pi, T0)]
        analytic = GaussianFamily(model.periodic_mean, model.stationary_std, salt=31)
        resid = esm_residual(model, analytic, pairs, n, RealizationStream(808))
        m0, std = model.periodic_mean(0.0), model.stationary_std
        baseline = distance(gaussian_draw(m0, std, n, salt=41),
                            gaussian_draw(m0, std, n, salt=42))
        tolerance = 4 * baseline
        assert resid <= tolerance
        wrong = GaussianFamily(model.periodic_mean,
                               model.stationary_std * np.sqrt(2.0), salt=32)
        resid_wrong = esm_residual(model, wrong, pairs, n, RealizationStream(809))
        assert resid_wrong > 10 * tolerance
        closed_form = gaussian_energy_distance(m0, std, m0, std * np.sqrt(2.0))
        assert closed_form > 10 * tolerance
        assert resid_wrong == pytest.approx(closed_form, rel=0.5)

    def test_pushforward_law_between_pullback_measures(self):
        # family built from one omega satisfies the transport law within 2 tol
        model = _linear()
        family = GaussianFamily(lambda t: 0.0, 1.0, salt=51)
        tol = 0.02
        s_t, t_t = dyadic(-1), T0
        mu_s, diag_s = pullback_measure(model, OM, _schedule(s_t, 7, 2, tol), family, 512)
        mu_t, diag_t = pullback_measure(model, OM, _schedule(t_t, 7, 2, tol), family, 512)
        assert diag_s.converged and diag_t.converged
        pushed = EmpiricalMeasure(
            evolve_batch(model, OM, s_t, t_t, mu_s.particles), mu_s.weights)
        assert distance(pushed, mu_t) <= 2 * tol


def test_hausdorff_basics():
    a = np.array([[0.0], [1.0]])
    b = np.array([[0.0], [1.0], [1.5]])
    assert hausdorff_distance(a, a) == 0.0
    assert hausdorff_distance(a, b) == 0.5
