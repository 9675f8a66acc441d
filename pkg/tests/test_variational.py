import numpy as np
import pytest

from hsclab import chareq
from hsclab.analysis import lyapunov_spectrum
from hsclab.integrator import History, integrate
from hsclab.model import steady_state
from hsclab.variational import (PerturbationBundle, integrate_variational,
                                orthonormalize)


@pytest.fixture(scope="module")
def steady_traj(table1):
    qs = steady_state(table1).nontrivial
    return integrate(table1, History.constant(table1.tau, qs), 600.0)


class TestBundle:
    def test_seeded_is_orthonormal(self):
        b = PerturbationBundle.seeded(2.8, m=5, n_mesh=64, seed=3)
        g = b.columns.T @ b.columns
        assert np.max(np.abs(g - np.eye(5))) < 1e-12

    def test_seed_determinism(self):
        a = PerturbationBundle.seeded(2.8, 4, seed=9)
        b = PerturbationBundle.seeded(2.8, 4, seed=9)
        assert np.array_equal(a.columns, b.columns)

    def test_orthonormalize_residual(self, steady_traj):
        b = PerturbationBundle.seeded(2.8, 6, seed=0, t_head=10.0)
        b, _ = integrate_variational(steady_traj, b, (10.0, 30.0))
        b2, growth = orthonormalize(b)
        g = b2.columns.T @ b2.columns
        assert np.max(np.abs(g - np.eye(6))) < 1e-12
        assert np.all(growth > 0)


class TestEvolution:
    def test_zero_bundle_stays_zero(self, steady_traj):
        b = PerturbationBundle.seeded(2.8, 3, t_head=5.0)
        b.columns[:] = 0.0
        b2, growth = integrate_variational(steady_traj, b, (5.0, 40.0))
        assert np.all(b2.columns == 0.0)
        assert np.all(growth == 0.0)

    def test_linearity(self, steady_traj):
        b = PerturbationBundle.seeded(2.8, 2, t_head=5.0, seed=4)
        scaled = PerturbationBundle(b.offsets, 3.0 * b.columns, 5.0, b.tau)
        r1, _ = integrate_variational(steady_traj, b, (5.0, 25.0))
        r2, _ = integrate_variational(steady_traj, scaled, (5.0, 25.0))
        assert np.allclose(3.0 * r1.columns, r2.columns, rtol=1e-12, atol=1e-300)

    def test_span_must_start_at_head(self, steady_traj):
        b = PerturbationBundle.seeded(2.8, 2, t_head=5.0)
        with pytest.raises(ValueError, match="head"):
            integrate_variational(steady_traj, b, (6.0, 10.0))

    def test_base_coverage_required(self, steady_traj):
        b = PerturbationBundle.seeded(2.8, 2, t_head=550.0)
        with pytest.raises(ValueError, match="cover"):
            integrate_variational(steady_traj, b, (550.0, 700.0))

    def test_steady_base_growth_matches_dominant_root(self, table1, steady_traj):
        # along a constant base the linearised equation is autonomous, so the
        # long-run growth rate must equal the dominant characteristic value
        qs = steady_state(table1).nontrivial
        rightmost = chareq.rightmost_root(chareq.linearize_at(qs, table1))
        b = PerturbationBundle.seeded(2.8, 1, t_head=10.0, seed=1)
        b, _ = integrate_variational(steady_traj, b, (10.0, 110.0))
        b, n1 = orthonormalize(b)
        b, _ = integrate_variational(steady_traj, b, (b.t_head, b.t_head + 400.0))
        rate = np.log(b.norms()[0]) / 400.0
        assert rate == pytest.approx(rightmost.re, abs=2e-5)


class TestLyapunovSmall:
    def test_stable_steady_state_spectrum(self, table1):
        qs = steady_state(table1).nontrivial
        rightmost = chareq.rightmost_root(chareq.linearize_at(qs, table1))
        spec = lyapunov_spectrum(table1, History.constant(table1.tau, qs),
                                 m=2, horizon=2000.0, transient=50.0,
                                 bundle_warmup=150.0)
        assert spec.exponents[0] == pytest.approx(rightmost.re, abs=1e-6)
        assert all(x < 0 for x in spec.exponents)
        assert not any(spec.unconverged)

    def test_floquet_zero_mode_on_orbit(self, table1):
        p = table1.with_(kappa=0.3)
        spec = lyapunov_spectrum(p, History.steady_state_perturbation(p, 0.05),
                                 m=2, horizon=4000.0, transient=1500.0)
        assert abs(spec.exponents[0]) < 1e-3
        assert spec.exponents[1] < -0.01

    def test_settings_recorded(self, table1):
        qs = steady_state(table1).nontrivial
        spec = lyapunov_spectrum(table1, History.constant(table1.tau, qs),
                                 m=1, horizon=150.0, reorth=1.0,
                                 transient=20.0, bundle_warmup=0.0, n_mesh=32)
        assert spec.settings["m"] == 1
        assert spec.settings["n_mesh"] == 32
        # interval snapped to a whole number of internal steps
        h = table1.tau / 32
        assert spec.settings["reorth"] == pytest.approx(round(1.0 / h) * h)
        assert spec.history.shape[1] == 1
        assert spec.times[-1] == pytest.approx(spec.horizon)

    def test_horizon_guard(self, table1):
        qs = steady_state(table1).nontrivial
        with pytest.raises(ValueError, match="horizon"):
            lyapunov_spectrum(table1, History.constant(table1.tau, qs),
                              m=1, horizon=50.0, reorth=1.0)
