import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driveby.newmark import DynState, NewmarkConfig, integrate_accel, integrate_history, newmark_step

NM = NewmarkConfig()


def sdof(omega, zeta=0.0):
    return np.eye(1), np.array([[2 * zeta * omega]]), np.array([[omega**2]])


class TestConfig:
    def test_defaults(self):
        assert (NM.dt, NM.gamma, NM.beta) == (0.001, 0.5, 0.25)

    @pytest.mark.parametrize("kw", [{"dt": 0.0}, {"gamma": 0.0}, {"beta": -0.1}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            NewmarkConfig(**kw)

    def test_state_shapes(self):
        with pytest.raises(ValueError):
            DynState(np.zeros(2), np.zeros(3), np.zeros(2))


class TestSDOF:
    @given(st.floats(0.5, 200.0))
    @settings(max_examples=20, deadline=None)
    def test_free_vibration_discrete_closed_form(self, omega):
        # average acceleration is the trapezoidal rule: a pure rotation by
        # 2 atan(omega dt / 2) per step, so amplitude is preserved exactly
        M, C, K = sdof(omega)
        n = 2001
        x, v, _ = integrate_history(M, C, K, np.zeros((n, 1)), NM, x0=[1.0])
        Omega = 2 * np.arctan(omega * NM.dt / 2)
        k = np.arange(n)
        np.testing.assert_allclose(x[:, 0], np.cos(k * Omega), atol=1e-9)
        np.testing.assert_allclose(v[:, 0], -omega * np.sin(k * Omega), atol=1e-9 * omega)

    def test_step_load_settles_to_static(self):
        M, C, K = sdof(2 * np.pi * 3.0, zeta=0.5)
        x, _, _ = integrate_history(M, C, K, np.full((6001, 1), 5.0), NM)
        assert x[-1, 0] == pytest.approx(5.0 / K[0, 0], rel=1e-6)

    def test_singular_effective_matrix(self):
        Z = np.zeros((2, 2))
        with pytest.raises(np.linalg.LinAlgError):
            newmark_step(Z, Z, Z, DynState.zeros(2), np.zeros(2), NM)


class TestMDOF:
    @pytest.fixture
    def system(self, rng):
        A = rng.standard_normal((5, 5))
        K = A @ A.T + 5 * np.eye(5)
        M = np.diag(rng.uniform(1, 2, 5))
        return M, K

    def test_undamped_energy_conserved(self, system):
        M, K = system
        x0 = np.arange(1.0, 6.0)
        x, v, _ = integrate_history(M, 0 * M, K, np.zeros((3001, 5)), NM, x0=x0)
        E = 0.5 * np.einsum("ti,ij,tj->t", v, M, v) + 0.5 * np.einsum("ti,ij,tj->t", x, K, x)
        np.testing.assert_allclose(E, E[0], rtol=1e-10)

    def test_history_matches_single_steps(self, system, rng):
        M, K = system
        C = 0.1 * M + 0.01 * K
        loads = rng.standard_normal((200, 5))
        x, v, a = integrate_history(M, C, K, loads, NM)
        s = DynState(np.zeros(5), np.zeros(5), np.linalg.solve(M, loads[0]))
        for k in range(1, 200):
            s = newmark_step(M, C, K, s, loads[k], NM)
        np.testing.assert_allclose(s.eta, x[-1], rtol=1e-10, atol=1e-14)
        np.testing.assert_allclose(s.eta_ddot, a[-1], rtol=1e-10, atol=1e-12)

    def test_initial_acceleration_from_equilibrium(self, system):
        M, K = system
        x0 = np.ones(5)
        _, _, a = integrate_history(M, 0 * M, K, np.zeros((3, 5)), NM, x0=x0)
        np.testing.assert_allclose(M @ a[0], -K @ x0)


class TestIntegrateAccel:
    def test_constant_acceleration_exact(self):
        t = NM.dt * np.arange(6001)
        v, x = integrate_accel(np.full(t.size, 2.0), NM)
        np.testing.assert_allclose(v, 2.0 * t, atol=1e-12)
        np.testing.assert_allclose(x, t**2, atol=1e-12)

    def test_initial_conditions(self):
        t = NM.dt * np.arange(101)
        v, x = integrate_accel(np.zeros(t.size), NM, v0=1.5, x0=-2.0)
        np.testing.assert_allclose(v, 1.5)
        np.testing.assert_allclose(x, -2.0 + 1.5 * t, atol=1e-12)

    def test_harmonic_second_order_accurate(self):
        w = 2 * np.pi
        errs = []
        for dt in (0.002, 0.001):
            cfg = NewmarkConfig(dt=dt)
            t = dt * np.arange(int(round(6.0 / dt)) + 1)
            _, x = integrate_accel(-w * w * np.sin(w * t), cfg, v0=w)
            errs.append(np.max(np.abs(x - np.sin(w * t))))
        assert errs[1] < 2e-4
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)

    def test_inverts_newmark_history(self, rng):
        M = np.diag([2.0, 1.0])
        K = np.array([[300.0, -100.0], [-100.0, 200.0]])
        x, v, a = integrate_history(M, 0.02 * K, K, rng.standard_normal((1000, 2)), NM)
        vi, xi = integrate_accel(a, NM)
        np.testing.assert_allclose(vi, v, atol=1e-12)
        np.testing.assert_allclose(xi, x, atol=1e-12)

    def test_columns_independent(self, rng):
        a = rng.standard_normal((500, 3))
        _, x = integrate_accel(a, NM)
        for j in range(3):
            np.testing.assert_allclose(integrate_accel(a[:, j], NM)[1], x[:, j])
