import json
from dataclasses import replace

import numpy as np
import pytest

from driveby import bridge as bfem
from driveby import vehicle as veh
from driveby.newmark import integrate_history
from driveby.road import RoadUnevenness
from driveby.simulate import SimConfig, SimRecord, add_noise, axle_trajectory, convergence_error, simulate


def flat_road():
    return RoadUnevenness(-20.0, 0.01, np.zeros(8001))


class TestConvergenceError:
    def test_identical(self):
        Z = np.arange(12.0).reshape(3, 4)
        assert convergence_error(Z, Z) == 0.0

    def test_from_zero(self):
        assert convergence_error(np.ones((3, 4)), np.zeros((3, 4))) == pytest.approx(1.0)

    def test_doubling(self):
        Z = np.random.default_rng(0).standard_normal((5, 7))
        assert convergence_error(2 * Z, Z) == pytest.approx(0.5)

    def test_zero_denominator(self):
        Z = np.zeros((2, 2))
        assert convergence_error(Z, Z) == 0.0
        assert convergence_error(Z, np.ones((2, 2))) == np.inf

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            convergence_error(np.zeros((2, 2)), np.zeros((2, 3)))


class TestNoise:
    def test_zero_pct_identity(self, rng):
        x = rng.standard_normal((100, 2))
        np.testing.assert_array_equal(add_noise(x, 0.0, 1), x)

    def test_std_matches_pct_rms(self, rng):
        x = 3.0 + rng.standard_normal((6000, 2))
        n = add_noise(x, 0.35, 5) - x
        target = 0.35 * np.sqrt(np.mean(x * x, axis=0))
        np.testing.assert_allclose(n.std(axis=0), target, rtol=0.05)

    def test_seeded(self, rng):
        x = rng.standard_normal(50)
        np.testing.assert_array_equal(add_noise(x, 0.1, 3), add_noise(x, 0.1, 3))
        assert not np.array_equal(add_noise(x, 0.1, 3), add_noise(x, 0.1, 4))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            add_noise(np.ones(3), -0.1, 0)


class TestConfig:
    def test_defaults(self):
        c = SimConfig()
        assert c.n_steps == 6001
        c.check_duration(30.0, 10.0)

    def test_too_short(self):
        with pytest.raises(ValueError):
            SimConfig(total_time=5.0).check_duration(30.0, 10.0)

    @pytest.mark.parametrize("kw", [{"eps_max": 0.0}, {"dt": 0.0}, {"noise_pct": -1.0}, {"max_iters": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SimConfig(**kw)

    def test_trajectory(self):
        x = axle_trajectory([0.0, 1.0], 10.0, 10.0, 4.4)
        np.testing.assert_allclose(x, [[-10.0, -14.4], [0.0, -4.4]])


class TestNominalRecord:
    def test_converged(self, record):
        assert record.converged and record.eps <= 1e-6 and record.iterations <= 20

    def test_series_share_time_grid(self, record):
        n = record.t.size
        for name in ("x", "acc", "acc_noisy", "z", "y", "midspan", "u", "r", "ybar", "contact"):
            assert getattr(record, name).shape[0] == n

    def test_residual_decreases(self, record):
        assert np.all(np.diff(record.eps_history) < 0)

    def test_contact_identity(self, record):
        np.testing.assert_allclose(record.contact_stiffness, record.contact,
                                   atol=1e-6 * np.abs(record.contact).max())

    def test_causal_bridge(self, record):
        before = record.x[:, 0] < 0.0
        assert not np.any(record.y[before])

    def test_mean_contact_is_weight(self, record):
        on = (record.x[:, 1] > 0.0) & (record.x[:, 0] < 30.0)
        total = veh.VehicleParams().total_mass * veh.G
        assert np.mean(record.contact[on].sum(axis=1)) == pytest.approx(-total, rel=0.01)

    def test_input_is_road_plus_bridge(self, record):
        # u comes from the previous bridge pass; the gap is the converged residual
        scale = np.abs(record.ybar).max()
        np.testing.assert_allclose(record.u, record.r + record.ybar, atol=1e-5 * scale)

    def test_peak_near_static_estimate(self, record):
        assert 0.8 * 3.4e-3 <= np.max(np.abs(record.midspan)) <= 1.3 * 3.4e-3

    def test_csv_and_summary(self, record, tmp_path):
        record.to_csv(tmp_path / "c.csv")
        header = (tmp_path / "c.csv").read_text().splitlines()[0].split(",")
        assert tuple(header) == SimRecord.CSV_COLUMNS
        data = np.loadtxt(tmp_path / "c.csv", delimiter=",", skiprows=1)
        assert data.shape == (record.t.size, len(SimRecord.CSV_COLUMNS))
        np.testing.assert_array_equal(data[:, 3:5], record.acc)
        record.write_summary(tmp_path / "s.json")
        s = json.loads((tmp_path / "s.json").read_text())
        assert s["converged"] and s["iterations"] == record.iterations


class TestLimits:
    def test_rigid_bridge_decouples(self, cfg):
        vp = cfg.vehicle_params()
        stiff = bfem.BridgeParams.uniform(ei=1.56e16)
        road = cfg.road_profile()
        rec = simulate(vp, stiff, road, cfg.sim_config())
        assert np.max(np.abs(rec.midspan)) < 1e-8
        s = veh.build_system(vp)
        z0 = np.linalg.solve(s.K, s.F @ rec.r[0])
        z, _, _ = integrate_history(s.M, s.C, s.K, rec.r @ s.F.T, cfg.sim_config().newmark, x0=z0)
        np.testing.assert_allclose(rec.z, z, atol=1e-6 * np.abs(z).max())

    def test_zero_road_static_amplification(self, cfg):
        rec = simulate(cfg.vehicle_params(), cfg.intact_bridge(), flat_road(), cfg.sim_config())
        assert rec.converged
        assert 0.8 <= np.max(np.abs(rec.midspan)) / 3.4e-3 <= 1.3

    def test_non_convergence_flagged(self, cfg, caplog):
        sc = replace(cfg.sim_config(), max_iters=2)
        rec = simulate(cfg.vehicle_params(), cfg.intact_bridge(), cfg.road_profile(), sc)
        assert not rec.converged and rec.eps > sc.eps_max
        assert "did not converge" in caplog.text

    def test_deterministic(self, cfg):
        sc = replace(cfg.sim_config(), noise_pct=0.15, seed=3)
        a = simulate(cfg.vehicle_params(), cfg.intact_bridge(), cfg.road_profile(), sc)
        b = simulate(cfg.vehicle_params(), cfg.intact_bridge(), cfg.road_profile(), sc)
        np.testing.assert_array_equal(a.acc_noisy, b.acc_noisy)
