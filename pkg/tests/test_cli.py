import json

import numpy as np
import pytest

from driveby import pso
from driveby.cli import EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_OK, main
from driveby.config import ConfigError, ExperimentConfig
from driveby.experiment import histogram, run_seeds


class TestConfig:
    def test_defaults_embed_tables(self):
        c = ExperimentConfig()
        assert c.vehicle["m_s"] == 8310.0 and c.vehicle["k_u2"] == 4.31e6
        assert c.bridge.ei == 1.56e10 and c.bridge.rhoA == 4400.0
        assert (c.sim.dt, c.sim.total_time, c.sim.eps_max) == (0.001, 6.0, 1e-6)
        assert (c.pso.samples, c.runs, c.pso.alphas) == (60, 100, [0.6, 0.3, 0.1])

    def test_json_round_trip(self, tmp_path):
        c = ExperimentConfig().with_overrides(**{"pso.samples": 7, "scenario": "damaged"})
        c.dump(tmp_path / "c.json")
        back = ExperimentConfig.load(tmp_path / "c.json")
        assert back == c

    @pytest.mark.parametrize("data, path", [
        ({"nope": 1}, "nope"),
        ({"pso": {"samples": 1}}, "pso.samples"),
        ({"pso": {"swarm": 3}}, "pso.swarm"),
        ({"vehicle": {"m_s": -1}}, "vehicle"),
        ({"vehicle": {"mass": 1}}, "vehicle.mass"),
        ({"sim": {"total_time": 3.0}}, "sim.total_time"),
        ({"scenario": "broken"}, "scenario"),
        ({"road": {"x0": 0.0}}, "road"),
        ({"filter": {"r_diag": [1, 2]}}, "filter.r_diag"),
        ({"bridge": {"damaged_element": 16}}, "bridge.damaged_element"),
        ({"bridge": {"ei": [1.0] * 14}}, "bridge"),
    ])
    def test_errors_name_field(self, data, path):
        with pytest.raises(ConfigError, match=rf"^{path}:"):
            ExperimentConfig.from_dict(data)

    def test_damaged_truth(self):
        c = ExperimentConfig(scenario="damaged")
        ei = c.bridge_params().ei
        assert ei[7] == pytest.approx(0.5 * 1.56e10)
        assert np.all(np.delete(ei, 7) == 1.56e10)
        np.testing.assert_array_equal(c.intact_bridge().ei, 1.56e10)

    def test_noise_switches_covariances(self):
        f = ExperimentConfig(noise_pct=0.35).filter_config()
        np.testing.assert_allclose(f.r_diag, [6e-3, 6e-3, 7.5e-3, 7.5e-3])
        np.testing.assert_allclose(f.q_diag[:4], 6e-6)


def test_run_seeds_independent_and_reproducible():
    a, b = run_seeds(0, 5), run_seeds(0, 5)
    assert a == b and len(set(a)) == 5
    assert run_seeds(1, 5) != a


def test_histogram_unit_area(rng):
    h = histogram(rng.standard_normal(137))
    area = np.sum(np.diff(h["edges"]) * np.array(h["density"]))
    assert area == pytest.approx(1.0, abs=1e-9)


class TestCommands:
    def test_simulate_outputs_and_determinism(self, tmp_path):
        for d in ("a", "b"):
            assert main(["simulate", "--noise", "0.15", "--seed", "3", "--out", str(tmp_path / d)]) == EXIT_OK
        a, b = (tmp_path / "a" / "channels.csv").read_bytes(), (tmp_path / "b" / "channels.csv").read_bytes()
        assert a == b
        summary = json.loads((tmp_path / "a" / "summary.json").read_text())
        assert summary["converged"] and summary["eps"] <= 1e-6
        modal = json.loads((tmp_path / "a" / "modal.json").read_text())
        assert len(modal["vehicle_hz"]) == 4 and len(modal["bridge_damaged_hz"]) == 4

    def test_config_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"sim": {"total_time": 1.0}}))
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
        assert "sim.total_time" in capsys.readouterr().err

    def test_malformed_json_exit(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        assert main(["simulate", "--config", str(bad)]) == EXIT_CONFIG

    def test_generate_road(self, tmp_path):
        assert main(["generate-road", "--seed", "42", "--out", str(tmp_path)]) == EXIT_OK
        data = np.loadtxt(tmp_path / "road.csv", delimiter=",", skiprows=1)
        assert data.shape[1] == 2 and abs(data[:, 1].mean()) < 1e-12

    def test_validate_exit_codes(self, tmp_path):
        assert main(["validate", "--only", "3", "--out", str(tmp_path)]) == EXIT_OK
        rows = json.loads((tmp_path / "validation.json").read_text())
        assert rows[0]["passed"] and "measured" in rows[0]

    def test_validate_negative_control(self, tmp_path, capsys):
        # a corrupted rigidity must trip the damaged-frequency comparison
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bridge": {"ei": 1.0e10}}))
        assert main(["validate", "--config", str(cfg), "--only", "2"]) == EXIT_ACCEPTANCE
        assert "[FAIL]  2." in capsys.readouterr().out

    def test_identify_desk_scale_smoke(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"pso": {"steps": 1}}))
        out = tmp_path / "id"
        code = main(["identify", "--config", str(cfg), "--runs", "10", "--samples", "20",
                     "--scenario", "damaged", "--jobs", "1", "--out", str(out)])
        assert code == EXIT_OK
        post = np.loadtxt(out / "posterior.csv", delimiter=",", skiprows=1)
        header = (out / "posterior.csv").read_text().splitlines()[0].split(",")
        assert post.shape == (10, 2 + len(pso.REPORT_NAMES))
        assert header[:2] == ["run", "J"] and header[2:] == list(pso.REPORT_NAMES)
        prior = np.loadtxt(out / "prior.csv", delimiter=",", skiprows=1)
        assert prior.shape == (200, len(pso.REPORT_NAMES))
        # EI_8 truth is the damaged value: intact-centred priors sit near 2
        ei8 = header.index("EI_8") - 2
        assert 1.5 <= prior[:, ei8].mean() <= 2.5
        hist = json.loads((out / "histograms.json").read_text())
        for part in hist.values():
            for h in part.values():
                assert np.sum(np.diff(h["edges"]) * np.array(h["density"])) == pytest.approx(1.0, abs=1e-9)
        for name in ("road_front.csv", "road_rear.csv", "road_true.csv", "plots.gp", "identify_summary.json"):
            assert (out / name).exists()
