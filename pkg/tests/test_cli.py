import json
import math

import numpy as np
import pytest

import anglekit as ak
from anglekit import jsonio
from anglekit.cli import Manifest, main, run
from anglekit.errors import UsageError


def read_json(path):
    return json.loads(path.read_text())


class TestManifest:
    def test_unknown_command(self):
        with pytest.raises(UsageError):
            Manifest(command="optimize", parameters={}, output_path="x.json")

    def test_unknown_parameter(self):
        with pytest.raises(UsageError):
            Manifest(command="enumerate", parameters={"bogus": 1}, output_path="x.json")


class TestRealizeCommand:
    def test_planar_realize_round_trip(self, tmp_path):
        out = tmp_path / "result.json"
        rc = main([
            "realize", "--angles", "1.5,1.2,1.0,0.8,0.6,0.4", "--m", "5", "-o", str(out)
        ])
        assert rc == 0
        doc = read_json(out)
        assert doc["version"] == 1
        config = jsonio.config_from_json(doc["config"])
        cert = jsonio.certificate_from_json(doc["certificate"])
        assert len(config) == 5
        assert ak.check_certificate(config, cert)
        again = ak.verify(config, ak.AngleMultiset.from_values([1.5, 1.2, 1.0, 0.8, 0.6, 0.4]),
                          1e-9)
        assert len(again.assignments) == 6

    def test_degrees_flag(self, tmp_path):
        out = tmp_path / "result.json"
        rc = main(["realize", "--angles", "60,45,30,25,20,15", "--degrees",
                   "--m", "5", "-o", str(out)])
        assert rc == 0
        cert = jsonio.certificate_from_json(read_json(out)["certificate"])
        assert any(abs(a.target - math.radians(60)) < 1e-12 for a in cert.assignments)

    def test_highdim_realize(self, tmp_path):
        out = tmp_path / "hd.json"
        rc = main(["realize", "--angles", "1.0,1.1,1.2,1.3", "--dim", "3",
                   "--eps", "0.5", "-o", str(out)])
        assert rc == 0
        doc = read_json(out)
        assert doc["config"]["dim"] == 3


class TestVerifyCommand:
    def test_verify_pass_and_perturbed_fail(self, tmp_path):
        cfg, _ = ak.construct_five_points([1.5, 1.2, 1.0, 0.8, 0.6, 0.4])
        good = tmp_path / "good.json"
        good.write_text(json.dumps(jsonio.config_to_json(cfg)))
        out = tmp_path / "cert.json"
        rc = main(["verify", "--config", str(good),
                   "--angles", "1.5,1.2,1.0,0.8,0.6,0.4", "-o", str(out)])
        assert rc == 0

        pts = np.array(cfg.points)
        pts[0, 0] += 1e-4  # breaks the 1e-9 tolerance
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(jsonio.config_to_json(ak.PointConfig(2, pts))))
        rc = main(["verify", "--config", str(bad),
                   "--angles", "1.5,1.2,1.0,0.8,0.6,0.4", "-o", str(out)])
        assert rc == 1

    def test_malformed_config_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"dim": 2, "points": [[0,0],[1,0]], "junk": 3}')
        rc = main(["verify", "--config", str(bad), "--angles", "1.0",
                   "-o", str(tmp_path / "cert.json")])
        assert rc == 2


class TestOtherCommands:
    def test_enumerate(self, tmp_path):
        cfg = ak.PointConfig(2, [[0, 0], [1, 0], [0.3, 0.9]])
        src = tmp_path / "cfg.json"
        src.write_text(json.dumps(jsonio.config_to_json(cfg)))
        out = tmp_path / "inst.json"
        assert main(["enumerate", "--config", str(src), "-o", str(out)]) == 0
        assert len(read_json(out)["instances"]) == 3

    def test_solve(self, tmp_path):
        out = tmp_path / "report.json"
        third = repr(math.pi / 3)
        rc = main(["solve", "--angles", ",".join([third] * 3), "--m", "3",
                   "--dim", "2", "--restarts", "5", "--seed", "0", "-o", str(out)])
        assert rc == 0
        doc = read_json(out)
        assert doc["status"] == "Realized"
        assert doc["certificate"] is not None

    def test_estimate_prob_schema(self, tmp_path):
        out = tmp_path / "prob.json"
        rc = main(["estimate-prob", "--dim", "2", "--m", "3", "--n", "2",
                   "--samples", "2000", "--seed", "42", "-o", str(out)])
        assert rc == 0
        doc = read_json(out)
        assert set(doc) == {"version", "p_hat", "stderr", "samples", "seed"}
        assert abs(doc["p_hat"] - 0.5) < 0.05

    def test_project_exp_csv(self, tmp_path):
        out = tmp_path / "tail.csv"
        rc = main(["project-exp", "--dim", "3", "--eps", "0.01",
                   "--samples", "20000", "-o", str(out)])
        assert rc == 0
        header, row = out.read_text().strip().split("\n")
        assert header == "d,theta,eps,samples,empirical,bound,pass"
        fields = row.split(",")
        assert fields[0] == "3" and fields[1] == "" and fields[6] == "true"

    def test_plot(self, tmp_path):
        cfg = ak.PointConfig(2, [[0, 0], [1, 0], [0.3, 0.9]])
        src = tmp_path / "cfg.json"
        src.write_text(json.dumps(jsonio.config_to_json(cfg)))
        out = tmp_path / "fig.svg"
        assert main(["plot", "--config", str(src), "-o", str(out)]) == 0
        assert out.read_text().startswith("<?xml")

    def test_env_seed(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ANGLE_SEED", "123")
        out = tmp_path / "prob.json"
        main(["estimate-prob", "--dim", "2", "--m", "3", "--n", "2",
              "--samples", "100", "-o", str(out)])
        assert read_json(out)["seed"] == 123

    def test_outputs_byte_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["estimate-prob", "--dim", "2", "--m", "3", "--n", "2",
                "--samples", "500", "--seed", "9"]
        main(args + ["-o", str(a)])
        main(args + ["-o", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_usage_error_exit_code(self):
        assert main(["realize", "--angles", "1.0,abc", "--m", "5", "-o", "x.json"]) == 2


def test_run_returns_artifacts(tmp_path):
    out = tmp_path / "r.json"
    manifest = Manifest(
        command="realize",
        parameters={"angles": [1.5, 1.2, 1.0, 0.8, 0.6, 0.4], "m": 5, "dim": 2},
        output_path=out,
    )
    result = run(manifest)
    assert result.exit_code == 0
    assert result.artifacts == [out]
