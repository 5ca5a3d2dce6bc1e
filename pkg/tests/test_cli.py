"""
Command Line Tests

Drives levyarea.main.main() in-process with small configs and checks the
payload written to stdout and the exit code.
"""
import json

import pytest

from levyarea.main import EXIT_CONFIG, EXIT_OK, main, parse_alpha_grid
from levyarea.engine.errors import InvalidParameter


def write_config(tmp_path, payload, name: str = "run.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture
def mm1_config(tmp_path) -> str:
    return write_config(tmp_path, {
        "process": {"drift": -1.0, "jump_rate": 1.0, "jump_dist": {"kind": "exponential", "rate": 2.0}},
        "holding": {"kind": "linear", "c": 1.0},
        "x": 1.0,
    })


@pytest.fixture
def eoq_config(tmp_path) -> str:
    return write_config(tmp_path, {
        "process": {"drift": -0.5},
        "holding": {"kind": "linear"},
        "inventory": {"K": 4.0, "class_costs": [1.0, 3.0]},
    })


class TestAlphaGrid:

    def test_inclusive_endpoints(self) -> None:
        assert parse_alpha_grid("0:2:5") == [0.0, 0.5, 1.0, 1.5, 2.0]

    def test_single_point(self) -> None:
        assert parse_alpha_grid("0.5:9:1") == [0.5]

    @pytest.mark.parametrize("text", ["0:1", "a:1:2", "0:1:0", "-1:1:3"])
    def test_rejected(self, text) -> None:
        with pytest.raises(InvalidParameter):
            parse_alpha_grid(text)


class TestAnalyticCommands:

    def test_lst_at_zero(self, mm1_config, capsys) -> None:
        assert main(["lst", "--config", mm1_config, "--x", "1", "--alpha-grid", "0:0:1", "--quiet"]) == EXIT_OK
        assert capsys.readouterr().out == "alpha,lst\n0,1\n"

    def test_lst_grid(self, mm1_config, capsys) -> None:
        assert main(["lst", "--config", mm1_config, "--alpha-grid", "0:2:3", "--quiet"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "alpha,lst"
        values = [float(line.split(",")[1]) for line in lines[1:]]
        assert values[0] == 1.0 and values[0] > values[1] > values[2] > 0.0

    def test_moments(self, mm1_config, capsys) -> None:
        assert main(["moments", "--config", mm1_config, "--n", "2", "--quiet"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "k,c_k,mu_k"
        k, c1, mu1 = lines[1].split(",")
        assert k == "1"
        assert float(mu1) == pytest.approx(1.0, rel=1e-12)
        assert float(lines[2].split(",")[2]) == pytest.approx(1.0 + 4.0 / 3.0, rel=1e-10)

    def test_exponent_blocks(self, mm1_config, capsys) -> None:
        assert main(["exponent", "--config", mm1_config, "--alpha-grid", "0:1:3", "--quiet"]) == EXIT_OK
        grid, derivs = capsys.readouterr().out.split("\n\n")
        assert grid.splitlines()[0] == "alpha,phi,dphi"
        assert grid.splitlines()[1].startswith("0,0,")
        assert derivs.splitlines()[0] == "n,deriv0"
        assert derivs.splitlines()[1] == "1,0.5"

    def test_inventory(self, eoq_config, capsys) -> None:
        assert main(["inventory", "--config", eoq_config, "--quiet"]) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["x_star"] == pytest.approx(2.0, rel=1e-10)
        assert out["cost"] == pytest.approx(2.0, rel=1e-10)
        assert out["p_star"] == pytest.approx(4.0, rel=1e-10)
        assert out["bounded"] and out["unimodal"]
        assert out["multiclass"]["proportions"] == [1.0, 0.0]

    def test_out_file(self, mm1_config, tmp_path) -> None:
        target = tmp_path / "lst.csv"
        assert main(["lst", "--config", mm1_config, "--alpha-grid", "0:0:1", "--out", str(target), "--quiet"]) == EXIT_OK
        assert target.read_bytes() == b"alpha,lst\n0,1\n"


class TestSimulationCommands:

    def test_simulate_is_worker_independent(self, mm1_config, capsys) -> None:
        outputs = []
        for threads in ("1", "4"):
            assert main(["simulate", "--config", mm1_config, "--reps", "1500", "--seed", "3",
                         "--threads", threads, "--quiet"]) == EXIT_OK
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]
        data = json.loads(outputs[0])
        assert data["analytic"]["mean"] == pytest.approx(1.0)
        assert data["estimates"]["mean"]["n"] == 1500

    def test_raw_csv(self, mm1_config, tmp_path, capsys) -> None:
        raw = tmp_path / "raw.csv"
        assert main(["simulate", "--config", mm1_config, "--reps", "100", "--raw-csv", str(raw), "--quiet"]) == EXIT_OK
        lines = raw.read_text().splitlines()
        assert lines[0] == "rep,T_x,area"
        assert len(lines) == 101

    def test_longrun(self, mm1_config, capsys) -> None:
        assert main(["longrun", "--config", mm1_config, "--horizon", "500", "--seed", "1", "--quiet"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["limit_average"] == pytest.approx(0.5)
        assert data["cycles"] >= 30

    def test_verify_pure_drift(self, tmp_path, capsys) -> None:
        config = write_config(tmp_path, {"process": {"drift": -1.0}, "x": 1.0})
        assert main(["verify", "--config", config, "--reps", "500", "--quiet"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert json.loads(lines[-1]) == {"failed": [], "passed": True, "total": len(lines) - 1}

    def test_simulate_echoes_process_and_holding(self, mm1_config, capsys) -> None:
        assert main(["simulate", "--config", mm1_config, "--reps", "100", "--quiet"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["holding"] == {"kind": "linear", "c": 1.0}
        assert data["process"]["jump_dist"] == {"kind": "exponential", "rate": 2.0}
        assert data["process"]["drift"] == -1.0

    def test_clt_uses_configured_holding(self, tmp_path, capsys) -> None:
        config = write_config(tmp_path, {
            "process": {"drift": -1.0, "jump_rate": 1.0, "jump_dist": {"kind": "exponential", "rate": 2.0}},
            "holding": {"kind": "piecewise_linear", "knots": [[0, 0], [1, 2]]},
            "x": 1.0,
        })
        assert main(["clt", "--config", config, "--scale", "5", "--reps", "200", "--quiet"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["holding"]["kind"] == "piecewise_linear"
        assert data["rv_index"] == 0.0
        assert data["limit_var"] == pytest.approx(4.0)

    def test_clt_rejects_vanishing_holding(self, tmp_path) -> None:
        config = write_config(tmp_path, {
            "process": {"drift": -1.0},
            "holding": {"kind": "piecewise_linear", "knots": [[0, 0], [1, 1], [2, 0]]},
            "x": 1.0,
        })
        assert main(["clt", "--config", config, "--scale", "5", "--reps", "200", "--quiet"]) == EXIT_CONFIG


class TestExplicitZeros:

    def test_seed_zero_overrides_config(self, tmp_path, capsys) -> None:
        config = write_config(tmp_path, {"process": {"drift": -1.0}, "x": 1.0, "seed": 5})
        assert main(["simulate", "--config", config, "--reps", "100", "--seed", "0", "--quiet"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["seed"] == 0

    def test_level_zero_overrides_config(self, mm1_config, capsys) -> None:
        assert main(["lst", "--config", mm1_config, "--x", "0", "--alpha-grid", "0:1:2", "--quiet"]) == EXIT_OK
        assert capsys.readouterr().out == "alpha,lst\n0,1\n1,1\n"

    def test_scale_zero_is_rejected_not_replaced(self, mm1_config) -> None:
        assert main(["clt", "--config", mm1_config, "--scale", "0", "--reps", "200", "--quiet"]) == EXIT_CONFIG


class TestConfigErrors:

    def test_unknown_key(self, tmp_path) -> None:
        config = write_config(tmp_path, {"process": {"drift": -1.0}, "levels": [1.0]})
        assert main(["lst", "--config", config, "--x", "1", "--alpha-grid", "0:1:2", "--quiet"]) == EXIT_CONFIG

    def test_mean_drift_violation(self, tmp_path) -> None:
        config = write_config(tmp_path, {
            "process": {"drift": -1.0, "jump_rate": 2.0, "jump_dist": {"kind": "deterministic", "size": 1.0}},
        })
        assert main(["lst", "--config", config, "--x", "1", "--alpha-grid", "0:1:2", "--quiet"]) == EXIT_CONFIG

    def test_missing_level(self, tmp_path) -> None:
        config = write_config(tmp_path, {"process": {"drift": -1.0}})
        assert main(["moments", "--config", config, "--n", "2", "--quiet"]) == EXIT_CONFIG

    def test_missing_file(self, tmp_path) -> None:
        assert main(["inventory", "--config", str(tmp_path / "absent.json"), "--quiet"]) == EXIT_CONFIG

    def test_malformed_json(self, tmp_path) -> None:
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["inventory", "--config", str(path), "--quiet"]) == EXIT_CONFIG
