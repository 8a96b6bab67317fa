"""Command-line front end: config layering, output formats, exit codes."""

import json
import math

import pytest

from dualruin.cli import (
    EXIT_ERROR,
    EXIT_INFEASIBLE,
    EXIT_OK,
    ConfigError,
    RunConfig,
    SCENARIOS,
    main,
    parse_config_text,
)
from dualruin.distributions import Exponential
from dualruin.solver import ModelParams, solve_sublinear


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestConfigText:
    def test_round_trip(self):
        cfg = RunConfig({"law": "exponential", "nu": 0.25, "x_n": 7, "policy": "zero"})
        assert parse_config_text(cfg.to_text()) == cfg

    def test_comments_and_blanks(self):
        cfg = parse_config_text("# header\n\nnu = 0.5  # inline\n")
        assert cfg.get("nu") == 0.5

    def test_quotes_stripped(self):
        cfg = parse_config_text("law = 'exponential'\n")
        assert cfg.get("law") == "exponential"

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parse_config_text("volatility = 3\n")

    def test_bad_type(self):
        with pytest.raises(ConfigError):
            parse_config_text("nu = banana\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            parse_config_text("nu 0.5\n")

    def test_require(self):
        with pytest.raises(ConfigError):
            RunConfig({}).require("rho")


class TestSolve:
    def test_scenario_json(self, capsys):
        code, out, _ = run(capsys, "solve", "--scenario", "fig1_rd")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["feasible"] is True
        assert doc["beta"] == pytest.approx(2.0583123951777003, rel=1e-10)
        assert doc["c_star"] == pytest.approx(0.05366750419289197, rel=1e-9)

    def test_value_at_x0(self, capsys):
        code, out, _ = run(capsys, "solve", "--scenario", "fig1_rd", "--x0", "1.0")
        doc = json.loads(out)
        assert doc["value"] == pytest.approx(math.exp(-doc["beta"]), rel=1e-12)

    def test_infeasible_exit(self, capsys):
        code, out, _ = run(
            capsys, "solve", "--law", "exponential", "--nu", "2.0",
            "--rho", "2.0", "--lam", "0.1", "--delta", "0.5", "--gamma", "0.2",
        )
        assert code == EXIT_INFEASIBLE
        assert json.loads(out)["feasible"] is False

    def test_market_fields(self, capsys):
        code, out, _ = run(capsys, "solve", "--scenario", "fig1_market")
        doc = json.loads(out)
        assert code == EXIT_OK
        assert doc["beta"] == pytest.approx(2.998523174128954, rel=1e-10)
        assert doc["a_star"] > 0.0

    def test_superlinear_beta_serialized(self, capsys):
        code, out, _ = run(
            capsys, "solve", "--law", "exponential", "--nu", "1.0",
            "--rho", "1.0", "--lam", "1.0", "--delta", "1.0", "--gamma", "2.0",
        )
        assert code == EXIT_OK
        assert json.loads(out)["beta"] == "inf"

    def test_unknown_flag(self, capsys):
        code, _, _ = run(capsys, "solve", "--nope", "1")
        assert code == EXIT_ERROR

    def test_unknown_scenario_flag(self, capsys):
        code, _, _ = run(capsys, "solve", "--scenario", "bogus")
        assert code == EXIT_ERROR

    def test_missing_model(self, capsys):
        code, _, err = run(capsys, "solve")
        assert code == EXIT_ERROR
        assert "missing" in err

    def test_help_exits_zero(self, capsys):
        assert run(capsys, "--help")[0] == EXIT_OK


class TestLayering:
    def test_file_overrides_scenario(self, capsys, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("scenario = fig1_rd\nnu = 0.2\n")
        code, out, _ = run(capsys, "solve", "--config", str(path))
        assert code == EXIT_OK
        expected = solve_sublinear(
            Exponential(0.2), ModelParams(rho=0.1, lam=0.1, delta=1.0, gamma=0.5)
        ).beta
        assert json.loads(out)["beta"] == pytest.approx(expected, rel=1e-10)

    def test_flag_overrides_file(self, capsys, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("scenario = fig1_rd\nnu = 0.2\n")
        code, out, _ = run(capsys, "solve", "--config", str(path), "--nu", "0.1")
        assert json.loads(out)["beta"] == pytest.approx(2.0583123951777003, rel=1e-10)

    def test_unknown_scenario_in_file(self, capsys, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("scenario = bogus\n")
        code, _, err = run(capsys, "solve", "--config", str(path))
        assert code == EXIT_ERROR
        assert "unknown scenario" in err

    def test_missing_config_file(self, capsys):
        code, _, _ = run(capsys, "solve", "--config", "/no/such/file.cfg")
        assert code == EXIT_ERROR


class TestCurve:
    def test_csv_output(self, capsys):
        code, out, _ = run(
            capsys, "curve", "--scenario", "fig1_rd",
            "--x_min", "0", "--x_max", "2", "--x_n", "5",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "x,value"
        rows = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
        assert len(rows) == 5
        assert rows[0] == (0.0, 1.0)
        assert rows[2][1] == pytest.approx(math.exp(-2.0583123951777003), rel=1e-9)

    def test_json_format(self, capsys):
        code, out, _ = run(
            capsys, "curve", "--scenario", "fig1_rd", "--format", "json",
            "--x_min", "0", "--x_max", "1", "--x_n", "3",
        )
        doc = json.loads(out)
        assert [d["x"] for d in doc] == [0.0, 0.5, 1.0]

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "curve.csv"
        code, out, _ = run(
            capsys, "curve", "--scenario", "fig1_rd",
            "--x_min", "0", "--x_max", "1", "--x_n", "3", "--out", str(path),
        )
        assert code == EXIT_OK
        assert out == ""
        assert path.read_text().startswith("x,value")

    def test_state_curve(self, capsys):
        code, out, _ = run(
            capsys, "curve", "--scenario", "fig6_stateII",
            "--x_min", "1", "--x_max", "5", "--x_n", "2",
        )
        assert code == EXIT_OK
        rows = [ln.split(",") for ln in out.strip().splitlines()[1:]]
        assert float(rows[0][1]) == pytest.approx(0.4684717376375122, abs=1e-7)

    def test_bad_grid(self, capsys):
        code, _, _ = run(
            capsys, "curve", "--scenario", "fig1_rd", "--x_min", "2", "--x_max", "1",
        )
        assert code == EXIT_ERROR


class TestHeatmap:
    def test_gamma_delta_plane(self, capsys):
        code, out, _ = run(
            capsys, "heatmap", "--plane", "gamma_delta",
            "--law", "exponential", "--nu", "2.0", "--rho", "2.0", "--lam", "0.1",
            "--a1_min", "0.1", "--a1_max", "0.9", "--a1_n", "3",
            "--a2_min", "0.5", "--a2_max", "5.0", "--a2_n", "3",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0].startswith("gamma,delta,feasible")
        assert len(lines) == 10
        flags = {ln.split(",")[2] for ln in lines[1:]}
        assert flags == {"0", "1"}

    def test_unknown_plane(self, capsys):
        code, _, _ = run(capsys, "heatmap", "--plane", "nu_rho")
        assert code == EXIT_ERROR


class TestAsymptotics:
    def test_delta_to_infinity(self, capsys):
        code, out, _ = run(
            capsys, "asymptotics", "--scenario", "fig1_rd", "--knob",
            "delta_to_infinity",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        last = lines[-1].split(",")
        assert 0.98 <= float(last[-1]) <= 1.02

    def test_unknown_knob(self, capsys):
        code, _, _ = run(
            capsys, "asymptotics", "--scenario", "fig1_rd", "--knob", "spin",
        )
        assert code == EXIT_ERROR


class TestSimulate:
    def test_deterministic_output(self, capsys):
        argv = ("simulate", "--scenario", "fig1_noinvest",
                "--paths", "1000", "--seed", "3", "--x0", "1.0")
        code_a, out_a, _ = run(capsys, *argv)
        code_b, out_b, _ = run(capsys, *argv)
        assert code_a == code_b == EXIT_OK
        assert out_a == out_b
        doc = json.loads(out_a)
        assert doc["engine"] == "constant"
        assert 0.0 <= doc["p_hat"] <= 1.0
        assert doc["n_ruined"] + doc["n_survived"] + doc["n_censored"] == 1000

    def test_zero_policy_without_surplus_drift(self, capsys):
        # spending makes the model feasible, but with the zero policy the
        # surplus drifts down (lam E[Y] < rho) and ruin is certain
        code, _, err = run(
            capsys, "simulate", "--law", "exponential", "--nu", "0.1",
            "--rho", "2.0", "--lam", "0.1", "--delta", "1.0", "--gamma", "0.5",
            "--policy", "zero", "--paths", "1000",
        )
        assert code == EXIT_INFEASIBLE
        assert "certain" in err

    def test_star_policy_on_state_scenario(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--scenario", "fig5_stateI",
            "--paths", "1000", "--seed", "1", "--x0", "1.0",
        )
        assert code == EXIT_OK
        assert json.loads(out)["engine"] == "state"

    def test_star_policy_rejected_at_gamma_one(self, capsys):
        code, _, err = run(
            capsys, "simulate", "--scenario", "fig6_stateII",
            "--policy", "star", "--paths", "1000",
        )
        assert code == EXIT_ERROR
        assert "gamma" in err


class TestVerify:
    def test_gamma1_thresholds(self, capsys):
        code, out, _ = run(capsys, "verify", "--scenario", "gamma1_thresholds")
        assert code == EXIT_OK
        assert "PASS" in out
        assert "FAIL" not in out

    def test_beta_c_limit(self, capsys):
        code, out, _ = run(capsys, "verify", "--scenario", "beta_c_limit")
        assert code == EXIT_OK
        assert "PASS" in out

    def test_requires_scenario(self, capsys):
        code, _, err = run(capsys, "verify")
        assert code == EXIT_ERROR


def test_scenario_presets_round_trip():
    from dualruin.cli import _coerce

    for name, preset in SCENARIOS.items():
        cfg = RunConfig({k: _coerce(k, v) for k, v in preset.items()})
        assert parse_config_text(cfg.to_text()) == cfg, name


def test_scenarios_all_resolve(capsys):
    # every named preset must at least parse and dispatch
    for name in SCENARIOS:
        cmd = "verify" if name in ("gamma1_thresholds", "beta_c_limit") else "solve"
        if SCENARIOS[name].get("state_model"):
            continue
        code, _, _ = run(capsys, cmd, "--scenario", name)
        assert code == EXIT_OK, name
