import json
import math

import numpy as np
import pytest

from malacert.cli import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    EXIT_OK,
    RunConfig,
    main,
)
from malacert.errors import ConfigError

from conftest import assert_rel


def base_config(**overrides):
    cfg = {
        "potential": {"kind": "gaussian", "d": 1},
        "assumptions": {"L": 1.0, "m": 1.0, "K": 0.0, "M": 0.0},
        "seed": 42,
        "gamma": 0.5,
        "n_steps": 200,
        "x0": 0.0,
        "output": {},
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, name="config.json", **overrides):
    path = tmp_path / name
    path.write_text(json.dumps(base_config(**overrides)))
    return str(path)


class TestRunConfig:
    def test_round_trip_identity(self):
        cfg = RunConfig.from_dict(base_config())
        again = RunConfig.from_dict(cfg.to_dict())
        assert cfg == again

    def test_requires_seed(self):
        data = base_config()
        del data["seed"]
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)

    def test_exactly_one_assumption_block(self):
        data = base_config(beta={"beta": 0.5, "m_beta": 0.5, "L_beta": 1.0})
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)
        data = base_config()
        del data["assumptions"]
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)

    def test_rejects_gradient_tables(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(base_config(potential={"kind": "declared", "d": 1}))

    def test_rejects_unknown_keys(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(base_config(entropy="please"))


class TestCertifyCommand:
    def test_matches_golden_certificate(self, tmp_path, golden, capsys):
        out = tmp_path / "cert.json"
        cfg = write_config(tmp_path, output={"certificate": str(out)})
        assert main(["certify", "--config", cfg]) == EXIT_OK
        written = json.loads(out.read_text())
        want = golden["gaussian_d1"]["constants"]
        assert written["gamma_bar"] == want["gamma_bar"]
        for key in ("log_lambda", "log_M", "K_gamma_bar", "log_epsilon", "log_C"):
            assert_rel(written[key], want[key], 1e-12, key)
        assert "gamma_bar" in capsys.readouterr().out

    def test_gamma_bar_beyond_certified_exits_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, gamma_bar=1e-3)
        assert main(["certify", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG
        assert "certified maximum stepsize" in capsys.readouterr().err

    def test_missing_M_exits_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, assumptions={"L": 1.0, "m": 1.0, "K": 0.0})
        assert main(["certify", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG
        assert "third-derivative" in capsys.readouterr().err

    def test_beta_certify(self, tmp_path, golden):
        inp = golden["beta_tail_b05_d2"]["inputs"]
        out = tmp_path / "cert.json"
        cfg = write_config(
            tmp_path,
            potential={"kind": "beta_tail", "d": 2, "params": {"beta": 0.5}},
            beta={
                "beta": inp["beta"], "m_beta": inp["m_beta"],
                "L_beta": inp["L_beta"], "K_beta": inp["K_beta"],
                "L": inp["L"], "M": inp["M"],
            },
            output={"certificate": str(out)},
        )
        del_cfg = json.loads(open(cfg).read())
        del del_cfg["assumptions"]
        open(cfg, "w").write(json.dumps(del_cfg))
        assert main(["certify", "--config", cfg]) == EXIT_OK
        written = json.loads(out.read_text())
        assert written["regime"] == "A4beta"
        assert_rel(
            written["log_C"], golden["beta_tail_b05_d2"]["constants"]["log_C"], 1e-12
        )


class TestSampleCommand:
    def test_deterministic_rerun(self, tmp_path):
        csv1, csv2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (csv1, csv2):
            cfg = write_config(
                tmp_path, output={"trajectory": str(out), "summary": str(tmp_path / "s.json")}
            )
            assert main(["sample", "--config", cfg]) == EXIT_OK
        assert csv1.read_text() == csv2.read_text()

    def test_summary_and_moments(self, tmp_path):
        cfg = write_config(
            tmp_path,
            n_steps=20_000,
            output={
                "trajectory": str(tmp_path / "t.csv"),
                "summary": str(tmp_path / "s.json"),
            },
        )
        assert main(["sample", "--config", cfg]) == EXIT_OK
        summary = json.loads((tmp_path / "s.json").read_text())
        assert 0.0 < summary["acceptance_rate"] < 1.0
        assert abs(summary["mean"][0]) < 0.1
        assert abs(summary["second_moment"][0] - 1.0) < 0.1
        header = (tmp_path / "t.csv").read_text().splitlines()[0]
        assert header == "step,accepted,x_0"

    def test_ula_empty_accept_column(self, tmp_path):
        cfg = write_config(
            tmp_path, kernel="ula", n_steps=10,
            output={"trajectory": str(tmp_path / "t.csv"), "summary": str(tmp_path / "s.json")},
        )
        assert main(["sample", "--config", cfg]) == EXIT_OK
        rows = (tmp_path / "t.csv").read_text().splitlines()[1:]
        assert all(r.split(",")[1] == "" for r in rows)

    def test_seed_override_changes_output(self, tmp_path):
        outs = []
        for seed_flag in (["--seed", "1"], ["--seed", "2"]):
            out = tmp_path / f"t{seed_flag[1]}.csv"
            cfg = write_config(
                tmp_path, output={"trajectory": str(out), "summary": str(tmp_path / "s.json")}
            )
            assert main(["sample", "--config", cfg, *seed_flag]) == EXIT_OK
            outs.append(out.read_text())
        assert outs[0] != outs[1]


class TestVerifyCommand:
    def test_pass_exit_zero(self, tmp_path):
        cfg = write_config(
            tmp_path, gamma=0.1, output={"report": str(tmp_path / "r.json")}
        )
        code = main(
            ["verify", "--config", cfg, "--suite", "reversibility", "--suite", "growth"]
        )
        assert code == EXIT_OK
        report = json.loads((tmp_path / "r.json").read_text())
        assert report["passed"] is True

    def test_corrupted_L_exit_one(self, tmp_path):
        cfg = write_config(
            tmp_path,
            gamma=0.1,
            assumptions={"L": 0.5, "m": 0.5, "K": 0.0, "M": 0.0},
            output={"report": str(tmp_path / "r.json")},
        )
        code = main(["verify", "--config", cfg, "--suite", "assumptions"])
        assert code == EXIT_CHECK_FAILED
        report = json.loads((tmp_path / "r.json").read_text())
        fails = [c for c in report["checks"] if c["status"] == "fail"]
        assert fails and "witness" in fails[0]

    def test_suite_flag_limits_checks(self, tmp_path):
        cfg = write_config(
            tmp_path, gamma=0.1, output={"report": str(tmp_path / "r.json")}
        )
        main(["verify", "--config", cfg, "--suite", "reversibility"])
        report = json.loads((tmp_path / "r.json").read_text())
        assert all(c["name"].startswith("reversibility") for c in report["checks"])


class TestTauCommand:
    def test_emits_both_routes(self, tmp_path, capsys):
        cfg = write_config(tmp_path, x0=[1.0], z=[0.0], gamma=0.1)
        assert main(["tau", "--config", cfg]) == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert_rel(record["tau_direct"], -0.00475, 1e-12)
        assert_rel(record["tau_terms"]["value"], -0.00475, 1e-12)
        assert record["abs_diff"] <= 1e-12
        assert set(record) == {"x", "z", "gamma", "tau_direct", "tau_terms", "abs_diff"}

    def test_config_error_exit_2(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["tau", "--config", str(path)]) == EXIT_CONFIG
