import json

import numpy as np
import pytest

from dqsim.cli import (
    ConfigError,
    main,
    parse_config,
    run,
    serialize_config,
    write_outputs,
)
from dqsim.dynamics import steady_state_params
from dqsim.hilbert import partial_trace_mode
from dqsim.measures import concurrence
from dqsim.model import SystemParams
from dqsim.sweep import ResultTable


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return header, rows


class TestParseConfig:
    def test_fills_defaults(self):
        cfg = parse_config('{"experiment": "steady", "g": 1.0, "delta": 0.1}')
        assert cfg.experiment == "steady"
        assert cfg["gamma"] == 1e-5
        assert cfg["kappa"] == 1.0
        assert cfg["epsilon"] == 1.0
        assert cfg["fock_cutoff"] == 5
        assert cfg["flip_detuning"] is False

    def test_missing_required_field(self):
        with pytest.raises(ConfigError, match="delta"):
            parse_config('{"experiment": "steady", "g": 1.0}')

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError, match="unknown experiment"):
            parse_config('{"experiment": "magic"}')

    def test_unknown_field(self):
        with pytest.raises(ConfigError, match="frobnicate"):
            parse_config('{"experiment": "grid", "frobnicate": 1}')

    def test_malformed_json_names_line(self):
        with pytest.raises(ConfigError, match="line"):
            parse_config('{"experiment": "grid",\n  oops}')

    def test_negative_rate_rejected(self):
        with pytest.raises(ConfigError, match="gamma"):
            parse_config('{"experiment": "steady", "g": 1, "delta": 1, "gamma": -1}')

    def test_zero_kappa_rejected(self):
        with pytest.raises(ConfigError, match="kappa"):
            parse_config('{"experiment": "steady", "g": 1, "delta": 1, "kappa": 0}')

    def test_bad_cutoff_rejected(self):
        with pytest.raises(ConfigError, match="fock_cutoff"):
            parse_config(
                '{"experiment": "steady", "g": 1, "delta": 1, "fock_cutoff": 2.5}'
            )

    def test_timeseries_params_sets_validated(self):
        with pytest.raises(ConfigError, match="params_sets"):
            parse_config('{"experiment": "timeseries", "params_sets": []}')
        with pytest.raises(ConfigError, match="params_sets"):
            parse_config('{"experiment": "timeseries", "params_sets": [{"g": 1}]}')

    def test_roundtrip_through_serialize(self):
        cfg = parse_config('{"experiment": "line", "mode": "gamma", "g": 2.0}')
        again = parse_config(serialize_config(cfg))
        assert again == cfg

    def test_defaults_are_copies(self):
        a = parse_config('{"experiment": "grid"}')
        a["delta_axis"]["count"] = 3
        b = parse_config('{"experiment": "grid"}')
        assert b["delta_axis"]["count"] == 60


class TestWriteOutputs:
    def test_csv_and_meta(self, tmp_path):
        table = ResultTable(
            columns=["x", "y"],
            rows=[[1.0, 0.5], [2.0, 1.0 / 3.0]],
            metadata={"experiment": "demo"},
        )
        cfg = parse_config('{"experiment": "steady", "g": 1.0, "delta": 0.1}')
        out = tmp_path / "res.csv"
        write_outputs(table, cfg, out)
        header, rows = read_csv(out)
        assert header == ["x", "y"]
        assert rows[1][1] == pytest.approx(1.0 / 3.0, abs=0)  # full precision survives
        meta = json.loads((tmp_path / "res.meta.json").read_text())
        assert meta["config"]["experiment"] == "steady"
        assert meta["diagnostics"]["experiment"] == "demo"
        assert meta["columns"] == ["x", "y"]

    def test_seventeen_digit_floats(self, tmp_path):
        table = ResultTable(columns=["v"], rows=[[np.pi]])
        cfg = parse_config('{"experiment": "grid"}')
        write_outputs(table, cfg, tmp_path / "pi")
        text = (tmp_path / "pi.csv").read_text()
        assert "3.1415926535897931" in text

    def test_integers_written_as_integers(self, tmp_path):
        table = ResultTable(columns=["status"], rows=[[0]])
        cfg = parse_config('{"experiment": "grid"}')
        write_outputs(table, cfg, tmp_path / "s")
        assert (tmp_path / "s.csv").read_text().split("\n")[1] == "0"


class TestEndToEnd:
    def write_config(self, tmp_path, payload):
        p = tmp_path / "config.json"
        p.write_text(json.dumps(payload))
        return p

    def test_steady_run(self, tmp_path):
        cfg = self.write_config(
            tmp_path,
            {"experiment": "steady", "g": 1.0, "delta": 0.1, "fock_cutoff": 3},
        )
        out = tmp_path / "steady.csv"
        assert main(["--config", str(cfg), "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert header == ["delta", "g", "concurrence", "n_mode", "residual", "status"]
        params = SystemParams(g=1.0, delta=0.1, gamma=1e-5, epsilon=1.0, fock_cutoff=3)
        rho, layout, _ = steady_state_params(params)
        expected = concurrence(partial_trace_mode(rho, layout))
        assert rows[0][2] == pytest.approx(expected, abs=1e-12)

    def test_cutoff_override(self, tmp_path):
        cfg = self.write_config(
            tmp_path, {"experiment": "steady", "g": 1.0, "delta": 0.1}
        )
        out = tmp_path / "o.csv"
        assert main(["--config", str(cfg), "--out", str(out), "--cutoff", "2"]) == 0
        meta = json.loads((tmp_path / "o.meta.json").read_text())
        assert meta["config"]["fock_cutoff"] == 2

    def test_grid_run(self, tmp_path):
        cfg = self.write_config(
            tmp_path,
            {
                "experiment": "grid",
                "delta_axis": {"min": 0.05, "max": 0.2, "count": 2, "spacing": "log"},
                "g_axis": {"min": 0.5, "max": 2.0, "count": 2, "spacing": "log"},
                "fock_cutoff": 2,
            },
        )
        out = tmp_path / "grid.csv"
        assert main(["--config", str(cfg), "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert len(rows) == 4
        assert all(row[5] == 0 for row in rows)

    def test_evolve_run(self, tmp_path):
        cfg = self.write_config(
            tmp_path,
            {
                "experiment": "evolve",
                "g": 1.0,
                "delta": 0.1,
                "t_final": 5.0,
                "samples": 11,
                "fock_cutoff": 2,
            },
        )
        out = tmp_path / "ev.csv"
        assert main(["--config", str(cfg), "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert header == ["t", "P_G0", "P_E", "P_PsiPlus", "P_PsiMinus", "n_mode", "concurrence"]
        assert len(rows) == 11
        assert rows[0][1] == pytest.approx(1.0)  # starts in |G,0>

    def test_stirap_run(self, tmp_path):
        cfg = self.write_config(
            tmp_path,
            {
                "experiment": "stirap",
                "delta_schedule": {"kind": "tanh_down", "max_value": 8.0, "t0": 0.5, "rate": 6.0},
                "g_schedule": {"kind": "tanh_up", "max_value": 8.0, "t0": 0.5, "rate": 6.0},
                "gamma": 0.0,
                "t_final": 1.0,
                "samples": 10,
                "fock_cutoff": 2,
            },
        )
        out = tmp_path / "st.csv"
        assert main(["--config", str(cfg), "--out", str(out)]) == 0
        meta = json.loads((tmp_path / "st.meta.json").read_text())
        assert meta["diagnostics"]["pump_during_stirap"] is False
        assert meta["diagnostics"]["epsilon"] == 0.0

    def test_converge_run(self, tmp_path):
        cfg = self.write_config(
            tmp_path,
            {"experiment": "converge", "g": 1.0, "delta": 0.1, "epsilon": 1e-3, "tol": 1e-6},
        )
        out = tmp_path / "cv.csv"
        assert main(["--config", str(cfg), "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert header == ["cutoff", "value"]
        assert rows[0][0] >= 1

    def test_deterministic_output(self, tmp_path):
        cfg = self.write_config(
            tmp_path,
            {"experiment": "steady", "g": 1.0, "delta": 0.1, "fock_cutoff": 3},
        )
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["--config", str(cfg), "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_rerun_from_meta_config(self, tmp_path):
        # the .meta.json embeds a config that reproduces the run bit for bit
        cfg = self.write_config(
            tmp_path,
            {"experiment": "steady", "g": 1.0, "delta": 0.1, "fock_cutoff": 3},
        )
        out1 = tmp_path / "a.csv"
        assert main(["--config", str(cfg), "--out", str(out1)]) == 0
        meta = json.loads((tmp_path / "a.meta.json").read_text())
        cfg2 = self.write_config(tmp_path, meta["config"])
        out2 = tmp_path / "b.csv"
        assert main(["--config", str(cfg2), "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["--config", str(tmp_path / "nope.json")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_config_reports_error(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path, {"experiment": "steady", "g": 1.0})
        assert main(["--config", str(cfg)]) == 1
        assert "delta" in capsys.readouterr().err

    def test_cutoff_override_rejected_for_converge(self, tmp_path, capsys):
        cfg = self.write_config(
            tmp_path, {"experiment": "converge", "g": 1.0, "delta": 0.1}
        )
        assert main(["--config", str(cfg), "--cutoff", "4"]) == 1
        assert "override" in capsys.readouterr().err

    def test_run_reports_solver_failure(self, tmp_path, capsys):
        # a dissipation-free evolve from a state that cannot relax still
        # works; instead use converge with an impossible tolerance
        cfg = parse_config(
            json.dumps(
                {"experiment": "converge", "g": 1.0, "delta": 0.1, "tol": 1e-15}
            )
        )
        assert run(cfg, tmp_path / "x.csv") == 1
        assert "error:" in capsys.readouterr().err
