"""End-to-end command line coverage for every subcommand."""

import json
import shutil
import subprocess

import numpy as np
import pytest

from kamconj.cli import main
from kamconj.io import load_map

from conftest import GOLDEN


def write_config(path, **overrides):
    raw = {
        "alpha": "golden",
        "initial_map": {"kind": "conjugate", "params": {"amplitude": 0.005}},
        "seed": 5,
        "smallness_c": 1e-6,
    }
    raw.update(overrides)
    path.write_text(json.dumps(raw))
    return path


class TestRun:
    def test_converged_run(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json")
        trace = tmp_path / "trace.csv"
        code = main(["run", "--config", str(cfg), "--trace", str(trace)])
        out = capsys.readouterr().out
        assert code == 0
        assert "status: converged" in out
        assert "conjugacy residual" in out
        lines = trace.read_text().splitlines()
        assert lines[0].startswith("n,N,eps0")
        assert len(lines) >= 2

    def test_quiet_suppresses_report(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json")
        code = main(["run", "--config", str(cfg), "--quiet"])
        assert code == 0
        assert capsys.readouterr().out == ""

    def test_drift_obstruction_exit_code(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "cfg.json",
            initial_map={"kind": "drifted", "params": {"delta": [0.01]}},
        )
        assert main(["run", "--config", str(cfg)]) == 4

    def test_outputs_and_overrides(self, tmp_path, capsys):
        final = tmp_path / "final.json"
        chain = tmp_path / "chain.json"
        cfg = write_config(tmp_path / "cfg.json")
        code = main(
            ["run", "--config", str(cfg), "--final-map", str(final), "--chain", str(chain), "--quiet"]
        )
        assert code == 0
        restored = load_map(final)
        assert abs(restored.rho[0] - GOLDEN) < 1e-9
        assert chain.exists()

    def test_bad_config_is_usage_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", typo=1)
        assert main(["run", "--config", str(cfg)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_file_is_usage_error(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_malformed_json_is_usage_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["run", "--config", str(bad)]) == 1


class TestParams:
    def test_default_report(self, capsys):
        assert main(["params"]) == 0
        out = capsys.readouterr().out
        assert "mu window: (7, 8)" in out
        assert "a=8 gamma0=24 s0=60 b=16" in out
        assert "omega0 bound" in out
        assert "VIOLATED" not in out

    def test_schedule_and_replay(self, capsys):
        assert main(["params", "--schedule", "4", "--replay", "10", "--N1", "8"]) == 0
        out = capsys.readouterr().out
        assert "schedule: [8, 23, 108, 1117]" in out
        assert "replay: ok=True steps=10" in out

    def test_start_cutoff_long_flag(self, capsys):
        assert main(["params", "--start-cutoff", "10", "--schedule", "3"]) == 0
        assert "schedule: [10, 32, 178]" in capsys.readouterr().out

    def test_infeasible_exit_code(self, capsys):
        assert main(["params", "--sigma", "0.2"]) == 3
        assert "infeasible:" in capsys.readouterr().out

    def test_explicit_mu_outside_window(self, capsys):
        assert main(["params", "--mu", "9.0"]) == 1
        assert "error:" in capsys.readouterr().err


class TestDcCheck:
    def test_reports_best_gamma_and_worst_mode(self, capsys):
        code = main(["dc-check", "--alpha", "golden", "--tau", "1", "--radius", "256"])
        out = capsys.readouterr().out
        assert code == 0
        assert "worst-case gamma over |k|_1 <= 256: 2.6180339887498953" in out
        assert "worst mode: k=" in out

    def test_claim_held(self, capsys):
        code = main(["dc-check", "--alpha", "golden", "--tau", "1", "--K", "64", "--gamma", "3.0"])
        assert code == 0
        assert "holds" in capsys.readouterr().out

    def test_claim_failed(self, capsys):
        code = main(["dc-check", "--alpha", "golden", "--tau", "1", "--K", "64", "--gamma", "2.0"])
        assert code == 3
        assert "FAILS" in capsys.readouterr().out

    def test_two_component_alpha(self, capsys):
        code = main(["dc-check", "--alpha", "0.414213,0.732050", "--tau", "2", "--K", "32"])
        assert code == 0

    def test_resonant_alpha_is_error(self, capsys):
        assert main(["dc-check", "--alpha", "0.5", "--tau", "1", "--K", "8"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_unparseable_alpha(self, capsys):
        assert main(["dc-check", "--alpha", "gold", "--tau", "1", "--K", "8"]) == 1


class TestCohomologyCommand:
    def test_solve_and_write(self, tmp_path, capsys):
        src = tmp_path / "map.json"
        out = tmp_path / "phi.json"
        assert (
            main(
                [
                    "make-map", "--kind", "single-mode", "--alpha", "golden",
                    "--seed", "0", "--modes", "[[1, 0.0, -0.0005]]", "--out", str(src),
                ]
            )
            == 0
        )
        capsys.readouterr()
        code = main(
            [
                "cohomology", "--map", str(src), "--alpha", "golden",
                "--tau", "1", "--cutoff", "8", "--out", str(out),
            ]
        )
        text = capsys.readouterr().out
        assert code == 0
        assert "component 0:" in text
        phi = load_map(out)
        assert phi.dim == 1
        assert phi.displacement[0].coefficient((1,)) != 0

    def test_dimension_mismatch(self, tmp_path, capsys):
        src = tmp_path / "map.json"
        main(
            [
                "make-map", "--kind", "random-decay", "--alpha", "golden",
                "--seed", "1", "--amplitude", "0.001", "--out", str(src),
            ]
        )
        capsys.readouterr()
        code = main(
            [
                "cohomology", "--map", str(src), "--alpha", "0.1,0.2",
                "--tau", "2", "--cutoff", "8",
            ]
        )
        assert code == 1


class TestRotationCommand:
    def test_rigid_rotation_hull(self, tmp_path, capsys):
        src = tmp_path / "map.json"
        main(
            [
                "make-map", "--kind", "single-mode", "--alpha", "golden",
                "--seed", "0", "--modes", "[[1, 0.0, -1e-12]]", "--out", str(src),
            ]
        )
        capsys.readouterr()
        hull_csv = tmp_path / "hull.csv"
        code = main(
            [
                "rotation", "--map", str(src), "--samples", "8",
                "--iters", "200", "--hull-out", str(hull_csv),
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "rotation hull diameter" in out
        assert hull_csv.read_text().startswith("x1\n")


class TestMakeMap:
    def test_conjugate_kind(self, tmp_path, capsys):
        out = tmp_path / "f.json"
        code = main(
            [
                "make-map", "--kind", "conjugate", "--alpha", "golden", "--seed", "7",
                "--amplitude", "0.01", "--degree", "2", "--out", str(out),
            ]
        )
        assert code == 0
        assert "wrote conjugate map" in capsys.readouterr().out
        f = load_map(out)
        assert f.dim == 1

    def test_drifted_kind_with_delta(self, tmp_path, capsys):
        out = tmp_path / "f.json"
        code = main(
            [
                "make-map", "--kind", "drifted", "--alpha", "golden", "--seed", "7",
                "--amplitude", "0.0", "--delta", "0.01", "--out", str(out),
            ]
        )
        assert code == 0
        f = load_map(out)
        assert f.rho[0] == pytest.approx(GOLDEN + 0.01, abs=1e-12)

    def test_unknown_kind_is_error(self, tmp_path, capsys):
        code = main(
            ["make-map", "--kind", "bogus", "--alpha", "golden", "--seed", "0", "--out", str(tmp_path / "x.json")]
        )
        assert code == 1

    def test_2d_alpha(self, tmp_path, capsys):
        out = tmp_path / "f2.json"
        code = main(
            [
                "make-map", "--kind", "random-decay", "--alpha", "0.414,0.732",
                "--seed", "3", "--amplitude", "0.001", "--degree", "2", "--out", str(out),
            ]
        )
        assert code == 0
        assert load_map(out).dim == 2


def test_console_script_installed():
    exe = shutil.which("kamconj")
    assert exe is not None
    proc = subprocess.run(
        [exe, "dc-check", "--alpha", "golden", "--tau", "1", "--K", "64"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "worst-case gamma" in proc.stdout
