"""End-to-end command tests driving main() in process."""

import json
import subprocess
import sys

import numpy as np
import pytest

from qpoisson import PoissonSystem, eigenpairs
from qpoisson.analytics import SWEEP_COLUMNS
from qpoisson.cli import main, mitigation_trial
from qpoisson.noise import ReadoutModel


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_exact_stdout(capsys):
    code, out, err = run_cli(
        capsys, "solve", "--preset", "table1-3x3", "--f", "0", "--l", "10"
    )
    assert code == 0
    assert "problem 3x3 (n=2, d=1)" in out
    assert "mode=explicit" in out
    assert "i=6 f=0 l=10" in out
    assert "relative error" in out
    assert "success probability:" in out


def test_solve_json_artifact_is_reproducible(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        code, out, _ = run_cli(
            capsys,
            "solve", "--preset", "table1-3x3", "--f", "0", "--l", "10",
            "--output", str(path),
        )
        assert code == 0
        assert f"wrote {path}" in out
    assert paths[0].read_bytes() == paths[1].read_bytes()
    payload = json.loads(paths[0].read_text())
    assert payload["config"]["preset"] == "table1-3x3"
    assert payload["config"]["fraction_bits"] == 0
    assert payload["mode_resolved"] == "explicit"
    assert "run_percent" in payload["success_probability"]
    assert len(payload["solution"]) == 3


def test_solve_sample_backend_payload(capsys, tmp_path):
    path = tmp_path / "sampled.json"
    code, _, _ = run_cli(
        capsys,
        "solve", "--preset", "table1-3x3", "--f", "0", "--l", "10",
        "--backend", "sample", "--shots", "20000", "--seed", "9",
        "--output", str(path),
    )
    assert code == 0
    payload = json.loads(path.read_text())
    assert payload["rng"] == "PCG64"
    assert sum(payload["histogram"].values()) == 20000
    assert all(len(k) == 3 for k in payload["histogram"])
    assert "empirical_percent" in payload["success_probability"]


def test_solve_csv_solution_rows(capsys, tmp_path):
    path = tmp_path / "solution.csv"
    code, _, _ = run_cli(
        capsys,
        "solve", "--preset", "table1-3x3", "--f", "0", "--l", "10",
        "--format", "csv", "--output", str(path),
    )
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config ")
    assert lines[1] == "index,amplitude"
    assert len(lines) == 5


def test_verify_phase_eigenvector(capsys):
    code, out, _ = run_cli(
        capsys,
        "verify-phase", "--preset", "table1-3x3", "--f", "0", "--l", "10",
        "--eigen-index", "2",
    )
    assert code == 0
    assert out.strip() == "100000 (decimal 32): 1.000000"


def test_verify_phase_mixed_input(capsys, tmp_path):
    system = PoissonSystem(n=2, b=np.array([2**-0.5, 0.5, 0.5]))
    u = eigenpairs(system).vectors
    vec = 0.5 * u[:, 0] + 2**-0.5 * u[:, 1] + 0.5 * u[:, 2]
    path = tmp_path / "phase.json"
    code, out, _ = run_cli(
        capsys,
        "verify-phase", "--n", "2", "--b", ",".join(repr(float(x)) for x in vec),
        "--f", "0", "--l", "10",
        "--input", ",".join(repr(float(x)) for x in vec),
        "--output", str(path),
    )
    assert code == 0
    probs = json.loads(path.read_text())["probabilities"]
    assert probs["001001"] == pytest.approx(0.25, abs=1e-10)
    assert probs["100000"] == pytest.approx(0.5, abs=1e-10)
    assert probs["110110"] == pytest.approx(0.25, abs=1e-10)
    assert "(decimal 9)" in out and "(decimal 32)" in out and "(decimal 54)" in out


def test_verify_phase_input_flag_conflicts(capsys):
    code, _, err = run_cli(
        capsys,
        "verify-phase", "--preset", "table1-3x3",
        "--eigen-index", "1", "--input", "1.0,0.0,0.0",
    )
    assert code == 2
    assert "not both" in err
    code, _, err = run_cli(capsys, "verify-phase", "--preset", "table1-3x3")
    assert code == 2
    assert "needs --eigen-index or --input" in err


def test_sweep_csv(capsys, tmp_path):
    path = tmp_path / "sweep.csv"
    code, _, _ = run_cli(
        capsys,
        "sweep", "--preset", "table1-3x3", "--l", "16",
        "--f-values", "0,4,8", "--format", "csv", "--output", str(path),
    )
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config ")
    assert lines[1] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 5
    errors = [float(line.split(",")[4]) for line in lines[2:]]
    assert errors == sorted(errors, reverse=True)
    assert [line.split(",")[1] for line in lines[2:]] == ["0", "4", "8"]


def test_sweep_rejects_empty_f_values(capsys):
    code, _, err = run_cli(
        capsys, "sweep", "--preset", "table1-3x3", "--f-values", ""
    )
    assert code == 2
    assert "at least one f value" in err


def test_resources_header_only(capsys):
    code, out, _ = run_cli(
        capsys, "resources", "--n-values", "", "--format", "csv"
    )
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 2
    assert lines[1] == ",".join(
        ("problem", "n", "f", "l", "mode", "qubits", "b_width", "e_width",
         "a_width", "gates", "depth", "cnots_est", "fidelity", "washed_out")
    )


def test_resources_fused_qubit_totals(capsys, tmp_path):
    path = tmp_path / "resources.json"
    code, _, _ = run_cli(
        capsys,
        "resources", "--n-values", "2,3,4", "--mode", "fused",
        "--output", str(path),
    )
    assert code == 0
    rows = json.loads(path.read_text())["rows"]
    assert [row["qubits"] for row in rows] == [17, 20, 23]
    assert all(row["mode"] == "fused" for row in rows)
    depths = [row["depth"] for row in rows]
    assert depths[0] < depths[1] < depths[2]


def test_mitigate_demo_improves_error(capsys):
    code, out, _ = run_cli(capsys, "mitigate-demo", "--shots", "100000")
    assert code == 0
    assert "mitigation helped" in out


def test_mitigation_trial_roundtrip():
    model = ReadoutModel.uniform(2, 0.02, 0.05)
    trial = mitigation_trial(np.array([0.0, 0.5, 0.25, 0.25]), model, 100_000, seed=4)
    assert trial["relative_error_mitigated"] < trial["relative_error_unmitigated"]
    assert sum(trial["mitigated_distribution"]) == pytest.approx(1.0, abs=1e-9)


def test_config_file_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"fraction_bits": 0, "angle_bits": 10}))
    code, out, _ = run_cli(
        capsys, "solve", "--preset", "table1-3x3", "--config", str(cfg)
    )
    assert code == 0
    assert "i=6 f=0 l=10" in out
    code, out, _ = run_cli(
        capsys, "solve", "--preset", "table1-3x3", "--config", str(cfg), "--f", "4"
    )
    assert code == 0
    assert "i=6 f=4 l=10" in out


def test_config_file_rejects_unknown_keys(capsys, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"fraction_bitz": 0}))
    code, _, err = run_cli(
        capsys, "solve", "--preset", "table1-3x3", "--config", str(cfg)
    )
    assert code == 2
    assert "unknown config keys" in err


def test_bad_choice_exits_2(capsys):
    assert run_cli(capsys, "solve", "--preset", "table1-3x3", "--mode", "sideways")[0] == 2


def test_preset_and_explicit_problem_conflict(capsys):
    code, _, err = run_cli(
        capsys, "solve", "--preset", "table1-3x3", "--n", "2", "--b", "1,1,1"
    )
    assert code == 2
    assert "not both" in err


def test_explicit_mode_over_budget_exits_3(capsys):
    code, _, err = run_cli(
        capsys, "solve", "--preset", "table1-15x15", "--mode", "explicit"
    )
    assert code == 3
    assert "error:" in err


def test_auto_downgrade_warns(capsys):
    code, _, err = run_cli(capsys, "solve", "--preset", "table1-7x7")
    assert code == 0
    assert "auto mode chose the fused rotation" in err


def test_module_entry_point_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "qpoisson", "solve", "--n", "1", "--b", "1.0",
         "--f", "0", "--l", "8"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "problem 1x1" in proc.stdout
