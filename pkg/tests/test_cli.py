import csv
import io
import json

import pytest

from kinetic.errors import ConfigError
from kinetic.main import build_parser, main, read_config_file

SMALL_ALGEBRA = {
    "d": 1,
    "degree": 2,
    "triples": 3,
    "gk_levels": [1, 2],
    "gn_sizes": [3, 4],
    "eps_N_max": 3,
    "eps_degree": 2,
    "filtration_lj_max": 2,
    "rank_degree": 1,
    "definition_pairs": 10,
}


def write_json(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def run_json(tmp_path, command, data, *extra):
    out = tmp_path / f"{command}.out"
    code = main([command, "--config", write_json(tmp_path, data), "--out", str(out), *extra])
    return code, out


# ---------- argparse ----------

def test_parser_knows_every_subcommand():
    parser = build_parser()
    for name in ("algebra-check", "morphism-check", "nbody", "vlasov1d", "meanfield", "limits"):
        args = parser.parse_args([name, "--seed", "3", "--mode", "exact"])
        assert args.command == name and args.seed == 3


@pytest.mark.parametrize(
    "argv",
    [[], ["unknown"], ["nbody", "--mode", "symbolic"], ["nbody", "--seed", "x"], ["algebra-check", "--fault-injection", "1,2"]],
)
def test_bad_arguments_exit_2(argv):
    assert main(argv) == 2


def test_version_exits_0(capsys):
    assert main(["--version"]) == 0
    assert "kinetic" in capsys.readouterr().out


# ---------- archivos de configuración ----------

def test_ini_config(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[run]\nN = 3\npotential = polynomial:x^2\ngk_levels = [1, 2]\n", encoding="utf-8")
    assert read_config_file(str(path)) == {"N": 3, "potential": "polynomial:x^2", "gk_levels": [1, 2]}


def test_ini_with_extra_section_exits_2(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[run]\nsteps = 10\n[otra]\nx = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config_file(str(path))
    assert main(["nbody", "--config", str(path)]) == 2


def test_missing_or_malformed_config(tmp_path):
    assert main(["nbody", "--config", str(tmp_path / "nada.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]", encoding="utf-8")
    assert main(["nbody", "--config", str(bad)]) == 2


def test_unknown_key_exits_2(tmp_path, capsys):
    code, _ = run_json(tmp_path, "nbody", {"steps": 10, "stepz": 3})
    assert code == 2
    assert "stepz" in capsys.readouterr().err


def test_degree_above_cap_exits_2(tmp_path):
    code, _ = run_json(tmp_path, "algebra-check", {**SMALL_ALGEBRA, "degree": 3, "degree_cap": 2})
    assert code == 2


def test_negative_seed_exits_2():
    assert main(["limits", "--seed", "-1"]) == 2


def test_fault_injection_only_where_supported():
    assert main(["nbody", "--fault-injection", "1,1,1"]) == 2


def test_float_mode_rejected_by_algebra_check():
    assert main(["algebra-check", "--mode", "float"]) == 2


# ---------- subcomandos ----------

def test_algebra_check_passes(tmp_path):
    code, out = run_json(tmp_path, "algebra-check", SMALL_ALGEBRA, "--seed", "5")
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["passed"] is True
    assert report["command"] == "algebra-check"
    assert report["seed"] == 5
    assert report["total_checks"] == sum(s["checks"] for s in report["suites"])


def test_algebra_check_with_fault_injection_fails(tmp_path):
    code, out = run_json(tmp_path, "algebra-check", SMALL_ALGEBRA, "--fault-injection", "2,2,1")
    assert code == 1
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["passed"] is False
    assert report["fault_injection"] == [2, 2, 1]
    assert "suite" in report["counterexample"]


def test_reports_are_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    _, out_a = run_json(a, "algebra-check", SMALL_ALGEBRA, "--seed", "9")
    _, out_b = run_json(b, "algebra-check", SMALL_ALGEBRA, "--seed", "9")
    assert out_a.read_bytes() == out_b.read_bytes()


def test_morphism_check_passes(tmp_path):
    cfg = {"N": 2, "count": 3, "contract_count": 2, "bbgky_N_max": 2}
    code, out = run_json(tmp_path, "morphism-check", cfg)
    assert code == 0
    names = {s["name"] for s in json.loads(out.read_text(encoding="utf-8"))["suites"]}
    assert "morphism:iota_mar" in names
    assert "explicit:H_Vl" in names



def test_morphism_check_writes_one_row_per_trial(tmp_path):
    trials = tmp_path / "trials.csv"
    cfg = {"N": 2, "count": 3, "contract_count": 1, "bbgky_N_max": 1, "trials_out": str(trials)}
    code, _ = run_json(tmp_path, "morphism-check", cfg, "--seed", "4")
    assert code == 0
    rows = list(csv.reader(io.StringIO(trials.read_text(encoding="utf-8"))))
    assert rows[0] == ["map", "F", "G", "seed", "residual"]
    body = rows[1:]
    assert len(body) == 4 * 3
    assert [r[0] for r in body[::3]] == ["iota_EM", "iota_Lio", "iota_mar", "iota_factorize"]
    assert all(r[4] == "0" for r in body)
    assert all(json.loads(r[1])["type"] and json.loads(r[2])["type"] for r in body)
    assert len({r[3] for r in body}) == len(body)

def test_morphism_check_float_mode(tmp_path):
    cfg = {"N": 2, "count": 3, "potential": "gaussian:1:0.7"}
    code, out = run_json(tmp_path, "morphism-check", cfg, "--mode", "float")
    assert code == 0
    assert json.loads(out.read_text(encoding="utf-8"))["mode"] == "float"


def test_morphism_check_exact_mode_needs_polynomial_potential(tmp_path):
    code, _ = run_json(tmp_path, "morphism-check", {"potential": "gaussian"})
    assert code == 2


def test_nbody_writes_trajectory_and_report(tmp_path):
    report = tmp_path / "summary.json"
    cfg = {"N": 2, "initial": "harmonic_pair", "dt": 0.001, "steps": 6000, "record_every": 1,
           "reverse_check": True, "report": str(report)}
    code, out = run_json(tmp_path, "nbody", cfg)
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,particle,x_1,v_1"
    assert len(lines) == 1 + 6001 * 2
    summary = json.loads(report.read_text(encoding="utf-8"))
    assert summary["period"] == pytest.approx(3.14159265, rel=1e-4)
    assert summary["reverse_error"] < 1e-9


def test_vlasov1d_diagnostics(tmp_path):
    grid_out = tmp_path / "final.csv"
    cfg = {"Nx": 16, "Nv": 16, "steps": 5, "grid_out": str(grid_out)}
    code, out = run_json(tmp_path, "vlasov1d", cfg)
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,mass,momentum,energy"
    assert len(lines) == 1 + 6
    assert grid_out.read_text(encoding="utf-8").startswith("L,V,Nx,Nv\n")


def test_meanfield_table(tmp_path):
    cfg = {"Nx": 16, "Nv": 16, "N_list": [4, 8], "T": 0.05, "replicas": 2, "require_monotone": False}
    code, out = run_json(tmp_path, "meanfield", cfg)
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "N,seed,observable,empirical_value,grid_value,abs_error"
    assert len(lines) == 1 + 2 * 2 * 5


def test_limits_passes(tmp_path):
    code, out = run_json(tmp_path, "limits", {"pairs": 5})
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["passed"] is True
    assert report["ratios"]
    assert all(1.8 <= r["ratio"] <= 2.2 for r in report["ratios"])
    assert [g["N"] for g in report["generator_gaps"]] == [10, 100, 1000]
