"""
End-to-end tests of the julia-pressure command line.
"""

import json

import numpy as np
import pytest

from julia_pressure.errors import BudgetExceeded, ConfigError, UnsafeBasepoint
from julia_pressure.main import build_parser, handle_error, main, merge_config
from julia_pressure.config import load_config
from julia_pressure.storage.results import ResultStore

FAST = ["--family", "chebyshev", "--depth", "8", "--max-period", "3", "--log-level", "WARNING"]


def run_cli(tmp_path, command, *extra):
    return main([command, *FAST, *extra, "--out", str(tmp_path)])


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_analyze_writes_exceptional_set(tmp_path):
    assert run_cli(tmp_path, "analyze") == 0
    report = read_json(tmp_path / "analysis.json")
    points = sorted(p[0] for p in report["exceptional"]["points"])
    assert points == pytest.approx([-2.0, 2.0])
    assert report["degree_constant"]["D"] == 2
    assert report["chi_ess"][0]["chi_ess"] == pytest.approx(np.log(2.0))
    assert report["chi_sup"]["value"] == pytest.approx(np.log(4.0))
    assert report["family"] == "chebyshev"
    assert len(report["config_hash"]) == 16


def test_pressure_outputs_share_config_hash(tmp_path):
    assert run_cli(tmp_path, "pressure") == 0
    digest, header, rows = ResultStore.read_csv(tmp_path / "pressure.csv")
    assert header == ["t", "hidden", "full", "convergence", "tree"]
    assert len(rows) == 21
    summary = read_json(tmp_path / "pressure.json")
    assert summary["config_hash"] == digest
    assert summary["t_minus"] < 0
    assert summary["robustness"] is not None


def test_pressure_without_exceptional_set_omits_t_minus(tmp_path):
    args = ["pressure", "--family", "power", "--depth", "8", "--max-period", "3",
            "--log-level", "WARNING", "--out", str(tmp_path)]
    assert main(args) == 0
    summary = read_json(tmp_path / "pressure.json")
    assert "t_minus" not in summary
    assert summary["robustness"] is None


def test_spectrum_outputs(tmp_path):
    assert run_cli(tmp_path, "spectrum") == 0
    _, header, rows = ResultStore.read_csv(tmp_path / "spectrum.csv")
    assert header == ["alpha", "F"]
    assert rows
    report = read_json(tmp_path / "spectrum.json")
    assert report["audit"]["no_closed_form"] is False
    assert report["audit"]["degree_constant"]["D"] == 2
    assert "gap_property" in report["audit"]


def test_measure_outputs(tmp_path):
    assert run_cli(tmp_path, "measure", "--t", "0.0") == 0
    _, header, rows = ResultStore.read_csv(tmp_path / "atoms.csv")
    assert header == ["re", "im", "weight", "n"]
    weights = np.array([float(r[2]) for r in rows])
    assert np.sum(weights) == pytest.approx(1.0)
    report = read_json(tmp_path / "measure.json")
    assert report["mass"]["at_least_one"]
    assert report["mass"]["restriction_identity"]
    assert report["blowup"] is not None
    assert "atoms" not in report


def test_pliss_with_verification(tmp_path):
    assert run_cli(tmp_path, "pliss", "--x", "0.3,0", "--chi", "0.5", "--pliss-n", "30", "--verify") == 0
    report = read_json(tmp_path / "pliss.json")
    assert report["verify"]["agree"]
    assert report["times"] == report["verify"]["bruteforce"]
    assert report["chi"] == 0.5
    assert "shadow" not in report


def test_map_file(tmp_path):
    spec = tmp_path / "map.txt"
    spec.write_text("# z^2 - 2 by coefficients\nnum: (-2, 0), (0, 0), (1, 0)\nden: (1, 0)\n", encoding="utf-8")
    out = tmp_path / "out"
    assert main(["analyze", "--map", str(spec), "--max-period", "3", "--log-level", "WARNING",
                 "--out", str(out)]) == 0
    report = read_json(out / "analysis.json")
    assert report["family"] is None
    assert len(report["exceptional"]["points"]) == 2


def test_config_errors_exit_2(tmp_path, capsys):
    assert run_cli(tmp_path, "analyze", "--depth", "1") == 2
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["type"] == "ConfigError"
    assert main(["analyze", "--family", "mandelbrot", "--out", str(tmp_path)]) == 2
    assert main(["analyze", "--map", str(tmp_path / "missing.txt"), "--out", str(tmp_path)]) == 2
    assert main(["analyze", "--out", str(tmp_path)]) == 2


def test_numeric_errors_exit_3(tmp_path):
    assert run_cli(tmp_path, "pressure", "--basepoint", "2,0") == 3


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["transmogrify"])
    assert info.value.code == 2


def test_handle_error_payloads():
    payload, code = handle_error(ConfigError("bad grid"))
    assert code == 2
    assert payload == {"error": "bad grid", "type": "ConfigError"}
    payload, code = handle_error(BudgetExceeded(4096, 100))
    assert code == 3
    assert payload["requested"] == 4096
    assert payload["budget"] == 100
    payload, _ = handle_error(UnsafeBasepoint("too close"))
    assert "diagnostics" not in payload


def test_merge_config_overrides_environment():
    args = build_parser().parse_args(["measure", "--family", "power", "--depth", "5", "--gap", "0.2",
                                      "--basepoint", "0.5,0.5"])
    merged = merge_config(load_config(), args)
    assert merged["depth"] == 5
    assert merged["pressure_gap"] == 0.2
    assert merged["basepoint"] == complex(0.5, 0.5)
    assert merged["t_step"] == load_config()["t_step"]


def test_short_t_grid_exits_2(tmp_path, capsys):
    code = run_cli(tmp_path, "spectrum", "--t-min", "0", "--t-max", "0.1", "--t-step", "0.25")
    assert code == 2
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["type"] == "ConfigError"
    assert "t grid" in payload["error"]
