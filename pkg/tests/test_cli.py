from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from frameweave.cli import main
from frameweave.config import GRID_VAR, load_config
from frameweave.errors import ConfigError, ReportError
from frameweave.io.curves import read_curve
from frameweave.io.jsonio import dumps_report, emit_report, load_report, must_json
from frameweave.runtime.env import THREADS_VAR, detect_env, threads_from_env

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _run(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    return info.value.code


def test_bounds_command(tmp_path, capsys):
    out = tmp_path / "bounds"
    code = _run(["bounds", "--config", str(CONFIGS / "bounds_powerlaw.toml"), "--out", str(out), "--grid", "512"])
    assert code == 0
    report = load_report(out / "report.json")
    cert = report["result"]["certificate"]
    assert cert["A_num"] == pytest.approx(2.0, abs=1e-3)
    assert cert["B_num"] == pytest.approx(4.0, abs=1e-3)
    assert report["result"]["ordering_ok"] is True
    header, data = read_curve(out / "multiplier.csv")
    assert header == ["gamma", "m"]
    assert data.shape[0] == 512
    meta = json.loads((out / "meta.json").read_text())
    assert "wall_time_s" in meta and "report.json" in meta["files"]
    assert capsys.readouterr().out.startswith("bounds: A=")


def test_density_gate_refuses(tmp_path, capsys):
    code = _run(["density-gate", "--config", str(CONFIGS / "density_gate.toml"), "--out", str(tmp_path)])
    assert code == 2
    assert "abN = 1.333 > 1" in capsys.readouterr().out


def test_unknown_command(tmp_path, capsys):
    assert _run(["sharpen", "--out", str(tmp_path)]) == 1
    assert "unknown command" in capsys.readouterr().err


def test_bad_usage_is_an_error():
    assert _run(["bounds", "--grid", "many"]) == 1


def test_unknown_key_names_the_key(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[system]\na = 2.0\nb = 0.5\nc = 1\n")
    assert _run(["bounds", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "system.c" in capsys.readouterr().err
    with pytest.raises(ConfigError) as info:
        load_config("bounds", cfg)
    assert info.value.key == "system.c"


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config("bounds", tmp_path / "nope.toml")


def test_reports_are_reproducible(tmp_path):
    cfg = str(CONFIGS / "weave_sample.toml")
    for name in ("one", "two"):
        assert _run(["weave-sample", "--config", cfg, "--out", str(tmp_path / name), "--seed", "7", "--grid", "256"]) == 0
    one = (tmp_path / "one" / "report.json").read_bytes()
    two = (tmp_path / "two" / "report.json").read_bytes()
    assert one == two


def test_grid_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[system]\na = 2.0\nb = 0.5\n")
    monkeypatch.setenv(GRID_VAR, "300")
    assert load_config("bounds", cfg).grid_points == 300
    cfg.write_text("[system]\na = 2.0\nb = 0.5\n[numeric]\ngrid_points = 200\n")
    assert load_config("bounds", cfg).grid_points == 200
    assert load_config("bounds", cfg, grid=100).grid_points == 100
    monkeypatch.setenv(GRID_VAR, "lots")
    with pytest.raises(ConfigError):
        load_config("bounds")


def test_grid_floor():
    with pytest.raises(ConfigError) as info:
        load_config("bounds", grid=8)
    assert info.value.key == "numeric.grid_points"


def test_fusion_demo_reads_packet_file(tmp_path):
    out = tmp_path / "fusion"
    assert _run(["fusion-demo", "--config", str(CONFIGS / "fusion_demo.toml"), "--out", str(out)]) == 0
    entry = load_report(out / "report.json")["result"]["packets"][0]
    A, B = entry["fusion_bounds"]
    assert 0 < A <= B
    assert entry["decompose_residual"] <= 1e-10
    assert entry["expansion_residual"] <= 1e-10


def test_counterexample_rows(tmp_path):
    out = tmp_path / "ce"
    assert _run(["counterexample", "--config", str(CONFIGS / "counterexample.toml"), "--out", str(out)]) == 0
    for row in load_report(out / "report.json")["result"]["rows"]:
        assert row["ratio"] == pytest.approx(row["M"])


def test_non_finite_floats_are_strings():
    text = dumps_report({"b": math.inf, "a": [math.nan, -math.inf], "z": 1j})
    back = json.loads(text)
    assert back == {"a": ["nan", "-inf"], "b": "inf", "z": {"re": 0.0, "im": 1.0}}
    assert text.index('"a"') < text.index('"b"')


def test_must_json_strips_noise():
    assert must_json('log line\n{"x": 1}\ntrailer') == {"x": 1}


def test_unwritable_report(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ReportError):
        emit_report({"x": 1}, blocker / "sub" / "report.json")


def test_threads_from_env(monkeypatch):
    monkeypatch.delenv(THREADS_VAR, raising=False)
    assert threads_from_env() == 1
    monkeypatch.setenv(THREADS_VAR, "4")
    assert threads_from_env() == 4
    assert detect_env().threads == 4
    for bad in ("0", "-2", "four"):
        monkeypatch.setenv(THREADS_VAR, bad)
        with pytest.raises(ConfigError):
            threads_from_env()


def test_bounds_command_two_families(tmp_path):
    out = tmp_path / "family"
    code = _run(["bounds", "--config", str(CONFIGS / "bounds_family.toml"), "--out", str(out), "--grid", "512"])
    assert code == 0
    result = load_report(out / "report.json")["result"]
    cert = result["certificate"]
    expected = {
        "A_analytic": 0.25,
        "L_weave": 1.0 / 3.0,
        "A_num": 2.0 / 3.0,
        "B_num": 8.0 / 3.0,
        "U_weave": 10.0 / 3.0,
        "B_analytic": 20.0 / 3.0,
    }
    for key, value in expected.items():
        assert cert[key] == pytest.approx(value, abs=1e-3), key
    assert result["ordering_ok"] is True
    _, data = read_curve(out / "multiplier.csv")
    assert data.shape[0] == 512


def test_periodic_pattern_curve_has_grid_rows(tmp_path):
    cfg = tmp_path / "alt.toml"
    cfg.write_text(
        '[generator]\nkind = "powerlaw"\nalpha = 0.5\n'
        "[system]\na = 2.0\nb = 0.5\nN = 2\n"
        '[pattern]\nkind = "alternating"\n'
    )
    out = tmp_path / "alt"
    assert _run(["bounds", "--config", str(cfg), "--out", str(out), "--grid", "300"]) == 0
    _, data = read_curve(out / "multiplier.csv")
    assert data.shape[0] == 300
