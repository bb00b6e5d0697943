import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from crmap.cli import EXIT_NO_PLAN, EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps({
        "sim": {"duration_s": 0.5, "seed": 2},
        "noise_sweep": {"noise_vars": [0.04, 0.0025]},
        "montecarlo": {"n_maps": 3},
        "oracle": {"trials": 6, "lemma_worlds": 2},
        "plan": {"goal_x": 0.3, "goal_y": 0.3, "candidates": 3, "iterations": 500},
    }))
    return path


def csv_bytes(out: Path) -> dict:
    return {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*.csv"))}


def rows(path: Path) -> list:
    with path.open() as fh:
        return list(csv.DictReader(fh))


def test_simulate_writes_artifacts(tmp_path, small_config):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(small_config), "--out", str(out)]) == EXIT_OK
    for name in ("error_series.csv", "inconsistency.csv", "map.csv", "map_mean.pgm", "truth.pgm", "run.json"):
        assert (out / name).exists(), name
    series = rows(out / "error_series.csv")
    assert len(series) == 5 and list(series[0]) == ["t", "error"]
    assert len(rows(out / "map.csv")) == 400
    meta = json.loads((out / "run.json").read_text())
    assert meta["rng"] == "numpy.random.PCG64"
    assert b"\r\n" not in (out / "map.csv").read_bytes()


@pytest.mark.parametrize(
    "verb, extra",
    [
        ("simulate", []),
        ("sweep-noise", []),
        ("montecarlo", []),
        ("plan", []),
        ("oracle-check", []),
    ],
)
def test_repeat_runs_are_byte_identical(tmp_path, small_config, verb, extra):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main([verb, "--config", str(small_config), "--out", str(out), *extra]) == EXIT_OK
    assert csv_bytes(a) and csv_bytes(a) == csv_bytes(b)


@pytest.mark.parametrize("verb", ["sweep-noise", "montecarlo", "sweep-ism"])
def test_parallelism_does_not_change_outputs(tmp_path, small_config, verb):
    serial, parallel = tmp_path / "j1", tmp_path / "j2"
    assert main([verb, "--config", str(small_config), "--out", str(serial), "--jobs", "1"]) == EXIT_OK
    assert main([verb, "--config", str(small_config), "--out", str(parallel), "--jobs", "2"]) == EXIT_OK
    assert csv_bytes(serial) == csv_bytes(parallel)


def test_seed_flag_changes_outputs(tmp_path, small_config):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["simulate", "--config", str(small_config), "--out", str(a), "--seed", "1"])
    main(["simulate", "--config", str(small_config), "--out", str(b), "--seed", "2"])
    assert csv_bytes(a) != csv_bytes(b)


def test_sweep_ism_table(tmp_path, small_config):
    out = tmp_path / "sweep"
    assert main(["sweep-ism", "--config", str(small_config), "--out", str(out)]) == EXIT_OK
    table = rows(out / "bars.csv")
    assert len(table) == 37
    assert table[0]["q_offset"] == "0.05" and table[0]["r_ramp"] == "0.05"
    assert table[-1]["method"] == "crm" and table[-1]["config_id"] == "36"


def test_montecarlo_maps_flag(tmp_path, small_config):
    out = tmp_path / "mc"
    assert main(["montecarlo", "--config", str(small_config), "--out", str(out), "--maps", "2"]) == EXIT_OK
    table = rows(out / "montecarlo.csv")
    assert [r["map_index"] for r in table] == ["0", "1"]


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"sensor": {"nosie_var": 0.1}}))
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    assert "sensor.nosie_var" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate"],
        ["fly", "--out", "x"],
        ["simulate", "--out", "x", "--config", "/nonexistent.json"],
        ["montecarlo", "--out", "x", "--jobs", "0"],
        ["simulate", "--out", "x", "--seed", "-3"],
    ],
)
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_goal_outside_grid_is_usage_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sim": {"duration_s": 0.1}, "plan": {"goal_x": 9.0}}))
    assert main(["plan", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_no_plan_exit_code(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sim": {"duration_s": 0.1}, "plan": {"goal_x": 0.9, "goal_y": 0.9, "iterations": 1}}))
    assert main(["plan", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_NO_PLAN


def test_plan_outputs(tmp_path, small_config):
    out = tmp_path / "plan"
    assert main(["plan", "--config", str(small_config), "--out", str(out)]) == EXIT_OK
    cands = rows(out / "candidates.csv")
    steps = rows(out / "plan.csv")
    assert 1 <= len(cands) <= 3
    best = [r for r in cands if r["chosen"] == "1"]
    assert len(best) == 1
    assert float(best[0]["cost"]) == min(float(r["cost"]) for r in cands)
    assert len(steps) == int(best[0]["waypoints"])
    assert float(steps[-1]["cumulative_cost"]) == float(best[0]["cost"])


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "crmap.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "sweep-ism" in res.stdout
