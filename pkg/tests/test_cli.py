import json
import subprocess
import sys

import pytest

from artrac import fileio
from artrac.cli import main
from artrac.fileio import DATA_DIR
from artrac.sim import default_road

SMALL_GRID = """
[scenario]
seed = 3

[grid]
gears = ["F1", "F3"]
loads = ["zero"]
"""


@pytest.fixture
def small_grid(tmp_path):
    p = tmp_path / "grid.toml"
    p.write_text(SMALL_GRID)
    return str(p)


def test_shipped_road_is_the_default():
    assert fileio.load_road(DATA_DIR / "road_default.toml") == default_road()


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "simulate" in capsys.readouterr().out


def test_console_script_module_entry():
    out = subprocess.run([sys.executable, "-m", "artrac.cli", "tune", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "--detector" in out.stdout


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])
    assert exc.value.code == 2


def test_missing_file_exits_two(tmp_path, capsys):
    assert main(["simulate", "--road", str(tmp_path / "none.toml"), "--out", str(tmp_path)]) == 2
    assert "no such file" in capsys.readouterr().err


def test_bad_config_exits_two(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[scenario]\ngear = 'F9'\n")
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_infeasible_road_exits_one(tmp_path):
    p = tmp_path / "road.toml"
    p.write_text("[[segments]]\nkind = 'arc'\nlength = 1.0\nsteering_deg = 45.0\n")
    assert main(["simulate", "--road", str(p), "--out", str(tmp_path)]) == 1


def test_simulate_tune_detect(tmp_path, small_grid, capsys):
    sim = tmp_path / "sim"
    cfg = str(DATA_DIR / "slip_wheeltach.toml")
    assert main(["simulate", "--config", cfg, "--out", str(sim)]) == 0
    assert (sim / "truth.csv").exists() and (sim / "sensors.csv").exists()
    prof = tmp_path / "wt.toml"
    assert main(["tune", "--detector", "wheeltach", "--config", small_grid, "--out", str(prof)]) == 0
    for k in ("cloud", "envelope", "hull", "bounds"):
        assert (tmp_path / f"wt.{k}.csv").exists()
    assert fileio.load_profile(prof).detector == "wheeltach"
    capsys.readouterr()
    assert main(["detect", str(sim / "sensors.csv"), "--profile", str(prof), "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "engagements 1" in out and "latency" in out
    events = (sim / "sensors.events.ndjson").read_text().splitlines()
    assert json.loads(events[1])["action"] in ("brake", "engage")


def test_detect_mismatches_exit_two(tmp_path, small_grid):
    sim = tmp_path / "sim"
    assert main(["simulate", "--out", str(sim)]) == 0
    prof = tmp_path / "g.toml"
    assert main(["tune", "--detector", "ground", "--config", small_grid, "--out", str(prof)]) == 0
    stream = str(sim / "sensors.csv")
    assert main(["detect", stream, "--profile", str(prof), "--detector", "basic"]) == 2
    # the ground profile needs a ground-speed stream
    assert main(["detect", stream, "--profile", str(prof)]) == 2


def test_validate_small_grid(tmp_path, small_grid, capsys):
    out = tmp_path / "table.csv"
    rc = main(["validate", "--config", small_grid, "--out", str(out)])
    text = capsys.readouterr().out
    assert rc == 0 and "PASS steering_rate_matters" in text
    _, header, rows = fileio.read_csv(out)
    assert header[0] == "load" and len(rows) == 2


def _outputs(tmp_path, tag, small_grid):
    d = tmp_path / tag
    assert main(["simulate", "--seed", "5", "--out", str(d)]) == 0
    assert main(["tune", "--detector", "basic", "--config", small_grid, "--out", str(d / "p.toml")]) == 0
    assert main(["validate", "--config", small_grid, "--out", str(d / "v.csv")]) == 0
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_outputs_are_byte_identical(tmp_path, small_grid):
    a = _outputs(tmp_path, "a", small_grid)
    b = _outputs(tmp_path, "b", small_grid)
    assert a.keys() == b.keys() and len(a) == 8
    for name in a:
        assert a[name] == b[name], name
