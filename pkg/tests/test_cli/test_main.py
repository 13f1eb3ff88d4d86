import csv
import json
import sys
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

from gcckit.cli.main import build_parser, run

CONFIGS = Path(__file__).parents[2] / "configs"


@pytest.fixture(autouse=True)
def restore_logging():
    yield
    logger.remove()
    logger.add(sys.stderr)


def read_csv(path):
    with path.open(encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture
def spectrum_report(tmp_path):
    code = run(["--quiet", "spectrum", "--config", str(CONFIGS / "interval.toml"), "--count", "5", "--out", str(tmp_path)])
    assert code == 0
    return tmp_path / "spectrum.json"


# ------------------------------------------------------------------------------
# Reports
# ------------------------------------------------------------------------------


def test_spectrum_writes_a_csv_and_a_report(spectrum_report):
    rows = read_csv(spectrum_report.with_suffix(".csv"))
    assert [row["nu"] for row in rows] == ["1", "2", "3", "4", "5"]
    np.testing.assert_allclose(float(rows[0]["lambda"]), np.pi**2, rtol=1e-2)

    report = read_json(spectrum_report)
    assert report["command"] == "spectrum"
    assert report["arguments"] == {"count": 5}
    assert report["config"]["domain"]["kind"] == "interval"
    assert report["config"]["solver"]["resolution"] == 1601
    assert report["exit_code"] == 0
    assert list(report) == sorted(report)


def test_reports_differ_only_by_creation_time(spectrum_report, tmp_path):
    again = tmp_path / "again"
    run(["--quiet", "spectrum", "--config", str(CONFIGS / "interval.toml"), "--count", "5", "--out", str(again)])
    first, second = read_json(spectrum_report), read_json(again / "spectrum.json")
    first.pop("created")
    second.pop("created")
    assert first == second


def test_replay_reproduces_a_report(spectrum_report):
    assert run(["--quiet", "--replay", str(spectrum_report)]) == 0


def test_replay_detects_changed_results(spectrum_report):
    report = read_json(spectrum_report)
    report["results"]["lambdas"][0] *= 1.001
    spectrum_report.write_text(json.dumps(report), encoding="utf-8")
    assert run(["--quiet", "--replay", str(spectrum_report)]) == 1


def test_replay_rejects_other_files(tmp_path, capsys):
    path = tmp_path / "notes.json"
    path.write_text('{"command": "spectrum"}', encoding="utf-8")
    assert run(["--replay", str(path)]) == 1
    assert "lacks" in capsys.readouterr().err


# ------------------------------------------------------------------------------
# Errors
# ------------------------------------------------------------------------------


def test_unknown_key_exits_with_one_line(tmp_path, capsys):
    path = tmp_path / "typo.toml"
    path.write_text('[domain]\nkind = "interval"\nlenght = 2.0\n', encoding="utf-8")
    assert run(["divide", "--config", str(path), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    lines = [line for line in err.splitlines() if "lenght" in line]
    assert len(lines) == 1
    assert "domain.lenght" in lines[0]
    assert "(line 3)" in lines[0]


def test_missing_config_file_exits_with_one(tmp_path):
    assert run(["--quiet", "spectrum", "--config", str(tmp_path / "absent.toml")]) == 1


def test_command_or_replay_is_required():
    with pytest.raises(SystemExit):
        run([])


def test_help_lists_every_command(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--help"])
    out = capsys.readouterr().out
    for command in ("trace", "gcc", "tgcc", "observe", "spectrum", "measure", "divide", "perturb"):
        assert command in out


# ------------------------------------------------------------------------------
# Commands end to end
# ------------------------------------------------------------------------------


def test_divide_writes_its_table(tmp_path):
    assert run(["--quiet", "divide", "--config", str(CONFIGS / "halfplane.toml"), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "divide.csv")
    assert len(rows) == 8
    for row in rows:
        tau = float(row["tau"])
        assert abs(float(row["b1_re"]) - (tau**2 + tau - 1)) <= 1e-10


def test_trace_draws_chords_of_the_disc(tmp_path):
    args = ["--quiet", "trace", "--config", str(CONFIGS / "disc.toml"), "--init", "x=0,0;dir=30deg", "--time", "3"]
    assert run([*args, "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "trace.csv")
    x = np.array([[float(row["x1"]), float(row["x2"])] for row in rows])
    assert np.all(np.linalg.norm(x, axis=1) <= 1.0 + 1e-6)
    assert float(rows[-1]["t"]) == pytest.approx(3.0)
    assert any("reflect" in row["event"] for row in rows)
    assert (tmp_path / "trace.svg").read_text(encoding="utf-8").lstrip().startswith("<?xml")


@pytest.mark.slow
def test_gcc_fails_on_the_trapped_strip(tmp_path):
    args = ["--quiet", "gcc", "--config", str(CONFIGS / "square_strip.toml"), "--time", "10"]
    assert run([*args, "--out", str(tmp_path)]) == 2
    report = read_json(tmp_path / "gcc.json")
    assert report["results"]["verdict"] == "fails"
    witnesses = read_json(tmp_path / "witnesses.json")
    assert witnesses["witnesses"]
    assert all(witnesses["verified"])
    # a trapped ray moves vertically, outside the strip
    for witness in witnesses["witnesses"]:
        assert abs(witness["xi"][0]) <= 1e-6
        assert witness["x"][0] >= 0.29
    assert (tmp_path / "witnesses.svg").exists()
    assert run(["--quiet", "--replay", str(tmp_path / "gcc.json")]) == 0


@pytest.mark.slow
def test_tgcc_on_the_interval(tmp_path):
    args = ["--quiet", "tgcc", "--config", str(CONFIGS / "interval.toml"), "--t-max", "2", "--resolution", "0.01"]
    assert run([*args, "--out", str(tmp_path)]) == 0
    results = read_json(tmp_path / "tgcc.json")["results"]
    assert results["T_gcc"] == pytest.approx(0.8, abs=0.05)
    assert results["monotone"]
    assert read_csv(tmp_path / "tgcc.csv")
