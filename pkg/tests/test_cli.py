import json
import subprocess
import sys
from pathlib import Path

import pytest

from pwlcycles.cli import main

SYSTEMS = Path(__file__).resolve().parent.parent / "systems"


def test_canon_center(capsys):
    assert main(["canon", str(SYSTEMS / "center.json")]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d == {"T_L": 0.0, "D_L": 1.0, "a_L": 0.0, "T_R": 0.0, "D_R": 1.0, "a_R": 0.0, "b": 0.0}


def test_no_crossing_exit_code(capsys):
    assert main(["canon", str(SYSTEMS / "no_crossing.json")]) == 2
    assert main(["analyze", str(SYSTEMS / "no_crossing.json")]) == 2


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["canon", str(bad)]) == 1
    assert main(["canon", str(tmp_path / "missing.toml")]) == 1


def test_analyze_three_cycles(tmp_path):
    out = tmp_path / "rep.json"
    assert main(["analyze", str(SYSTEMS / "three_cycles.toml"), "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert len(d["search"]["cycles"]) == 3 and d["count"]["certified"]


def test_analyze_csv(capsys):
    assert main(["analyze", str(SYSTEMS / "three_cycles.toml"), "--csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4


def test_center_reports_continuum(capsys):
    assert main(["analyze", str(SYSTEMS / "center.json")]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["search"]["continuum"] and d["count"]["certified"]


def test_sweep_deterministic(tmp_path):
    paths = []
    for k in range(2):
        out, summ = tmp_path / f"s{k}.csv", tmp_path / f"s{k}.json"
        code = main(["sweep", "--n", "10", "--seed", "3", "--grid", "128", "--threads", "1",
                     "--out", str(out), "--summary", str(summ)])
        assert code == 0
        paths.append((out.read_text(), summ.read_text()))
    assert paths[0] == paths[1]
    assert json.loads(paths[0][1])["violations"] == 0


def test_sweep_rejects_nonpositive_n():
    assert main(["sweep", "--n", "0"]) == 1


def test_plot_delta_skipped_on_continuum(tmp_path, capsys):
    out = tmp_path / "d.svg"
    assert main(["plot", str(SYSTEMS / "center.json"), "--what", "delta", "--out", str(out)]) == 0
    assert not out.exists()
    assert "skipped" in capsys.readouterr().err


def test_plot_writes_svg(tmp_path):
    out = tmp_path / "h.svg"
    assert main(["plot", str(SYSTEMS / "center.json"), "--what", "halfmaps", "--out", str(out)]) == 0
    assert out.read_text().startswith("<svg")


@pytest.mark.slow
def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "pwlcycles.cli", "canon", str(SYSTEMS / "center.json")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and '"D_L": 1.0' in r.stdout
