import json
import subprocess
import sys

import pytest

from cutforge.cli import EXIT_INVALID, EXIT_OK, EXIT_SOLVER, main
from cutforge.graph import complete_graph, cycle_graph, disjoint_union, write_graph


@pytest.fixture
def tri2(tmp_path):
    path = tmp_path / "tri2.txt"
    write_graph(disjoint_union(cycle_graph(3), cycle_graph(3)), path)
    return path


def test_evaluate(tri2, tmp_path, capsys):
    out = tmp_path / "rep.json"
    assert main(["evaluate", str(tri2), "--nc", "3", "--runs", "5", "--out", str(out)]) == EXIT_OK
    assert "median RQAOA 4.00" in capsys.readouterr().out
    rep = json.loads(out.read_text())
    assert rep["median_rqaoa"] == 4 and rep["optimum"] == 4


def test_trace_and_features(tri2, tmp_path, capsys):
    assert main(["trace", str(tri2), "--nc", "1", "--out", str(tmp_path / "tr")]) == EXIT_OK
    assert (tmp_path / "tr" / "trace.json").exists()
    assert main(["features", str(tri2), "--out", str(tmp_path / "f.csv")]) == EXIT_OK
    assert "GIRTH" in capsys.readouterr().out
    assert (tmp_path / "f.csv").read_text().count("\n") == 2


def test_evolve_then_label(tmp_path, capsys):
    arch = tmp_path / "arch"
    args = ["evolve", "--nodes", "6", "--nc", "2", "--runs", "5", "--popsize", "8",
            "--budget", "16", "--restarts", "0", "--seed", "1", "--out", str(arch)]
    assert main(args) == EXIT_OK
    manifest = json.loads((arch / "manifest.json").read_text())
    assert manifest["config"]["n"] == 6 and manifest["config"]["max_restarts"] == 0
    assert main(["label", str(arch), "--threshold", "0.96", "--out", str(tmp_path / "l.csv")]) == EXIT_OK
    assert main(["label", str(arch), "--out", str(tmp_path / "w.csv")]) == EXIT_OK


def test_invalid_inputs(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 1\n0 0 1\n")
    assert main(["evaluate", str(bad)]) == EXIT_INVALID
    assert main(["evaluate", str(tmp_path / "missing.txt")]) == EXIT_INVALID
    assert main(["evolve", "--nodes", "1", "--nc", "1", "--out", str(tmp_path / "x")]) == EXIT_INVALID
    assert main(["evolve", "--out", str(tmp_path / "x")]) == EXIT_INVALID
    with pytest.raises(SystemExit) as info:
        main(["evolve", "--direction", "sideways", "--out", "x"])
    assert info.value.code == EXIT_INVALID


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    from cutforge import cli
    from cutforge.gw import SdpConvergenceError

    def boom(g):
        raise SdpConvergenceError("stalled", {})

    monkeypatch.setattr(cli, "solve_sdp", boom)
    path = tmp_path / "k3.txt"
    write_graph(complete_graph(3), path)
    assert main(["features", str(path)]) == EXIT_SOLVER


def test_console_entry_point(tmp_path):
    path = tmp_path / "k2.txt"
    write_graph(complete_graph(2), path)
    proc = subprocess.run([sys.executable, "-m", "cutforge.cli", "evaluate", str(path), "--runs", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "GW/RQAOA 1.0000" in proc.stdout
