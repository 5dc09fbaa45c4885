import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from rankdep import cli


@pytest.fixture()
def glued_csv(tmp_path):
    path = tmp_path / "g.csv"
    rc = cli.main(["simulate", "--copula", "glue:0.5:frank:-30:frank:30",
                   "--margin-x", "kumaraswamy:0.25,0.15", "--margin-y", "t:3,1.5,2.5",
                   "-n", "500", "--seed", "1", "--out", str(path)])
    assert rc == 0
    return path


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli.main(["simulate", "--copula", "frank:5", "-n", "50", "--seed", "9",
                         "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "x,y" and len(a.read_text().splitlines()) == 51


def test_simulate_noisy_line(tmp_path):
    path = tmp_path / "m.csv"
    assert cli.main(["simulate", "--noisy-line", "0.4", "--margin-x", "pareto:2,10",
                     "-n", "100", "--out", str(path)]) == 0


def test_simulate_bad_model(tmp_path):
    assert cli.main(["simulate", "--copula", "gumbel:2", "--out", str(tmp_path / "x.csv")]) == 2


def test_analyze_outputs(glued_csv, tmp_path, capsys):
    svg, rep, zoom = tmp_path / "d.svg", tmp_path / "d.json", tmp_path / "z.svg"
    rc = cli.main(["analyze", str(glued_csv), "--x", "x", "--y", "y", "--permutations", "99",
                   "--svg", str(svg), "--json", str(rep), "--diag-zoom", str(zoom)])
    assert rc == 0
    assert "category=" in capsys.readouterr().out
    ET.parse(svg)
    ET.parse(zoom)
    data = json.loads(rep.read_text())
    assert data["schema_version"] == "1.0" and data["n"] == 500


def test_analyze_threads_identical(glued_csv, tmp_path):
    outs = []
    for threads in ("1", "4"):
        svg, rep = tmp_path / f"{threads}.svg", tmp_path / f"{threads}.json"
        assert cli.main(["analyze", str(glued_csv), "--x", "0", "--y", "1", "--permutations", "99",
                         "--threads", threads, "--svg", str(svg), "--json", str(rep)]) == 0
        outs.append((svg.read_bytes(), rep.read_bytes()))
    assert outs[0] == outs[1]


def test_analyze_errors(glued_csv, tmp_path):
    assert cli.main(["analyze", str(tmp_path / "none.csv"), "--x", "x", "--y", "y"]) == 3
    assert cli.main(["analyze", str(glued_csv), "--x", "nope", "--y", "y"]) == 3
    assert cli.main(["analyze", str(glued_csv), "--x", "x", "--y", "y", "--ties", "error",
                     "--permutations", "99"]) in (0, 3)


def test_analyze_size_cap(tmp_path):
    path = tmp_path / "big.csv"
    x = np.arange(20_001)
    path.write_text("x,y\n" + "\n".join(f"{a},{a}" for a in x) + "\n")
    assert cli.main(["analyze", str(path), "--x", "x", "--y", "y"]) == 3
    assert cli.main(["analyze", str(path), "--x", "x", "--y", "y", "--max-n", "500",
                     "--permutations", "99"]) == 0


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["bogus"])
    assert exc.value.code == 2


def test_invariant_violation_exit(glued_csv, monkeypatch):
    def broken(result):
        raise cli.InvariantViolation("forced")
    monkeypatch.setattr(cli, "check_invariants", broken)
    assert cli.main(["analyze", str(glued_csv), "--x", "x", "--y", "y", "--permutations", "99"]) == 4


def test_glue_scan(glued_csv, tmp_path, capsys):
    out = tmp_path / "g.json"
    assert cli.main(["glue-scan", str(glued_csv), "--x", "x", "--y", "y", "--grid", "0.3,0.5",
                     "--permutations", "99", "--json", str(out)]) == 0
    assert json.loads(out.read_text())["best_theta"] == 0.5
    assert cli.main(["glue-scan", str(glued_csv), "--x", "x", "--y", "y", "--grid", "a,b"]) == 3


def test_gallery(tmp_path):
    out = tmp_path / "gal"
    assert cli.main(["gallery", "--out", str(out), "-n", "200"]) == 0
    assert len(list(out.glob("*.svg"))) == 25
    summary = json.loads((out / "gallery.json").read_text())
    assert len(summary["panels"]) == 25


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rankdep", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "glue-scan" in proc.stdout
