import csv
import io
import json
import subprocess
import sys

import pytest

from gmrftau.cli import SWEEP_FIELDS, ZETA_FIELDS, UsageError, load_graph, main, parse_grid
from gmrftau.graph import cycle_graph, petersen_graph


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_c4(capsys):
    code, out, _ = run(capsys, "solve", "--graph", "cycle:4", "--x", "0.6123724")
    assert code == 0
    assert json.loads(out)["tau"] == pytest.approx(0.1875, abs=1e-6)


def test_verify_petersen_file(capsys, tmp_path):
    reports = tmp_path / "r.jsonl"
    code, out, _ = run(capsys, "verify", "--graph", "file:petersen.el", "--x", "0.3", "--reports", str(reports))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["failed"] == "0" for r in rows)
    claims = [r["claim"] for r in rows]
    assert len(claims) == len(set(claims))
    lines = reports.read_text().splitlines()
    assert lines and all(json.loads(line)["pass"] for line in lines)


def test_series_path(capsys):
    code, out, _ = run(capsys, "series", "--graph", "path:3", "--order", "6")
    assert code == 0
    assert json.loads(out)["coefficients"] == [1, 0, -2, 0, 1, 0, 0]


def test_parse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve", "--graph", "cycle:4"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--graph", "cycle:4", "--grid", "0.1:oops"])
    assert info.value.code == 2
    code, _, err = run(capsys, "solve", "--graph", "nosuch:4", "--x", "0.3")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "series", "--graph", "path:3", "--order", "41")
    assert code == 2


def test_numerical_failure_exit_3(capsys):
    code, out, _ = run(capsys, "solve", "--graph", "complete:5", "--x", "-0.3")
    assert code == 3
    body = json.loads(out)
    assert set(body) == {"error", "message"}


def test_repeat_runs_are_byte_identical(capsys):
    argv = ["sweep", "--graph", "regular:12,3,seed=7", "--grid", "0.1:0.9:5"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    _, c, _ = run(capsys, "--jobs", "2", *argv)
    assert a == b == c


def test_sweep_csv_format(capsys, tmp_path):
    path = tmp_path / "s.csv"
    assert main(["sweep", "--graph", "cycle:5", "--grid", "0.2,0.4", "--out", str(path)]) == 0
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode().splitlines()
    assert lines[0].split(",") == SWEEP_FIELDS
    assert len(lines) == 3 and lines[1].startswith("0.2,")


def test_zeta_notes_pole(capsys):
    code, out, _ = run(capsys, "zeta", "--graph", "complete:4", "--grid", "0.2,0.5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ZETA_FIELDS
    assert rows[1]["note"] == "pole" and rows[0]["note"] == ""


def test_trees(capsys):
    code, out, _ = run(capsys, "trees", "--graph", "petersen")
    assert code == 0 and json.loads(out)["count"] == "2000"
    _, out, _ = run(capsys, "trees", "--graph", "cycle:5")
    assert json.loads(out)["count"] == "5"


def test_ldp(capsys):
    argv = ["ldp", "--graph", "complete:2", "--interval", "0,1", "--n", "4,8", "--samples", "20000", "--seed", "3"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["n"] for r in rows] == ["4", "8"]
    assert abs(float(rows[0]["p_hat"]) - 0.5) < 0.02


def test_scan(capsys):
    code, out, _ = run(capsys, "scan", "--count", "6", "--n-max", "7", "--grid", "0.3,0.8")
    assert code == 0
    d = json.loads(out)
    assert d["min_entry_of_A"]["value"] > 0
    assert "max_y_minus_edge_threshold" in d


def test_load_graph_expressions():
    assert load_graph("cycle:6") == cycle_graph(6)
    assert load_graph("file:petersen.el") == petersen_graph()
    g = load_graph("regular:20,3,seed=7")
    assert g.n == 20 and set(g.degrees) == {3}
    assert g == load_graph("regular:20,3,seed=7")
    with pytest.raises(UsageError):
        load_graph("cycle")


def test_parse_grid():
    assert parse_grid("0.1:0.3:3") == [0.1, 0.2, 0.3]
    assert parse_grid("0.5,0.25") == [0.5, 0.25]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gmrftau", "series", "--graph", "complete:2", "--order", "4"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["coefficients"] == [1, 0, -1, 0, 0]
