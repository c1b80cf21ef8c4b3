import json

import pytest

from covsurf.cli import main


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_gen_then_analyze(tmp_path, capsys):
    f = str(tmp_path / "s.json")
    code, _ = run(["gen", "--degree", "2", "--q", "3", "--m", "4", "--seed", "1", "--out", f], capsys)
    assert code == 0
    code, out = run(["analyze", f, "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["deg_max"] - rep["deg_min"] <= 4
    assert rep["area_bound"] is True
    assert {"A", "L", "nbar", "R", "H", "branch_points"} <= set(rep)


def test_gen_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for f in (a, b):
        assert run(["gen", "--degree", "4", "--q", "4", "--m", "3", "--seed", "9", "--out", str(f)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_reduce_with_trace(tmp_path, capsys):
    f, g = str(tmp_path / "s.json"), str(tmp_path / "r.json")
    run(["gen", "--degree", "20", "--q", "3", "--m", "2", "--seed", "3", "--out", f], capsys)
    code, out = run(["reduce", f, "--out", g, "--trace", "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["reached"] and rep["deg_min"] <= rep["target"]
    assert rep["H"] == rep["H_before"]
    code, out = run(["reduce", f, "--out", g, "--target", "5", "--trace", "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["deg_min"] <= 5
    assert abs(rep["H"] - rep["H_before"]) <= 1e-9 * abs(rep["H_before"])
    assert all(s["nbar"] == s["nbar0"] + s["nbar1"] - 2 for s in rep["ledger"])
    assert main(["check", g]) == 0


def test_check_corrupted(tmp_path, capsys):
    f = tmp_path / "s.json"
    run(["gen", "--degree", "3", "--out", str(f)], capsys)
    doc = json.loads(f.read_text())
    doc["cells"]["twin"][0], doc["cells"]["twin"][5] = doc["cells"]["twin"][5], doc["cells"]["twin"][0]
    f.write_text(json.dumps(doc))
    code, out = run(["check", str(f)], capsys)
    assert code == 1
    assert "violations" in out


@pytest.mark.parametrize("argv,code", [
    (["gen", "--degree", "0", "--out", "x.json"], 2),
    (["frobnicate"], 2),
    (["analyze", "/nonexistent/file.json"], 3),
])
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code


def test_truncated_file_is_io_error(tmp_path, capsys):
    f = tmp_path / "s.json"
    run(["gen", "--degree", "2", "--out", str(f)], capsys)
    f.write_text(f.read_text()[:200])
    assert main(["analyze", str(f)]) == 3
