import csv
import io
import json

import pytest

from pado.cli import BENCH_COLUMNS, main
from pado.graph import read_graph


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def built(tmp_path, capsys):
    g = tmp_path / "g.txt"
    o = tmp_path / "g.pado"
    assert run(capsys, "generate", "grid", 10, "--out", g)[0] == 0
    code, out, _ = run(capsys, "build", g, "--epsilon", 0.5, "--out", o)
    assert code == 0
    return g, o, json.loads(out)


def test_generate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert run(capsys, "generate", "delaunay", 300, "--seed", 4, "--out", p)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert read_graph(a).n == 300


def test_generate_stdout(capsys):
    code, out, _ = run(capsys, "generate", "grid", 2, 3)
    assert code == 0 and out.strip()


def test_build_report(built):
    _, _, rep = built
    assert rep["n"] == 100 and rep["epsilon"] == 0.5
    assert rep["c_space"] == pytest.approx(rep["connections"] / rep["n"])
    for key in ("ell", "r", "build_s", "regions", "boundary_nodes", "c_r", "c_b", "c_B", "c_d", "depth"):
        assert key in rep


def test_build_audit(tmp_path, capsys):
    g = tmp_path / "g.txt"
    run(capsys, "generate", "random-triangulation", 150, "--out", g)
    code, out, _ = run(capsys, "build", g, "--out", tmp_path / "o", "--audit")
    rep = json.loads(out)
    assert code == 0 and rep["audit_ok"] and rep["max_phase_count"] <= rep["phase_bound"]


def test_query(tmp_path, built, capsys):
    _, o, _ = built
    pairs = tmp_path / "p.txt"
    pairs.write_text("0 0\n0 1\n# comment\n\n0 99\n")
    code, out, _ = run(capsys, "query", o, "--pairs", pairs)
    lines = out.splitlines()
    assert code == 0 and lines[:2] == ["0 0 0.0", "0 1 1.0"]
    s, t, d = lines[2].split()
    assert (s, t) == ("0", "99") and 18.0 <= float(d) <= 27.0


def test_query_random_deterministic(built, capsys):
    _, o, _ = built
    a = run(capsys, "query", o, "--random", 50, "--seed", 3, "--threads", 4)[1]
    b = run(capsys, "query", o, "--random", 50, "--seed", 3)[1]
    assert a == b and len(a.splitlines()) == 50


def test_verify(built, capsys):
    g, o, _ = built
    code, out, _ = run(capsys, "verify", o, g, "--random", 300)
    rep = json.loads(out)
    assert code == 0 and rep["violations"] == 0 and rep["pairs"] == 300
    assert 1.0 <= rep["max_stretch"] <= 1.5


def test_verify_empty(built, capsys):
    g, o, _ = built
    code, out, _ = run(capsys, "verify", o, g, "--random", 0)
    assert code == 0 and json.loads(out)["pairs"] == 0


def test_verify_wrong_graph(tmp_path, built, capsys):
    _, o, _ = built
    other = tmp_path / "other.txt"
    run(capsys, "generate", "grid", 4, "--out", other)
    assert run(capsys, "verify", o, other)[0] == 1


def test_stats(built, capsys):
    _, o, _ = built
    code, out, _ = run(capsys, "stats", o)
    lines = out.splitlines()
    assert code == 0 and json.loads(lines[0])["n"] == 100
    for name in ("decomposition_node_depth", "region_edges", "connections_per_key"):
        assert any(name in ln for ln in lines[1:])


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, _, _ = run(
        capsys, "bench", "--kind", "grid", "--sizes", 25, 64, "--epsilon", 0.5, 1.0, "--random", 20, "--out", out
    )
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert code == 0 and rows[0] == BENCH_COLUMNS and len(rows) == 1 + 2 * 2
    for row in rows[1:]:
        assert float(row[BENCH_COLUMNS.index("max_stretch")]) <= 1 + float(row[1]) + 1e-9


@pytest.mark.parametrize(
    "argv",
    [
        ["build", "{g}", "--out", "{t}/x", "--epsilon", "0"],
        ["build", "{g}", "--out", "{t}/x", "--epsilon", "nope"],
        ["query", "{o}", "--random", "-1"],
        ["query", "{o}", "--pairs", "{g}", "--random", "5"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_2(tmp_path, built, capsys, argv):
    g, o, _ = built
    argv = [a.format(g=g, o=o, t=tmp_path) for a in argv]
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 2


def test_runtime_errors_exit_1(tmp_path, built, capsys):
    g, o, _ = built
    pairs = tmp_path / "p.txt"
    pairs.write_text("0 100\n")
    assert run(capsys, "query", o, "--pairs", pairs)[0] == 1
    bad = tmp_path / "bad.pado"
    bad.write_bytes(o.read_bytes()[:50])
    code, _, err = run(capsys, "query", bad, "--random", 1)
    assert code == 1 and err
    assert run(capsys, "build", tmp_path / "missing.txt", "--out", tmp_path / "x")[0] == 1
    broken = tmp_path / "broken.txt"
    broken.write_text("this is not a graph\n")
    assert run(capsys, "build", broken, "--out", tmp_path / "x")[0] == 1


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "pado", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "generate" in res.stdout
