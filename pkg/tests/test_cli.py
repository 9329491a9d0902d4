from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from hardy_toeplitz import cli


@pytest.fixture
def files(tmp_path):
    def put(name, payload):
        p = tmp_path / name
        p.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        return str(p)

    return {
        "rolewicz": put("rolewicz.json", {"antianalytic": [[2, 0]], "analytic": []}),
        "tri": put("tri.json", {"antianalytic": [[1, 0]], "analytic": [[5, 0], [0.5, 0]]}),
        "joukowski": put("jk.json", {"antianalytic": [[1, 0]], "analytic": [[0, 0], [1, 0]]}),
        "leading_zero": put("lz.json", {"antianalytic": [[1, 0], [0, 0]]}),
        "malformed": put("bad.json", "{not json"),
        "wrong_shape": put("shape.json", {"antianalytic": [[1, 0, 3]]}),
        "cap": put("cap.json", {"antianalytic": [[1, 0]] * 17}),
        "mixed": put("mixed.json", {"antianalytic": [[0.5, 0]], "analytic": [[0, 0], [2, 0]]}),
        "dir": tmp_path,
    }


def test_parse_symbol_file(files):
    s = cli.parse_symbol_file(files["tri"])
    assert s.antianalytic == (1,) and s.analytic == (5, 0.5)


def test_decide(files, capsys):
    assert cli.run(["decide", files["rolewicz"]]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "HYPERCYCLIC"
    assert list(out) == ["status", "reasons", "witnesses", "policy"]


def test_require_definitive(files, capsys):
    assert cli.run(["decide", files["joukowski"]]) == 0
    assert cli.run(["decide", files["joukowski"], "--require-definitive"]) == cli.EXIT_UNDECIDED
    assert cli.run(["decide", files["rolewicz"], "--require-definitive"]) == 0


@pytest.mark.parametrize("key, code", [
    ("malformed", cli.EXIT_BAD_INPUT),
    ("wrong_shape", cli.EXIT_BAD_INPUT),
    ("leading_zero", cli.EXIT_LEADING_ZERO),
    ("cap", cli.EXIT_CAP),
])
def test_input_error_codes(files, key, code, capsys):
    assert cli.run(["decide", files[key]]) == code
    assert "error" in capsys.readouterr().err


def test_error_codes_are_distinct():
    codes = [cli.EXIT_BAD_INPUT, cli.EXIT_LEADING_ZERO, cli.EXIT_CAP,
             cli.EXIT_PRECONDITION, cli.EXIT_NUMERICAL]
    assert len(set(codes)) == len(codes) and min(codes) > 2


def test_missing_file(files):
    assert cli.run(["decide", str(files["dir"] / "nope.json")]) == cli.EXIT_BAD_INPUT


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["decide"], ["decide", "x.json", "--bogus"],
                                  ["eig", "x.json"], ["orbit", "--gamma", "abc"]])
def test_usage_errors(argv, capsys):
    assert cli.run(argv) == cli.EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_oracle(capsys):
    assert cli.run(["oracle-shkarin", "--a", "1", "--b", "0", "--c", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "NOT_HYPERCYCLIC"


def test_portrait(files):
    out = files["dir"] / "out.pgm"
    manifest = files["dir"] / "m.json"
    assert cli.run(["portrait", files["rolewicz"], "--box", "3", "--res", "64",
                    "-o", str(out), "--manifest", str(manifest)]) == 0
    data = out.read_bytes()
    header = b"P5\n64 64\n255\n"
    assert data.startswith(header)
    img = np.frombuffer(data[len(header):], dtype=np.uint8).reshape(64, 64)
    assert img[32, 32] == 0          # centre: |lambda| < 2, eigen-rich
    assert img[0, 0] == 255          # corner: |lambda| > 2, resolvent
    m = json.loads(manifest.read_text())
    assert m["outputs"] == [{"path": str(out), "bytes": len(data),
                             "sha256": m["outputs"][0]["sha256"]}]
    assert len(m["input_sha256"]) == 64
    assert m["policy"]["res"] == 64
    assert not list(files["dir"].glob(".out.pgm.*"))


def test_portrait_needs_output(files):
    assert cli.run(["portrait", files["rolewicz"], "--res", "8"]) == cli.EXIT_USAGE


def test_outputs_are_reproducible(files):
    d = files["dir"]
    runs = []
    for i, workers in enumerate((1, 3)):
        o, m = d / f"p{i}.pgm", d / f"m{i}.json"
        cli.run(["portrait", files["tri"], "--res", "40", "--workers", str(workers),
                 "-o", str(o), "--manifest", str(m)])
        runs.append((o.read_bytes(), json.loads(m.read_text())))
    assert runs[0][0] == runs[1][0]
    assert runs[0][1]["outputs"][0]["sha256"] == runs[1][1]["outputs"][0]["sha256"]
    a, b = d / "a.json", d / "b.json"
    cli.run(["analyze", files["tri"], "--res", "16", "-o", str(a)])
    cli.run(["analyze", files["tri"], "--res", "16", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_eig_csv_round_trip(files):
    out = files["dir"] / "e.csv"
    assert cli.run(["eig", files["rolewicz"], "--lambda", "1,0", "--trunc", "40", "-o", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["index", "re", "im"]
    vals = np.array([complex(float(r[1]), float(r[2])) for r in rows[1:]])
    assert np.array_equal(vals, 0.5 ** np.arange(1, 41))
    summary = json.loads((files["dir"] / "e.json").read_text())
    assert summary["residual"] <= 1e-12


def test_csv_is_lossless():
    v = np.array([1 / 3 + 1j * np.pi, -2.5e-300 + 0j, 1e16 / 7])
    text = cli.coefficient_csv(v)
    rows = list(csv.reader(text.splitlines()))[1:]
    back = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    assert np.array_equal(back, v)


def test_resolvent_and_adjoint(files):
    r = files["dir"] / "r.csv"
    assert cli.run(["resolvent", files["rolewicz"], "--lambda", "3", "--trunc", "8", "-o", str(r)]) == 0
    rows = list(csv.reader(r.open()))
    assert float(rows[1][1]) == pytest.approx(-1 / 3)
    a = files["dir"] / "a.csv"
    assert cli.run(["adjoint-eig", files["mixed"], "--mu", "1.5", "-o", str(a)]) == 0
    summary = json.loads((files["dir"] / "a.json").read_text())
    assert summary["residual"] <= 1e-8
    assert len(summary["nodes"]) == 2


def test_precondition_exit(files):
    assert cli.run(["eig", files["rolewicz"], "--lambda", "3"]) == cli.EXIT_PRECONDITION
    assert cli.run(["adjoint-eig", files["rolewicz"], "--mu", "3"]) == cli.EXIT_PRECONDITION


def test_complete(files, capsys):
    assert cli.run(["complete", files["rolewicz"], "--lambda", "0", "--radius", "0.9", "--K", "20"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert all(r <= 1e-3 for r in rep["residuals"])


def test_orbit(files):
    out = files["dir"] / "o.csv"
    assert cli.run(["orbit", "--gamma", "1.1", "--seed", "3", "-o", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["checkpoint", "position", "error", "bound"]
    assert len(rows) == 11
    for r in rows[1:]:
        assert float(r[2]) <= 0.01 and float(r[2]) <= float(r[3])


def test_analyze(files, capsys):
    assert cli.run(["analyze", files["rolewicz"], "--res", "16"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"]["status"] == "HYPERCYCLIC"
    assert rep["valence"]["max_count"] == 1
    assert sum(rep["classification"]["counts"].values()) == 256
