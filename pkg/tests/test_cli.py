import io

import pytest

from amoebot.cli import ScenarioConfig, main, parse_sizes, run_scenario, run_sweep
from amoebot.engine import DuplicateNode
from amoebot.grid import Direction
from amoebot.shapes import (HEXAGON7, RING, TRIANGLE, ParseError, format_structure, parse_structure, random_blob,
                            rotate60)
from amoebot.svg import render_svg


def test_parse_examples():
    assert parse_structure("0 0\n1 0\n0 1") == TRIANGLE
    assert sorted(parse_structure("# ring\n0 1\n1 0\n1 -1\n0 -1\n-1 0\n-1 1")) == sorted(RING)
    with pytest.raises(ParseError) as err:
        parse_structure("0 0\n1\n")
    assert err.value.line == 2
    assert parse_structure(format_structure(HEXAGON7)) == sorted(HEXAGON7)


def write(tmp_path, name, coords):
    p = tmp_path / name
    p.write_text(format_structure(coords))
    return str(p)


def test_duplicate_rejected_at_load(tmp_path):
    p = tmp_path / "dup.txt"
    p.write_text("0 0\n0 0\n")
    with pytest.raises(DuplicateNode):
        run_scenario(ScenarioConfig("stripe"), parse_structure(p.read_text()))
    assert main(["run", "stripe", "--input", str(p)]) == 2


def test_run_examples(tmp_path, capsys):
    line3 = write(tmp_path, "line.txt", [(0, 0), (1, 0), (2, 0)])
    assert main(["run", "stripe", "--input", line3, "--ref", "0,0", "--dir", "ENE", "--check"]) == 0
    ring = write(tmp_path, "ring.txt", RING)
    assert main(["run", "maxima", "--input", ring, "--dir", "N", "--check"]) == 0
    assert "maxima: (0,1)" in capsys.readouterr().out
    tri = write(tmp_path, "tri.txt", TRIANGLE)
    assert main(["run", "symmetry", "--input", tri, "--check"]) == 0
    out = capsys.readouterr().out
    assert "rot3: True" in out and "oracle: agree" in out


@pytest.mark.parametrize("scenario", ["skeleton", "spanning-tree", "pasc-demo"])
def test_other_scenarios_agree(tmp_path, scenario):
    S = random_blob(25, 4, hole_prob=0.2) if scenario != "pasc-demo" else [(0, 0), (1, 0), (1, 1), (0, 2)]
    f = write(tmp_path, "s.txt", S) if scenario != "pasc-demo" else str(tmp_path / "c.txt")
    if scenario == "pasc-demo":
        (tmp_path / "c.txt").write_text("".join(f"{q} {r}\n" for q, r in S))
    assert main(["run", scenario, "--input", f, "--dir", "E", "--sign", "-", "--check"]) == 0


def test_mismatch_exit_code(tmp_path, monkeypatch):
    import amoebot.cli as cli

    monkeypatch.setattr(cli.oracle, "oracle_stripe", lambda S, u, d: set())
    f = write(tmp_path, "tri.txt", TRIANGLE)
    assert main(["run", "stripe", "--input", f, "--check"]) == 1


def test_errors(tmp_path):
    f = write(tmp_path, "tri.txt", TRIANGLE)
    assert main(["run", "skeleton", "--input", f, "--pins", "2"]) == 2
    assert main(["run", "skeleton", "--input", f, "--max-rounds", "3"]) == 2
    assert main(["run", "stripe", "--input", str(tmp_path / "missing.txt")]) == 2
    assert main(["run", "stripe", "--input", f, "--dir", "UP"]) == 2


def test_trace_and_svg_are_deterministic(tmp_path):
    f = write(tmp_path, "s.txt", random_blob(30, 2, hole_prob=0.2))
    outs = []
    for k in range(2):
        t, s = tmp_path / f"t{k}.jsonl", tmp_path / f"s{k}.svg"
        assert main(["run", "spanning-tree", "--input", f, "--seed", "5", "--trace", str(t), "--svg", str(s)]) == 0
        outs.append((t.read_bytes(), s.read_bytes()))
    assert outs[0] == outs[1]
    assert outs[0][1].startswith(b"<?xml") and b"<polygon" in outs[0][1]


def test_svg_independent_of_input_order():
    S = random_blob(20, 1)
    assert render_svg(S, boundary=S[:3]) == render_svg(list(reversed(S)), boundary=list(reversed(S[:3])))


def test_sweep():
    assert parse_sizes("16..64") == [16, 32, 64]
    assert parse_sizes("10,20") == [10, 20]
    buf = io.StringIO()
    rows = run_sweep("stripe", [16, 32], "random", 2, out=buf)
    assert len(rows) == 4 and buf.getvalue().startswith("scenario,shape,n,trial,rounds")
    assert run_sweep("maxima", [12], "ring", 1, out=io.StringIO())[0][2] == 12


def test_rotate60_keeps_size():
    assert len(rotate60(HEXAGON7, 2)) == 7
    assert Direction.parse("ene") == Direction.ENE
