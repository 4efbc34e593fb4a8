import json
from pathlib import Path

import pytest

from lamref.cli import main

HEADER = """cell data = 1 + 1 ;
cell list = 1 + ref cell ;
cell cell = ref data * ref list ;
"""


@pytest.fixture
def prog(tmp_path):
    def write(name, body):
        p = tmp_path / name
        p.write_text(HEADER + body)
        return str(p)
    return write


def test_check(prog, capsys):
    f = prog("swap.lr", "layout {#0:data, #1:data}\nlet x = !#0 in #0 := !#1; #1 := x")
    assert main(["check", f, "--dump-core"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-1] == "1" and out[0].startswith("(fun (x:1 + 1)")


def test_check_error_position(prog, capsys):
    f = prog("bad.lr", "layout {#0:data}\n#0 := (!#0,\n ())")
    assert main(["check", f]) == 2
    err = capsys.readouterr().err
    assert ":5:7: type error" in err


def test_run_prints_heap(prog, capsys):
    f = prog("swap.lr", "layout {#0:data, #1:data}\nlet x = !#0 in #0 := !#1; #1 := x")
    assert main(["run", f, "--heap", "{#0 = true, #1 = false}"]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "()", "#0 : data = false", "#1 : data = true"]


def test_run_cyclic(prog, capsys):
    f = prog("cyc.lr", "new {p:data = true, l:list = inj2 c, c:cell = (p, l)} in l")
    assert main(["run", f]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "#1", "#0 : data = true", "#1 : list = inj2 #2", "#2 : cell = (#0, #1)"]


def test_denote(prog, capsys):
    f = prog("cyc.lr", "new {p:data = true, l:list = inj2 c, c:cell = (p, l)} in l")
    assert main(["denote", f]) == 0
    assert "private: {#0:list=inj2 #1" in capsys.readouterr().out
    g = prog("get.lr", "layout {#0:data}\n!#0")
    assert main(["denote", g, "--world", "{#0:data, #1:list}", "--store",
                 "{#0 = false, #1 = inj1 ()}"]) == 0
    assert "payload: inj2 ()" in capsys.readouterr().out


def test_eq(prog, capsys):
    a = prog("a.lr", "layout {#0:data, #1:data}\nlet x = !#0 in #0 := !#1; #1 := x")
    b = prog("b.lr", "layout {#0:data, #1:data}\n()")
    assert main(["eq", a, b, "--json"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "not-equal" and "store" in out
    assert main(["eq", a, a]) == 0


def test_eq_higher_order(prog, capsys):
    a = prog("a.lr", "fun (_:1) -> true")
    b = prog("b.lr", "let x = ref data true in fun (_:1) -> !x")
    assert main(["eq", a, b]) == 1
    assert "not-equal" in capsys.readouterr().out


def test_diff(prog, capsys):
    a = prog("a.lr", "layout {#0:data, #1:data}\nlet x = !#0 in #0 := !#1; #1 := x")
    b = prog("b.lr", "layout {#0:data, #1:data}\n()")
    assert main(["diff", a, b]) == 0
    assert "context: let x = [-] in !#0" in capsys.readouterr().out


def test_gen_round_trips(tmp_path, capsys):
    assert main(["gen", "--seed", "5"]) == 0
    p = tmp_path / "g.lr"
    p.write_text(capsys.readouterr().out)
    assert main(["check", str(p)]) == 0


def test_laws_json(capsys):
    assert main(["laws", "--suite", "gs", "--signature", "constant", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data[0]["ok"] is True


def test_laws_soundness(capsys):
    assert main(["laws", "--suite", "soundness", "--count", "10"]) == 0
    assert "[PASS] soundness" in capsys.readouterr().out


def test_missing_file(capsys):
    assert main(["check", "/nonexistent.lr"]) == 2
