import json
from pathlib import Path

import pytest

from corpus import CORPUS, N2
from katofan import serialize as ser
from katofan.cli import main
from katofan.dsl import HomDecl, MonoidDecl, ParseError, parse, unparse
from katofan.fan import fan_isomorphic, spec
from katofan.monoid import FineMonoid

GOLDEN = Path(__file__).parent / "golden"
SCRIPTS = sorted(GOLDEN.glob("*.kf"))


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, text, name="s.kf"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.mark.parametrize("path", SCRIPTS, ids=lambda p: p.name)
def test_parse_unparse_round_trip(path):
    script = parse(path.read_text())
    text = unparse(script)
    assert parse(text) == script
    assert unparse(parse(text)) == text


@pytest.mark.parametrize("path", SCRIPTS, ids=lambda p: p.name)
def test_golden_output(path, capsys):
    code, out, _ = run_cli(capsys, "run", path)
    assert code == 0
    assert out == path.with_suffix(".out").read_text()


@pytest.mark.parametrize("path", SCRIPTS, ids=lambda p: p.name)
def test_structured_output_is_schema_valid(path, capsys):
    code, out, _ = run_cli(capsys, "run", path, "--format", "structured")
    assert code == 0
    docs = [json.loads(chunk) for chunk in out.replace("}\n{", "}\n\x00{").split("\x00")]
    assert docs
    for d in docs:
        ser.validate(d)
        assert d["format"] == "katofan/1"


def test_parse_examples():
    s = parse("monoid N2 in Z^2 { gens (1,0) (0,1) }")
    assert len(s.statements) == 1 and isinstance(s.statements[0], MonoidDecl)
    s = parse("monoid N in Z { gens (1) }\nhom u : N -> N { gen (1) -> (2) }")
    assert isinstance(s.statements[1], HomDecl)
    assert s.statements[1].pairs == (((1,), (2,)),)


def test_parse_error_positions():
    with pytest.raises(ParseError) as e:
        parse("monoid M in Z^2 { gens (1,0,0) }")
    assert (e.value.line, e.value.column) == (1, 24)
    assert "arity" in e.value.message
    with pytest.raises(ParseError) as e:
        parse("monoid N in Z { gens (1) }\nfaces\n")
    assert e.value.line == 3 and e.value.expected
    with pytest.raises(ParseError, match="duplicate"):
        parse("monoid N in Z { gens (1) }\nmonoid N in Z { gens (1) }")
    with pytest.raises(ParseError, match="unresolved"):
        parse("faces M")
    with pytest.raises(ParseError):
        parse("monoid T in Z/2 + Z { gens (1,0) }")


def test_spec_cli_examples(tmp_path, capsys):
    n2 = write(tmp_path, "monoid N2 in Z^2 { gens (1,0) (0,1) }\n", "N2.kf")
    code, out, _ = run_cli(capsys, "faces", n2)
    assert code == 0 and out.splitlines()[0] == "4 faces"
    tup = write(tmp_path, GOLDEN.joinpath("tuples.kf").read_text(), "tuple.kf")
    code, out, _ = run_cli(capsys, "facelem-check", tup, "--name", "triple", "--split", "1")
    assert code == 0 and out.startswith("PASS split 1: witness on")
    u = write(tmp_path, "monoid N in Z { gens (1) }\nhom u : N -> N { gen (1) -> (2) }\n", "u.kf")
    code, out, _ = run_cli(capsys, "smooth-check", u, "--char", "2")
    assert code == 0
    assert out.splitlines()[0] == "FAIL: cokernel Z/2, 2 not invertible mod 2"


def test_exit_codes(tmp_path, capsys):
    good = write(tmp_path, "monoid N in Z { gens (1) }\n")
    assert run_cli(capsys, "rank", good)[0] == 0
    bad_syntax = write(tmp_path, "monoid N in Z { gens (1,2) }\n", "bad.kf")
    code, _, err = run_cli(capsys, "rank", bad_syntax)
    assert code == 2 and "1:" in err
    bad_hom = write(tmp_path, "monoid N in Z { gens (1) }\nhom u : N -> N { gen (1) -> (-1) }\n", "hom.kf")
    code, _, err = run_cli(capsys, "snf", bad_hom)
    assert code == 1 and err
    assert run_cli(capsys, "rank")[0] == 2
    assert run_cli(capsys, "no-such-command", good)[0] == 2
    assert run_cli(capsys, "rank", good, "--char", "4")[0] == 2
    assert run_cli(capsys, "rank", tmp_path / "missing.kf")[0] == 2
    assert run_cli(capsys, "spec", good, "--format", "dot")[0] == 0
    assert run_cli(capsys, "rank", good, "--format", "dot")[0] == 1


def test_fail_verdict_still_exits_zero(capsys):
    code, out, _ = run_cli(capsys, "neat-check", GOLDEN / "charts.kf", "--name", "twice")
    assert code == 0 and out.startswith("FAIL")


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_emit_ingest_monoid(name):
    m = CORPUS[name]
    doc = ser.document("emit", ser.monoid_tree(m))
    ser.validate(doc)
    back = ser.ingest(json.loads(json.dumps(doc))["result"])
    assert isinstance(back, FineMonoid) and back == m


def test_emit_faces_structured():
    doc = ser.document("faces", ser.faces_tree(N2))
    ser.validate(doc)
    assert len(doc["result"]["faces"]) == 4


def test_emit_spec_dot():
    dot = ser.fan_dot(spec(CORPUS["N"]))
    assert dot.startswith("digraph")
    assert dot.count("->") == 1
    assert dot.count("label=") == 2


def test_emit_fan_round_trip():
    x = spec(CORPUS["cone012"])
    doc = ser.document("spec", ser.fan_tree(x))
    ser.validate(doc)
    back = ser.ingest(doc["result"])
    assert ser.fan_tree(back) == doc["result"]
    assert fan_isomorphic(back, x) is not None


def test_schema_rejects_bad_tree():
    with pytest.raises(Exception):
        ser.validate({"format": "katofan/1", "command": "x", "result": {"kind": "monoid"}})


def test_check_snf(capsys):
    code, out, _ = run_cli(capsys, "check-snf", "--seed", "0", "--count", "50")
    assert code == 0 and out.startswith("PASS")


def test_out_flag(tmp_path, capsys):
    target = tmp_path / "o.txt"
    code, out, _ = run_cli(capsys, "faces", GOLDEN / "corpus.kf", "--name", "N2", "--out", target)
    assert code == 0 and out == ""
    assert target.read_text().startswith("4 faces")


def test_parse_command_prints_canonical_script(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "parse", GOLDEN / "homs.kf")
    assert code == 0
    assert parse(out) == parse((GOLDEN / "homs.kf").read_text())


def test_exact_flag(capsys):
    path = GOLDEN / "inexact.kf"
    code, out, _ = run_cli(capsys, "neat-check", path)
    assert code == 0 and out.startswith("PASS")
    code, out, _ = run_cli(capsys, "neat-check", path, "--exact")
    assert code == 0 and out.startswith("FAIL: u is not exact")
