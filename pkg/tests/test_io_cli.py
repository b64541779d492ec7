import io
import json

import pytest

from graded_sheaf_kit import cli
from graded_sheaf_kit.algebra import GF2, GF3, QQ
from graded_sheaf_kit.fixtures import line3
from graded_sheaf_kit.io import (
    ParseError,
    fixture_names,
    fixture_text,
    fmt_matrix,
    load_fixture,
    parse_matrix,
    parse_text,
    serialize,
)
from graded_sheaf_kit.sheaves.core import constant_sheaf


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


BROKEN_SHEAF = """field GF2
space S
  point a
  point b
  cover a b
sheaf F on S
  stalkmod a . k^1
  stalkmod b . k^1
  res a b . 1x2:1,1
"""


# -- text format ---------------------------------------------------------------
@pytest.mark.parametrize("name", fixture_names())
def test_fixture_round_trip(name):
    text = fixture_text(name)
    assert serialize(parse_text(text, name)) == text
    assert not load_fixture(name).diagnostics


def test_matrix_round_trip():
    M = parse_matrix("2x3:1,0,1;0,1,1")
    assert M.shape == (2, 3) and fmt_matrix(M) == "2x3:1,0,1;0,1,1"
    assert parse_matrix("0x2:").shape == (0, 2)
    with pytest.raises(ParseError):
        parse_matrix("2x2:1,0")


def test_loaded_sheaf_matches_constructor():
    ws = load_fixture("line3")
    assert ws.sheaf("k-line3").table() == constant_sheaf(line3(), GF2).table()


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 2"):
        parse_text("field GF2\nbogus record\n")
    ws = parse_text("field GF2\nspace S\n  point a\n  cover a zz\n")
    assert ws.diagnostics == ["<text>:2: space S: unknown point in relation a <= zz"]


def test_field_header_choices():
    for tok, K in (("GF2", GF2), ("GF3", GF3), ("QQ", QQ)):
        assert parse_text(f"field {tok}\n").K == K


def test_structural_problems_become_diagnostics():
    ws = parse_text(BROKEN_SHEAF)
    assert ws.diagnostics


# -- validate --------------------------------------------------------------------
def test_validate_all_fixtures():
    code, out = run("validate")
    assert code == 0 and out.endswith("ok\n")
    for name in fixture_names():
        assert f"loaded {name}:" in out


def test_validate_reports_problem(tmp_path):
    p = tmp_path / "bad.gsk"
    p.write_text(BROKEN_SHEAF)
    code, out = run("validate", str(p), "--json")
    body = json.loads(out)
    assert code == 1 and body["ok"] is False and body["diagnostics"]


def test_parse_and_usage_errors_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.gsk"
    p.write_text("field GF2\nnonsense\n")
    assert run("validate", str(p))[0] == 2
    assert run("compute", "stalk", "k-line3", "--fixture", "line3")[0] == 2
    assert run("compute", "stalk", "k-line3", "zz", "--fixture", "line3")[0] == 2
    assert run("frobnicate")[0] == 2
    assert "usage error" in capsys.readouterr().err


# -- compute --------------------------------------------------------------------------
def test_compute_pushforward_along_punctured_line():
    code, out = run("compute", "pushforward", "j", "F", "--fixture", "line3", "--json")
    rows = json.loads(out)["rows"]
    at_c = {tuple(r["degree"]): r["rank"] for r in rows if r["point"] == "c"}
    assert code == 0 and at_c == {(0,): 2, (1,): 2, (2,): 2}


def test_compute_text_output():
    code, out = run("compute", "dual", "k-line3", "--fixture", "line3")
    assert code == 0 and out == "dual k-line3\n  H^0  c  (0)  rank 1\n"
    code, out = run("compute", "cohomology", "k-line3", "--fixture", "line3")
    assert out.splitlines()[1].split() == ["H^0", "*", "()", "rank", "1"]


def test_infinite_support_is_explained():
    code, out = run("compute", "pushforward", "jZ", "FZ", "--fixture", "line3-z")
    assert code == 1 and "--degree-window" in out
    code, out = run("compute", "pushforward", "jZ", "FZ", "--fixture", "line3-z", "--degree-window", "1", "--json")
    rows = json.loads(out)["rows"]
    assert code == 0 and sorted(tuple(r["degree"]) for r in rows if r["point"] == "c") == [(-1,), (0,), (1,)]


# -- check -----------------------------------------------------------------------------
def test_check_is_deterministic():
    a = run("check", "all", "--seed", "3", "--count", "5", "--json")
    b = run("check", "all", "--seed", "3", "--count", "5", "--json")
    assert a == b and a[0] == 0
    assert json.loads(a[1])["ok"] is True


def test_injected_fault_is_named():
    code, out = run("check", "all", "--seed", "3", "--count", "5", "--inject-fault")
    assert code == 1
    assert out.rstrip().endswith("law failure")
    assert any(line.startswith("FAIL ") for line in out.splitlines())
