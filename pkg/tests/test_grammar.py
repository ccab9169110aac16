from __future__ import annotations

import subprocess
import sys

import pytest

from tfsgram.cli import cmd_test_all, indexed, main, report_block
from tfsgram.grammar import GrammarError, load_grammar

TOY = """
bot sub [sign, cat].
sign sub [] intro [cat:cat].
cat sub [s, np, vp]. s sub []. np sub []. vp sub [].
karl ---> cat:np.
lacht ---> cat:vp.
s_rule rule (cat:s) ===> cat> (cat:np), cat> (cat:vp).
t(1, [karl, lacht]).
t(2, [lacht, karl]).
t(3, []).
"""


@pytest.fixture
def toy_file(tmp_path):
    p = tmp_path / "toy.ale"
    p.write_text(TOY, encoding="utf-8")
    return p


def test_empty_grammar_warns():
    g = load_grammar(text="")
    assert any("empty" in w for w in g.warnings)
    assert g.parse([]).count == 0


def test_unknown_directive_named():
    with pytest.raises(GrammarError) as e:
        load_grammar(text="bot sub []. :- frobnicate(3).")
    assert "frobnicate" in str(e.value)


def test_errors_are_collected():
    with pytest.raises(GrammarError) as e:
        load_grammar(text="bot sub [a]. a sub []. w ---> zz. r rule a ===> cat> a, goal> nope(a).")
    assert len(e.value.errors) == 2
    assert "zz" in e.value.errors[0] and "nope/1" in e.value.errors[1]


def test_report_block_format():
    lines = report_block(1, ["der", "mann"], 1, 0.04)
    assert lines[0] == " * 1 >> 0 der 1 mann 2"
    assert lines[1].startswith("O.k.") and lines[1].endswith("Solutions:  1")
    assert report_block(2, [], 0, 0.0)[1].startswith("### No parse!!!!")
    assert lines[2] == "*" * 67
    assert indexed([]) == "0"


def test_test_all_counts_mismatches(toy_file):
    g = load_grammar(toy_file)
    out = []
    assert cmd_test_all(g, {1: 1, 2: 0, 3: 0}, out=out.append) == 0
    assert out[-1] == "3/3 match expectations"
    assert cmd_test_all(g, {1: 2}, out=out.append) == 1


def test_empty_test_set_passes_vacuously():
    g = load_grammar(text="bot sub [].")
    out = []
    assert cmd_test_all(g, {}, out=out.append) == 0
    assert out[-1] == "0/0 match expectations"


def test_cli_exit_codes(toy_file, tmp_path, capsys):
    exp = tmp_path / "exp.tsv"
    exp.write_text("1\t1\n2\t0\n", encoding="utf-8")
    assert main(["-g", str(toy_file), "test-all", "--expect", str(exp)]) == 0
    exp.write_text("1\t3\n", encoding="utf-8")
    assert main(["-g", str(toy_file), "test-all", "--expect", str(exp)]) == 1
    bad = tmp_path / "bad.ale"
    bad.write_text("bot sub [a].\n", encoding="utf-8")
    assert main(["-g", str(bad), "parse", "x"]) == 2
    assert capsys.readouterr().err.strip()


def test_cli_parse_show_avm(toy_file, capsys):
    main(["-g", str(toy_file), "parse", "karl", "lacht", "--show-avm"])
    out = capsys.readouterr().out
    assert "Solutions:  1" in out
    assert out.count("-- solution") == 1
    main(["-g", str(toy_file), "parse", "karl", "schlaeft"])
    assert "unknown word at 1: schlaeft" in capsys.readouterr().out


def test_cli_lex_provenance(capsys):
    main(["lex", "keine"])
    out = capsys.readouterr().out
    assert "ein2kein" in out and "base line" in out
    main(["lex", "lacht"])
    assert "bse_to_3_sing" in capsys.readouterr().out


def test_cli_theory(tmp_path, capsys):
    p = tmp_path / "m.ale"
    p.write_text("bot sub [a]. a sub [b] intro [x:bot]. b sub []. b cons x:b.\n", encoding="utf-8")
    main(["-g", str(p), "theory"])
    out = capsys.readouterr().out
    assert "b_c((b, (x:R1))) if b_t(R1)." in out


def test_parses_are_deterministic(corpus):
    a = [corpus.parse(tc.tokens).count for tc in corpus.tests[:20]]
    b = [corpus.parse(tc.tokens).count for tc in corpus.tests[:20]]
    assert a == b


def test_module_entry_point(toy_file):
    r = subprocess.run(
        [sys.executable, "-m", "tfsgram", "-g", str(toy_file), "parse", "karl", "lacht"],
        capture_output=True, text=True, check=False,
    )
    assert r.returncode == 0 and "Solutions:  1" in r.stdout
