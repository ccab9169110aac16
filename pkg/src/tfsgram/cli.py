"""Command-line front end: parse, test-all, lex, theory."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .fs import print_avm
from .grammar import GrammarError, TestCase, corpus_path, expectations_path, load_grammar, read_expectations

RULE = "*" * 67


def indexed(tokens: list[str]) -> str:
    parts = ["0"]
    for i, t in enumerate(tokens, 1):
        parts += [t, str(i)]
    return " ".join(parts)


def report_block(tid, tokens, count, secs) -> list[str]:
    status = "O.k.   " if count else "### No parse!!!!  "
    return [
        f" * {tid} >> {indexed(tokens)}",
        f"{status} ** CPU time used (sec): {secs:.1f},  Solutions:  {count}",
        RULE,
    ]


def _load(args):
    paths = args.grammar or [corpus_path()]
    return load_grammar(
        paths,
        closed_world=True if args.closed_world else None,
        lex_rule_depth=args.lex_rule_depth,
    )


def cmd_parse(g, tokens: list[str], show_avm=False, edge_limit=None, out=print) -> int:
    t0 = time.perf_counter()
    res = g.parse(tokens, edge_limit)
    secs = time.perf_counter() - t0
    for i, w in res.unknown:
        out(f"unknown word at {i}: {w}")
    if res.edge_limit_hit:
        out("edge limit reached; parse abandoned")
    for line in report_block("-", tokens, res.count, secs):
        out(line)
    if show_avm:
        for k, e in enumerate(res.solutions, 1):
            out(f"-- solution {k}")
            out(print_avm(g.h, e.node))
    return res.count


def cmd_test_all(g, expected: dict[int, int], edge_limit=None, out=print) -> int:
    """Run all test sentences; return the number of count mismatches."""
    mismatches = 0
    machine = []
    total = 0.0
    tests: list[TestCase] = g.tests
    for tc in tests:
        t0 = time.perf_counter()
        res = g.parse(tc.tokens, edge_limit)
        secs = time.perf_counter() - t0
        total += secs
        exp = expected.get(tc.id, tc.expected)
        if exp is not None and exp != res.count:
            mismatches += 1
        for line in report_block(tc.id, tc.tokens, res.count, secs):
            out(line)
        machine.append(f"{tc.id}\t{res.count}\t{'' if exp is None else exp}\t{secs * 1000:.0f}")
    avg = total / len(tests) if tests else 0.0
    out(f"Total CPU time: {total:.2f} sec  --  Average per sentence: {avg:.3f} sec")
    for line in machine:
        out(line)
    out(f"{len(tests) - mismatches}/{len(tests)} match expectations")
    return mismatches


def cmd_lex(g, form: str, show_avm=False, out=print) -> int:
    entries = g.lexicon.lookup(form)
    for k, e in enumerate(entries, 1):
        chain = " <- ".join(reversed(e.provenance)) if e.provenance else "base"
        base = g.base_lexicon[e.base] if e.base is not None else None
        where = f" (base line {base.line})" if base is not None and base.line else ""
        out(f"{form} #{k}: {chain}{where}")
        if show_avm:
            out(print_avm(g.h, e.template.instantiate()[0]))
    if not entries:
        out(f"{form}: no entries")
    return len(entries)


def cmd_theory(g, out=print) -> None:
    from .theory import compile_theory, definitions_from_source

    out(compile_theory(g.h, definitions_from_source(g.source), g.macros).source().rstrip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tfsgram", description="Typed feature structure grammar engine")
    p.add_argument("-g", "--grammar", action="append", help="grammar file (repeatable; default: shipped corpus)")
    p.add_argument("--closed-world", action="store_true", help="closed-world type interpretation")
    p.add_argument("--lex-rule-depth", type=int, default=None, metavar="N")
    p.add_argument("--edge-limit", type=int, default=None, metavar="N")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)
    sp = sub.add_parser("parse", help="parse one sentence")
    sp.add_argument("tokens", nargs="+")
    sp.add_argument("--show-avm", action="store_true")
    st = sub.add_parser("test-all", help="run every t(N, [...]) sentence")
    st.add_argument("--expect", metavar="FILE", help="expectation table (id<TAB>count)")
    sl = sub.add_parser("lex", help="show closed-lexicon entries for a form")
    sl.add_argument("form")
    sl.add_argument("--show-avm", action="store_true")
    sub.add_parser("theory", help="print the relations compiled from cons statements")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        g = _load(args)
    except GrammarError as e:
        for err in e.errors:
            print(err, file=sys.stderr)
        return 2
    if args.cmd == "parse":
        cmd_parse(g, args.tokens, args.show_avm, args.edge_limit)
        return 0
    if args.cmd == "test-all":
        if args.expect:
            expected = read_expectations(args.expect)
        elif not args.grammar:
            expected = read_expectations(expectations_path())
        else:
            expected = {}
        return 1 if cmd_test_all(g, expected, args.edge_limit) else 0
    if args.cmd == "lex":
        cmd_lex(g, args.form, args.show_avm)
        return 0
    if args.cmd == "theory":
        cmd_theory(g)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
