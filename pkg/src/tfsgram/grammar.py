"""Grammar loader: classifies source statements and runs the compile pipeline."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import reader as R
from .chart import DEFAULT_EDGE_LIMIT, Parser, PSRule, compile_rule, parse_rule_term
from .description import DescriptionError, MacroDef, expand_macros, from_term, make_macro
from .lexicon import (
    Lexicon,
    LexRule,
    MorphProgram,
    close_lexicon,
    compile_base_lexicon,
    compile_lex_rule,
    parse_lex_rule_term,
)
from .relational import DEFAULT_BUDGET, Database
from .signature import TOP_NAME, SignatureDecl, SignatureError, TypeHierarchy, build_hierarchy

log = logging.getLogger(__name__)


class GrammarError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("\n".join(errors))
        self.errors = errors


@dataclass
class TestCase:
    id: int
    tokens: list[str]
    expected: int | None = None


@dataclass
class Source:
    decls: list[SignatureDecl] = field(default_factory=list)
    macros: dict = field(default_factory=dict)
    lex: list = field(default_factory=list)  # (form, term, line)
    lex_rules: list = field(default_factory=list)  # (term, line)
    rules: list = field(default_factory=list)  # (term, line)
    clauses: list = field(default_factory=list)  # (head, body, line)
    host: list = field(default_factory=list)  # (head, body|None, line)
    cons: list = field(default_factory=list)  # (type, term, line)
    tests: list[TestCase] = field(default_factory=list)
    directives: dict = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


KNOWN_DIRECTIVES = {"lex_rule_depth", "closed_world", "edge_limit", "budget"}


def _type_list(t: R.Term, what: str) -> list:
    if not isinstance(t, R.PList) or t.tail is not None:
        raise ValueError(f"{what}: expected a [...] list, found {t}")
    return list(t.items)


def _decl(t: R.Term, line: int) -> SignatureDecl:
    intro = {}
    if isinstance(t, R.Compound) and t.functor == "intro":
        base, ilist = t.args
        for it in _type_list(ilist, "intro"):
            if not (isinstance(it, R.Compound) and it.functor == ":" and all(isinstance(a, R.Atom) for a in it.args)):
                raise ValueError(f"intro: expected feature:type, found {it}")
            intro[it.args[0].name.lower()] = it.args[1].name
    else:
        base = t
    if isinstance(base, R.Compound) and base.functor == "sub":
        name_t, subs_t = base.args
        subs = []
        for s in _type_list(subs_t, "sub"):
            if not isinstance(s, R.Atom):
                raise ValueError(f"sub: expected type name, found {s}")
            subs.append(s.name)
    elif isinstance(base, R.Atom):
        name_t, subs = base, []
    else:
        raise ValueError(f"bad signature declaration {t}")
    if not isinstance(name_t, R.Atom):
        raise ValueError(f"bad type name {name_t}")
    return SignatureDecl(name_t.name, subs, intro, line)


def classify(text: str, source: str = "<string>", src: Source | None = None) -> Source:
    src = src or Source()
    try:
        terms = R.read_terms(text, source)
    except R.ReadError as e:
        src.errors.append(str(e))
        return src
    if not terms:
        src.warnings.append(f"{source}: empty grammar")
    for t, line in terms:
        where = f"{source}:{line}"
        try:
            f = t.functor if isinstance(t, R.Compound) else None
            if f in ("sub", "intro") and len(t.args) == 2:
                src.decls.append(_decl(t, line))
            elif f == "macro" and len(t.args) == 2:
                m = make_macro(t.args[0], t.args[1], line)
                if m.key in src.macros:
                    raise ValueError(f"macro {m.name}/{len(m.params)} defined twice")
                src.macros[m.key] = m
            elif f == "--->" and len(t.args) == 2:
                form = t.args[0]
                if not isinstance(form, R.Atom):
                    raise ValueError(f"lexical entry form must be an atom, found {form}")
                src.lex.append((form.name, t.args[1], line))
            elif f == "lex_rule" and len(t.args) == 2:
                src.lex_rules.append((t, line))
            elif f == "rule" and len(t.args) == 2:
                src.rules.append((t, line))
            elif f == "if" and len(t.args) == 2:
                src.clauses.append((t.args[0], t.args[1], line))
            elif f == "cons" and len(t.args) == 2:
                if not isinstance(t.args[0], R.Atom):
                    raise ValueError(f"cons: antecedent must be a type name, found {t.args[0]}")
                src.cons.append((t.args[0].name, t.args[1], line))
            elif f == ":-" and len(t.args) == 1:
                d = t.args[0]
                name = d.functor if isinstance(d, R.Compound) else getattr(d, "name", None)
                if name not in KNOWN_DIRECTIVES:
                    raise ValueError(f"unknown directive {d}")
                val = True
                if isinstance(d, R.Compound):
                    a = d.args[0]
                    val = a.value if isinstance(a, R.Int) else str(a)
                src.directives[name] = val
            elif f == ":-" and len(t.args) == 2:
                src.host.append((t.args[0], t.args[1], line))
            elif f == "t" and len(t.args) == 2 and isinstance(t.args[0], R.Int):
                toks = [str(x) for x in _type_list(t.args[1], "test")]
                tid = t.args[0].value
                if any(tc.id == tid for tc in src.tests):
                    raise ValueError(f"duplicate test id {tid}")
                src.tests.append(TestCase(tid, toks))
            elif isinstance(t, (R.Compound, R.Atom)) and f not in R.INFIX_OPS and f != "@":
                src.host.append((t, None, line))
            else:
                raise ValueError(f"unrecognised statement {t}")
        except (ValueError, DescriptionError) as e:
            src.errors.append(f"{where}: {e}")
    return src


@dataclass
class Grammar:
    h: TypeHierarchy
    macros: dict
    db: Database
    morph: MorphProgram
    base_lexicon: list
    lex_rules: list[LexRule]
    lexicon: Lexicon
    rules: list[PSRule]
    tests: list[TestCase]
    lex_rule_depth: int
    source: Source
    edge_limit: int = DEFAULT_EDGE_LIMIT
    warnings: list[str] = field(default_factory=list)

    def parser(self, edge_limit: int | None = None) -> Parser:
        return Parser(self.h, self.rules, self.lexicon, self.db, edge_limit or self.edge_limit)

    def parse(self, tokens, edge_limit: int | None = None):
        if isinstance(tokens, str):
            tokens = tokens.split()
        return self.parser(edge_limit).parse(list(tokens))


def load_grammar(
    paths=None,
    text: str | None = None,
    closed_world: bool | None = None,
    lex_rule_depth: int | None = None,
    budget: int | None = None,
) -> Grammar:
    src = Source()
    if text is not None:
        classify(text, "<string>", src)
    for p in [paths] if isinstance(paths, (str, Path)) else (paths or []):
        classify(Path(p).read_text(encoding="utf-8"), str(p), src)
    if src.errors:
        raise GrammarError(src.errors)

    cw = bool(src.directives.get("closed_world", False)) if closed_world is None else closed_world
    if not src.decls:
        if any((src.macros, src.lex, src.lex_rules, src.rules, src.clauses, src.cons, src.tests)):
            raise GrammarError(src.warnings + ["no signature declarations"])
        src.warnings.append("no signature declarations; empty grammar")
        src.decls.append(SignatureDecl(TOP_NAME))
    try:
        h = build_hierarchy(src.decls, closed_world=cw)
    except SignatureError as e:
        raise GrammarError([f"signature: {e}"]) from e

    errors: list[str] = []
    macros = src.macros
    db = Database(h, budget or src.directives.get("budget", DEFAULT_BUDGET))
    for head, body, line in src.clauses:
        try:
            db.add_clause_term(head, body, macros, line)
        except (ValueError, DescriptionError) as e:
            errors.append(f"line {line}: clause: {e}")
    morph = MorphProgram()
    for head, body, line in src.host:
        morph.add(head, body)

    lex_desc = []
    for form, t, line in src.lex:
        try:
            lex_desc.append((form, expand_macros(from_term(t), macros), line))
        except (ValueError, DescriptionError) as e:
            errors.append(f"line {line}: lexical entry {form}: {e}")
    base = []
    try:
        base = compile_base_lexicon(h, lex_desc)
    except (ValueError, DescriptionError) as e:
        errors.append(f"lexicon: {e}")

    lrs: list[LexRule] = []
    for t, line in src.lex_rules:
        try:
            name, in_d, out_d, goal, morphs = parse_lex_rule_term(t, macros)
            lrs.append(compile_lex_rule(h, name, in_d, out_d, goal, morphs, line))
        except (ValueError, DescriptionError) as e:
            errors.append(f"line {line}: lexical rule: {e}")

    rules: list[PSRule] = []
    for t, line in src.rules:
        try:
            name, mother, items = parse_rule_term(t, macros)
            rules.append(compile_rule(h, name, mother, items, line))
        except (ValueError, DescriptionError) as e:
            errors.append(f"line {line}: rule: {e}")

    errors.extend(db.check_defined())
    for r in rules:
        for _, items in r.alternatives:
            for k, g in items:
                if k == "goal":
                    errors.extend(_undefined(db, g, f"rule {r.name}"))
    for r in lrs:
        for _, g in r.alternatives:
            if g is not None:
                errors.extend(_undefined(db, g, f"lexical rule {r.name}"))
    if errors:
        raise GrammarError(errors)

    depth = lex_rule_depth if lex_rule_depth is not None else int(src.directives.get("lex_rule_depth", 0))
    closed = close_lexicon(h, db, morph, base, lrs, depth)
    g = Grammar(
        h=h,
        macros=macros,
        db=db,
        morph=morph,
        base_lexicon=base,
        lex_rules=lrs,
        lexicon=Lexicon(h, closed),
        rules=rules,
        tests=sorted(src.tests, key=lambda tc: tc.id),
        lex_rule_depth=depth,
        source=src,
        edge_limit=int(src.directives.get("edge_limit", DEFAULT_EDGE_LIMIT)),
        warnings=list(src.warnings),
    )
    return g


def _undefined(db: Database, g, where: str) -> list[str]:
    if g[0] == "call":
        return [] if g[1] in db.clauses else [f"{where}: undefined relation {g[1][0]}/{g[1][1]}"]
    if g[0] in ("and", "or"):
        return _undefined(db, g[1], where) + _undefined(db, g[2], where)
    return []


# -- shipped corpus -----------------------------------------------------

def corpus_path() -> Path:
    return Path(str(resources.files("tfsgram") / "data" / "german.ale"))


def expectations_path() -> Path:
    return Path(str(resources.files("tfsgram") / "data" / "german_expected.tsv"))


def read_expectations(path=None) -> dict[int, int]:
    out = {}
    for line in Path(path or expectations_path()).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        out[int(parts[0])] = int(parts[1])
    return out


def load_corpus(**kw) -> Grammar:
    return load_grammar(corpus_path(), **kw)
