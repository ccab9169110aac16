"""Lexicon compilation, lexical rules with morphological rewriting, closure."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

from . import reader as R
from .description import Description, expand_macros, from_term
from .fs import FeatureStructure, Store, Template, deref, subsumes_nodes, to_template
from .relational import Database, GoalSpec, compile_statement, expand_goal, goal_from_term

log = logging.getLogger(__name__)


class LexiconError(ValueError):
    pass


@dataclass
class LexEntry:
    form: str
    template: Template
    provenance: tuple[str, ...] = ()
    line: int | None = None
    base: int | None = None  # index of the base entry this one derives from

    def fs(self, h) -> FeatureStructure:
        return FeatureStructure(h, self.template.instantiate()[0])


def compile_base_lexicon(h, entries: list[tuple[str, Description, int | None]]) -> list[LexEntry]:
    """One entry per (form, satisfiable lifted alternative); descriptions macro-free."""
    out: list[LexEntry] = []
    for form, d, line in entries:
        for alt in compile_statement(h, [d]):
            if alt is None:
                log.warning("lexical entry %s (line %s): alternative unsatisfiable, dropped", form, line)
                continue
            out.append(LexEntry(form, alt[0], (), line, len(out)))
    return out


# -- morph conditions: a tiny Prolog over atoms and integers --------------

class PVar:
    __slots__ = ("name", "n")

    def __init__(self, name: str, n: int):
        self.name = name
        self.n = n

    def __repr__(self):
        return f"{self.name}_{self.n}"


def _pterm(t: R.Term, env: dict[str, PVar], k: int):
    if isinstance(t, R.Var):
        if t.name == "_":
            return PVar("_", k)
        v = env.get(t.name)
        if v is None:
            v = env[t.name] = PVar(t.name, k)
        return v
    if isinstance(t, R.Atom):
        return t.name
    if isinstance(t, R.Int):
        return t.value
    if isinstance(t, R.Compound):
        return (t.functor,) + tuple(_pterm(a, env, k) for a in t.args)
    if isinstance(t, R.PList):
        out = "[]" if t.tail is None else _pterm(t.tail, env, k)
        for x in reversed(t.items):
            out = (".", _pterm(x, env, k), out)
        return out
    raise LexiconError(f"bad morph-condition term {t}")


def _walk(x, s):
    while isinstance(x, PVar) and x in s:
        x = s[x]
    return x


def _unify(a, b, s):
    a = _walk(a, s)
    b = _walk(b, s)
    if a is b:
        return s
    if isinstance(a, PVar):
        s = dict(s)
        s[a] = b
        return s
    if isinstance(b, PVar):
        s = dict(s)
        s[b] = a
        return s
    if isinstance(a, tuple) and isinstance(b, tuple):
        if len(a) != len(b) or a[0] != b[0]:
            return None
        for x, y in zip(a[1:], b[1:]):
            s = _unify(x, y, s)
            if s is None:
                return None
        return s
    # atoms and numbers: compare by text so '2' and 2 agree
    return s if str(a) == str(b) else None


def _resolve(x, s):
    x = _walk(x, s)
    if isinstance(x, tuple):
        return (x[0],) + tuple(_resolve(a, s) for a in x[1:])
    return x


class MorphProgram:
    """Facts and ``:-`` clauses used by morph conditions."""

    def __init__(self):
        self.clauses: dict[tuple[str, int], list[tuple[R.Term, R.Term | None]]] = {}
        self._k = 0

    def add(self, head: R.Term, body: R.Term | None = None):
        name, args = (head.name, ()) if isinstance(head, R.Atom) else (head.functor, head.args)
        self.clauses.setdefault((name, len(args)), []).append((head, body))

    def _fresh(self, head, body):
        self._k += 1
        env: dict[str, PVar] = {}
        return _pterm(head, env, self._k), (None if body is None else _pterm(body, env, self._k))

    def solve(self, goal, s: dict, depth: int = 0) -> Iterator[dict]:
        if depth > 200:
            raise LexiconError("morph condition recursion too deep")
        goal = _walk(goal, s)
        if goal == "true":
            yield s
            return
        if isinstance(goal, tuple) and goal[0] == "," and len(goal) == 3:
            for s1 in self.solve(goal[1], s, depth + 1):
                yield from self.solve(goal[2], s1, depth + 1)
            return
        if isinstance(goal, tuple) and goal[0] == ";" and len(goal) == 3:
            yield from self.solve(goal[1], s, depth + 1)
            yield from self.solve(goal[2], s, depth + 1)
            return
        if isinstance(goal, tuple) and goal[0] in ("explode", "=") and len(goal) == 3:
            # forms are plain strings here, so exploding an atom is the identity
            s1 = _unify(goal[1], goal[2], s)
            if s1 is not None:
                yield s1
            return
        key = (goal, 0) if isinstance(goal, str) else (goal[0], len(goal) - 1)
        if key not in self.clauses:
            raise LexiconError(f"undefined morph-condition relation {key[0]}/{key[1]}")
        for head, body in self.clauses[key]:
            h2, b2 = self._fresh(head, body)
            s1 = _unify(goal, h2, s)
            if s1 is None:
                continue
            if b2 is None:
                yield s1
            else:
                yield from self.solve(b2, s1, depth + 1)


@dataclass
class MorphClause:
    pattern: tuple  # of str literals and R.Var
    replacement: tuple
    condition: R.Term | None = None


def morph_from_term(t: R.Term) -> list[MorphClause]:
    out = []
    for c in R.conj_list(t):
        if not (isinstance(c, R.Compound) and c.functor == "becomes" and len(c.args) == 2):
            raise LexiconError(f"morph clause expected (P becomes R), found {c}")
        pat, rep = c.args
        cond = None
        if isinstance(rep, R.Compound) and rep.functor == "when" and len(rep.args) == 2:
            rep, cond = rep.args
        out.append(MorphClause(_segments(pat), _segments(rep), cond))
    return out


def _segments(t: R.Term) -> tuple:
    segs = []
    for s in R.conj_list(t):
        if isinstance(s, R.Var):
            segs.append(s)
        elif isinstance(s, R.Atom):
            segs.append(s.name)
        elif isinstance(s, R.Int):
            segs.append(str(s.value))
        else:
            raise LexiconError(f"morph segment must be an atom or variable, found {s}")
    return tuple(segs)


def _match(segs: tuple, form: str, i: int, b: dict[str, str]) -> Iterator[dict[str, str]]:
    """Match pattern segments against form[i:], shortest segment values first."""
    if not segs:
        if i == len(form):
            yield b
        return
    s = segs[0]
    if isinstance(s, str):
        if form.startswith(s, i):
            yield from _match(segs[1:], form, i + len(s), b)
        return
    if s.name in b and s.name != "_":
        v = b[s.name]
        if form.startswith(v, i):
            yield from _match(segs[1:], form, i + len(v), b)
        return
    for j in range(i, len(form) + 1):
        b2 = dict(b)
        if s.name != "_":
            b2[s.name] = form[i:j]
        yield from _match(segs[1:], form, j, b2)


def apply_morphs(morphs: list[MorphClause], prog: MorphProgram, form: str) -> str | None:
    for mc in morphs:
        for b in _match(mc.pattern, form, 0, {}):
            if mc.condition is None:
                sols = [{}]
                env = {}
            else:
                env: dict[str, PVar] = {}
                cond = _pterm(mc.condition, env, 0)
                s0 = {}
                for name, val in b.items():
                    if name in env:
                        s0[env[name]] = val
                sols = prog.solve(cond, s0)
            for s in sols:
                parts = []
                ok = True
                for seg in mc.replacement:
                    if isinstance(seg, str):
                        parts.append(seg)
                    elif seg.name in b:
                        parts.append(b[seg.name])
                    elif seg.name in env:
                        v = _resolve(env[seg.name], s)
                        if isinstance(v, PVar) or isinstance(v, tuple):
                            ok = False
                            break
                        parts.append(str(v))
                    else:
                        ok = False
                        break
                if ok:
                    return "".join(parts)
    return None


# -- lexical rules --------------------------------------------------------

@dataclass
class LexRule:
    name: str
    alternatives: list  # (Template roots [in, out, goal args...], goal tuple or None)
    morphs: list[MorphClause]
    line: int | None = None


def compile_lex_rule(h, name: str, in_d: Description, out_d: Description, goal: GoalSpec | None,
                     morphs: list[MorphClause], line=None) -> LexRule:
    alts = [a for a in compile_statement(h, [in_d, out_d], goal) if a is not None]
    if not alts:
        log.warning("lexical rule %s: no satisfiable alternative", name)
    return LexRule(name, alts, morphs, line)


def parse_lex_rule_term(t: R.Compound, macros):
    """Split ``name lex_rule In **> Out [if Goal] morphs M`` into its parts."""
    name_t, rest = t.args
    if not isinstance(name_t, R.Atom):
        raise LexiconError(f"lexical rule name must be an atom, found {name_t}")
    if not (isinstance(rest, R.Compound) and rest.functor == "**>"):
        raise LexiconError(f"lexical rule {name_t.name}: expected In **> Out")
    in_t, rhs = rest.args
    goal_t = None
    morph_t = None
    if isinstance(rhs, R.Compound) and rhs.functor == "if":
        out_t, tail = rhs.args
        if isinstance(tail, R.Compound) and tail.functor == "morphs":
            goal_t, morph_t = tail.args
        else:
            goal_t = tail
    elif isinstance(rhs, R.Compound) and rhs.functor == "morphs":
        out_t, morph_t = rhs.args
    else:
        out_t = rhs
    in_d = expand_macros(from_term(in_t), macros)
    out_d = expand_macros(from_term(out_t), macros)
    goal = None if goal_t is None else expand_goal(goal_from_term(goal_t), macros)
    morphs = morph_from_term(morph_t) if morph_t is not None else [
        MorphClause((R.Var("X"),), (R.Var("X"),))
    ]
    return name_t.name, in_d, out_d, goal, morphs


def apply_lex_rule(h, db: Database, prog: MorphProgram, rule: LexRule, e: LexEntry) -> list[LexEntry]:
    out: list[LexEntry] = []
    store = Store(h)
    root = e.template.instantiate()[0]
    results: list = []
    for tpl, goal in rule.alternatives:
        mark = store.mark()
        inst = tpl.instantiate()
        if store.unify(inst[0], root):
            if goal is None:
                results.append(to_template([inst[1]]))
            else:
                for _ in db.solve(store, goal, inst):
                    if h.closed_world and not store.settle([inst[1]]):
                        continue
                    results.append(to_template([inst[1]]))
        store.undo(mark)
    if not results:
        return out
    form = apply_morphs(rule.morphs, prog, e.form)
    if form is None:
        log.info("lexical rule %s: no morph clause matches %r; skipped", rule.name, e.form)
        return out
    for tpl in results:
        out.append(LexEntry(form, tpl, e.provenance + (rule.name,), e.line, e.base))
    return out


def close_lexicon(h, db: Database, prog: MorphProgram, base: list[LexEntry], rules: list[LexRule],
                  depth: int) -> list[LexEntry]:
    entries = list(base)
    frontier = list(base)
    for _ in range(depth):
        new: list[LexEntry] = []
        for e in frontier:
            for r in rules:
                new.extend(apply_lex_rule(h, db, prog, r, e))
        if not new:
            break
        entries.extend(new)
        frontier = new
    return dedup(h, entries)


def dedup(h, entries: list[LexEntry]) -> list[LexEntry]:
    """Keep only the most general of same-form entries related by subsumption."""
    by_form: dict[str, list[int]] = {}
    for i, e in enumerate(entries):
        by_form.setdefault(e.form, []).append(i)
    roots = [e.template.instantiate()[0] for e in entries]
    dead: set[int] = set()
    for form, idxs in by_form.items():
        for a in idxs:
            if a in dead:
                continue
            for b in idxs:
                if a == b or b in dead:
                    continue
                if subsumes_nodes(h, roots[a], roots[b]):
                    # a is at least as general as b; drop b (mutual: later one goes)
                    if not subsumes_nodes(h, roots[b], roots[a]) or b > a:
                        dead.add(b)
    return [e for i, e in enumerate(entries) if i not in dead]


class Lexicon:
    def __init__(self, h, entries: list[LexEntry]):
        self.h = h
        self.entries = entries
        self.by_form: dict[str, list[LexEntry]] = {}
        for e in entries:
            self.by_form.setdefault(e.form, []).append(e)

    def lookup(self, form: str) -> list[LexEntry]:
        return list(self.by_form.get(form, ()))

    def forms(self) -> list[str]:
        return sorted(self.by_form)

    def __len__(self):
        return len(self.entries)
