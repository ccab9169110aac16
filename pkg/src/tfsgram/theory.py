"""Compile type definitions (``t cons D``) into t/h/c definite-clause triples.

For every type ``t``:

* ``t_t(X) if bot_h((X, t))`` routes through the whole hierarchy,
* ``t_h(X) if t_c(X), (s1_h(X) ; ...)`` adds the constraints of ``t`` and
  resolves to one of the immediate subtypes (just ``t_c(X)`` for species),
* ``t_c((t, D')) if s_t(V1), ...`` assigns the type and the consequent, with
  every type restriction below the root replaced by a call to that type's
  t-relation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import reader as R
from .description import (
    Conj,
    Description,
    Disj,
    FeatVal,
    ListSugar,
    MacroCall,
    TypeLit,
    Var,
    expand_macros,
    from_term,
    lift_disjunction,
    variables,
)
from .fs import FeatureStructure, Store, deref, reachable, subsumes_nodes, to_template
from .relational import Database


class TheoryError(ValueError):
    pass


@dataclass
class TypeDefinition:
    antecedent: str
    consequent: Description


@dataclass
class RelationalTheory:
    h: object
    # (relation name, head text, body text) in emission order
    clauses: list[tuple[str, str, str]] = field(default_factory=list)

    def relations(self) -> list[str]:
        seen = []
        for name, _, _ in self.clauses:
            if name not in seen:
                seen.append(name)
        return seen

    def source(self) -> str:
        return "\n".join(f"{head} if {body}." for _, head, body in self.clauses) + "\n"

    def database(self, budget: int | None = None) -> Database:
        db = Database(self.h, budget) if budget else Database(self.h)
        for _, head, body in self.clauses:
            db.add_clause_term(R.read_term(head), R.read_term(body), {})
        # cyclic structures would otherwise re-enter t-relations forever
        db.coinductive = {(f"{t}_t", 1) for t in self.h.names}
        return db


def desc_text(d: Description) -> str:
    if isinstance(d, TypeLit):
        return _atom(d.name)
    if isinstance(d, Var):
        return d.name
    if isinstance(d, FeatVal):
        return f"({_atom(d.feat)}:{desc_text(d.desc)})"
    if isinstance(d, Conj):
        return f"({desc_text(d.left)}, {desc_text(d.right)})"
    if isinstance(d, Disj):
        return f"({desc_text(d.left)} ; {desc_text(d.right)})"
    if isinstance(d, ListSugar):
        body = ", ".join(desc_text(i) for i in d.items)
        if d.tail is not None:
            body += " | " + desc_text(d.tail)
        return f"[{body}]"
    if isinstance(d, MacroCall):
        if not d.args:
            return f"@{d.name}"
        return f"@{d.name}({', '.join(desc_text(a) for a in d.args)})"
    raise TypeError(d)


def _atom(name: str) -> str:
    if name and name[0].islower() and name.replace("_", "a").isalnum():
        return name
    return "'" + name.replace("'", "''") + "'"


def rel(t: str, kind: str) -> str:
    return _atom(f"{t}_{kind}")


def _replace_types(d: Description, fresh, calls: list[tuple[str, str]], at_root: bool) -> Description:
    """Swap non-root type literals for variables plus t-relation calls."""
    if isinstance(d, TypeLit):
        if at_root:
            return d
        v = fresh()
        calls.append((d.name, v))
        return Var(v)
    if isinstance(d, Var):
        return d
    if isinstance(d, FeatVal):
        return FeatVal(d.feat, _replace_types(d.desc, fresh, calls, False))
    if isinstance(d, Conj):
        return Conj(_replace_types(d.left, fresh, calls, at_root), _replace_types(d.right, fresh, calls, at_root))
    if isinstance(d, ListSugar):
        return ListSugar(
            tuple(_replace_types(i, fresh, calls, False) for i in d.items),
            None if d.tail is None else _replace_types(d.tail, fresh, calls, False),
        )
    raise TheoryError(f"unexpected {d!r} in a disjunction-free consequent")


def compile_theory(h, defs: list[TypeDefinition], macros: dict | None = None) -> RelationalTheory:
    by_type: dict[str, list[Description]] = {}
    for d in defs:
        if d.antecedent not in h:
            raise TheoryError(f"type definition on undeclared type {d.antecedent!r}")
        by_type.setdefault(d.antecedent, []).append(expand_macros(d.consequent, macros or {}))
    th = RelationalTheory(h)
    top = h.names[h.top]
    for t in h.names:
        if t != top:
            th.clauses.append((rel(t, "t"), f"{rel(t, 't')}(X)", f"{rel(top, 'h')}((X, {_atom(t)}))"))
        else:
            th.clauses.append((rel(t, "t"), f"{rel(t, 't')}(X)", f"{rel(top, 'h')}(X)"))
        subs = h.subtypes(t)
        if subs:
            alts = " ; ".join(f"{rel(s, 'h')}(X)" for s in subs)
            th.clauses.append((rel(t, "h"), f"{rel(t, 'h')}(X)", f"({rel(t, 'c')}(X), ({alts}))"))
        else:
            th.clauses.append((rel(t, "h"), f"{rel(t, 'h')}(X)", f"{rel(t, 'c')}(X)"))
        cons = by_type.get(t)
        if not cons:
            th.clauses.append((rel(t, "c"), f"{rel(t, 'c')}({_atom(t)})", "true"))
            continue
        whole = cons[0]
        for c in cons[1:]:
            whole = Conj(whole, c)
        used = set(variables(whole))
        counter = [0]

        def fresh():
            while True:
                counter[0] += 1
                name = f"R{counter[0]}"
                if name not in used:
                    used.add(name)
                    return name

        for alt in lift_disjunction(whole):
            calls: list[tuple[str, str]] = []
            body_d = _replace_types(alt, fresh, calls, True)
            head = f"{rel(t, 'c')}(({_atom(t)}, {desc_text(body_d)}))"
            body = ", ".join(f"{rel(s, 't')}({v})" for s, v in calls) or "true"
            if len(calls) > 1:
                body = f"({body})"
            th.clauses.append((rel(t, "c"), head, body))
    return th


def admit(theory: RelationalTheory, db: Database, t: str, fs: FeatureStructure) -> list[FeatureStructure]:
    """Solutions of ``t``'s t-relation on (a copy of) ``fs``."""
    h = theory.h
    store = Store(h)
    root = fs.copy().root
    goal = ("call", (f"{t}_t", 1), (0,))
    out = []
    for _ in db.solve(store, goal, [root]):
        out.append(FeatureStructure(h, to_template([root]).instantiate()[0]))
    return out


def admits(theory: RelationalTheory, db: Database, fs: FeatureStructure) -> bool:
    """Ground check: every node's own t-relation holds without adding information."""
    h = theory.h
    orig = fs.root
    nodes = reachable([orig])
    for k in range(len(nodes)):
        tpl = to_template([orig] + [nodes[k]])
        root, n = tpl.instantiate()
        store = Store(h)
        goal = ("call", (f"{h.names[deref(n).t]}_t", 1), (0,))
        ok = False
        for _ in db.solve(store, goal, [n]):
            if subsumes_nodes(h, root, orig):
                ok = True
                break
        if not ok:
            return False
    return True


def definitions_from_source(src) -> list[TypeDefinition]:
    return [TypeDefinition(t, from_term(term)) for t, term, _ in src.cons]
