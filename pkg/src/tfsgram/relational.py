"""Definite clauses over descriptions and a depth-first resolution engine."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

from . import reader as R
from .description import (
    Description,
    DescriptionError,
    compile_into,
    expand_macros,
    from_term,
    lift_all,
)
from .fs import FeatureStructure, Node, Store, Template, to_template

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000
# nested goal frames before a branch counts as runaway (Python stack guard)
MAX_DEPTH = 600

# Goal encoding (tuples for speed):
#   ("true",)  ("and", g1, g2)  ("or", g1, g2)  ("call", (name, arity), (slot, ...))
# Slots index the roots of the owning template.
TRUE = ("true",)


class RelationError(ValueError):
    pass


@dataclass
class Clause:
    key: tuple[str, int]
    template: Template
    body: tuple
    line: int | None = None

    @property
    def name(self) -> str:
        return self.key[0]

    @property
    def arity(self) -> int:
        return self.key[1]


@dataclass
class GoalSpec:
    """A goal whose call arguments are descriptions (before compilation)."""

    kind: str
    parts: tuple = ()
    name: str = ""
    args: tuple = ()


def goal_from_term(t: R.Term) -> GoalSpec:
    if isinstance(t, R.Atom):
        if t.name == "true":
            return GoalSpec("true")
        return GoalSpec("call", name=t.name)
    if isinstance(t, R.Compound):
        if t.functor == "," and len(t.args) == 2:
            return GoalSpec("and", (goal_from_term(t.args[0]), goal_from_term(t.args[1])))
        if t.functor == ";" and len(t.args) == 2:
            return GoalSpec("or", (goal_from_term(t.args[0]), goal_from_term(t.args[1])))
        return GoalSpec("call", name=t.functor, args=tuple(from_term(a) for a in t.args))
    raise RelationError(f"bad goal {t}")


def goal_descriptions(g: GoalSpec) -> list[Description]:
    if g.kind == "call":
        return list(g.args)
    out = []
    for p in g.parts:
        out.extend(goal_descriptions(p))
    return out


def _rebuild_goal(g: GoalSpec, descs: list, slots: list[int], pos: list[int]):
    if g.kind == "true":
        return TRUE
    if g.kind == "call":
        n = len(g.args)
        s = tuple(slots[pos[0] : pos[0] + n])
        pos[0] += n
        return ("call", (g.name, n), s)
    return (g.kind, _rebuild_goal(g.parts[0], descs, slots, pos), _rebuild_goal(g.parts[1], descs, slots, pos))


def expand_goal(g: GoalSpec, macros) -> GoalSpec:
    if g.kind == "call":
        return GoalSpec("call", name=g.name, args=tuple(expand_macros(a, macros) for a in g.args))
    if g.kind == "true":
        return g
    return GoalSpec(g.kind, tuple(expand_goal(p, macros) for p in g.parts))


def compile_statement(h, descs: list[Description], goal: GoalSpec | None = None):
    """Compile a statement's descriptions (plus goal arguments) into templates.

    ``descs`` must be macro-free.  Disjunctions are lifted across all of them,
    giving one ``(template, goal_tuple)`` per satisfiable alternative.  The
    template's roots are the statement descriptions followed by the goal
    arguments.
    """
    gdescs = goal_descriptions(goal) if goal is not None else []
    all_descs = list(descs) + gdescs
    out = []
    for alt in lift_all(all_descs) if all_descs else [[]]:
        store = Store(h)
        env: dict[str, Node] = {}
        roots = []
        ok = True
        for d in alt:
            n = store.new_node(h.top)
            roots.append(n)
            if not compile_into(store, n, d, env):
                ok = False
                break
        if ok and h.closed_world:
            ok = store.settle(roots)
        if not ok:
            out.append(None)
            continue
        tpl = to_template(roots)
        g = None
        if goal is not None:
            slots = list(range(len(descs), len(all_descs)))
            g = _rebuild_goal(goal, gdescs, slots, [0])
        out.append((tpl, g))
    return out


class BudgetExceeded(Exception):
    pass


class Database:
    def __init__(self, h, budget: int = DEFAULT_BUDGET):
        self.h = h
        self.clauses: dict[tuple[str, int], list[Clause]] = {}
        self.budget = budget
        self.warnings: list[str] = []
        # relations proved coinductively: a call already active on the same
        # argument nodes succeeds instead of recursing
        self.coinductive: set[tuple[str, int]] = set()
        self._active: list = []

    def relations(self) -> list[tuple[str, int]]:
        return list(self.clauses)

    def assert_clause(self, c: Clause) -> "Database":
        self.clauses.setdefault(c.key, []).append(c)
        return self

    def add_clause_term(self, head: R.Term, body: R.Term, macros, line=None) -> list[Clause]:
        if isinstance(head, R.Atom):
            name, args = head.name, ()
        elif isinstance(head, R.Compound):
            name, args = head.functor, head.args
        else:
            raise RelationError(f"bad clause head {head}")
        descs = [expand_macros(from_term(a), macros) for a in args]
        goal = expand_goal(goal_from_term(body), macros)
        added = []
        for alt in compile_statement(self.h, descs, goal):
            if alt is None:
                log.warning("clause %s/%d (line %s): alternative unsatisfiable, dropped", name, len(args), line)
                continue
            tpl, g = alt
            c = Clause((name, len(args)), tpl, g, line)
            self.assert_clause(c)
            added.append(c)
        if not added:
            self.clauses.setdefault((name, len(args)), [])
        return added

    def check_defined(self) -> list[str]:
        """Report calls to undefined relations."""
        errs = []

        def walk(g, where):
            if g[0] == "call":
                if g[1] not in self.clauses:
                    errs.append(f"{where}: undefined relation {g[1][0]}/{g[1][1]}")
            elif g[0] in ("and", "or"):
                walk(g[1], where)
                walk(g[2], where)

        for key, cs in self.clauses.items():
            for c in cs:
                walk(c.body, f"{key[0]}/{key[1]}")
        return errs

    # -- resolution ----------------------------------------------------
    def solve(self, store: Store, goal: tuple, nodes: list[Node], budget: int | None = None) -> Iterator[None]:
        """Enumerate solutions of ``goal`` whose slots refer to ``nodes``.

        Each yielded solution leaves the bindings in ``store``; resuming the
        generator undoes them.  On exhaustion the store is back at its entry
        state.
        """
        counter = [budget if budget is not None else self.budget]
        mark = store.mark()
        try:
            yield from self._solve(store, goal, nodes, counter, 0)
        except BudgetExceeded:
            store.undo(mark)
            msg = f"resolution budget of {budget or self.budget} steps (depth {MAX_DEPTH}) exhausted; branch failed"
            log.warning(msg)
            self.warnings.append(msg)

    def _solve(self, store: Store, goal: tuple, nodes: list[Node], counter: list[int], depth: int) -> Iterator[None]:
        if depth > MAX_DEPTH:
            raise BudgetExceeded()
        depth += 1
        kind = goal[0]
        if kind == "call":
            key = goal[1]
            clauses = self.clauses.get(key)
            if clauses is None:
                raise RelationError(f"undefined relation {key[0]}/{key[1]}")
            args = [nodes[s] for s in goal[2]]
            if key in self.coinductive:
                yield from self._solve_co(store, key, clauses, args, counter, depth)
                return
            for c in clauses:
                counter[0] -= 1
                if counter[0] < 0:
                    raise BudgetExceeded()
                mark = store.mark()
                inst = c.template.instantiate()
                ok = True
                unify = store.unify
                for a, b in zip(args, inst):
                    if not unify(a, b):
                        ok = False
                        break
                if ok:
                    body = c.body
                    if body[0] == "true":
                        yield
                    else:
                        yield from self._solve(store, body, inst, counter, depth)
                store.undo(mark)
        elif kind == "and":
            g2 = goal[2]
            for _ in self._solve(store, goal[1], nodes, counter, depth):
                yield from self._solve(store, g2, nodes, counter, depth)
        elif kind == "or":
            yield from self._solve(store, goal[1], nodes, counter, depth)
            yield from self._solve(store, goal[2], nodes, counter, depth)
        elif kind == "true":
            yield
        else:
            raise RelationError(f"bad goal {goal!r}")

    def _solve_co(self, store, key, clauses, args, counter, depth):
        from .fs import deref

        for k2, prev in self._active:
            if k2 == key and all(deref(a) is deref(b) for a, b in zip(args, prev)):
                yield
                return
        frame = (key, tuple(args))
        for c in clauses:
            counter[0] -= 1
            if counter[0] < 0:
                raise BudgetExceeded()
            mark = store.mark()
            inst = c.template.instantiate()
            if all(store.unify(a, b) for a, b in zip(args, inst)):
                self._active.append(frame)
                try:
                    for _ in self._solve(store, c.body, inst, counter, depth):
                        # the hypothesis only holds inside this call's proof
                        self._active.remove(frame)
                        yield
                        self._active.append(frame)
                finally:
                    if frame in self._active:
                        self._active.remove(frame)
            store.undo(mark)


# -- convenience --------------------------------------------------------

def query(db: Database, text: str, macros=None, budget: int | None = None) -> list[dict[str, FeatureStructure]]:
    """Solve a goal given as source text; returns variable bindings per solution."""
    from .description import variables

    goal = expand_goal(goal_from_term(R.read_term(text)), macros or {})
    gdescs = goal_descriptions(goal)
    names: list[str] = []
    for d in gdescs:
        for v in variables(d):
            if v not in names and not v.startswith("_"):
                names.append(v)
    results = []
    h = db.h
    for alt in lift_all(gdescs) if gdescs else [[]]:
        store = Store(h)
        env: dict[str, Node] = {}
        nodes = []
        ok = True
        for d in alt:
            n = store.new_node(h.top)
            nodes.append(n)
            if not compile_into(store, n, d, env):
                ok = False
                break
        if not ok:
            continue
        g = _rebuild_goal(goal, gdescs, list(range(len(alt))), [0])
        bound = [v for v in names if v in env]
        for _ in db.solve(store, g, nodes, budget):
            copies = to_template([env[v] for v in bound]).instantiate()
            results.append({v: FeatureStructure(h, c) for v, c in zip(bound, copies)})
    return results


def solve_all(db: Database, text: str, macros=None, budget: int | None = None) -> list[dict[str, FeatureStructure]]:
    return query(db, text, macros, budget)
