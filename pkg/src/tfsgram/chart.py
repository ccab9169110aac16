"""Bottom-up all-solutions chart parser with relational goals in rules."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import reader as R
from .description import expand_macros, from_term
from .fs import FeatureStructure, Node, Store, Template, copy_graph
from .relational import Database, GoalSpec, _rebuild_goal, compile_statement, expand_goal, goal_from_term

log = logging.getLogger(__name__)

DEFAULT_EDGE_LIMIT = 100_000


class RuleError(ValueError):
    pass


class EdgeLimitExceeded(RuntimeError):
    pass


@dataclass
class PSRule:
    name: str
    # each alternative: (template, items); items are ("cat", slot) or ("goal", goal tuple)
    alternatives: list
    n_daughters: int
    n_goals: int
    line: int | None = None


def parse_rule_term(t: R.Compound, macros):
    """Split ``name rule Mother ===> Items`` into name, mother and item specs."""
    name_t, rest = t.args
    if not isinstance(name_t, R.Atom):
        raise RuleError(f"rule name must be an atom, found {name_t}")
    name = name_t.name
    if not (isinstance(rest, R.Compound) and rest.functor == "===>"):
        raise RuleError(f"rule {name}: expected Mother ===> Daughters")
    mother_t, body = rest.args
    items = []
    for it in R.conj_list(body):
        if isinstance(it, R.Compound) and it.functor == ">" and len(it.args) == 2 and isinstance(it.args[0], R.Atom):
            kind = it.args[0].name
            if kind == "cat":
                items.append(("cat", expand_macros(from_term(it.args[1]), macros)))
                continue
            if kind == "goal":
                items.append(("goal", expand_goal(goal_from_term(it.args[1]), macros)))
                continue
            if kind == "cats":
                raise RuleError(f"rule {name}: cats> (variable daughter lists) is not supported")
        raise RuleError(f"rule {name}: expected cat> or goal> item, found {it}")
    if not any(k == "cat" for k, _ in items):
        raise RuleError(f"rule {name}: no daughters (cat>)")
    return name, expand_macros(from_term(mother_t), macros), items


def compile_rule(h, name: str, mother, items, line=None) -> PSRule:
    descs = [mother] + [d for k, d in items if k == "cat"]
    goals = [g for k, g in items if k == "goal"]
    combined = None
    for g in reversed(goals):
        combined = g if combined is None else GoalSpec("and", (g, combined))
    alts = []
    for alt in compile_statement(h, descs, combined):
        if alt is None:
            log.warning("rule %s: alternative unsatisfiable, dropped", name)
            continue
        tpl, _ = alt
        pos = [0]
        slots = list(range(len(descs), len(tpl.roots)))
        compiled = []
        dslot = 1
        for k, x in items:
            if k == "cat":
                compiled.append(("cat", dslot))
                dslot += 1
            else:
                compiled.append(("goal", _rebuild_goal(x, None, slots, pos)))
        alts.append((tpl, compiled))
    return PSRule(name, alts, len(descs) - 1, len(goals), line)


class Edge:
    __slots__ = ("start", "end", "node", "rule", "dtrs", "form", "entry", "id")

    def __init__(self, start, end, node, rule=None, dtrs=(), form=None, entry=None, id=0):
        self.start = start
        self.end = end
        self.node = node
        self.rule = rule
        self.dtrs = dtrs
        self.form = form
        self.entry = entry
        self.id = id

    def __repr__(self):
        what = self.rule or repr(self.form)
        return f"<Edge {self.id} {self.start}-{self.end} {what}>"


class Chart:
    def __init__(self, n: int):
        self.n = n
        self.at: list[list[Edge]] = [[] for _ in range(n + 1)]
        self.edges: list[Edge] = []

    def solutions(self) -> list[Edge]:
        return [e for e in self.at[0] if e.end == self.n] if self.n else []


@dataclass
class ParseResult:
    tokens: list[str]
    chart: Chart
    solutions: list[Edge]
    unknown: list[tuple[int, str]] = field(default_factory=list)
    edge_limit_hit: bool = False

    @property
    def count(self) -> int:
        return len(self.solutions)


class Parser:
    def __init__(self, h, rules: list[PSRule], lexicon, db: Database, edge_limit: int = DEFAULT_EDGE_LIMIT):
        self.h = h
        self.rules = rules
        self.lexicon = lexicon
        self.db = db
        self.edge_limit = edge_limit

    def parse(self, tokens: list[str]) -> ParseResult:
        n = len(tokens)
        chart = Chart(n)
        store = Store(self.h)
        unknown = [(i, t) for i, t in enumerate(tokens) if not self.lexicon.lookup(t)]
        if unknown or n == 0:
            return ParseResult(list(tokens), chart, [], unknown)
        limit_hit = False
        try:
            for i in range(n - 1, -1, -1):
                agenda: list[Edge] = []
                for entry in self.lexicon.lookup(tokens[i]):
                    agenda.append(self._add(chart, Edge(i, i + 1, entry.template.instantiate()[0],
                                                        form=tokens[i], entry=entry)))
                k = 0
                while k < len(agenda):
                    edge = agenda[k]
                    k += 1
                    chart.at[i].append(edge)
                    for rule in self.rules:
                        for m in self._apply(store, chart, rule, edge):
                            agenda.append(self._add(chart, m))
        except EdgeLimitExceeded:
            limit_hit = True
            log.warning("edge limit %d reached; parse abandoned", self.edge_limit)
        sols = [] if limit_hit else chart.solutions()
        return ParseResult(list(tokens), chart, sols, [], limit_hit)

    def _add(self, chart: Chart, e: Edge) -> Edge:
        if len(chart.edges) >= self.edge_limit:
            raise EdgeLimitExceeded()
        e.id = len(chart.edges)
        chart.edges.append(e)
        return e

    def _apply(self, store: Store, chart: Chart, rule: PSRule, edge: Edge):
        out = []
        for tpl, items in rule.alternatives:
            mark = store.mark()
            inst = tpl.instantiate()
            first = True
            # depth-first over items; each frame = (item index, position, daughters)
            self._match(store, chart, rule, items, inst, 0, edge.start, (), edge, out)
            store.undo(mark)
        return out

    def _match(self, store, chart, rule, items, inst, k, pos, dtrs, first_edge, out):
        if k == len(items):
            out.append(Edge(first_edge.start, pos, copy_graph(inst[0]), rule=rule.name, dtrs=dtrs))
            return
        kind, x = items[k]
        if kind == "cat":
            if not dtrs:
                cands = (first_edge,)
            else:
                if pos >= chart.n:
                    return
                cands = chart.at[pos]
            for e in cands:
                mark = store.mark()
                if store.unify(inst[x], e.node):
                    self._match(store, chart, rule, items, inst, k + 1, e.end, dtrs + (e,), first_edge, out)
                store.undo(mark)
        else:
            for _ in self.db.solve(store, x, inst):
                self._match(store, chart, rule, items, inst, k + 1, pos, dtrs, first_edge, out)


def parse_tree(edge: Edge, indent: int = 0) -> str:
    pad = "  " * indent
    if edge.rule is None:
        return f"{pad}{edge.form}"
    lines = [f"{pad}{edge.rule} [{edge.start}-{edge.end}]"]
    for d in edge.dtrs:
        lines.append(parse_tree(d, indent + 1))
    return "\n".join(lines)


def tree_term(edge: Edge):
    """Nested tuple view: (rule, daughters...) or the token for a leaf."""
    if edge.rule is None:
        return edge.form
    return (edge.rule,) + tuple(tree_term(d) for d in edge.dtrs)
