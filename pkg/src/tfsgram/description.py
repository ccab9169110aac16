"""Description language: AST, macro expansion, disjunction lifting, compilation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

from . import reader as R
from .fs import Node, Store, deref


class DescriptionError(ValueError):
    pass


class MacroError(DescriptionError):
    pass


@dataclass(frozen=True)
class TypeLit:
    name: str


@dataclass(frozen=True)
class FeatVal:
    feat: str
    desc: "Description"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Conj:
    left: "Description"
    right: "Description"


@dataclass(frozen=True)
class Disj:
    left: "Description"
    right: "Description"


@dataclass(frozen=True)
class MacroCall:
    name: str
    args: tuple


@dataclass(frozen=True)
class ListSugar:
    items: tuple
    tail: "Description | None" = None


Description = Union[TypeLit, FeatVal, Var, Conj, Disj, MacroCall, ListSugar]


@dataclass(frozen=True)
class MacroDef:
    name: str
    params: tuple[str, ...]
    body: Description
    line: int | None = None

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, len(self.params))


class _Anon:
    """Numbers anonymous variables so each ``_`` is distinct."""

    def __init__(self):
        self.n = 0

    def fresh(self) -> str:
        self.n += 1
        return f"_{self.n}"


_anon = _Anon()


def from_term(t: R.Term) -> Description:
    if isinstance(t, R.Var):
        return Var(_anon.fresh() if t.name == "_" else t.name)
    if isinstance(t, R.Atom):
        return TypeLit(t.name)
    if isinstance(t, R.PList):
        return ListSugar(
            tuple(from_term(x) for x in t.items),
            None if t.tail is None else from_term(t.tail),
        )
    if isinstance(t, R.Int):
        raise DescriptionError(f"integer {t.value} is not a description")
    if isinstance(t, R.Compound):
        f, a = t.functor, t.args
        if f == "," and len(a) == 2:
            return Conj(from_term(a[0]), from_term(a[1]))
        if f == ";" and len(a) == 2:
            return Disj(from_term(a[0]), from_term(a[1]))
        if f == ":" and len(a) == 2:
            if not isinstance(a[0], R.Atom):
                raise DescriptionError(f"feature name expected before ':', found {a[0]}")
            return FeatVal(a[0].name.lower(), from_term(a[1]))
        if f == "@" and len(a) == 1:
            m = a[0]
            if isinstance(m, R.Atom):
                return MacroCall(m.name, ())
            if isinstance(m, R.Compound):
                return MacroCall(m.functor, tuple(from_term(x) for x in m.args))
            raise DescriptionError(f"macro name expected after '@', found {m}")
        raise DescriptionError(f"unexpected term {t} in description")
    raise DescriptionError(f"unexpected term {t!r}")


def parse_description(text: str) -> Description:
    return from_term(R.read_term(text))


def conjoin(ds) -> Description:
    ds = list(ds)
    out = ds[-1]
    for d in reversed(ds[:-1]):
        out = Conj(d, out)
    return out


def variables(d: Description) -> list[str]:
    out: list[str] = []

    def walk(x):
        if isinstance(x, Var):
            if x.name not in out:
                out.append(x.name)
        elif isinstance(x, FeatVal):
            walk(x.desc)
        elif isinstance(x, (Conj, Disj)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, MacroCall):
            for a in x.args:
                walk(a)
        elif isinstance(x, ListSugar):
            for i in x.items:
                walk(i)
            if x.tail is not None:
                walk(x.tail)

    walk(d)
    return out


# -- macros -------------------------------------------------------------

def make_macro(head: R.Term, body: R.Term, line: int | None = None) -> MacroDef:
    if isinstance(head, R.Atom):
        return MacroDef(head.name, (), from_term(body), line)
    if isinstance(head, R.Compound):
        params = []
        for p in head.args:
            if not isinstance(p, R.Var) or p.name == "_":
                raise MacroError(f"macro {head.functor}: parameters must be named variables")
            params.append(p.name)
        if len(set(params)) != len(params):
            raise MacroError(f"macro {head.functor}: repeated parameter")
        return MacroDef(head.functor, tuple(params), from_term(body), line)
    raise MacroError(f"bad macro head {head}")


class _Renamer:
    def __init__(self):
        self.n = 0

    def next(self) -> int:
        self.n += 1
        return self.n


_renamer = _Renamer()


def _subst(d: Description, env: dict[str, Description], suffix: str) -> Description:
    if isinstance(d, Var):
        if d.name in env:
            return env[d.name]
        return Var(f"{d.name}#{suffix}")
    if isinstance(d, TypeLit):
        return d
    if isinstance(d, FeatVal):
        return FeatVal(d.feat, _subst(d.desc, env, suffix))
    if isinstance(d, Conj):
        return Conj(_subst(d.left, env, suffix), _subst(d.right, env, suffix))
    if isinstance(d, Disj):
        return Disj(_subst(d.left, env, suffix), _subst(d.right, env, suffix))
    if isinstance(d, MacroCall):
        return MacroCall(d.name, tuple(_subst(a, env, suffix) for a in d.args))
    if isinstance(d, ListSugar):
        return ListSugar(
            tuple(_subst(i, env, suffix) for i in d.items),
            None if d.tail is None else _subst(d.tail, env, suffix),
        )
    raise TypeError(d)


def expand_macros(d: Description, defs: dict[tuple[str, int], MacroDef], _stack=()) -> Description:
    if isinstance(d, (Var, TypeLit)):
        return d
    if isinstance(d, FeatVal):
        return FeatVal(d.feat, expand_macros(d.desc, defs, _stack))
    if isinstance(d, Conj):
        return Conj(expand_macros(d.left, defs, _stack), expand_macros(d.right, defs, _stack))
    if isinstance(d, Disj):
        return Disj(expand_macros(d.left, defs, _stack), expand_macros(d.right, defs, _stack))
    if isinstance(d, ListSugar):
        return ListSugar(
            tuple(expand_macros(i, defs, _stack) for i in d.items),
            None if d.tail is None else expand_macros(d.tail, defs, _stack),
        )
    if isinstance(d, MacroCall):
        key = (d.name, len(d.args))
        m = defs.get(key)
        if m is None:
            arities = sorted(a for (n, a) in defs if n == d.name)
            if arities:
                raise MacroError(
                    f"macro {d.name} called with {len(d.args)} argument(s); defined arities: {arities}"
                )
            raise MacroError(f"undefined macro {d.name}/{len(d.args)}")
        if key in _stack:
            cyc = [f"{n}/{a}" for n, a in _stack[_stack.index(key):]] + [f"{d.name}/{len(d.args)}"]
            raise MacroError("recursive macro: " + " -> ".join(cyc))
        args = tuple(expand_macros(a, defs, _stack) for a in d.args)
        body = _subst(m.body, dict(zip(m.params, args)), str(_renamer.next()))
        return expand_macros(body, defs, _stack + (key,))
    raise TypeError(d)


# -- disjunction --------------------------------------------------------

def lift_disjunction(d: Description) -> list[Description]:
    if isinstance(d, (Var, TypeLit)):
        return [d]
    if isinstance(d, FeatVal):
        return [FeatVal(d.feat, x) for x in lift_disjunction(d.desc)]
    if isinstance(d, Conj):
        return [Conj(a, b) for a in lift_disjunction(d.left) for b in lift_disjunction(d.right)]
    if isinstance(d, Disj):
        return lift_disjunction(d.left) + lift_disjunction(d.right)
    if isinstance(d, ListSugar):
        parts = [lift_disjunction(i) for i in d.items]
        tails = [None] if d.tail is None else lift_disjunction(d.tail)
        return [ListSugar(tuple(items), tl) for items in itertools.product(*parts) for tl in tails]
    if isinstance(d, MacroCall):
        raise DescriptionError("lift_disjunction requires a macro-free description")
    raise TypeError(d)


def lift_all(ds: list[Description]) -> list[list[Description]]:
    """Cartesian product of lifted alternatives across a statement's descriptions."""
    return [list(c) for c in itertools.product(*(lift_disjunction(d) for d in ds))]


# -- compilation --------------------------------------------------------

def compile_into(store: Store, node: Node, d: Description, env: dict[str, Node]) -> bool:
    """Add the constraints of ``d`` to ``node``; False if unsatisfiable.

    Unknown types/features raise :class:`DescriptionError`.
    """
    h = store.h
    stack = [(node, d)]
    while stack:
        n, x = stack.pop()
        if isinstance(x, TypeLit):
            t = h.index.get(x.name)
            if t is None:
                raise DescriptionError(f"unknown type {x.name!r}")
            if not store.unify(n, t):
                return False
        elif isinstance(x, FeatVal):
            if x.feat not in h._introducers:
                raise DescriptionError(f"unknown feature {x.feat!r}")
            v = store.get_feature(n, x.feat)
            if v is None:
                return False
            stack.append((v, x.desc))
        elif isinstance(x, Var):
            b = env.get(x.name)
            if b is None:
                env[x.name] = n
            elif not store.unify(n, b):
                return False
        elif isinstance(x, Conj):
            stack.append((n, x.right))
            stack.append((n, x.left))
        elif isinstance(x, ListSugar):
            cur = n
            for item in x.items:
                hd = store.get_feature(cur, "hd")
                if hd is None:
                    return False
                if not compile_into(store, hd, item, env):
                    return False
                cur = store.get_feature(cur, "tl")
                if cur is None:
                    return False
            if x.tail is None:
                if "e_list" not in h.index:
                    raise DescriptionError("list notation needs an e_list type")
                if not store.unify(cur, h.index["e_list"]):
                    return False
            else:
                stack.append((cur, x.tail))
        elif isinstance(x, Disj):
            raise DescriptionError("compile requires a disjunction-free description")
        elif isinstance(x, MacroCall):
            raise DescriptionError(f"unexpanded macro @{x.name}")
        else:
            raise TypeError(x)
    return True


def compile(h, d: Description, env: dict[str, Node] | None = None, store: Store | None = None):
    """Compile a macro- and disjunction-free description to a fresh structure.

    Returns ``(FeatureStructure, env)`` or ``(None, env)`` on failure.
    """
    from .fs import FeatureStructure

    store = store or Store(h)
    env = {} if env is None else env
    root = store.new_node(h.top)
    if not compile_into(store, root, d, env):
        return None, env
    return FeatureStructure(h, deref(root)), env


def describe(h, text: str, macros: dict | None = None):
    """Convenience: parse, expand, lift and compile; returns the alternatives."""
    d = expand_macros(parse_description(text), macros or {})
    out = []
    for alt in lift_disjunction(d):
        fs, _ = compile(h, alt)
        if fs is not None:
            out.append(fs)
    return out
