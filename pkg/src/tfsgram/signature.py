"""Type hierarchy, appropriateness and GLB queries.

The most general type is called ``bot`` (the convention of the source
grammar's formalism); every declared type without an explicit supertype is
attached below it.  "glb" follows the hierarchy-as-information ordering:
``glb(a, b)`` is the most general type that is at least as specific as both,
i.e. the result type of unifying ``a`` and ``b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

TOP_NAME = "bot"


class SignatureError(ValueError):
    """Raised by :func:`build_hierarchy`; ``kind`` names the failed check."""

    def __init__(self, kind: str, message: str, **details):
        super().__init__(message)
        self.kind = kind
        self.details = details


@dataclass
class SignatureDecl:
    type: str
    subtypes: list[str] = field(default_factory=list)
    intro: dict[str, str] = field(default_factory=dict)
    line: int | None = None


@dataclass(frozen=True)
class FICViolation:
    feature: str
    introducers: frozenset[str]

    def __str__(self):
        return f"feature {self.feature} introduced at {', '.join(sorted(self.introducers))}"


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class TypeHierarchy:
    """Validated, immutable signature.

    Types are addressed by name in the public API and by dense integer ids
    internally (``self.index``).  ``glb_id``/``approp_id``/``feats`` are the
    fast paths used by unification.
    """

    def __init__(self, names, parents, approp, closed_world, below, above, glb, children=None):
        self.below: list[int] = below
        self.above: list[int] = above
        self._glb: list[list[int]] = glb
        self.names: list[str] = names
        self.index: dict[str, int] = {n: i for i, n in enumerate(names)}
        self.top = self.index[TOP_NAME]
        self.closed_world = closed_world
        self.parents: list[list[int]] = parents
        if children is None:
            children = [[] for _ in names]
            for c, ps in enumerate(parents):
                for p in ps:
                    children[p].append(c)
        self.children: list[list[int]] = children
        self._approp: list[dict[str, int]] = approp
        self._finish()

    def _finish(self):
        n = len(self.names)
        self.feats: list[tuple[str, ...]] = [tuple(sorted(a)) for a in self._approp]
        self.species_ids = frozenset(i for i in range(n) if not self.children[i])
        self._species_below = [
            tuple(s for s in _bits(self.below[t]) if s in self.species_ids) for t in range(n)
        ]
        intro: dict[str, list[int]] = {}
        for t in range(n):
            for f in self._approp[t]:
                intro.setdefault(f, []).append(t)
        self._introducers: dict[str, tuple[int, ...]] = {}
        for f, ts in intro.items():
            # most general introducers: no strictly more general type also carries f
            mins = tuple(
                t for t in ts if not any(o != t and (self.below[o] >> t) & 1 for o in ts)
            )
            self._introducers[f] = mins

    # -- name-based queries --------------------------------------------
    @property
    def types(self) -> frozenset[str]:
        return frozenset(self.names)

    @property
    def species(self) -> frozenset[str]:
        return frozenset(self.names[i] for i in self.species_ids)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def id(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise KeyError(f"unknown type {name!r}") from None

    def glb(self, t1: str, t2: str) -> str | None:
        r = self.glb_id(self.id(t1), self.id(t2))
        return None if r < 0 else self.names[r]

    def subsumes(self, general: str, specific: str) -> bool:
        """True if ``specific`` is ``general`` or one of its subtypes."""
        return self.sub_id(self.id(general), self.id(specific))

    def approp(self, t: str, f: str) -> str | None:
        v = self._approp[self.id(t)].get(f.lower())
        return None if v is None else self.names[v]

    def appropriate_features(self, t: str) -> dict[str, str]:
        return {f: self.names[v] for f, v in self._approp[self.id(t)].items()}

    def minimal_subtypes(self, t: str) -> frozenset[str]:
        return frozenset(self.names[s] for s in self._species_below[self.id(t)])

    def subtypes(self, t: str) -> list[str]:
        """Immediate subtypes in declaration order."""
        return [self.names[c] for c in self.children[self.id(t)]]

    def introducers(self, f: str) -> frozenset[str]:
        return frozenset(self.names[t] for t in self._introducers.get(f.lower(), ()))

    @property
    def features(self) -> frozenset[str]:
        return frozenset(self._introducers)

    # -- id-based fast paths -------------------------------------------
    def glb_id(self, a: int, b: int) -> int:
        return self._glb[a][b]

    def sub_id(self, general: int, specific: int) -> bool:
        return (self.below[general] >> specific) & 1 == 1

    def approp_id(self, t: int, f: str) -> int | None:
        return self._approp[t].get(f)

    def approp_map(self, t: int) -> dict[str, int]:
        return self._approp[t]

    def species_below(self, t: int) -> tuple[int, ...]:
        return self._species_below[t]

    def feature_type(self, t: int, f: str) -> int:
        """Result type after asserting feature ``f`` on a node of type ``t``.

        Returns ``t`` itself when ``f`` is already appropriate, the GLB with the
        feature's introducing type otherwise, or -1 on failure.
        """
        if f in self._approp[t]:
            return t
        found = -1
        for i in self._introducers.get(f, ()):
            g = self._glb[t][i]
            if g >= 0 and f in self._approp[g]:
                if found >= 0 and found != g:
                    return -1
                found = g
        return found

    def __repr__(self):
        return f"<TypeHierarchy {len(self.names)} types{' closed-world' if self.closed_world else ''}>"


def validate_fic(h: TypeHierarchy) -> list[FICViolation]:
    out = []
    for f in sorted(h._introducers):
        mins = h._introducers[f]
        if len(mins) > 1:
            out.append(FICViolation(f, frozenset(h.names[t] for t in mins)))
    return out


def build_hierarchy(decls: list[SignatureDecl], closed_world: bool = False) -> TypeHierarchy:
    if not decls:
        raise SignatureError("empty", "signature has no declarations")

    # merge declarations by type, preserving first-seen order
    names: list[str] = [TOP_NAME]
    subs: dict[str, list[str]] = {TOP_NAME: []}
    intros: dict[str, dict[str, str]] = {TOP_NAME: {}}
    for d in decls:
        if d.type not in subs:
            names.append(d.type)
            subs[d.type] = []
            intros[d.type] = {}
        for s in d.subtypes:
            if s not in subs[d.type]:
                subs[d.type].append(s)
        for f, v in d.intro.items():
            f = f.lower()
            if f in intros[d.type] and intros[d.type][f] != v:
                raise SignatureError(
                    "duplicate", f"conflicting declarations of {f} on {d.type}", type=d.type, feature=f
                )
            intros[d.type][f] = v
    declared = set(subs)
    for t in names:
        for ref in subs[t] + list(intros[t].values()):
            if ref not in declared:
                raise SignatureError("undeclared", f"type {ref!r} used in declaration of {t!r} is not declared", type=ref)

    idx = {n: i for i, n in enumerate(names)}
    n = len(names)
    parents: list[list[int]] = [[] for _ in names]
    for t in names:
        for s in subs[t]:
            if s == t:
                raise SignatureError("cycle", f"type {t} is declared as its own subtype", cycle=[t, t])
            parents[idx[s]].append(idx[t])
    top = idx[TOP_NAME]
    for i in range(n):
        if i != top and not parents[i]:
            parents[i].append(top)
    # children in sub-list order; orphans follow under the top type
    children = [[idx[s] for s in subs[t]] for t in names]
    for i in range(n):
        if i != top and parents[i] == [top] and i not in children[top]:
            children[top].append(i)

    # topological order (supertypes first), detecting subtype cycles
    order: list[int] = []
    state = [0] * n
    for root in range(n):
        if state[root]:
            continue
        stack = [(root, iter(children[root]))]
        path = [root]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[node] = 2
                order.append(node)
            elif state[nxt] == 1:
                cyc = path[path.index(nxt):] + [nxt]
                names_c = [names[c] for c in cyc]
                raise SignatureError("cycle", "cycle in subtype relation: " + " > ".join(names_c), cycle=names_c)
            elif state[nxt] == 0:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(children[nxt])))
    order.reverse()  # parents before children

    below = [0] * n
    for t in reversed(order):
        m = 1 << t
        for c in children[t]:
            m |= below[c]
        below[t] = m
    above = [0] * n
    for t in order:
        m = 1 << t
        for p in parents[t]:
            m |= above[p]
        above[t] = m

    # glb table plus bounded completeness
    by_below = {below[t]: t for t in range(n)}
    glb = [[-1] * n for _ in range(n)]
    violations = []
    for a in range(n):
        ga = glb[a]
        ga[a] = a
        for b in range(a + 1, n):
            common = below[a] & below[b]
            if not common:
                continue
            g = by_below.get(common)
            if g is None:
                maximal = sorted(
                    names[c]
                    for c in _bits(common)
                    if not any(d != c and (below[d] >> c) & 1 for d in _bits(common))
                )
                violations.append((names[a], names[b], maximal))
                continue
            ga[b] = g
            glb[b][a] = g
    if violations:
        a, b, bounds = violations[0]
        msg = "; ".join(
            f"{x} and {y} have no unique greatest lower bound (maximal common lower bounds: {', '.join(z)})"
            for x, y, z in violations
        )
        raise SignatureError(
            "bounded_completeness",
            "bounded completeness violated: " + msg,
            pair=(a, b),
            bounds=bounds,
            violations=violations,
        )

    # inherited appropriateness
    approp: list[dict[str, int]] = [dict() for _ in range(n)]
    for t in order:
        acc: dict[str, int] = {}
        for p in parents[t]:
            for f, v in approp[p].items():
                if f in acc:
                    g = glb[acc[f]][v]
                    if g < 0:
                        raise SignatureError(
                            "inconsistent_inheritance",
                            f"{names[t]} inherits incompatible values for {f}: "
                            f"{names[acc[f]]} and {names[v]}",
                            type=names[t],
                            feature=f,
                        )
                    acc[f] = g
                else:
                    acc[f] = v
        for f, vname in intros[names[t]].items():
            v = idx[vname]
            if f in acc and glb[acc[f]][v] != v:
                raise SignatureError(
                    "widened",
                    f"{names[t]} declares {f}:{vname}, which does not narrow inherited {names[acc[f]]}",
                    type=names[t],
                    feature=f,
                )
            acc[f] = v
        approp[t] = acc

    if closed_world:
        _infer_upward(names, order, children, below, above, approp)

    _check_expansion(names, approp)

    return TypeHierarchy(names, parents, approp, closed_world, below, above, glb, children)


def _infer_upward(names, order, children, below, above, approp):
    """Closed-world: a type gets every feature its species all share."""
    n = len(names)
    species = [t for t in range(n) if not children[t]]
    by_above = {above[t]: t for t in range(n)}
    for t in reversed(order):
        if not children[t]:
            continue
        sp = [s for s in species if (below[t] >> s) & 1]
        common = set(approp[sp[0]])
        for s in sp[1:]:
            common &= set(approp[s])
        for f in sorted(common):
            ups = -1
            for s in sp:
                ups &= above[approp[s][f]]
            lub = by_above.get(ups)
            if lub is None:
                continue
            cur = approp[t].get(f)
            if cur is None or (below[cur] >> lub) & 1:
                approp[t][f] = lub


def _check_expansion(names, approp):
    # total well-typing creates a node of type approp(t,f) under every node of type t
    n = len(names)
    state = [0] * n
    for root in range(n):
        if state[root]:
            continue
        stack = [(root, iter(sorted(set(approp[root].values()))))]
        path = [root]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[node] = 2
            elif state[nxt] == 1:
                cyc = [names[c] for c in path[path.index(nxt):]] + [names[nxt]]
                raise SignatureError(
                    "expansion_cycle",
                    "total well-typing does not terminate: " + " -> ".join(cyc),
                    cycle=cyc,
                )
            elif state[nxt] == 0:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(sorted(set(approp[nxt].values())))))
