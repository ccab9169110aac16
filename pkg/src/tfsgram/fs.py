"""Totally well-typed feature graphs with trail-based destructive unification.

Nodes are mutated in place during unification; every mutation is recorded on
the owning :class:`Store`'s trail so that ``undo(mark)`` restores the exact
prior state.  Arc dicts are never mutated after they are attached to a node
(copy-on-write), which is what makes the trail entries cheap.

The public, non-destructive API is the :class:`FeatureStructure` wrapper and
the module-level :func:`new_fs`, :func:`unify`, :func:`subsumes`, ...
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .signature import TypeHierarchy

EMPTY: dict = {}


class Node:
    __slots__ = ("t", "arcs", "ref")

    def __init__(self, t: int, arcs: dict = EMPTY):
        self.t = t
        self.arcs = arcs
        self.ref: Node | None = None

    def __repr__(self):
        return f"<Node t={self.t} feats={sorted(self.arcs)}{' ->' if self.ref else ''}>"


def deref(n: Node) -> Node:
    while n.ref is not None:
        n = n.ref
    return n


class Template:
    """Flat, immutable snapshot of a graph with one or more root nodes."""

    __slots__ = ("types", "arcl", "roots")

    def __init__(self, types: list[int], arcl: list[tuple[int, tuple]], roots: tuple[int, ...]):
        self.types = types
        # (node index, ((feature, target index), ...)) for nodes with arcs
        self.arcl = arcl
        self.roots = roots

    def __len__(self):
        return len(self.types)

    def instantiate(self) -> list[Node]:
        nodes = [Node(t) for t in self.types]
        for i, al in self.arcl:
            nodes[i].arcs = {f: nodes[j] for f, j in al}
        return [nodes[r] for r in self.roots]

    def instantiate_all(self) -> list[Node]:
        nodes = [Node(t) for t in self.types]
        for i, al in self.arcl:
            nodes[i].arcs = {f: nodes[j] for f, j in al}
        return nodes


def to_template(roots: Sequence[Node]) -> Template:
    index: dict[int, int] = {}
    types: list[int] = []
    arcl: list[tuple[int, tuple]] = []
    order: list[Node] = []

    def visit(n: Node) -> int:
        while n.ref is not None:
            n = n.ref
        k = index.get(id(n))
        if k is None:
            k = len(types)
            index[id(n)] = k
            types.append(n.t)
            order.append(n)
        return k

    root_idx = tuple(visit(r) for r in roots)
    i = 0
    while i < len(order):
        n = order[i]
        if n.arcs:
            arcl.append((i, tuple((f, visit(v)) for f, v in n.arcs.items())))
        i += 1
    return Template(types, arcl, root_idx)


def copy_graph(root: Node) -> Node:
    return to_template([root]).instantiate()[0]


def reachable(roots: Iterable[Node]) -> list[Node]:
    seen: set[int] = set()
    out: list[Node] = []
    stack = [deref(r) for r in roots]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        out.append(n)
        for v in n.arcs.values():
            stack.append(deref(v))
    return out


class Store:
    """Unification workspace: hierarchy plus an undo trail."""

    def __init__(self, h: TypeHierarchy):
        self.h = h
        self.trail: list[tuple] = []
        self._glb = h._glb
        self._approp = h._approp
        self._type_tpl: dict[int, Template] = {}

    # -- trail ---------------------------------------------------------
    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            n, t, arcs, ref = trail.pop()
            n.t = t
            n.arcs = arcs
            n.ref = ref

    def commit(self) -> None:
        """Forget undo information (only valid with no outstanding marks)."""
        self.trail.clear()

    # -- construction --------------------------------------------------
    def new_node(self, t: int) -> Node:
        am = self._approp[t]
        if not am:
            return Node(t)
        tpl = self._type_tpl.get(t)
        if tpl is None:
            tpl = self._type_tpl[t] = to_template([self._expand(t)])
        return tpl.instantiate()[0]

    def _expand(self, t: int) -> Node:
        am = self._approp[t]
        if not am:
            return Node(t)
        return Node(t, {f: self._expand(am[f]) for f in sorted(am)})

    # -- unification ---------------------------------------------------
    def unify(self, a: Node, b: Node | int) -> bool:
        """Destructively unify ``a`` with node (or type id) ``b``.

        On failure the graphs are left partially modified; callers undo to a
        mark taken beforehand.
        """
        if not self._unify(a, b):
            return False
        if self.h.closed_world:
            return self.settle([a])
        return True

    def add_type(self, n: Node, t: int) -> bool:
        return self.unify(n, t)

    def _unify(self, a: Node, b) -> bool:
        glb = self._glb
        approp = self._approp
        trail = self.trail
        new_node = self.new_node
        stack = [(a, b)]
        push = stack.append
        pop = stack.pop
        while stack:
            x, y = pop()
            while x.ref is not None:
                x = x.ref
            if y.__class__ is int:
                xt = x.t
                t = glb[xt][y]
                if t < 0:
                    return False
                if t != xt:
                    xarcs = x.arcs
                    trail.append((x, xt, xarcs, None))
                    x.t = t
                    am = approp[t]
                    if am:
                        new = dict(xarcs)
                        for f, vt in am.items():
                            v = new.get(f)
                            if v is None:
                                new[f] = new_node(vt)
                            else:
                                push((v, vt))
                        x.arcs = new
                continue
            while y.ref is not None:
                y = y.ref
            if x is y:
                continue
            xt = x.t
            yt = y.t
            t = glb[xt][yt]
            if t < 0:
                return False
            xarcs = x.arcs
            trail.append((x, xt, xarcs, None))
            x.ref = y
            yarcs = y.arcs
            if t == yt:
                for f, xv in xarcs.items():
                    push((xv, yarcs[f]))
                continue
            trail.append((y, yt, yarcs, None))
            y.t = t
            new = dict(yarcs)
            for f, xv in xarcs.items():
                yv = new.get(f)
                if yv is None:
                    new[f] = xv
                else:
                    push((xv, yv))
            coerce = t != xt
            for f, vt in approp[t].items():
                v = new.get(f)
                if v is None:
                    new[f] = new_node(vt)
                elif coerce:
                    push((v, vt))
            y.arcs = new
        return True

    def get_feature(self, n: Node, f: str) -> Node | None:
        """Value of ``f`` at ``n``, promoting ``n`` by the feature's introducer."""
        n = deref(n)
        v = n.arcs.get(f)
        if v is not None:
            return v
        t = self.h.feature_type(n.t, f)
        if t < 0 or not self._unify(n, t):
            return None
        return deref(n).arcs.get(f)

    # -- closed world --------------------------------------------------
    def settle(self, roots: Iterable[Node]) -> bool:
        """Promote non-species nodes with a single consistent species, to fixpoint."""
        h = self.h
        glb = self._glb
        approp = self._approp
        species = h.species_ids
        roots = list(roots)
        changed = True
        while changed:
            changed = False
            for n in reachable(roots):
                n = deref(n)
                if n.t in species:
                    continue
                cands = []
                for s in h.species_below(n.t):
                    am = approp[s]
                    if all(glb[deref(v).t][am[f]] >= 0 for f, v in n.arcs.items()):
                        cands.append(s)
                        if len(cands) > 1:
                            break
                if not cands:
                    return False
                if len(cands) == 1:
                    if not self._unify(n, cands[0]):
                        return False
                    changed = True
        return True


# -- comparison ---------------------------------------------------------

def subsumes_nodes(h: TypeHierarchy, a: Node, b: Node) -> bool:
    """Simulation test: every path/type/reentrancy fact of ``a`` holds in ``b``."""
    below = h.below
    m: dict[int, Node] = {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = deref(x)
        y = deref(y)
        img = m.get(id(x))
        if img is not None:
            if img is not y:
                return False
            continue
        m[id(x)] = y
        if not (below[x.t] >> y.t) & 1:
            return False
        yarcs = y.arcs
        for f, xv in x.arcs.items():
            yv = yarcs.get(f)
            if yv is None:
                return False
            stack.append((xv, yv))
    return True


def path_value_node(n: Node, path: Sequence[str]) -> Node | None:
    n = deref(n)
    for f in path:
        v = n.arcs.get(f.lower())
        if v is None:
            return None
        n = deref(v)
    return n


def validate_node(h: TypeHierarchy, root: Node) -> list[str]:
    """Return a list of total-well-typing violations reachable from ``root``."""
    errs = []
    for n in reachable([root]):
        am = h.approp_map(n.t)
        if set(n.arcs) != set(am):
            errs.append(f"{h.names[n.t]}: arcs {sorted(n.arcs)} != appropriate {sorted(am)}")
        for f, v in n.arcs.items():
            if f in am and not h.sub_id(am[f], deref(v).t):
                errs.append(f"{h.names[n.t]}.{f}: {h.names[deref(v).t]} not below {h.names[am[f]]}")
    return errs


# -- printing -----------------------------------------------------------

def print_avm(h: TypeHierarchy, root: Node, indent: int = 0) -> str:
    """Render as description syntax; shared nodes carry tags ``T1``, ``T2``..."""
    counts: dict[int, int] = {}
    stack = [deref(root)]
    while stack:
        n = stack.pop()
        c = counts.get(id(n), 0)
        counts[id(n)] = c + 1
        if c == 0:
            stack.extend(deref(v) for v in reversed(list(n.arcs.values())))
    tags: dict[int, str] = {}
    done: set[int] = set()

    def render(n: Node, col: int) -> str:
        n = deref(n)
        key = id(n)
        if key in done:
            return tags[key]
        done.add(key)
        parts = []
        if counts[key] > 1:
            tags[key] = f"T{len(tags) + 1}"
            parts.append(tags[key])
        parts.append(h.names[n.t])
        if not n.arcs and len(parts) == 1:
            return parts[0]
        pad = " " * (col + 1)
        lines = []
        for f in sorted(n.arcs):
            lines.append(f"{f}: " + render(n.arcs[f], col + 1 + len(f) + 2))
        body = ", ".join(parts)
        if lines:
            body += ",\n" + ",\n".join(pad + ln for ln in lines)
        return "(" + body + ")"

    return render(root, indent)


# -- public wrapper -----------------------------------------------------

class FeatureStructure:
    """A rooted graph owned by its own store; treat as immutable."""

    __slots__ = ("h", "root")

    def __init__(self, h: TypeHierarchy, root: Node):
        self.h = h
        self.root = root

    @property
    def type(self) -> str:
        return self.h.names[deref(self.root).t]

    def copy(self) -> "FeatureStructure":
        return FeatureStructure(self.h, copy_graph(self.root))

    def path_value(self, path: Sequence[str] | str) -> "FeatureStructure | None":
        if isinstance(path, str):
            path = [p for p in path.split(":") if p]
        n = path_value_node(self.root, path)
        return None if n is None else FeatureStructure(self.h, n)

    def type_at(self, path: Sequence[str] | str) -> str | None:
        v = self.path_value(path)
        return None if v is None else v.type

    def same_node(self, p1, p2) -> bool:
        a = self.path_value(p1)
        b = self.path_value(p2)
        return a is not None and b is not None and deref(a.root) is deref(b.root)

    def subsumes(self, other: "FeatureStructure") -> bool:
        return subsumes_nodes(self.h, self.root, other.root)

    def equivalent(self, other: "FeatureStructure") -> bool:
        return self.subsumes(other) and other.subsumes(self)

    def nodes(self) -> list[Node]:
        return reachable([self.root])

    def validate(self) -> list[str]:
        return validate_node(self.h, self.root)

    def avm(self) -> str:
        return print_avm(self.h, self.root)

    def __str__(self):
        return self.avm()

    def __repr__(self):
        return f"<FeatureStructure {self.type} ({len(self.nodes())} nodes)>"


def new_fs(h: TypeHierarchy, t: str) -> FeatureStructure:
    return FeatureStructure(h, Store(h).new_node(h.id(t)))


def unify(h: TypeHierarchy, a: FeatureStructure, b: FeatureStructure) -> FeatureStructure | None:
    """Non-destructive unification of two structures (operates on copies)."""
    ra, rb = to_template([a.root, b.root]).instantiate()
    st = Store(h)
    if not st.unify(ra, rb):
        return None
    return FeatureStructure(h, copy_graph(ra))


def subsumes(h: TypeHierarchy, a: FeatureStructure, b: FeatureStructure) -> bool:
    return subsumes_nodes(h, a.root, b.root)


def path_value(fs: FeatureStructure, path: Sequence[str]) -> FeatureStructure | None:
    return fs.path_value(path)


def copy(fs: FeatureStructure) -> FeatureStructure:
    return fs.copy()


def from_graph(h: TypeHierarchy, types: Sequence[str], arcs: dict, root: int = 0) -> FeatureStructure:
    """Build a structure from explicit nodes: ``arcs[(i, feat)] = j``.

    No well-typing is enforced; use :meth:`FeatureStructure.validate`.
    """
    nodes = [Node(h.id(t)) for t in types]
    out: list[dict] = [{} for _ in types]
    for (i, f), j in arcs.items():
        out[i][f] = nodes[j]
    for n, a in zip(nodes, out):
        n.arcs = a if a else EMPTY
    return FeatureStructure(h, nodes[root])
