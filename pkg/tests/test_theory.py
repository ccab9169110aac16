from __future__ import annotations

import itertools

import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from conftest import MODEL_SRC
from oracles import group1_admits, species_graphs
from tfsgram.description import Conj, Disj, FeatVal, TypeLit, Var
from tfsgram.fs import from_graph, new_fs
from tfsgram.grammar import load_grammar
from tfsgram.signature import SignatureDecl, SignatureError, build_hierarchy
from tfsgram.theory import (
    TheoryError,
    TypeDefinition,
    admit,
    admits,
    compile_theory,
    definitions_from_source,
)

SIGS = {
    "lists": """
bot sub [list, elt].
list sub [e_list, ne_list].
e_list sub []. ne_list sub [] intro [hd:elt, tl:list].
elt sub [p, q]. p sub []. q sub [].
ne_list cons (hd:X, tl:(e_list ; hd:X)).
""",
    "self_loops": """
bot sub [a].
a sub [b, c] intro [x:bot].
b sub [].
c sub [d, e].
d sub []. e sub [].
c cons x:(b ; d).
d cons (X, x:X).
""",
    "two_features": """
bot sub [a, v].
a sub [b, c] intro [f:bot].
b sub [].
c sub [d, e] intro [g:v].
d sub []. e sub [].
v sub [w1, w2]. w1 sub []. w2 sub [].
c cons (f:T, g:w1).
d cons f:(b, f:w2).
""",
    "multiple_inheritance": """
bot sub [a, b, v].
a sub [ab, c] intro [f:v].
b sub [ab, d] intro [g:bot].
ab sub []. c sub []. d sub [].
v sub [w1, w2]. w1 sub []. w2 sub [].
a cons f:w1.
ab cons (g:(T, ab), f:w1).
d cons (g:(c ; d)).
""",
}


def _theory(src):
    g = load_grammar(text=src)
    defs = definitions_from_source(g.source)
    th = compile_theory(g.h, defs, g.macros)
    return g.h, defs, th, th.database()


@pytest.fixture(scope="module")
def model():
    return _theory(MODEL_SRC)


def test_relations_have_expected_shape(model):
    h, defs, th, db = model
    text = th.source()
    for t in ("a", "b", "c", "d", "e"):
        for kind in ("t", "h", "c"):
            assert f"{t}_{kind}(" in text
    lines = {l.split(" if ")[0]: l for l in text.splitlines()}
    assert lines["a_h(X)"].endswith("(a_c(X), (b_h(X) ; c_h(X))).")
    assert lines["c_t(X)"] == "c_t(X) if bot_h((X, c))."
    c_rel = [l for l in text.splitlines() if l.startswith("c_c(")]
    assert len(c_rel) == 1 and c_rel[0].endswith("if b_t(R1).")
    assert [l for l in text.splitlines() if l.startswith("d_c(")] == ["d_c((d, ((y:T), (z:T)))) if true."]
    assert "e_c(e) if true." in text


def test_no_definitions_only_assign_types():
    h, _, th, _ = _theory("bot sub [a]. a sub [b]. b sub [].")
    cs = [l for l in th.source().splitlines() if "_c(" in l.split(" if ")[0]]
    assert cs == ["bot_c(bot) if true.", "a_c(a) if true.", "b_c(b) if true."]


def test_undeclared_antecedent():
    h = load_grammar(text="bot sub [a]. a sub [].").h
    with pytest.raises(TheoryError):
        compile_theory(h, [TypeDefinition("zz", TypeLit("a"))])


def test_admit_d(model):
    h, defs, th, db = model
    sols = admit(th, db, "d", new_fs(h, "d"))
    assert len(sols) == 1
    s = sols[0]
    assert s.type == "d"
    assert s.same_node("x", "y") and s.same_node("y", "z")
    assert s.type_at("x:z") == "b"


def test_admit_b_unconstrained(model):
    h, defs, th, db = model
    (s,) = admit(th, db, "b", new_fs(h, "b"))
    assert s.equivalent(new_fs(h, "b"))


def test_admit_c_resolves_species(model):
    h, defs, th, db = model
    sols = admit(th, db, "c", new_fs(h, "c"))
    assert sorted(s.type for s in sols) == ["d", "e"]
    for s in sols:
        assert s.same_node("x", "y") and s.type_at("x:z") == "b"


def test_admit_c_with_conflict(model):
    h, defs, th, db = model
    fs = from_graph(h, ["c", "e", "e", "e"], {
        (0, "x"): 1, (0, "y"): 2, (0, "z"): 3,
        **{(i, f): 3 for i in (1, 2, 3) for f in "xyz"},
    })
    # X and Y must be shared: distinct e nodes still unify, but X:Z:b clashes with e
    assert admit(th, db, "c", fs) == []


def test_model_exhaustive_small(model):
    h, defs, th, db = model
    n = 0
    for types, arcs in species_graphs(h, 2):
        fs = from_graph(h, types, arcs)
        assert admits(th, db, fs) == group1_admits(h, defs, fs), (types, arcs)
        n += 1
    assert n == 507


@st.composite
def model_graphs(draw):
    k = draw(st.integers(3, 4))
    types = [draw(st.sampled_from(["b", "d", "e"])) for _ in range(k)]
    arcs = {(i, f): draw(st.integers(0, k - 1)) for i in range(k) for f in "xyz"}
    return types, arcs


@settings(max_examples=1500, deadline=None)
@given(model_graphs())
def test_model_sampled_up_to_four_nodes(model, g):
    h, defs, th, db = model
    fs = from_graph(h, *g)
    assert admits(th, db, fs) == group1_admits(h, defs, fs)


@pytest.mark.parametrize("name", sorted(SIGS))
def test_exhaustive_node_bound_four(name):
    h, defs, th, db = _theory(SIGS[name])
    assert len(h.names) <= 9  # eight declared types plus bot
    seen = accepted = 0
    for types, arcs in species_graphs(h, 4):
        fs = from_graph(h, types, arcs)
        got = admits(th, db, fs)
        assert got == group1_admits(h, defs, fs), (types, arcs)
        seen += 1
        accepted += got
    assert seen and 0 < accepted < seen


# -- random signatures and theories ----------------------------------------

@st.composite
def random_theories(draw):
    n = draw(st.integers(2, 7))
    names = [f"s{i}" for i in range(n)]
    parents = {t: [draw(st.sampled_from(["bot"] + names[:i]))] for i, t in enumerate(names)}
    intro = {t: {} for t in names}
    feats = []
    for f in ("f", "g")[: draw(st.integers(1, 2))]:
        intro[draw(st.sampled_from(names))][f] = draw(st.sampled_from(["bot"] + names))
        feats.append(f)
    subs = {t: [c for c in names if parents[c][0] == t] for t in ["bot"] + names}
    try:
        h = build_hierarchy([SignatureDecl(t, subs[t], intro.get(t, {})) for t in ["bot"] + names])
    except SignatureError:
        assume(False)
    defs = []
    for t in draw(st.lists(st.sampled_from(names), min_size=1, max_size=3, unique=True)):
        defs.append(TypeDefinition(t, draw(descs(h, feats, 2))))
    return h, defs


def descs(h, feats, depth):
    leaf = st.one_of(
        st.sampled_from(list(h.names)).map(TypeLit),
        st.sampled_from(["X", "Y"]).map(Var),
    )
    if depth == 0:
        return leaf
    sub = descs(h, feats, depth - 1)
    return st.one_of(
        leaf,
        st.tuples(st.sampled_from(feats), sub).map(lambda p: FeatVal(*p)),
        st.tuples(sub, sub).map(lambda p: Conj(*p)),
        st.tuples(sub, sub).map(lambda p: Disj(*p)),
    )


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])
@given(random_theories())
def test_random_theories_exhaustive(data):
    h, defs = data
    th = compile_theory(h, defs)
    db = th.database()
    # largest node bound <= 4 whose enumeration stays small
    for bound in (4, 3, 2, 1):
        graphs = list(itertools.islice(species_graphs(h, bound), 1501))
        if len(graphs) <= 1500:
            break
    for types, arcs in graphs:
        fs = from_graph(h, types, arcs)
        assert admits(th, db, fs) == group1_admits(h, defs, fs), (th.source(), types, arcs)
