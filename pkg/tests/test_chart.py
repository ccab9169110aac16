from __future__ import annotations

import pytest

from tfsgram.chart import parse_tree, tree_term
from tfsgram.grammar import GrammarError, load_grammar

TOY = """
bot sub [cat, list, agr].
cat sub [s, np, vp, v] intro [agr:agr].
s sub []. np sub []. vp sub []. v sub [].
agr sub [sg, pl]. sg sub []. pl sub [].
list sub [e_list, ne_list]. e_list sub []. ne_list sub [] intro [hd:bot, tl:list].

same(X, X) if true.

s_rule rule (s, agr:A) ===> cat> (np, agr:A), cat> (vp, agr:B), goal> same(A, B).
vp_rule rule (vp, agr:A) ===> cat> (v, agr:A), cat> np.

kim ---> (np, agr:sg).
dogs ---> (np, agr:pl).
sees ---> (v, agr:sg).
see ---> (v, agr:pl).
them ---> (np, agr:(sg;pl)).
"""


@pytest.fixture(scope="module")
def toy():
    return load_grammar(text=TOY)


def test_toy_counts(toy):
    assert toy.parse("kim sees dogs").count == 1
    assert toy.parse("dogs sees kim").count == 0
    assert toy.parse("dogs see them").count == 2
    assert toy.parse("kim").count == 1
    assert toy.parse("").count == 0


def test_unknown_word(toy):
    r = toy.parse("kim eats dogs")
    assert r.count == 0 and r.unknown == [(1, "eats")]


def test_edges_cover_contiguous_spans(toy):
    r = toy.parse("kim sees dogs")
    for e in r.chart.edges:
        assert 0 <= e.start < e.end <= 3
        if e.dtrs:
            assert e.dtrs[0].start == e.start and e.dtrs[-1].end == e.end
            for x, y in zip(e.dtrs, e.dtrs[1:]):
                assert x.end == y.start


def test_tree_views(toy):
    (sol,) = toy.parse("kim sees dogs").solutions
    assert tree_term(sol) == ("s_rule", "kim", ("vp_rule", "sees", "dogs"))
    assert parse_tree(sol).splitlines()[0] == "s_rule [0-3]"


def test_deterministic(toy):
    a = toy.parse("dogs see them")
    b = toy.parse("dogs see them")
    assert [x.avm() for x in map(lambda e: _fs(toy, e), a.solutions)] == [
        x.avm() for x in map(lambda e: _fs(toy, e), b.solutions)
    ]


def _fs(g, e):
    from tfsgram.fs import FeatureStructure

    return FeatureStructure(g.h, e.node)


def test_edge_limit(toy):
    r = toy.parse("kim sees dogs", edge_limit=3)
    assert r.edge_limit_hit and r.count == 0


def test_rule_errors():
    with pytest.raises(GrammarError, match="no daughters"):
        load_grammar(text="bot sub [a]. a sub []. r rule a ===> goal> true.")
    with pytest.raises(GrammarError, match="cats>"):
        load_grammar(text="bot sub [a]. a sub []. r rule a ===> cats> X.")


def test_corpus_rule_shapes(corpus):
    rules = {r.name: r for r in corpus.rules}
    assert (rules["hc_minus_inv2"].n_daughters, rules["hc_minus_inv2"].n_goals) == (3, 1)
    assert rules["filler_head"].n_daughters == 2


def test_corpus_trees(corpus):
    (t1,) = corpus.parse("der kleine mann").solutions
    assert tree_term(t1) == ("spr_head", "der", ("adjunct_head", "kleine", "mann"))
    sols = corpus.parse("lacht der kleine mann").solutions
    assert sols and all(tree_term(s)[0] == "hsc_plus_inv1" for s in sols)


def test_corpus_head_feature_principle(corpus):
    for words in ("der kleine mann", "lacht der kleine mann", "einige kleine verwandte"):
        for e in corpus.parse(words).solutions:
            fs = _fs(corpus, e)
            assert fs.same_node("synsem:loc:cat:head", "dtrs:head_dtr:synsem:loc:cat:head")


def test_corpus_dtrs_feature_matches_tree(corpus):
    (e,) = corpus.parse("der kleine mann").solutions
    fs = _fs(corpus, e)
    assert fs.type_at("dtrs") == "spr_head"
    assert fs.type_at("dtrs:head_dtr:dtrs") == "adjunct_head"
