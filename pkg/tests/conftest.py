from __future__ import annotations

import pytest

from tfsgram.grammar import load_corpus, load_grammar

VERB_SIG = """
bot sub [head, vform, bool].
head sub [verb, noun].
verb sub [fin_v, n_fin_v] intro [vform:vform, inv:bool].
fin_v sub [] intro [vform:fin].
n_fin_v sub [] intro [vform:n_fin, inv:minus].
noun sub [].
vform sub [fin, n_fin].
fin sub []. n_fin sub [].
bool sub [plus, minus].
plus sub []. minus sub [].
"""

HEAD_B_SIG = """
bot sub [head, case, decl].
head sub [subst, adj_noun_det, func].
subst sub [verb, prep, adj, noun].
adj_noun_det sub [adj, noun, det] intro [case:case, decl:decl].
func sub [det, marker].
verb sub []. prep sub []. adj sub []. noun sub []. det sub []. marker sub [].
case sub []. decl sub [].
"""

FIC_SIG = """
bot sub [head, case, decl].
head sub [subst, adj_noun_det, func].
subst sub [verb, prep, adj_or_noun].
adj_noun_det sub [adj_or_noun, det] intro [case:case, decl:decl].
func sub [det, marker].
adj_or_noun sub [adj, noun].
verb sub []. prep sub []. adj sub []. noun sub []. det sub []. marker sub [].
case sub []. decl sub [].
"""

MODEL_SRC = """
bot sub [a].
a sub [b, c] intro [x:bot, y:bot, z:bot].
b sub [].
c sub [d, e].
d sub []. e sub [].
c cons (x:(T, z:b), y:T).
d cons (y:T, z:T).
"""

LIST_SRC = """
bot sub [list, elt].
list sub [e_list, ne_list].
e_list sub [].
ne_list sub [] intro [hd:bot, tl:list].
elt sub [p, q].
p sub []. q sub [].

append([],L,L) if true.
append([H|T1],L,[H|T2]) if
  append(T1,L,T2).

list_del(X, [X|R], R) if true.
list_del(X, [Y|R1], [Y|R2]) if
   list_del(X,R1,R2).

power_list(L,L,[]) if true.
power_list(L,M,[F|R]) if
   list_del(F,L,O),
   power_list(O,M,R).

list_diff(X, [], X) if true.
list_diff(L, [E|F], R) if
   list_del(E, L, L1),
   list_diff(L1, F, R).
"""


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def verb_cw():
    return load_grammar(text=VERB_SIG, closed_world=True).h


@pytest.fixture(scope="session")
def verb_ow():
    return load_grammar(text=VERB_SIG, closed_world=False).h
