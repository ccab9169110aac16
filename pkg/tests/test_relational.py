from __future__ import annotations

import itertools
from collections import Counter

import pytest

from conftest import LIST_SRC
from tfsgram.grammar import load_grammar
from tfsgram.relational import Database, query

ALPHABET = ("p", "q")


def lists(max_len=4, alphabet=ALPHABET):
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def lit(xs):
    return "[" + ", ".join(xs) + "]"


def decode(fs):
    out = []
    while fs.type == "ne_list":
        out.append(fs.type_at("hd"))
        fs = fs.path_value("tl")
    assert fs.type == "e_list", fs.type
    return tuple(out)


@pytest.fixture(scope="module", params=["toy", "corpus"])
def env(request, corpus):
    if request.param == "toy":
        return load_grammar(text=LIST_SRC).db, ALPHABET
    return corpus.db, ("plus", "minus")


# -- brute-force oracles ------------------------------------------------------

def oracle_append_split(zs):
    return Counter((zs[:i], zs[i:]) for i in range(len(zs) + 1))


def oracle_list_del(xs):
    return Counter((xs[i], xs[:i] + xs[i + 1:]) for i in range(len(xs)))


def oracle_power_list(xs):
    out = Counter()
    idx = range(len(xs))
    for k in range(len(xs) + 1):
        for pos in itertools.permutations(idx, k):
            rest = tuple(xs[i] for i in idx if i not in pos)
            out[rest, tuple(xs[i] for i in pos)] += 1
    return out


def oracle_list_diff(xs, ys):
    results = [xs]
    for y in ys:
        nxt = []
        for r in results:
            for i, v in enumerate(r):
                if v == y:
                    nxt.append(r[:i] + r[i + 1:])
        results = nxt
    return Counter(results)


# -- tests ----------------------------------------------------------------------

def _map(env, xs):
    db, alpha = env
    m = dict(zip(ALPHABET, alpha))
    return tuple(m[x] for x in xs)


def _unmap(env, xs):
    m = dict(zip(env[1], ALPHABET))
    return tuple(m[x] for x in xs)


def test_append_splits(env):
    db = env[0]
    for zs in lists():
        got = Counter(
            (_unmap(env, decode(s["X"])), _unmap(env, decode(s["Y"])))
            for s in query(db, f"append(X, Y, {lit(_map(env, zs))})")
        )
        assert got == oracle_append_split(zs), zs


def test_append_concatenates(env):
    db = env[0]
    for xs in lists(2):
        for ys in lists(2):
            sols = query(db, f"append({lit(_map(env, xs))}, {lit(_map(env, ys))}, Z)")
            assert [_unmap(env, decode(s["Z"])) for s in sols] == [xs + ys]


def test_list_del(env):
    db = env[0]
    for xs in lists():
        got = Counter(
            (_unmap(env, (s["X"].type,))[0], _unmap(env, decode(s["R"])))
            for s in query(db, f"list_del(X, {lit(_map(env, xs))}, R)")
        )
        assert got == oracle_list_del(xs), xs


def test_power_list(env):
    db = env[0]
    for xs in lists():
        got = Counter(
            (_unmap(env, decode(s["M"])), _unmap(env, decode(s["R"])))
            for s in query(db, f"power_list({lit(_map(env, xs))}, M, R)")
        )
        assert got == oracle_power_list(xs), xs


def test_list_diff(env):
    db = env[0]
    for xs in lists():
        for ys in lists(len(xs)):
            got = Counter(
                _unmap(env, decode(s["R"]))
                for s in query(db, f"list_diff({lit(_map(env, xs))}, {lit(_map(env, ys))}, R)")
            )
            assert got == oracle_list_diff(xs, ys), (xs, ys)


def test_budget_exhaustion_fails_branch():
    g = load_grammar(text="bot sub [a]. a sub []. loop(X) if loop(X).")
    db = g.db
    assert query(db, "loop(a)", budget=50) == []
    assert db.warnings and "budget" in db.warnings[-1]


def test_undefined_relation_reported():
    from tfsgram.grammar import GrammarError

    with pytest.raises(GrammarError, match="undefined relation nope/1"):
        load_grammar(text="bot sub [a]. a sub []. r(X) if nope(X).")
