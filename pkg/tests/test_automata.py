import itertools
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rng_for
from rbpmc import ltl
from rbpmc.automata import (
    BAutomaton,
    Nbw,
    Nfw,
    StreettAutomaton,
    all_letters,
    automaton_from_dict,
    b_emptiness,
    b_product_nbw,
    b_to_streett,
    build_exec_bautomaton,
    build_exec_nfw,
    ltl_to_nbw,
    ltlf_to_nfw,
    nfw_inclusion,
    streett_emptiness,
)
from rbpmc.core import make_template
from rbpmc.edgetypes import classify
from rbpmc.oracle import brute_force_b_nonempty, check_b_lasso, executions_upto, random_bautomaton
from rbpmc.unwinding import build_unwinding

P, Q, R = frozenset({"p"}), frozenset({"q"}), frozenset({"r"})
EMPTY = frozenset()
SINGLE = {"p": P, "q": Q, "r": R}


def _word(text):
    return tuple(SINGLE[c] for c in text)


def _words(alphabet, max_len):
    for n in range(1, max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def _nfw_language(a, alphabet, max_len):
    return {"".join(w) for w in _words(alphabet, max_len) if a.accepts(_word("".join(w)))}


# --- execution automata ---


def test_exec_nfw_pstar_q(pstar_q):
    a = build_exec_nfw(build_unwinding(pstar_q))
    # prefixes of p*q that start in the initial state p
    expected = {w for w in ("".join(x) for x in _words("pq", 5)) if re.fullmatch(r"p+q?", w)}
    assert _nfw_language(a, "pq", 5) == expected


def test_exec_nfw_reset_broadcast(reset_broadcast):
    a = build_exec_nfw(build_unwinding(reset_broadcast))
    block = re.compile(r"(r*(p*|q)r)*")

    def is_prefix(w):
        return bool(block.fullmatch(w) or block.fullmatch(w + "r"))

    # executions start in the initial state r
    expected = {"".join(w) for w in _words("pqr", 6) if is_prefix("".join(w)) and w[0] == "r"}
    assert _nfw_language(a, "pqr", 6) == expected


def test_exec_nfw_matches_oracle(reset_broadcast, pstar_q):
    for tpl in (reset_broadcast, pstar_q):
        a = build_exec_nfw(build_unwinding(tpl))
        found = set()
        for n in range(1, 5):
            found |= executions_upto(tpl, n, 4)
        assert found == {w for w in _words([P, Q, R], 4) if a.accepts(w)}


def test_exec_nfw_without_initial_states():
    tpl = make_template("R", 2, ["p"], [], [], {"p": {"p"}})
    a = build_exec_nfw(build_unwinding(tpl))
    assert not any(a.accepts(w) for w in _words([P, EMPTY], 3))
    assert not a.accepts(())


def test_exec_bautomaton_pstar_q_is_empty(pstar_q):
    uw = build_unwinding(pstar_q)
    b = build_exec_bautomaton(uw, classify(uw))
    assert b.trivial_buchi
    assert b_emptiness(b).empty


def test_exec_bautomaton_reset_broadcast(reset_broadcast):
    uw = build_unwinding(reset_broadcast)
    b = build_exec_bautomaton(uw, classify(uw))
    assert b.accepts_lasso([], _word("rpr"))
    assert b.accepts_lasso([], _word("r"))
    assert b.accepts_lasso(_word("rq"), _word("rppr"))
    assert not b.accepts_lasso([], _word("rqp"))
    assert not b.accepts_lasso(_word("r"), _word("p"))
    assert not b.accepts_lasso([], _word("p"))


def test_counter_counts_blocks():
    # increments on p, resets on r: bounded p-blocks only
    b = BAutomaton(frozenset({"p", "r"}), ("s",), frozenset({"s"}),
                   (("s", P, "s", "inc"), ("s", R, "s", "reset")), frozenset({"s"}))
    assert b.accepts_lasso([], _word("ppr"))
    assert b.accepts_lasso(_word("pppp"), _word("r"))
    assert not b.accepts_lasso(_word("r"), _word("p"))


def test_counter_command_validation():
    with pytest.raises(ValueError):
        BAutomaton(frozenset(), ("s",), frozenset({"s"}), (("s", EMPTY, "s", "double"),), frozenset())


# --- specification automata ---


def test_globally_not_done():
    for a in (ltlf_to_nfw("G !done"), ltl_to_nbw("G !done")):
        assert len([s for s in a.states if any(t[0] == s for t in a.transitions)]) == 1
    nfw = ltlf_to_nfw("G !done")
    assert nfw.accepts([EMPTY, EMPTY])
    assert not nfw.accepts([EMPTY, frozenset({"done"})])
    nbw = ltl_to_nbw("G !done")
    assert nbw.accepts_lasso([], [EMPTY])
    assert not nbw.accepts_lasso([EMPTY], [frozenset({"done"})])


TWO = all_letters({"p", "q"})


def test_finally_finite():
    a = ltlf_to_nfw("F p", {"p", "q"})
    for w in _words(TWO, 4):
        assert a.accepts(w) == any("p" in x for x in w)


def test_until_lassos():
    a = ltl_to_nbw("p U q", {"p", "q"})
    f = ltl.parse("p U q")
    for n in range(1, 5):
        for uv in itertools.product(TWO, repeat=n):
            for k in range(n):
                u, v = uv[:k], uv[k:]
                assert a.accepts_lasso(u, v) == ltl.holds_lasso(f, u, v)


def test_atom_set_must_cover_formula():
    with pytest.raises(ValueError):
        ltlf_to_nfw("F p", {"q"})
    with pytest.raises(ValueError):
        ltl_to_nbw("F p", {"q"})


def test_automata_read_foreign_atoms():
    a = ltlf_to_nfw("F p")
    assert a.accepts([frozenset({"z"}), frozenset({"p", "z"})])


_atoms = st.sampled_from([ltl.Atom("p"), ltl.Atom("q"), ltl.TRUE])
small_formulas = st.recursive(
    _atoms,
    lambda sub: st.one_of(
        st.builds(ltl.Not, sub), st.builds(ltl.Next, sub), st.builds(ltl.Finally, sub),
        st.builds(ltl.Globally, sub), st.builds(ltl.And, sub, sub), st.builds(ltl.Or, sub, sub),
        st.builds(ltl.Until, sub, sub), st.builds(ltl.Release, sub, sub),
    ),
    max_leaves=5,
)
finite_words = st.lists(st.sampled_from(TWO), min_size=1, max_size=4)


@given(small_formulas, finite_words)
def test_ltlf_translation_matches_semantics(f, w):
    assert ltlf_to_nfw(f, {"p", "q"}).accepts(w) == ltl.holds_finite(f, w)


@given(small_formulas, st.lists(st.sampled_from(TWO), max_size=2), finite_words)
def test_ltl_translation_matches_semantics(f, u, v):
    assert ltl_to_nbw(f, {"p", "q"}).accepts_lasso(u, v) == ltl.holds_lasso(f, u, v)


# --- inclusion ---


def test_inclusion_examples(pstar_q):
    a = build_exec_nfw(build_unwinding(pstar_q))
    assert nfw_inclusion(a, a).holds
    res = nfw_inclusion(a, ltlf_to_nfw("G !q", {"p", "q"}))
    assert not res.holds and res.counterexample == (P, Q)
    assert nfw_inclusion(a, ltlf_to_nfw("G !(p & q)", {"p", "q"})).holds
    empty = Nfw(frozenset({"p"}), ("s",), frozenset(), (), frozenset({"s"}))
    assert nfw_inclusion(empty, ltlf_to_nfw("false", {"p"})).holds


@given(small_formulas, small_formulas)
def test_inclusion_agrees_with_word_enumeration(f, g):
    a, b = ltlf_to_nfw(f, {"p", "q"}), ltlf_to_nfw(g, {"p", "q"})
    res = nfw_inclusion(a, b)
    if res.holds:
        assert all(b.accepts(w) for w in _words(TWO, 3) if a.accepts(w))
    else:
        assert a.accepts(res.counterexample) and not b.accepts(res.counterexample)


# --- products and emptiness ---


def test_product_with_universal_nbw(reset_broadcast):
    uw = build_unwinding(reset_broadcast)
    b = build_exec_bautomaton(uw, classify(uw))
    universal = ltl_to_nbw("true", set())
    prod = b_product_nbw(b, universal)
    for u, v in [((), "r"), ((), "rpr"), ("rq", "rppr"), ((), "rqp"), ("r", "p")]:
        uw_, vw = _word("".join(u)), _word(v)
        assert prod.accepts_lasso(uw_, vw) == b.accepts_lasso(uw_, vw)


def test_product_with_empty_nbw(reset_broadcast):
    uw = build_unwinding(reset_broadcast)
    b = build_exec_bautomaton(uw, classify(uw))
    assert b_emptiness(b_product_nbw(b, ltl_to_nbw("false", set()))).empty


def test_reset_broadcast_infinitely_many_p_forces_r(reset_broadcast):
    uw = build_unwinding(reset_broadcast)
    b = build_exec_bautomaton(uw, classify(uw))
    bad = ltl_to_nbw(ltl.Not(ltl.parse("G F p -> G F r")), {"p", "r"})
    assert b_emptiness(b_product_nbw(b, bad)).empty


def test_b_emptiness_examples():
    inc_loop = BAutomaton(frozenset(), ("s",), frozenset({"s"}), (("s", EMPTY, "s", "inc"),), frozenset({"s"}))
    assert b_emptiness(inc_loop).empty
    reset_loop = BAutomaton(frozenset(), ("s",), frozenset({"s"}), (("s", EMPTY, "s", "reset"),), frozenset({"s"}))
    res = b_emptiness(reset_loop)
    assert not res.empty and res.witness.cycle == (EMPTY,)
    two = BAutomaton(frozenset(), ("s", "t"), frozenset({"s"}),
                     (("s", EMPTY, "t", "inc"), ("t", EMPTY, "s", "reset")), frozenset({"s"}))
    res = b_emptiness(two)
    assert not res.empty and check_b_lasso(two, res.witness)


def test_streett_examples():
    cycle = StreettAutomaton(frozenset(), ("s", "t"), frozenset({"s"}), (("s", EMPTY, "t"), ("t", EMPTY, "s")), ())
    assert not streett_emptiness(cycle).empty
    starved = StreettAutomaton(frozenset(), ("s", "t"), frozenset({"s"}), cycle.transitions,
                               ((frozenset({"s", "t"}), frozenset()),))
    assert streett_emptiness(starved).empty


def test_streett_construction_shape():
    b = BAutomaton(frozenset(), ("s",), frozenset({"s"}), (("s", EMPTY, "s", "inc"),), frozenset({"s"}))
    st_ = b_to_streett(b)
    assert len(st_.states) == 3 and len(st_.pairs) == 2
    assert st_.initial == frozenset({("s", "reset")})


@given(st.integers(0, 100_000))
def test_b_emptiness_matches_brute_force(seed):
    b = random_bautomaton(rng_for(seed))
    res = b_emptiness(b)
    assert res.empty == (not brute_force_b_nonempty(b, 2 * len(b.states)))
    if not res.empty:
        assert check_b_lasso(b, res.witness)


def _lasso_product_nonempty(b, u, v):
    """Independent membership: brute-force lasso search on the product with the word."""
    word = list(u) + list(v)
    nxt = [i + 1 if i + 1 < len(word) else len(u) for i in range(len(word))]
    trans = tuple(((s, i), w, (t, nxt[i]), cc) for s, w, t, cc in b.transitions
                  for i in range(len(word)) if w == word[i] & b.atoms)
    states = tuple((s, i) for s in b.states for i in range(len(word)))
    prod = BAutomaton(b.atoms, states, frozenset((s, 0) for s in b.initial), trans,
                      frozenset((s, i) for s in b.buchi for i in range(len(word))))
    return brute_force_b_nonempty(prod, 2 * len(states))


@given(st.integers(0, 100_000), st.lists(st.sampled_from(all_letters({"p"})), max_size=2),
       st.lists(st.sampled_from(all_letters({"p"})), min_size=1, max_size=3))
def test_lasso_membership_matches_brute_force(seed, u, v):
    b = random_bautomaton(rng_for(seed), max_states=4, density=0.5)
    assert b.accepts_lasso(u, v) == _lasso_product_nonempty(b, u, v)


# --- serialization ---


def test_json_round_trip(reset_broadcast):
    uw = build_unwinding(reset_broadcast)
    b = build_exec_bautomaton(uw, classify(uw))
    again = automaton_from_dict(b.to_dict(), "b")
    for u, v in [((), "r"), ((), "rpr"), ("r", "p")]:
        assert again.accepts_lasso(_word("".join(u)), _word(v)) == b.accepts_lasso(_word("".join(u)), _word(v))
    nfw = build_exec_nfw(uw)
    nfw2 = automaton_from_dict(nfw.to_dict(), "nfw")
    assert all(nfw.accepts(w) == nfw2.accepts(w) for w in _words([P, Q, R], 4))
    nbw = ltl_to_nbw("G F p", {"p"})
    nbw2 = automaton_from_dict(nbw.to_dict(), "nbw")
    assert isinstance(nbw2, Nbw)
    assert nbw2.accepts_lasso([], [P]) and not nbw2.accepts_lasso([P], [EMPTY])
    st_ = b_to_streett(b)
    st2 = automaton_from_dict(st_.to_dict(), "streett")
    assert streett_emptiness(st2).empty == streett_emptiness(st_).empty
    with pytest.raises(ValueError):
        automaton_from_dict(nfw.to_dict(), "dfa")


def test_nfw_language_is_prefix_closed(reset_broadcast, timed_rb):
    for tpl in (reset_broadcast, timed_rb):
        a = build_exec_nfw(build_unwinding(tpl))
        letters = sorted({tpl.label(s) for s in tpl.states}, key=sorted)
        for w in _words(letters, 4):
            if a.accepts(w):
                assert all(a.accepts(w[:k]) for k in range(1, len(w)))
