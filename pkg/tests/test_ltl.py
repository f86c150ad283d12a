import itertools

import pytest
from hypothesis import given, strategies as st

from rbpmc import ltl

P, Q = frozenset({"p"}), frozenset({"q"})
E = frozenset()


def test_precedence():
    f = ltl.parse("!p & q | r -> s")
    assert f == ltl.Implies(ltl.Or(ltl.And(ltl.Not(ltl.Atom("p")), ltl.Atom("q")), ltl.Atom("r")), ltl.Atom("s"))


def test_until_right_assoc():
    assert ltl.parse("p U q U r") == ltl.Until(ltl.Atom("p"), ltl.Until(ltl.Atom("q"), ltl.Atom("r")))


def test_implies_right_assoc():
    assert ltl.parse("p -> q -> r") == ltl.Implies(ltl.Atom("p"), ltl.Implies(ltl.Atom("q"), ltl.Atom("r")))


def test_quoted_atoms():
    f = ltl.parse('G !"x>2"')
    assert ltl.atoms(f) == {"x>2"}
    assert ltl.parse(ltl.to_str(f)) == f


@pytest.mark.parametrize("bad", ["", "p &", "(p", "p q", "U p"])
def test_parse_errors(bad):
    with pytest.raises(ltl.ParseError):
        ltl.parse(bad)


def test_finite_next_is_strong():
    assert not ltl.holds_finite(ltl.parse("X p"), [P])
    assert ltl.holds_finite(ltl.parse("!X p"), [P])
    assert ltl.holds_finite(ltl.parse("X p"), [E, P])


def test_finite_until_needs_witness():
    assert not ltl.holds_finite(ltl.parse("p U q"), [P, P])
    assert ltl.holds_finite(ltl.parse("p U q"), [P, Q])
    assert ltl.holds_finite(ltl.parse("G p"), [P, P])


def test_lasso_semantics():
    assert ltl.holds_lasso(ltl.parse("G F p"), [], [E, P])
    assert not ltl.holds_lasso(ltl.parse("F G p"), [], [E, P])
    assert ltl.holds_lasso(ltl.parse("F G p"), [E, E], [P])


atoms = st.sampled_from([ltl.Atom("p"), ltl.Atom("q"), ltl.TRUE, ltl.FALSE])
formulas = st.recursive(
    atoms,
    lambda sub: st.one_of(
        st.builds(ltl.Not, sub), st.builds(ltl.Next, sub), st.builds(ltl.Finally, sub),
        st.builds(ltl.Globally, sub), st.builds(ltl.And, sub, sub), st.builds(ltl.Or, sub, sub),
        st.builds(ltl.Until, sub, sub), st.builds(ltl.Implies, sub, sub), st.builds(ltl.Release, sub, sub),
    ),
    max_leaves=6,
)
letters = [frozenset(s) for r in range(3) for s in itertools.combinations("pq", r)]
words = st.lists(st.sampled_from(letters), min_size=1, max_size=4)


@given(formulas)
def test_print_parse_round_trip(f):
    assert ltl.parse(ltl.to_str(f)) == f


@given(formulas, words)
def test_nnf_preserves_finite_semantics(f, w):
    assert ltl.holds_finite(ltl.nnf(f, finite=True), w) == ltl.holds_finite(f, w)


@given(formulas, st.lists(st.sampled_from(letters), max_size=3), words)
def test_nnf_preserves_lasso_semantics(f, u, v):
    assert ltl.holds_lasso(ltl.nnf(f), u, v) == ltl.holds_lasso(f, u, v)


@given(formulas, st.lists(st.sampled_from(letters), max_size=3), words)
def test_negation_flips_lasso_semantics(f, u, v):
    assert ltl.holds_lasso(ltl.Not(f), u, v) != ltl.holds_lasso(f, u, v)


@given(formulas, st.lists(st.sampled_from(letters), max_size=2), words)
def test_lasso_rotation_invariance(f, u, v):
    # u v^omega == u v (v)^omega
    assert ltl.holds_lasso(f, u, v) == ltl.holds_lasso(f, list(u) + list(v), v)
