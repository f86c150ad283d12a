from fractions import Fraction as F

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import figure_templates, rng_for
from rbpmc.core import Broadcast, Edge, Rendezvous, bcast, make_template, rdz
from rbpmc.edgetypes import classify, green_edges, green_fixpoint, light_green_edges, locally_reusable_edges
from rbpmc.oracle import CounterSystem, compositions, random_template, witnessed_edges
from rbpmc.unwinding import build_unwinding

PROCESS_BUDGET = 4


def _lift(e, i=0):
    return Edge((e.src, i), (e.dst, i), e.label)


@pytest.fixture
def swap_with_broadcasts():
    return make_template("RB", 2, ["s", "t"], ["s", "t"],
                         [rdz("s", "t", "a", 1), rdz("t", "s", "a", 2), bcast("s", "s"), bcast("t", "t")],
                         {"s": {"s"}, "t": {"t"}})


def test_reset_broadcast_all_dark_green(reset_broadcast):
    uw = build_unwinding(reset_broadcast)
    report = classify(uw)
    assert report.locally_reusable == frozenset()
    assert report.green == frozenset(uw.template.edges)
    assert len(report.green) == 6
    assert report.light == frozenset()
    assert report.dark == report.green
    assert not report.violations()


def test_reset_broadcast_hand_witness(reset_broadcast):
    # r->p:1, p->p:1, r->q:2, broadcasts p->r:1, q->r:2, r->r:1
    uw = build_unwinding(reset_broadcast)
    mu = {_lift(rdz("r", "p", "a", 1)): 1, _lift(rdz("p", "p", "a", 1)): 1, _lift(rdz("r", "q", "a", 2)): 2,
          _lift(bcast("p", "r")): 1, _lift(bcast("q", "r")): 2, _lift(bcast("r", "r")): 1}
    assert set(mu) == set(uw.template.edges)
    for s in uw.states_of(0):
        entering = sum(m for e, m in mu.items() if isinstance(e.label, Broadcast) and e.dst == s)
        leaving = sum(m for e, m in mu.items() if isinstance(e.label, Broadcast) and e.src == s)
        net = sum(m * ((e.dst == s) - (e.src == s)) for e, m in mu.items() if isinstance(e.label, Rendezvous))
        assert entering + net == leaving
    a1 = sum(m for e, m in mu.items() if e.label == Rendezvous("a", 1))
    a2 = sum(m for e, m in mu.items() if e.label == Rendezvous("a", 2))
    assert a1 == a2


def test_pstar_q_has_no_types(pstar_q):
    report = classify(build_unwinding(pstar_q))
    assert not report.locally_reusable and not report.green and not report.light
    assert all(report.shade(e) is None for e in report.edges)


def test_two_state_swap_is_locally_reusable():
    tpl = make_template("R", 2, ["s", "t"], ["s", "t"], [rdz("s", "t", "a", 1), rdz("t", "s", "a", 2)])
    uw = build_unwinding(tpl)
    witnesses = {}
    locr = locally_reusable_edges(uw, witnesses)
    assert locr == frozenset(_lift(e) for e in tpl.edges)
    assert set(witnesses[0].values()) == {witnesses[0][_lift(tpl.edges[0])]}
    assert witnessed_edges(uw, "zero", 2) == locr


def test_swap_with_broadcasts_is_light_green(swap_with_broadcasts):
    uw = build_unwinding(swap_with_broadcasts)
    report = classify(uw)
    swap = frozenset(_lift(e) for e in swap_with_broadcasts.rendezvous_edges)
    assert report.light == swap
    assert report.dark == frozenset(uw.cross_edges)
    assert _zero_broadcast_green_cycle_edges(uw, report.green, 0, 2) >= swap


def _zero_broadcast_green_cycle_edges(uw, green, comp, n):
    """Rendezvous edges on broadcast-free pseudo-cycles using green edges only."""
    tpl = uw.template
    edges = [e for e in tpl.rendezvous_edges if e in green and e.src[1] == comp]
    cs = CounterSystem(tpl.states, edges, tpl.arity)
    idxs = [cs.index[s] for s in tpl.states if s[1] == comp]
    g = nx.MultiDiGraph()
    for vec in compositions(n, len(idxs)):
        v = [0] * len(cs.states)
        for j, c in zip(idxs, vec):
            v[j] = c
        g.add_node(tuple(v))
    for v in list(g):
        for combo, w in cs.rendezvous_successors(v):
            g.add_edge(v, w, combo=combo)
    scc = {v: k for k, part in enumerate(nx.strongly_connected_components(g)) for v in part}
    return {e for u, v, d in g.edges(data=True) if scc[u] == scc[v] for e in d["combo"]}


def test_empty_green_set_gives_no_light_edges(pstar_q):
    uw = build_unwinding(pstar_q)
    assert light_green_edges(uw, frozenset()) == frozenset()


def test_timed_example_noose(timed_rb):
    uw = build_unwinding(timed_rb)
    green = green_edges(uw)
    assert green
    assert all(e.src[1] == uw.prefix for e in green)
    found = set()
    for n in range(1, 7):
        found |= witnessed_edges(uw, "period", n)
        if found == green:
            break
    assert found == green


@pytest.mark.parametrize("name", sorted(figure_templates()))
def test_report_invariants(name):
    uw = build_unwinding(figure_templates()[name])
    report = classify(uw)
    assert not report.violations()
    assert report.light <= report.green & report.locally_reusable
    assert report.dark == report.green - report.light
    d = report.to_dict()
    assert len(d["edges"]) == len(uw.template.edges)
    assert report.table().splitlines()[0].split() == ["edge", "locr", "green", "shade"]


@pytest.mark.parametrize("name", sorted(figure_templates()))
def test_figure_types_match_oracle(name):
    uw = build_unwinding(figure_templates()[name])
    report = classify(uw)
    zero, period = set(), set()
    for n in range(1, PROCESS_BUDGET + 2):
        zero |= witnessed_edges(uw, "zero", n)
        period |= witnessed_edges(uw, "period", n)
    assert zero == report.locally_reusable
    assert period == report.green


@pytest.mark.parametrize("name", sorted(figure_templates()))
def test_green_fixpoint_shrinks_and_is_stable(name):
    uw = build_unwinding(figure_templates()[name])
    run = green_fixpoint(uw)
    assert run.history == sorted(run.history, reverse=True)
    total = sum(len(uw.rendezvous_edges_of(i)) + len(uw.broadcasts_from(i)) for i in uw.noose)
    assert run.iterations <= total + 1
    assert all(x > 0 for x in run.witness.values())
    assert set(run.witness) == set(run.edges)


@given(st.integers(0, 100_000))
def test_oracle_pseudo_cycles_are_reported(seed):
    uw = build_unwinding(random_template(rng_for(seed), max_states=4, max_edges=8))
    report = classify(uw)
    assert not report.violations()
    for n in (1, 2, 3):
        assert witnessed_edges(uw, "zero", n) <= report.locally_reusable
        assert witnessed_edges(uw, "period", n) <= report.green


@given(st.integers(0, 100_000))
def test_green_is_support_stable(seed):
    tpl = random_template(rng_for(seed), max_states=4, max_edges=8)
    uw = build_unwinding(tpl)
    green = green_edges(uw)
    # rerunning on the template restricted to its green edges gives the same set
    if not green or len(uw.components) != 1:
        return
    kept = [Edge(e.src[0], e.dst[0], e.label) for e in green]
    sub = make_template(tpl.kind, tpl.arity, tpl.states, tpl.initial, kept, tpl.labels, tpl.atoms)
    sub_uw = build_unwinding(sub)
    if len(sub_uw.components) == 1 and sub_uw.components[0].states == uw.components[0].states:
        assert green_edges(sub_uw) == green


def test_witness_coefficients_are_positive(reset_broadcast):
    report = classify(build_unwinding(reset_broadcast))
    assert all(isinstance(x, F) and x > 0 for x in report.green_witness.values())
