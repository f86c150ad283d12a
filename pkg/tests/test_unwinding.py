import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import figure_templates, rng_for
from rbpmc.core import ResourceLimitError, System, is_run
from rbpmc.oracle import enumerate_reachable, enumerate_runs, executions_upto, loading_witness, random_template
from rbpmc.unwinding import build_unwinding, comp_index, saturate, unwind, wind


def test_saturate_pstar_q(pstar_q):
    c = saturate(pstar_q, {"p"})
    assert c.states == {"p", "q"}
    assert c.edges == pstar_q.edges


def test_saturate_reset_broadcast(reset_broadcast):
    c = saturate(reset_broadcast, {"r"})
    assert c.states == {"r", "p", "q"}
    assert c.edges == reset_broadcast.rendezvous_edges


def test_saturate_empty_seed(reset_broadcast):
    c = saturate(reset_broadcast, set())
    assert c.states == frozenset() and c.edges == ()


def test_saturate_needs_every_partner_index(swap_cycle):
    # c_1 leaves q but its partner c_2 leaves r; from {p} only action a fires
    c = saturate(swap_cycle, {"p"})
    assert c.states == {"p", "q"}
    assert {e.label.action for e in c.edges} == {"a"}


def test_saturate_rejects_unknown_seed(pstar_q):
    with pytest.raises(ValueError):
        saturate(pstar_q, {"zz"})


def test_unwinding_of_timed_example(timed_rb):
    uw = build_unwinding(timed_rb)
    assert len(uw.components) == 4
    assert (uw.prefix, uw.period) == (3, 1)


def test_unwinding_copy_of_reset_broadcast(reset_broadcast):
    uw = build_unwinding(reset_broadcast)
    assert len(uw.components) == 1
    assert (uw.prefix, uw.period) == (0, 1)
    assert uw.components[0].states == set(reset_broadcast.states)
    assert len(uw.template.edges) == len(reset_broadcast.edges)


def test_unwinding_of_rendezvous_template(pstar_q):
    uw = build_unwinding(pstar_q)
    assert [c.states for c in uw.components] == [{"p", "q"}, frozenset()]
    assert (uw.prefix, uw.period) == (1, 1)
    assert uw.cross_edges == ()


def test_unwinding_component_limit(timed_rb):
    with pytest.raises(ResourceLimitError):
        build_unwinding(timed_rb, max_components=2)


def test_unwinding_rejects_asymmetric_kinds(pstar_q):
    from rbpmc.core import make_template
    with pytest.raises(ValueError):
        build_unwinding(make_template("RBA", 2, pstar_q.states, pstar_q.initial, pstar_q.edges, pstar_q.labels))


def test_comp_index(timed_rb):
    uw = build_unwinding(timed_rb)
    assert [comp_index(uw, i) for i in (0, 1, 2, 3, 7)] == [0, 1, 2, 3, 3]
    with pytest.raises(ValueError):
        comp_index(uw, -1)


@given(st.integers(0, 6), st.integers(1, 5), st.integers(0, 60))
def test_comp_index_formula(prefix, period, i):
    class Lasso:
        pass

    uw = Lasso()
    uw.prefix, uw.period = prefix, period
    got = comp_index(uw, i)
    # walk the lasso step by step
    walked = 0
    for _ in range(i):
        walked = walked + 1 if walked + 1 < prefix + period else prefix
    assert got == walked


@pytest.mark.parametrize("name", sorted(figure_templates()))
def test_lasso_closure(name):
    tpl = figure_templates()[name]
    uw = build_unwinding(tpl)
    assert uw.period >= 1
    assert uw.prefix + uw.period == len(uw.components)
    # one more broadcast step from the last component lands on the noose start
    from rbpmc.unwinding import broadcast_successors
    nxt = saturate(tpl, broadcast_successors(tpl, uw.components[-1].states))
    assert nxt.states == uw.components[uw.prefix].states


@pytest.mark.parametrize("name", sorted(figure_templates()))
def test_unwinding_is_deterministic(name):
    tpl = figure_templates()[name]
    a, b = build_unwinding(tpl), build_unwinding(tpl)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    assert a.to_dot() == b.to_dot()


def test_wind_of_empty_run(reset_broadcast):
    uw = build_unwinding(reset_broadcast)
    assert unwind(uw, []) == [] and wind([]) == []


def test_unwind_one_broadcast(reset_broadcast):
    uw = build_unwinding(reset_broadcast)
    system = System.uniform(reset_broadcast, 3)
    bcast_step = next(t for t in system.successors(("r", "r", "r")) if t.is_broadcast)
    lifted = unwind(uw, [bcast_step])[0]
    assert all(s[1] == 0 for s in lifted.source + lifted.destination)


@pytest.mark.parametrize("name", sorted(figure_templates()))
def test_wind_unwind_round_trip(name):
    tpl = figure_templates()[name]
    uw = build_unwinding(tpl)
    for n in (1, 2, 3):
        lifted_system = System.uniform(uw.template, n)
        for run in enumerate_runs(System.uniform(tpl, n), 5):
            lifted = unwind(uw, run)
            assert wind(lifted) == run
            assert is_run(lifted_system, lifted)


@pytest.mark.parametrize("name", sorted(figure_templates()))
def test_unwinding_captures_executions(name):
    tpl = figure_templates()[name]
    uw = build_unwinding(tpl)
    for n in (1, 2, 3):
        assert executions_upto(tpl, n, 4) == executions_upto(uw.template, n, 4)


@pytest.mark.parametrize("name", sorted(figure_templates()))
def test_reachable_configurations_are_legal(name):
    uw = build_unwinding(figure_templates()[name])
    for n in (1, 2, 3):
        for cfg in enumerate_reachable(uw.template, n, depth=8):
            assert len({s[1] for s, _ in cfg}) == 1


@pytest.mark.parametrize("name", sorted(figure_templates()))
def test_loading(name):
    uw = build_unwinding(figure_templates()[name])
    for b in range(len(uw.components) + 1):
        found = loading_witness(uw, b, max_processes=8)
        missing = [s for s, v in found.items() if v is None]
        assert not missing, f"component {comp_index(uw, b)}: no witness for {missing}"


@given(st.integers(0, 10_000))
def test_random_unwindings_are_legal_and_closed(seed):
    tpl = random_template(rng_for(seed), max_states=4, max_edges=8)
    uw = build_unwinding(tpl)
    assert uw.prefix + uw.period == len(uw.components)
    for e in uw.template.edges:
        if e in uw.cross_edges:
            assert e.dst[1] == uw.suc(e.src[1])
        else:
            assert e.src[1] == e.dst[1]
    for cfg in enumerate_reachable(uw.template, 2, depth=6):
        assert len({s[1] for s, _ in cfg}) == 1
