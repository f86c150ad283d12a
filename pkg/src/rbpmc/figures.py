"""Small reference templates used throughout the tests, docs and CLI samples.

In every template the name of a state doubles as the single atom true in it.
"""

from __future__ import annotations

from .core import ProcessTemplate, bcast, make_template, rdz


def _named(states):
    return {s: {s} for s in states}


def pstar_q_template() -> ProcessTemplate:
    """R-template: p loops on a_1 and leaves to q on a_2; executions are prefixes of p*q."""
    states = ("p", "q")
    edges = [rdz("p", "p", "a", 1), rdz("p", "q", "a", 2)]
    return make_template("R", 2, states, ["p"], edges, _named(states))


def reset_broadcast_template() -> ProcessTemplate:
    """RB-template where every broadcast returns to r; p-blocks between resets stay bounded."""
    states = ("p", "q", "r")
    edges = [
        rdz("r", "p", "a", 1),
        rdz("p", "p", "a", 1),
        rdz("r", "q", "a", 2),
        bcast("r", "r"),
        bcast("p", "r"),
        bcast("q", "r"),
    ]
    return make_template("RB", 2, states, ["r"], edges, _named(states))


def selfloop_broadcast_template() -> ProcessTemplate:
    """RB-template: p loops on a_1 and on broadcasts, moves to q on a_2; q broadcasts back."""
    states = ("p", "q")
    edges = [rdz("p", "p", "a", 1), bcast("p", "p"), rdz("p", "q", "a", 2), bcast("q", "p")]
    return make_template("RB", 2, states, ["p"], edges, _named(states))


def swap_cycle_template() -> ProcessTemplate:
    """R-template with two initial states and a pseudo-cycle p -> q -> r -> p."""
    states = ("p", "q", "r")
    edges = [rdz("p", "q", "a", 1), rdz("p", "q", "a", 2), rdz("q", "r", "c", 1), rdz("r", "p", "c", 2)]
    return make_template("R", 2, states, ["p", "r"], edges, _named(states))


def timed_example():
    """One-clock timed network: p -a_1, x:=0-> q, q -a_1 [x<=2]-> r, q -a'_2 [x>2]-> p."""
    from .reductions import ClockPredicate, GNot, GPred, TNEdge, TNTemplate, GTrue

    late = ClockPredicate("x", ">", 2)
    states = ("p", "q", "r")
    edges = (
        TNEdge("p", "q", rdz("p", "q", "a", 1).label, GTrue(), frozenset({"x"})),
        TNEdge("p", "p", rdz("p", "p", "a", 2).label, GTrue(), frozenset()),
        TNEdge("q", "r", rdz("q", "r", "a", 1).label, GNot(GPred(late)), frozenset()),
        TNEdge("q", "p", rdz("q", "p", "a'", 2).label, GPred(late), frozenset()),
        TNEdge("r", "p", rdz("r", "p", "a'", 1).label, GTrue(), frozenset()),
    )
    return TNTemplate(
        arity=2,
        atoms=frozenset(states),
        states=states,
        initial=frozenset({"p"}),
        labels={s: frozenset({s}) for s in states},
        edges=edges,
        clocks=("x",),
        predicates=(late,),
    )


def all_templates():
    return {
        "pstar_q": pstar_q_template(),
        "reset_broadcast": reset_broadcast_template(),
        "selfloop_broadcast": selfloop_broadcast_template(),
        "swap_cycle": swap_cycle_template(),
    }
