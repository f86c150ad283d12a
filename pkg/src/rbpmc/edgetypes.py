"""Edge types of an unwinding: locally-reusable, green, light green and dark green.

All three classifications are support computations over homogeneous linear
systems: an edge has a type iff some nonnegative solution gives it positive
weight, and a support-maximal solution exhibits all such edges at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .core import Broadcast, Edge
from .cvrs import Cvrs, _add_balance, back, forw
from .ratlp import Infeasible, LinearSystem, Solution, support_maximal_solution
from .unwinding import UnwoundTemplate, _edge_json

Witness = Dict[Edge, Fraction]


def _circulation(arity: int, states: Iterable, edges: Sequence[Edge]) -> Tuple[LinearSystem, Dict[str, Edge]]:
    """Zero net flow at every state plus per-action index balance."""
    ls = LinearSystem()
    names: Dict[str, Edge] = {}
    var_of: Dict[Edge, str] = {}
    for j, e in enumerate(edges):
        v = ls.add_variable(f"mu{j}")
        names[v] = e
        var_of[e] = v
    for s in states:
        row: Dict[str, Fraction] = {}
        for e in edges:
            if e.dst == s:
                row[var_of[e]] = row.get(var_of[e], Fraction(0)) + 1
            if e.src == s:
                row[var_of[e]] = row.get(var_of[e], Fraction(0)) - 1
        if any(row.values()):
            ls.add(row, "=", 0)
    _add_balance(ls, arity, edges, var_of)
    return ls, names


def _support_witness(ls: LinearSystem, names: Mapping[str, Edge]) -> Witness:
    if not names:
        return {}
    sol = support_maximal_solution(ls, list(names))
    if isinstance(sol, Infeasible):  # homogeneous systems always admit 0
        raise AssertionError("homogeneous system reported infeasible")
    return {e: sol[v] for v, e in names.items() if sol[v] > 0}


def locally_reusable_edges(uw: UnwoundTemplate, witnesses: Optional[Dict[int, Witness]] = None) -> FrozenSet[Edge]:
    """Rendezvous edges that lie on a broadcast-free pseudo-cycle of their component."""
    out: Set[Edge] = set()
    for i in range(len(uw.components)):
        edges = uw.rendezvous_edges_of(i)
        ls, names = _circulation(uw.base.arity, uw.states_of(i), edges)
        w = _support_witness(ls, names)
        if witnesses is not None:
            witnesses[i] = w
        out |= set(w)
    return frozenset(out)


@dataclass
class GreenRun:
    edges: FrozenSet[Edge]
    witness: Witness
    iterations: int
    history: List[int] = field(default_factory=list)  # surviving edge counts per iteration


def green_fixpoint(uw: UnwoundTemplate) -> GreenRun:
    """Iterated support refinement over the noose components."""
    noose = list(uw.noose)
    T: Dict[int, Tuple[Edge, ...]] = {i: uw.rendezvous_edges_of(i) for i in noose}
    B: Dict[int, Tuple[Edge, ...]] = {i: uw.broadcasts_from(i) for i in noose}
    arity = uw.base.arity
    iterations = 0
    history: List[int] = []
    witness: Witness = {}
    while True:
        iterations += 1
        ls = LinearSystem()
        var_of: Dict[Edge, str] = {}
        names: Dict[str, Edge] = {}
        for i in noose:
            for e in T[i] + B[i]:
                if e not in var_of:
                    v = ls.add_variable(f"mu{len(var_of)}")
                    var_of[e] = v
                    names[v] = e
        for i in noose:
            into = B[uw.pre(i)]
            for q in uw.states_of(i):
                row: Dict[str, Fraction] = {}

                def bump(e: Edge, x: int) -> None:
                    row[var_of[e]] = row.get(var_of[e], Fraction(0)) + x

                # c'_i(q) - c_i(q) - sum_T mu_t (in_t(q) - out_t(q)) = 0
                for e in B[i]:
                    if e.src == q:
                        bump(e, 1)
                for e in into:
                    if e.dst == q:
                        bump(e, -1)
                for e in T[i]:
                    if e.dst == q:
                        bump(e, -1)
                    if e.src == q:
                        bump(e, 1)
                if any(row.values()):
                    ls.add(row, "=", 0)
            _add_balance(ls, arity, T[i], var_of)
        sol = support_maximal_solution(ls, list(names)) if names else Solution({})
        if isinstance(sol, Infeasible):
            raise AssertionError("homogeneous system reported infeasible")
        mu = {e: sol[v] for v, e in names.items() if sol[v] > 0}
        newT: Dict[int, Tuple[Edge, ...]] = {}
        newB: Dict[int, Tuple[Edge, ...]] = {}
        for i in noose:
            c_in = {e.dst for e in B[uw.pre(i)] if e in mu}
            c_out = {e.src for e in B[i] if e in mu}
            sys = Cvrs(arity, tuple(uw.states_of(i)), T[i])
            h = forw(sys, c_in, T[i]) & back(sys, c_out, T[i])
            newT[i] = tuple(e for e in T[i] if e in mu and e.src in h and e.dst in h)
            newB[i] = tuple(e for e in B[i] if e in mu)
        history.append(sum(len(newT[i]) + len(newB[i]) for i in noose))
        if newT == T and newB == B:
            witness = mu
            break
        T, B = newT, newB
    edges = frozenset(e for i in noose for e in T[i] + B[i])
    return GreenRun(edges, {e: witness[e] for e in edges}, iterations, history)


def green_edges(uw: UnwoundTemplate) -> FrozenSet[Edge]:
    return green_fixpoint(uw).edges


def light_green_edges(uw: UnwoundTemplate, green: Iterable[Edge],
                      witnesses: Optional[Dict[int, Witness]] = None) -> FrozenSet[Edge]:
    """Green rendezvous edges that lie on a broadcast-free pseudo-cycle of green edges."""
    green = set(green)
    out: Set[Edge] = set()
    for i in uw.noose:
        edges = tuple(e for e in uw.rendezvous_edges_of(i) if e in green)
        ls, names = _circulation(uw.base.arity, uw.states_of(i), edges)
        w = _support_witness(ls, names)
        if witnesses is not None:
            witnesses[i] = w
        out |= set(w)
    return frozenset(out)


@dataclass
class EdgeTypeReport:
    edges: Tuple[Edge, ...]
    locally_reusable: FrozenSet[Edge]
    green: FrozenSet[Edge]
    light: FrozenSet[Edge]
    locr_witness: Dict[int, Witness] = field(default_factory=dict)
    green_witness: Witness = field(default_factory=dict)
    light_witness: Dict[int, Witness] = field(default_factory=dict)
    green_iterations: int = 0

    @property
    def dark(self) -> FrozenSet[Edge]:
        return self.green - self.light

    def shade(self, e: Edge) -> Optional[str]:
        if e in self.light:
            return "light"
        if e in self.green:
            return "dark"
        return None

    def violations(self) -> List[str]:
        out = []
        for e in self.light:
            if e not in self.green:
                out.append(f"{e}: light but not green")
            if e not in self.locally_reusable:
                out.append(f"{e}: light but not locally-reusable")
            if isinstance(e.label, Broadcast):
                out.append(f"{e}: broadcast edge marked light")
        return out

    def to_dict(self) -> dict:
        def wjson(w: Witness) -> list:
            return [[_edge_json(e), str(x)] for e, x in w.items()]

        return {
            "edges": [
                {**_edge_json(e), "locally_reusable": e in self.locally_reusable, "green": e in self.green,
                 "shade": self.shade(e)}
                for e in self.edges
            ],
            "green_iterations": self.green_iterations,
            "witnesses": {
                "locally_reusable": {str(i): wjson(w) for i, w in self.locr_witness.items()},
                "green": wjson(self.green_witness),
                "light": {str(i): wjson(w) for i, w in self.light_witness.items()},
            },
        }

    def table(self) -> str:
        rows = [("edge", "locr", "green", "shade")]
        for e in self.edges:
            rows.append((str(e), "yes" if e in self.locally_reusable else "-",
                         "yes" if e in self.green else "-", self.shade(e) or "-"))
        width = [max(len(r[j]) for r in rows) for j in range(4)]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, width)).rstrip() for r in rows)


def classify(uw: UnwoundTemplate) -> EdgeTypeReport:
    locr_w: Dict[int, Witness] = {}
    light_w: Dict[int, Witness] = {}
    locr = locally_reusable_edges(uw, locr_w)
    run = green_fixpoint(uw)
    light = light_green_edges(uw, run.edges, light_w)
    return EdgeTypeReport(uw.template.edges, locr, run.edges, light, locr_w, run.witness, light_w, run.iterations)
