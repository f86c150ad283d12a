"""Vector rendezvous systems and their continuous relaxation.

A configuration assigns a nonnegative rational mass to every state.  A step of
action a picks one a_i-transition per index i and moves mass alpha along each of
them at once.  Reachability between two configurations is decided through the
linear characterization: flow equation, per-action balance, and the condition
that the used transitions stay inside forward- and backward-accessible supports.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .core import Edge, ProcessTemplate, Rendezvous, State
from .ratlp import Infeasible, LinearSystem, support_maximal_solution

Transition = Edge


@dataclass(frozen=True)
class Cvrs:
    arity: int
    states: Tuple[State, ...]
    transitions: Tuple[Transition, ...]

    def __post_init__(self) -> None:
        known = set(self.states)
        for t in self.transitions:
            if not isinstance(t.label, Rendezvous) or not 1 <= t.label.index <= self.arity:
                raise ValueError(f"transition {t} does not carry a rendezvous label with index in [1, {self.arity}]")
            if t.src not in known or t.dst not in known:
                raise ValueError(f"transition {t} leaves the state set")

    @classmethod
    def from_template(cls, tpl: ProcessTemplate) -> "Cvrs":
        return cls(tpl.arity, tpl.states, tpl.rendezvous_edges)

    def actions(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(t.label.action for t in self.transitions))


Config = Dict[State, Fraction]


def config(counts: Mapping[State, object]) -> Config:
    """Normalize to Fractions and drop zero entries."""
    out: Config = {}
    for s, v in counts.items():
        x = v if isinstance(v, Fraction) else Fraction(v)
        if x < 0:
            raise ValueError(f"negative mass {x} on state {s!r}")
        if x:
            out[s] = x
    return out


def support(cfg: Mapping[State, Fraction]) -> FrozenSet[State]:
    return frozenset(s for s, v in cfg.items() if v > 0)


def add(c1: Mapping[State, Fraction], c2: Mapping[State, Fraction], factor: Fraction = Fraction(1)) -> Config:
    out = dict(c1)
    for s, v in c2.items():
        out[s] = out.get(s, Fraction(0)) + factor * v
    return config({s: v for s, v in out.items()})


def scale(c: Mapping[State, Fraction], gamma: object) -> Config:
    g = Fraction(gamma)
    return config({s: g * v for s, v in c.items()})


@dataclass(frozen=True)
class StepTuple:
    transitions: Tuple[Transition, ...]
    multiplicity: Fraction

    def action(self) -> str:
        return self.transitions[0].label.action


class StepRejected(ValueError):
    pass


def _check_tuple(sys: Cvrs, tup: StepTuple) -> None:
    if len(tup.transitions) != sys.arity:
        raise StepRejected(f"a step needs exactly {sys.arity} transitions")
    a = tup.transitions[0].label.action
    for i, t in enumerate(tup.transitions, start=1):
        if t.label != Rendezvous(a, i):
            raise StepRejected(f"transition {i} of the step is labelled {t.label}, expected {a}_{i}")
    if tup.multiplicity <= 0:
        raise StepRejected("multiplicity must be positive")


def step(sys: Cvrs, cfg: Mapping[State, Fraction], tup: StepTuple, integral: bool = False) -> Config:
    """Fire a step; integral=True enforces VRS semantics (multiplicity 1, integer masses)."""
    _check_tuple(sys, tup)
    alpha = Fraction(tup.multiplicity)
    if integral:
        if alpha != 1:
            raise StepRejected("VRS steps have multiplicity 1")
        if any(Fraction(v).denominator != 1 for v in cfg.values()):
            raise StepRejected("VRS configurations are integral")
    need: Dict[State, Fraction] = {}
    for t in tup.transitions:
        need[t.src] = need.get(t.src, Fraction(0)) + alpha
    for s, v in need.items():
        if cfg.get(s, Fraction(0)) < v:
            raise StepRejected(f"state {s!r} holds {cfg.get(s, Fraction(0))}, the step takes {v}")
    out = {s: Fraction(v) for s, v in cfg.items()}
    for t in tup.transitions:
        out[t.src] = out.get(t.src, Fraction(0)) - alpha
        out[t.dst] = out.get(t.dst, Fraction(0)) + alpha
    return config(out)


@dataclass(frozen=True)
class Trace:
    start: Config
    steps: Tuple[StepTuple, ...]

    def configs(self, sys: Cvrs) -> List[Config]:
        cur = dict(self.start)
        out = [cur]
        for st in self.steps:
            cur = step(sys, cur, st)
            out.append(cur)
        return out

    def end(self, sys: Cvrs) -> Config:
        return self.configs(sys)[-1]

    def multiplicities(self) -> Dict[Transition, Fraction]:
        mu: Dict[Transition, Fraction] = {}
        for st in self.steps:
            for t in st.transitions:
                mu[t] = mu.get(t, Fraction(0)) + st.multiplicity
        return mu


def scale_trace(tr: Trace, gamma: object) -> Trace:
    g = Fraction(gamma)
    if g <= 0:
        raise ValueError("scaling factor must be positive")
    return Trace(scale(tr.start, g), tuple(StepTuple(s.transitions, s.multiplicity * g) for s in tr.steps))


def shift_trace(tr: Trace, cfg: Mapping[State, Fraction]) -> Trace:
    if any(Fraction(v) < 0 for v in cfg.values()):
        raise ValueError("shift must be a nonnegative configuration")
    return Trace(add(tr.start, cfg), tr.steps)


def convex_combination(sys: Cvrs, tr1: Trace, tr2: Trace, gamma: object) -> Trace:
    """A trace from g*c1 + (1-g)*c2 to g*c1' + (1-g)*c2' for traces ci -> ci'."""
    g = Fraction(gamma)
    if not 0 < g < 1:
        raise ValueError("gamma must lie strictly between 0 and 1")
    first = shift_trace(scale_trace(tr1, g), scale(tr2.start, 1 - g))
    second = shift_trace(scale_trace(tr2, 1 - g), scale(tr1.end(sys), g))
    return Trace(first.start, first.steps + second.steps)


# ---------------------------------------------------------------------------
# accessibility


def _closure(sys: Cvrs, seed: Iterable[State], used: Iterable[Transition], reverse: bool) -> FrozenSet[State]:
    used = tuple(used)
    h: Set[State] = set(seed)
    by_action: Dict[str, List[Transition]] = {}
    for t in used:
        by_action.setdefault(t.label.action, []).append(t)
    changed = True
    while changed:
        changed = False
        for a, ts in by_action.items():
            enabled = [t for t in ts if (t.dst if reverse else t.src) in h]
            if {t.label.index for t in enabled} != set(range(1, sys.arity + 1)):
                continue
            for t in enabled:
                tgt = t.src if reverse else t.dst
                if tgt not in h:
                    h.add(tgt)
                    changed = True
    return frozenset(h)


def _seed(c) -> FrozenSet[State]:
    return support(c) if isinstance(c, Mapping) else frozenset(c)


def forw(sys: Cvrs, c, used: Iterable[Transition]) -> FrozenSet[State]:
    """Largest support forward-accessible from c with the given transitions (c may be a state set)."""
    return _closure(sys, _seed(c), used, reverse=False)


def back(sys: Cvrs, c, used: Iterable[Transition]) -> FrozenSet[State]:
    return _closure(sys, _seed(c), used, reverse=True)


# ---------------------------------------------------------------------------
# reachability


def flow_and_balance(sys: Cvrs, mu: Mapping[Transition, Fraction], c, c2) -> List[str]:
    """Violations of the flow equation and of per-action index balance."""
    problems = []
    delta: Dict[State, Fraction] = {}
    for t, m in mu.items():
        delta[t.dst] = delta.get(t.dst, Fraction(0)) + m
        delta[t.src] = delta.get(t.src, Fraction(0)) - m
    for s in set(sys.states) | set(c) | set(c2):
        lhs = Fraction(c2.get(s, 0))
        rhs = Fraction(c.get(s, 0)) + delta.get(s, Fraction(0))
        if lhs != rhs:
            problems.append(f"flow at {s!r}: target {lhs}, reached {rhs}")
    for a in sys.actions():
        sums = [sum((m for t, m in mu.items() if t.label == Rendezvous(a, i)), Fraction(0))
                for i in range(1, sys.arity + 1)]
        if len(set(sums)) > 1:
            problems.append(f"action {a} unbalanced: {sums}")
    return problems


def check_reach_certificate(sys: Cvrs, c: Mapping[State, Fraction], c2: Mapping[State, Fraction],
                            mu: Mapping[Transition, Fraction]) -> bool:
    if any(Fraction(m) < 0 for m in mu.values()):
        return False
    if any(t not in set(sys.transitions) for t, m in mu.items() if m):
        return False
    if flow_and_balance(sys, mu, c, c2):
        return False
    used = [t for t in sys.transitions if mu.get(t, 0) > 0]
    fw = forw(sys, c, used)
    bw = back(sys, c2, used)
    return ({t.src for t in used} <= bw) and ({t.dst for t in used} <= fw) and fw == bw


@dataclass(frozen=True)
class ReachResult:
    reachable: bool
    coefficients: Optional[Dict[Transition, Fraction]] = None
    rounds: int = 0

    def __bool__(self) -> bool:
        return self.reachable


def _reach_system(sys: Cvrs, c, c2, used: Sequence[Transition]) -> Tuple[LinearSystem, Dict[str, Transition]]:
    """Homogenized flow and balance: lam*c2 = lam*c + sum mu_t (in - out), lam >= 1."""
    ls = LinearSystem()
    names: Dict[str, Transition] = {}
    for j, t in enumerate(used):
        names[ls.add_variable(f"mu{j}")] = t
    lam = ls.add_variable("lam")
    var_of = {t: v for v, t in names.items()}
    for s in sys.states:
        row: Dict[str, Fraction] = {}
        for t in used:
            if t.dst == s:
                row[var_of[t]] = row.get(var_of[t], Fraction(0)) + 1
            if t.src == s:
                row[var_of[t]] = row.get(var_of[t], Fraction(0)) - 1
        diff = Fraction(c2.get(s, 0)) - Fraction(c.get(s, 0))
        if diff:
            row[lam] = -diff
        if row:
            ls.add(row, "=", 0)
    _add_balance(ls, sys.arity, used, var_of)
    ls.add({lam: 1}, ">=", 1)
    return ls, names


def _add_balance(ls: LinearSystem, arity: int, used: Sequence[Transition], var_of: Mapping[Transition, str]) -> None:
    actions = dict.fromkeys(t.label.action for t in used)
    for a in actions:
        for i in range(2, arity + 1):
            row: Dict[str, Fraction] = {}
            for t in used:
                if t.label.action == a and t.label.index in (1, i):
                    sign = 1 if t.label.index == 1 else -1
                    row[var_of[t]] = row.get(var_of[t], Fraction(0)) + sign
            ls.add(row, "=", 0)


def cvrs_reachable(sys: Cvrs, c: Mapping[State, object], c2: Mapping[State, object]) -> ReachResult:
    """Decide c ->* c2 by support refinement; the certificate is re-checked before returning True."""
    c, c2 = config(c), config(c2)
    unknown = (set(c) | set(c2)) - set(sys.states)
    if unknown:
        raise ValueError(f"configuration mentions unknown states {sorted(map(repr, unknown))}")
    used: Tuple[Transition, ...] = sys.transitions
    rounds = 0
    while True:
        rounds += 1
        ls, names = _reach_system(sys, c, c2, used)
        sol = support_maximal_solution(ls, [v for v in names])
        if isinstance(sol, Infeasible):
            return ReachResult(False, None, rounds)
        lam = sol["lam"]
        mu = {t: sol[v] / lam for v, t in names.items() if sol[v] > 0}
        pos = [t for t in used if t in mu]
        h = forw(sys, c, pos) & back(sys, c2, pos)
        kept = tuple(t for t in pos if t.src in h and t.dst in h)
        if kept == used:
            if not check_reach_certificate(sys, c, c2, mu):
                raise AssertionError("internal error: refinement fixed point fails the reachability conditions")
            return ReachResult(True, mu, rounds)
        used = kept
