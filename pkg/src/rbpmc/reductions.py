"""Translations between formalisms.

* timed networks to RB-templates (clock values clipped at d) and back (one clock
  whose ticks are the broadcasts);
* controller systems (RBC) to asymmetric-broadcast templates (RBA) and back;
* the marker rewriting of specifications that goes with those translations;
* Boolean programs to RB-templates whose safety PMCP encodes program reachability.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from . import ltl
from .core import (
    AsymBroadcast,
    Broadcast,
    Edge,
    ProcessTemplate,
    Rendezvous,
    State,
    bcast,
    decode_label,
    decode_state,
    encode_label,
    encode_state,
    make_template,
    rdz,
    validate_template,
)

# ---------------------------------------------------------------------------
# clock predicates and guards

Valuation = Mapping[str, int]


@dataclass(frozen=True, order=True)
class ClockPredicate:
    clock: str
    rel: str  # ">" or "="
    const: int

    def __post_init__(self) -> None:
        if self.rel not in (">", "="):
            raise ValueError(f"clock predicate relation must be '>' or '=', got {self.rel!r}")
        if not isinstance(self.const, int) or self.const < 0:
            raise ValueError(f"clock predicate constant must be a nonnegative integer, got {self.const!r}")

    @property
    def name(self) -> str:
        return f"{self.clock}{self.rel}{self.const}"

    def holds(self, val: Valuation) -> bool:
        v = val[self.clock]
        return v > self.const if self.rel == ">" else v == self.const

    def to_dict(self) -> dict:
        return {"clock": self.clock, "rel": self.rel, "const": self.const}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ClockPredicate":
        return cls(str(d["clock"]), str(d["rel"]), int(d["const"]))


class Guard:
    def holds(self, val: Valuation) -> bool:
        raise NotImplementedError

    def predicates(self) -> FrozenSet[ClockPredicate]:
        raise NotImplementedError

    def to_json(self) -> Any:
        raise NotImplementedError


@dataclass(frozen=True)
class GTrue(Guard):
    def holds(self, val: Valuation) -> bool:
        return True

    def predicates(self) -> FrozenSet[ClockPredicate]:
        return frozenset()

    def to_json(self) -> Any:
        return True


@dataclass(frozen=True)
class GFalse(Guard):
    def holds(self, val: Valuation) -> bool:
        return False

    def predicates(self) -> FrozenSet[ClockPredicate]:
        return frozenset()

    def to_json(self) -> Any:
        return False


@dataclass(frozen=True)
class GPred(Guard):
    pred: ClockPredicate

    def holds(self, val: Valuation) -> bool:
        return self.pred.holds(val)

    def predicates(self) -> FrozenSet[ClockPredicate]:
        return frozenset({self.pred})

    def to_json(self) -> Any:
        return self.pred.to_dict()


@dataclass(frozen=True)
class GNot(Guard):
    arg: Guard

    def holds(self, val: Valuation) -> bool:
        return not self.arg.holds(val)

    def predicates(self) -> FrozenSet[ClockPredicate]:
        return self.arg.predicates()

    def to_json(self) -> Any:
        return {"not": self.arg.to_json()}


@dataclass(frozen=True)
class GAnd(Guard):
    args: Tuple[Guard, ...]

    def holds(self, val: Valuation) -> bool:
        return all(g.holds(val) for g in self.args)

    def predicates(self) -> FrozenSet[ClockPredicate]:
        return frozenset().union(*(g.predicates() for g in self.args))

    def to_json(self) -> Any:
        return {"and": [g.to_json() for g in self.args]}


@dataclass(frozen=True)
class GOr(Guard):
    args: Tuple[Guard, ...]

    def holds(self, val: Valuation) -> bool:
        return any(g.holds(val) for g in self.args)

    def predicates(self) -> FrozenSet[ClockPredicate]:
        return frozenset().union(*(g.predicates() for g in self.args))

    def to_json(self) -> Any:
        return {"or": [g.to_json() for g in self.args]}


def guard_from_json(v: Any) -> Guard:
    if v is True:
        return GTrue()
    if v is False:
        return GFalse()
    if isinstance(v, Mapping):
        if "not" in v:
            return GNot(guard_from_json(v["not"]))
        if "and" in v:
            return GAnd(tuple(guard_from_json(x) for x in v["and"]))
        if "or" in v:
            return GOr(tuple(guard_from_json(x) for x in v["or"]))
        if "clock" in v:
            return GPred(ClockPredicate.from_dict(v))
    raise ValueError(f"bad guard {v!r}")


# ---------------------------------------------------------------------------
# timed-network templates


@dataclass(frozen=True)
class TNEdge:
    src: State
    dst: State
    label: Rendezvous
    guard: Guard = field(default_factory=GTrue)
    reset: FrozenSet[str] = frozenset()


@dataclass(frozen=True)
class TNTemplate:
    arity: int
    atoms: FrozenSet[str]
    states: Tuple[State, ...]
    initial: FrozenSet[State]
    labels: Mapping[State, FrozenSet[str]]
    edges: Tuple[TNEdge, ...]
    clocks: Tuple[str, ...]
    predicates: Tuple[ClockPredicate, ...]

    __hash__ = None  # type: ignore[assignment]

    @property
    def lts(self) -> ProcessTemplate:
        """The underlying rendezvous LTS, guards and resets forgotten."""
        return make_template("R", self.arity, self.states, self.initial,
                             [Edge(e.src, e.dst, e.label) for e in self.edges], self.labels, self.atoms)

    def max_constant(self) -> int:
        return max((p.const for p in self.predicates), default=0)

    def size(self) -> int:
        """Size with constants counted by value (unary accounting)."""
        consts = sum(p.const for p in self.predicates)
        consts += sum(p.const for e in self.edges for p in e.guard.predicates())
        return len(self.states) + len(self.edges) + len(self.clocks) + consts

    def validate(self) -> List[str]:
        problems = [p for p in validate_template(self.lts)]
        clocks = set(self.clocks)
        for p in self.predicates:
            if p.clock not in clocks:
                problems.append(f"clock predicate {p.name} mentions unknown clock {p.clock!r}")
        known = set(self.predicates)
        for e in self.edges:
            for p in e.guard.predicates():
                if p.clock not in clocks:
                    problems.append(f"guard on {e.src}->{e.dst} mentions unknown clock {p.clock!r}")
                elif p not in known:
                    problems.append(f"guard on {e.src}->{e.dst} uses {p.name}, which is not a declared clock predicate")
            for x in e.reset - clocks:
                problems.append(f"edge {e.src}->{e.dst} resets unknown clock {x!r}")
        names = {p.name for p in self.predicates}
        for a in sorted(names & set(self.atoms)):
            problems.append(f"clock predicate {a} clashes with an atom of the same name")
        return problems

    def to_dict(self) -> dict:
        return {
            "kind": "tn",
            "k": self.arity,
            "atoms": sorted(self.atoms),
            "states": [encode_state(s) for s in self.states],
            "initial": [encode_state(s) for s in self.states if s in self.initial],
            "labels": [[encode_state(s), sorted(self.labels[s])] for s in self.states if self.labels.get(s)],
            "clocks": list(self.clocks),
            "clock_predicates": [p.to_dict() for p in self.predicates],
            "edges": [{"src": encode_state(e.src), "dst": encode_state(e.dst), "label": encode_label(e.label),
                       "guard": e.guard.to_json(), "reset": sorted(e.reset)} for e in self.edges],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TNTemplate":
        raw = d.get("labels", {})
        pairs = raw.items() if isinstance(raw, Mapping) else raw
        labels = {decode_state(s): frozenset(v) for s, v in pairs if v}
        states = tuple(decode_state(s) for s in d["states"])
        edges = []
        for e in d.get("edges", []):
            label = decode_label(e["label"])
            if not isinstance(label, Rendezvous):
                raise ValueError("timed-network edges carry rendezvous labels only")
            edges.append(TNEdge(decode_state(e["src"]), decode_state(e["dst"]), label,
                                guard_from_json(e.get("guard", True)), frozenset(e.get("reset", []))))
        atoms = d.get("atoms")
        return cls(
            arity=int(d.get("k", 2)),
            atoms=frozenset(atoms) if atoms is not None else frozenset().union(*labels.values()) if labels else frozenset(),
            states=states,
            initial=frozenset(decode_state(s) for s in d.get("initial", [])),
            labels=labels,
            edges=tuple(edges),
            clocks=tuple(d.get("clocks", [])),
            predicates=tuple(ClockPredicate.from_dict(p) for p in d.get("clock_predicates", [])),
        )


def clip(val: Sequence[int], d: int) -> Tuple[int, ...]:
    return tuple(min(v, d) for v in val)


def tn_to_rb(tn: TNTemplate, d: Optional[int] = None) -> ProcessTemplate:
    """RB-template over AP and the clock predicates, with clock values clipped at d.

    States are pairs (q, K) with K the tuple of clipped clock values, in clock order.
    A broadcast advances every clock by one; a rendezvous edge exists in (q, K) iff K
    satisfies its guard, and applies its reset.  d defaults to the largest predicate
    constant plus one; a larger d may be supplied.
    """
    problems = tn.validate()
    if problems:
        raise ValueError("invalid timed-network template: " + "; ".join(problems))
    least = tn.max_constant() + 1
    if d is None:
        d = least
    elif d < least:
        raise ValueError(f"d must be at least {least} (largest constant + 1), got {d}")
    clocks = tn.clocks
    valuations = list(itertools.product(range(d + 1), repeat=len(clocks)))
    states: List[State] = []
    labels: Dict[State, FrozenSet[str]] = {}
    edges: List[Edge] = []
    for q in tn.states:
        for K in valuations:
            val = dict(zip(clocks, K))
            states.append((q, K))
            labels[(q, K)] = tn.labels.get(q, frozenset()) | {p.name for p in tn.predicates if p.holds(val)}
    for q in tn.states:
        for K in valuations:
            val = dict(zip(clocks, K))
            for e in tn.edges:
                if e.src == q and e.guard.holds(val):
                    K2 = tuple(0 if x in e.reset else v for x, v in zip(clocks, K))
                    edges.append(Edge((q, K), (e.dst, K2), e.label))
            edges.append(bcast((q, K), (q, clip(tuple(v + 1 for v in K), d))))
    atoms = set(tn.atoms) | {p.name for p in tn.predicates}
    initial = [(q, tuple(0 for _ in clocks)) for q in tn.states if q in tn.initial]
    return make_template("RB", tn.arity, states, initial, edges, labels, atoms)


TICK = "tick"
ZERO = ClockPredicate("c", "=", 0)
ONE = ClockPredicate("c", "=", 1)


def _fresh_action(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    name = base
    while name in taken:
        name += "'"
    return name


def rb_to_tn(tpl: ProcessTemplate, clock: str = "c") -> TNTemplate:
    """One-clock timed network whose clock ticks play the role of broadcasts.

    Rendezvous edges are guarded ``c=0``.  Each broadcast edge becomes an edge on a
    fresh arity-1 action guarded ``c=1`` that resets c; the action is padded to
    arity k with idle self-loops guarded ``!(c=0)``.
    """
    if tpl.kind != "RB":
        raise ValueError(f"rb_to_tn expects an RB-template, got kind {tpl.kind}")
    problems = validate_template(tpl)
    if problems:
        raise ValueError("invalid RB-template: " + "; ".join(problems))
    zero = ClockPredicate(clock, "=", 0)
    one = ClockPredicate(clock, "=", 1)
    clash = {zero.name, one.name} & set(tpl.atoms)
    if clash:
        raise ValueError(f"atoms {sorted(clash)} clash with the clock predicates")
    tick = _fresh_action(TICK, tpl.actions())
    edges: List[TNEdge] = []
    for e in tpl.edges:
        if isinstance(e.label, Rendezvous):
            edges.append(TNEdge(e.src, e.dst, e.label, GPred(zero), frozenset()))
        else:
            edges.append(TNEdge(e.src, e.dst, Rendezvous(tick, 1), GPred(one), frozenset({clock})))
    for i in range(2, tpl.arity + 1):
        for s in tpl.states:
            edges.append(TNEdge(s, s, Rendezvous(tick, i), GNot(GPred(zero)), frozenset()))
    return TNTemplate(
        arity=tpl.arity,
        atoms=tpl.atoms,
        states=tpl.states,
        initial=tpl.initial,
        labels=dict(tpl.labels),
        edges=tuple(edges),
        clocks=(clock,),
        predicates=(zero, one),
    )


# ---------------------------------------------------------------------------
# controllers and asymmetric broadcasts

ELECT = "elect"
SYM = "sym"


def rbc_to_rba(controller: ProcessTemplate, user: ProcessTemplate,
               controller_atom: str = "c", user_atom: str = "p") -> ProcessTemplate:
    """RBA-template simulating one controller plus any number of users.

    An initial ``elect`` broadcast picks the sender as controller and the receivers
    as users; the symmetric broadcast becomes the asymmetric action ``sym``.
    States are ("ctl", s), ("usr", s) and a fresh initial state "init".
    """
    for name, t in (("controller", controller), ("user", user)):
        if t.kind != "RB":
            raise ValueError(f"{name} must be an RB-template, got kind {t.kind}")
    if controller.arity != user.arity:
        raise ValueError("controller and user must share the rendezvous arity")
    if controller.atoms != user.atoms:
        raise ValueError("controller and user must share the atom set")
    markers = {controller_atom, user_atom}
    if len(markers) != 2 or markers & controller.atoms:
        raise ValueError("marker atoms must be distinct and fresh")
    init = "init"
    states: List[State] = [init]
    labels: Dict[State, FrozenSet[str]] = {}
    edges: List[Edge] = []
    elect_snd, elect_rcv = AsymBroadcast(ELECT, "snd"), AsymBroadcast(ELECT, "rcv")
    sym_snd, sym_rcv = AsymBroadcast(SYM, "snd"), AsymBroadcast(SYM, "rcv")
    for tag, t, marker in (("ctl", controller, controller_atom), ("usr", user, user_atom)):
        for s in t.states:
            states.append((tag, s))
            labels[(tag, s)] = t.label(s) | {marker}
        for e in t.edges:
            src, dst = (tag, e.src), (tag, e.dst)
            if isinstance(e.label, Broadcast):
                edges.append(Edge(src, dst, sym_snd))
                edges.append(Edge(src, dst, sym_rcv))
            else:
                edges.append(Edge(src, dst, e.label))
        for s in t.states:
            edges.append(Edge((tag, s), (tag, s), elect_rcv))
    for s in controller.states:
        if s in controller.initial:
            edges.append(Edge(init, ("ctl", s), elect_snd))
    for s in user.states:
        if s in user.initial:
            edges.append(Edge(init, ("usr", s), elect_rcv))
    edges.append(Edge(init, init, sym_rcv))
    return make_template("RBA", controller.arity, states, [init], edges, labels,
                         set(controller.atoms) | markers)


def rba_to_rbc(tpl: ProcessTemplate, user_atom: str = "p") -> Tuple[ProcessTemplate, ProcessTemplate]:
    """Controller and user templates simulating an RBA-template with pairwise rendezvous.

    For each asymmetric action b the controller, waiting in "w", pairs with one
    sender on ``b_snd`` and then with any number of receivers on ``b_rcv``; its
    symmetric broadcast releases everyone.  Processes that did not take part move
    to a dead state.  Original user states carry the marker atom.
    """
    if tpl.kind != "RBA":
        raise ValueError(f"rba_to_rbc expects an RBA-template, got kind {tpl.kind}")
    if tpl.arity != 2:
        raise ValueError("the bookkeeping controller uses pairwise rendezvous; arity must be 2")
    if user_atom in tpl.atoms:
        raise ValueError(f"marker atom {user_atom!r} is already an atom")
    taken = set(tpl.actions())
    snd_name: Dict[str, str] = {}
    rcv_name: Dict[str, str] = {}
    for b in tpl.asym_actions():
        snd_name[b] = _fresh_action(f"{b}_snd", taken)
        taken.add(snd_name[b])
        rcv_name[b] = _fresh_action(f"{b}_rcv", taken)
        taken.add(rcv_name[b])

    wait, dead = "w", "dead"
    c_states: List[State] = [wait] + [("b", b) for b in tpl.asym_actions()] + [dead]
    c_edges: List[Edge] = []
    for b in tpl.asym_actions():
        busy = ("b", b)
        c_edges.append(rdz(wait, busy, snd_name[b], 2))
        c_edges.append(rdz(busy, busy, rcv_name[b], 2))
        c_edges.append(bcast(busy, wait))
    c_edges.append(bcast(wait, dead))
    c_edges.append(bcast(dead, dead))
    controller = make_template("RB", 2, c_states, [wait], c_edges, {}, tpl.atoms)

    u_dead = ("dead",)
    u_states: List[State] = list(tpl.states)
    for s in tpl.states:
        u_states.extend([(s, "snd", 1), (s, "snd", 2), (s, "rcv", 1), (s, "rcv", 2)])
    u_states.append(u_dead)
    u_edges: List[Edge] = []
    for e in tpl.edges:
        if isinstance(e.label, Rendezvous):
            u_edges.append(e)
        elif isinstance(e.label, AsymBroadcast):
            b, role = e.label.action, e.label.role
            name = snd_name[b] if role == "snd" else rcv_name[b]
            u_edges.append(rdz(e.src, (e.dst, role, 1), name, 1))
    for s in tpl.states:
        for role in ("snd", "rcv"):
            for j in (1, 2):
                u_edges.append(bcast((s, role, j), s))
        u_edges.append(bcast(s, u_dead))
    u_edges.append(bcast(u_dead, u_dead))
    labels = {s: tpl.label(s) | {user_atom} for s in tpl.states}
    user = make_template("RB", 2, u_states, tpl.initial, u_edges, labels, set(tpl.atoms) | {user_atom})
    return controller, user


def project_spec(spec: Union[str, ltl.Formula], marker: str) -> ltl.Formula:
    """Rewrite a specification for the marked projection of a simulating system.

    Every atom X becomes ``!m U (m & X)`` and the result is guarded by
    ``G(!m U m)``, so only traces with infinitely many marked letters are constrained.
    """
    f = ltl.as_formula(spec)
    if marker in ltl.atoms(f):
        raise ValueError(f"marker {marker!r} already occurs in the specification")
    m = ltl.Atom(marker)
    body = ltl.map_atoms(f, lambda a: ltl.Until(ltl.Not(m), ltl.And(m, a)))
    return ltl.Implies(ltl.Globally(ltl.Until(ltl.Not(m), m)), body)


# ---------------------------------------------------------------------------
# Boolean programs


@dataclass(frozen=True)
class Conditional:
    var: int
    then: int
    else_: int


@dataclass(frozen=True)
class Toggle:
    var: int


Instruction = Union[Conditional, Toggle]


@dataclass(frozen=True)
class BoolProgram:
    num_vars: int
    instructions: Tuple[Instruction, ...]

    @property
    def length(self) -> int:
        return len(self.instructions)

    def var(self, loc: int) -> int:
        return self.instructions[loc - 1].var

    def validate(self) -> List[str]:
        problems = []
        n, m = self.length, self.num_vars
        if n == 0:
            problems.append("program has no instructions")
        elif not isinstance(self.instructions[-1], Conditional):
            problems.append("the last instruction must be a conditional")
        for loc, ins in enumerate(self.instructions, start=1):
            if not 1 <= ins.var <= m:
                problems.append(f"instruction {loc}: variable {ins.var} outside [1, {m}]")
            if isinstance(ins, Conditional):
                for tgt in (ins.then, ins.else_):
                    if not 1 <= tgt <= n:
                        problems.append(f"instruction {loc}: jump target {tgt} outside [1, {n}]")
        return problems

    def to_json(self) -> list:
        out = []
        for ins in self.instructions:
            if isinstance(ins, Conditional):
                out.append({"op": "if", "var": ins.var, "then": ins.then, "else": ins.else_})
            else:
                out.append({"op": "toggle", "var": ins.var})
        return out

    @classmethod
    def from_json(cls, data: Sequence[Mapping], num_vars: Optional[int] = None) -> "BoolProgram":
        ins: List[Instruction] = []
        for d in data:
            if d.get("op") == "if":
                ins.append(Conditional(int(d["var"]), int(d["then"]), int(d["else"])))
            elif d.get("op") == "toggle":
                ins.append(Toggle(int(d["var"])))
            else:
                raise ValueError(f"unknown instruction {d!r}")
        m = num_vars if num_vars is not None else max((i.var for i in ins), default=0)
        return cls(m, tuple(ins))


def simulate_boolprog(prog: BoolProgram) -> bool:
    """True iff the deterministic execution reaches the last location."""
    problems = prog.validate()
    if problems:
        raise ValueError("; ".join(problems))
    n = prog.length
    loc = 1
    values = [False] * (prog.num_vars + 1)
    seen = set()
    while loc != n:
        key = (loc, tuple(values))
        if key in seen:
            return False
        seen.add(key)
        ins = prog.instructions[loc - 1]
        if isinstance(ins, Toggle):
            values[ins.var] = not values[ins.var]
            loc += 1
        else:
            loc = ins.then if values[ins.var] else ins.else_
    return True


def _loc(l: int, primed: bool = False) -> str:
    return f"L{l}'" if primed else f"L{l}"


def _var(i: int, value: bool, primed: bool = False) -> str:
    return ("" if value else "!") + f"X{i}" + ("'" if primed else "")


def boolprog_to_rb(prog: BoolProgram) -> Tuple[ProcessTemplate, ltl.Formula]:
    """RB-template whose systems can reach ``done`` iff the program reaches its last location.

    One process tracks the location, one process per variable tracks its value;
    each round between broadcasts simulates at most one instruction, and processes
    that did not move in a round fall into ``sink`` on the next broadcast.
    """
    problems = prog.validate()
    if problems:
        raise ValueError("; ".join(problems))
    n, m = prog.length, prog.num_vars
    iota, sink = "iota", "sink"
    states: List[State] = [iota, sink]
    for l in range(1, n + 1):
        states += [_loc(l), _loc(l, True)]
    for i in range(1, m + 1):
        states += [_var(i, True), _var(i, False), _var(i, True, True), _var(i, False, True)]

    edges: List[Edge] = [bcast(iota, _loc(1))]
    edges += [bcast(iota, _var(i, False)) for i in range(1, m + 1)]
    edges.append(bcast(sink, sink))
    edges += [bcast(_loc(l), sink) for l in range(1, n + 1)]
    for i in range(1, m + 1):
        edges += [bcast(_var(i, True), sink), bcast(_var(i, False), sink)]
    edges += [bcast(_loc(l, True), _loc(l)) for l in range(1, n + 1)]
    for i in range(1, m + 1):
        edges += [bcast(_var(i, True, True), _var(i, True)), bcast(_var(i, False, True), _var(i, False))]

    for l in range(1, n + 1):
        for i in range(1, m + 1):
            if i != prog.var(l):
                edges.append(rdz(_loc(l), _loc(l), f"protect{i}", 1))
    for i in range(1, m + 1):
        edges.append(rdz(_var(i, True), _var(i, True, True), f"protect{i}", 2))
        edges.append(rdz(_var(i, False), _var(i, False, True), f"protect{i}", 2))
    for l, ins in enumerate(prog.instructions, start=1):
        if isinstance(ins, Conditional):
            edges.append(rdz(_loc(l), _loc(ins.then, True), f"if{ins.var}", 1))
            edges.append(rdz(_loc(l), _loc(ins.else_, True), f"else{ins.var}", 1))
        else:
            edges.append(rdz(_loc(l), _loc(l + 1, True), f"toggle{ins.var}", 1))
    for i in range(1, m + 1):
        edges.append(rdz(_var(i, True), _var(i, True, True), f"if{i}", 2))
        edges.append(rdz(_var(i, False), _var(i, False, True), f"else{i}", 2))
        edges.append(rdz(_var(i, True), _var(i, False, True), f"toggle{i}", 2))
        edges.append(rdz(_var(i, False), _var(i, True, True), f"toggle{i}", 2))

    tpl = make_template("RB", 2, states, [iota], edges, {_loc(n): {"done"}}, {"done"})
    return tpl, ltl.Globally(ltl.Not(ltl.Atom("done")))
