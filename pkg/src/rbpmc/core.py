"""Process templates and the operational semantics of their n-process systems.

A template is a finite labelled transition system whose edges carry either a
k-wise rendezvous label ``a_i``, the symmetric broadcast label, or (for RBA
templates) an asymmetric broadcast ``b_snd`` / ``b_rcv``.  Systems are
instantiated with dense process ids ``1..n``; a configuration is the tuple of
local states, position ``i - 1`` holding the state of process ``i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

State = Hashable
Letter = FrozenSet[str]
Word = Tuple[Letter, ...]

KINDS = ("R", "RB", "RBA")


class ResourceLimitError(RuntimeError):
    """Raised when a configured size cap (e.g. number of components) is exceeded."""


@dataclass(frozen=True, order=True)
class Rendezvous:
    action: str
    index: int

    def __str__(self) -> str:
        return f"{self.action}_{self.index}"


@dataclass(frozen=True, order=True)
class Broadcast:
    def __str__(self) -> str:
        return "broadcast"


BROADCAST = Broadcast()


@dataclass(frozen=True, order=True)
class AsymBroadcast:
    action: str
    role: str  # "snd" | "rcv"

    def __str__(self) -> str:
        return f"{self.action}_{self.role}"


EdgeLabel = Union[Rendezvous, Broadcast, AsymBroadcast]


@dataclass(frozen=True)
class Edge:
    src: State
    dst: State
    label: EdgeLabel

    @property
    def is_broadcast(self) -> bool:
        return isinstance(self.label, Broadcast)

    @property
    def is_rendezvous(self) -> bool:
        return isinstance(self.label, Rendezvous)

    def __str__(self) -> str:
        return f"{fmt_state(self.src)} -{self.label}-> {fmt_state(self.dst)}"


@dataclass(frozen=True, eq=True)
class ProcessTemplate:
    kind: str
    arity: int
    atoms: FrozenSet[str]
    states: Tuple[State, ...]
    initial: FrozenSet[State]
    edges: Tuple[Edge, ...]
    labels: Mapping[State, FrozenSet[str]] = field(default_factory=dict)

    __hash__ = None  # type: ignore[assignment]

    def label(self, s: State) -> Letter:
        return self.labels.get(s, frozenset())

    @property
    def rendezvous_edges(self) -> Tuple[Edge, ...]:
        return tuple(e for e in self.edges if isinstance(e.label, Rendezvous))

    @property
    def broadcast_edges(self) -> Tuple[Edge, ...]:
        return tuple(e for e in self.edges if isinstance(e.label, Broadcast))

    def out_edges(self, s: State) -> Tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.src == s)

    def actions(self) -> Tuple[str, ...]:
        """Rendezvous action names in order of first appearance."""
        seen: Dict[str, None] = {}
        for e in self.edges:
            if isinstance(e.label, Rendezvous):
                seen.setdefault(e.label.action, None)
        return tuple(seen)

    def asym_actions(self) -> Tuple[str, ...]:
        seen: Dict[str, None] = {}
        for e in self.edges:
            if isinstance(e.label, AsymBroadcast):
                seen.setdefault(e.label.action, None)
        return tuple(seen)

    def replace(self, **changes: Any) -> "ProcessTemplate":
        data = dict(kind=self.kind, arity=self.arity, atoms=self.atoms, states=self.states,
                    initial=self.initial, edges=self.edges, labels=self.labels)
        data.update(changes)
        return make_template(**data)


def make_template(kind: str, arity: int, states: Iterable[State], initial: Iterable[State],
                  edges: Iterable[Edge], labels: Optional[Mapping[State, Iterable[str]]] = None,
                  atoms: Optional[Iterable[str]] = None) -> ProcessTemplate:
    """Build a template, normalising containers; atoms default to the atoms used by labels."""
    states = tuple(dict.fromkeys(states))
    labels = {s: frozenset(v) for s, v in (labels or {}).items() if frozenset(v)}
    if atoms is None:
        atoms = set().union(*labels.values()) if labels else set()
    return ProcessTemplate(kind=kind.upper(), arity=int(arity), atoms=frozenset(atoms), states=states,
                           initial=frozenset(initial), edges=tuple(dict.fromkeys(edges)), labels=labels)


def rdz(src: State, dst: State, action: str, index: int) -> Edge:
    return Edge(src, dst, Rendezvous(action, index))


def bcast(src: State, dst: State) -> Edge:
    return Edge(src, dst, BROADCAST)


def fmt_state(s: State) -> str:
    if isinstance(s, tuple):
        return "(" + ",".join(fmt_state(x) for x in s) + ")"
    return str(s)


# ---------------------------------------------------------------------------
# validation and template transformations


def validate_template(tpl: ProcessTemplate) -> List[str]:
    """Return the list of violated well-formedness conditions (empty if valid)."""
    problems: List[str] = []
    if tpl.kind not in KINDS:
        problems.append(f"unknown kind {tpl.kind!r}")
    if tpl.arity < 1:
        problems.append(f"arity must be positive, got {tpl.arity}")
    if not tpl.states:
        problems.append("no states")
    states = set(tpl.states)
    for s in sorted(tpl.initial - states, key=repr):
        problems.append(f"initial state {fmt_state(s)} is not a state")
    for s, letter in tpl.labels.items():
        if s not in states:
            problems.append(f"labelled state {fmt_state(s)} is not a state")
        for atom in sorted(letter - tpl.atoms):
            problems.append(f"state {fmt_state(s)} carries undeclared atom {atom!r}")
    for e in tpl.edges:
        if e.src not in states:
            problems.append(f"edge {e}: source is not a state")
        if e.dst not in states:
            problems.append(f"edge {e}: destination is not a state")
        if isinstance(e.label, Rendezvous) and not 1 <= e.label.index <= tpl.arity:
            problems.append(f"edge {e}: index outside [1, {tpl.arity}]")
        if isinstance(e.label, AsymBroadcast):
            if tpl.kind != "RBA":
                problems.append(f"edge {e}: asymmetric broadcast in a {tpl.kind} template")
            if e.label.role not in ("snd", "rcv"):
                problems.append(f"edge {e}: role must be snd or rcv")
        if isinstance(e.label, Broadcast) and tpl.kind in ("R", "RBA"):
            problems.append(f"edge {e}: symmetric broadcast in a {tpl.kind} template")
    if tpl.kind == "RB":
        with_bcast = {e.src for e in tpl.edges if isinstance(e.label, Broadcast)}
        for s in tpl.states:
            if s not in with_bcast:
                problems.append(f"state {fmt_state(s)} has no broadcast edge")
    if tpl.kind == "RBA":
        rcv = {(e.src, e.label.action) for e in tpl.edges
               if isinstance(e.label, AsymBroadcast) and e.label.role == "rcv"}
        for b in tpl.asym_actions():
            for s in tpl.states:
                if (s, b) not in rcv:
                    problems.append(f"state {fmt_state(s)} cannot receive broadcast {b!r}")
    return problems


def normalize_arity(tpl: ProcessTemplate, arities: Mapping[str, int]) -> ProcessTemplate:
    """Pad actions of arity j < k with self-loops on indices j+1..k at every state."""
    extra: List[Edge] = []
    for action, j in arities.items():
        if not 1 <= j <= tpl.arity:
            raise ValueError(f"action {action!r}: arity {j} outside [1, {tpl.arity}]")
        for i in range(j + 1, tpl.arity + 1):
            extra.extend(rdz(s, s, action, i) for s in tpl.states)
    return tpl.replace(edges=tpl.edges + tuple(extra))


def _fresh(name: State, taken: set) -> State:
    candidate = f"{name}^" if isinstance(name, str) else (name, "^")
    while candidate in taken:
        candidate = f"{candidate}^" if isinstance(candidate, str) else (candidate, "^")
    return candidate


def remove_self_loops(tpl: ProcessTemplate) -> ProcessTemplate:
    """Equivalent template without self-loops: each looping state s gets a twin s^."""
    looping = [s for s in tpl.states if any(e.src == s and e.dst == s for e in tpl.edges)]
    if not looping:
        return tpl
    taken = set(tpl.states)
    twin: Dict[State, State] = {}
    for s in looping:
        twin[s] = _fresh(s, taken)
        taken.add(twin[s])
    edges: List[Edge] = []
    for e in tpl.edges:
        if e.src == e.dst and e.src in twin:
            edges.append(Edge(e.src, twin[e.src], e.label))
        else:
            edges.append(e)
    for e in tpl.edges:
        if e.src in twin:
            dst = e.src if e.dst == e.src else e.dst
            edges.append(Edge(twin[e.src], dst, e.label))
    labels = dict(tpl.labels)
    for s, t in twin.items():
        if s in labels:
            labels[t] = labels[s]
    return tpl.replace(states=tpl.states + tuple(twin[s] for s in looping), edges=tuple(edges), labels=labels)


# ---------------------------------------------------------------------------
# systems


Configuration = Tuple[State, ...]


@dataclass(frozen=True)
class GlobalTransition:
    source: Configuration
    label: Union[Broadcast, str]  # BROADCAST, "rdz:<action>" or "asym:<action>"
    destination: Configuration
    moves: Tuple[Tuple[int, Edge], ...]  # (process id, local edge); index order for rendezvous

    @property
    def active(self) -> FrozenSet[int]:
        return frozenset(pid for pid, _ in self.moves)

    @property
    def is_broadcast(self) -> bool:
        return isinstance(self.label, Broadcast) or (isinstance(self.label, str) and self.label.startswith("asym:"))

    def edge_of(self, pid: int) -> Optional[Edge]:
        for p, e in self.moves:
            if p == pid:
                return e
        return None


class System:
    """Finite instantiation: one template per process (position i-1 is process i)."""

    def __init__(self, templates: Sequence[ProcessTemplate]):
        if not templates:
            raise ValueError("a system needs at least one process")
        arities = {t.arity for t in templates}
        if len(arities) != 1:
            raise ValueError("all templates of a system must share the rendezvous arity")
        self.templates: Tuple[ProcessTemplate, ...] = tuple(templates)
        self.arity = arities.pop()
        self.n = len(templates)
        acts: Dict[str, None] = {}
        asym: Dict[str, None] = {}
        for t in self.templates:
            acts.update(dict.fromkeys(t.actions()))
            asym.update(dict.fromkeys(t.asym_actions()))
        self._actions = tuple(acts)
        self._asym = tuple(asym)
        self._out: List[Dict[State, Tuple[Edge, ...]]] = []
        for t in self.templates:
            table: Dict[State, List[Edge]] = {}
            for e in t.edges:
                table.setdefault(e.src, []).append(e)
            self._out.append({s: tuple(v) for s, v in table.items()})

    @classmethod
    def uniform(cls, tpl: ProcessTemplate, n: int) -> "System":
        return cls([tpl] * n)

    @classmethod
    def with_controller(cls, controller: ProcessTemplate, user: ProcessTemplate, n_users: int) -> "System":
        return cls([controller] + [user] * n_users)

    def initial_configurations(self) -> List[Configuration]:
        choices = [sorted(t.initial, key=repr) for t in self.templates]
        return [tuple(c) for c in itertools.product(*choices)]

    def out(self, pid: int, s: State) -> Tuple[Edge, ...]:
        return self._out[pid - 1].get(s, ())

    def label(self, pid: int, s: State) -> Letter:
        return self.templates[pid - 1].label(s)

    def successors(self, cfg: Configuration) -> List[GlobalTransition]:
        """All global transitions enabled in cfg, in a deterministic order."""
        if len(cfg) != self.n:
            raise ValueError("configuration size does not match the system")
        result: List[GlobalTransition] = []
        k = self.arity
        pids = range(1, self.n + 1)
        for a in self._actions:
            cands = []
            for i in range(1, k + 1):
                lab = Rendezvous(a, i)
                cands.append([(p, e) for p in pids for e in self.out(p, cfg[p - 1]) if e.label == lab])
            for combo in itertools.product(*cands):
                ps = [p for p, _ in combo]
                if len(set(ps)) != k:
                    continue
                dst = list(cfg)
                for p, e in combo:
                    dst[p - 1] = e.dst
                result.append(GlobalTransition(cfg, f"rdz:{a}", tuple(dst), tuple(combo)))
        per_proc = [[e for e in self.out(p, cfg[p - 1]) if isinstance(e.label, Broadcast)] for p in pids]
        if all(per_proc) and any(t.kind == "RB" for t in self.templates):
            for combo in itertools.product(*per_proc):
                moves = tuple(zip(pids, combo))
                result.append(GlobalTransition(cfg, BROADCAST, tuple(e.dst for e in combo), moves))
        for b in self._asym:
            snd = AsymBroadcast(b, "snd")
            rcv = AsymBroadcast(b, "rcv")
            for sender in pids:
                opts = []
                for p in pids:
                    want = snd if p == sender else rcv
                    opts.append([e for e in self.out(p, cfg[p - 1]) if e.label == want])
                if not all(opts):
                    continue
                for combo in itertools.product(*opts):
                    moves = tuple(zip(pids, combo))
                    result.append(GlobalTransition(cfg, f"asym:{b}", tuple(e.dst for e in combo), moves))
        return result


def successors(tpl: ProcessTemplate, cfg: Configuration) -> List[GlobalTransition]:
    """Global transitions of the system tpl^n from cfg, n = len(cfg)."""
    return System.uniform(tpl, len(cfg)).successors(cfg)


def is_run(system: System, run: Sequence[GlobalTransition], start: Optional[Configuration] = None) -> bool:
    """Check that run is a path of the system starting in an initial configuration."""
    cur = start if start is not None else (run[0].source if run else None)
    if cur is None:
        return True
    if cur not in set(system.initial_configurations()):
        return False
    for t in run:
        if t.source != cur or t not in system.successors(cur):
            return False
        cur = t.destination
    return True


def project_run(tpl: Union[ProcessTemplate, System], run: Sequence[GlobalTransition], pid: int,
                start: Optional[Configuration] = None) -> Tuple[Tuple[Edge, ...], Word]:
    """Local edges taken by process pid and the label trace of the states it visits."""
    if run:
        start = run[0].source
    if start is None:
        raise ValueError("an empty run needs an explicit start configuration")
    label = (lambda s: tpl.label(pid, s)) if isinstance(tpl, System) else tpl.label
    edges: List[Edge] = []
    trace: List[Letter] = [label(start[pid - 1])]
    for t in run:
        e = t.edge_of(pid)
        if e is not None:
            edges.append(e)
            trace.append(label(e.dst))
    return tuple(edges), tuple(trace)


def project_word(word: Sequence[Letter], marker: str, atoms: Optional[Iterable[str]] = None) -> Word:
    """Keep the letters containing marker, then restrict them to atoms (default: drop marker)."""
    keep = [w for w in word if marker in w]
    if atoms is None:
        return tuple(frozenset(w - {marker}) for w in keep)
    allowed = frozenset(atoms)
    return tuple(frozenset(w & allowed) for w in keep)


# ---------------------------------------------------------------------------
# JSON


def encode_state(s: State) -> Any:
    if isinstance(s, tuple):
        return [encode_state(x) for x in s]
    if isinstance(s, (str, int)):
        return s
    raise TypeError(f"state {s!r} is not JSON-encodable")


def decode_state(v: Any) -> State:
    if isinstance(v, list):
        return tuple(decode_state(x) for x in v)
    return v


def encode_label(label: EdgeLabel) -> Any:
    if isinstance(label, Broadcast):
        return "broadcast"
    if isinstance(label, Rendezvous):
        return {"action": label.action, "index": label.index}
    return {"action": label.action, "role": label.role}


def decode_label(v: Any) -> EdgeLabel:
    if v == "broadcast":
        return BROADCAST
    if isinstance(v, dict) and "index" in v:
        return Rendezvous(str(v["action"]), int(v["index"]))
    if isinstance(v, dict) and "role" in v:
        return AsymBroadcast(str(v["action"]), str(v["role"]))
    raise ValueError(f"bad edge label {v!r}")


def template_to_dict(tpl: ProcessTemplate) -> Dict[str, Any]:
    return {
        "kind": tpl.kind.lower(),
        "k": tpl.arity,
        "atoms": sorted(tpl.atoms),
        "states": [encode_state(s) for s in tpl.states],
        "initial": [encode_state(s) for s in tpl.states if s in tpl.initial],
        "labels": [[encode_state(s), sorted(tpl.labels[s])] for s in tpl.states if tpl.labels.get(s)],
        "edges": [{"src": encode_state(e.src), "dst": encode_state(e.dst), "label": encode_label(e.label)}
                  for e in tpl.edges],
    }


def template_from_dict(d: Mapping[str, Any]) -> ProcessTemplate:
    raw_labels = d.get("labels", {})
    if isinstance(raw_labels, dict):
        labels = {decode_state(s): v for s, v in raw_labels.items()}
    else:
        labels = {decode_state(s): v for s, v in raw_labels}
    return make_template(
        kind=str(d.get("kind", "rb")),
        arity=int(d.get("k", 2)),
        atoms=d.get("atoms"),
        states=[decode_state(s) for s in d["states"]],
        initial=[decode_state(s) for s in d.get("initial", [])],
        edges=[Edge(decode_state(e["src"]), decode_state(e["dst"]), decode_label(e["label"])) for e in d.get("edges", [])],
        labels=labels,
    )
