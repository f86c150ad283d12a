"""Reachability-unwinding of an RB-template into a lasso of saturated components.

Component i collects the states a process can occupy after exactly i broadcasts
together with the rendezvous edges that can actually fire there.  Components are
arranged in a lasso: a prefix of length ``prefix`` followed by a noose of
``period`` components; broadcasts lead from component i to its successor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .core import (
    BROADCAST,
    Broadcast,
    Edge,
    GlobalTransition,
    ProcessTemplate,
    Rendezvous,
    ResourceLimitError,
    State,
    encode_label,
    encode_state,
    fmt_state,
    make_template,
)


@dataclass(frozen=True)
class Component:
    index: int
    states: FrozenSet[State]
    initial: FrozenSet[State]
    edges: Tuple[Edge, ...]


@dataclass(frozen=True, eq=False)
class UnwoundTemplate:
    base: ProcessTemplate
    components: Tuple[Component, ...]
    prefix: int
    period: int
    template: ProcessTemplate
    cross_edges: Tuple[Edge, ...]

    @property
    def last(self) -> int:
        return len(self.components) - 1

    @property
    def noose(self) -> range:
        return range(self.prefix, self.last + 1)

    def comp(self, i: int) -> int:
        return comp_index(self, i)

    def suc(self, i: int) -> int:
        return i + 1 if i < self.last else self.prefix

    def pre(self, i: int) -> int:
        """Predecessor on the noose."""
        return i - 1 if i > self.prefix else self.last

    def states_of(self, i: int) -> FrozenSet[State]:
        return frozenset((s, i) for s in self.components[i].states)

    def rendezvous_edges_of(self, i: int) -> Tuple[Edge, ...]:
        return tuple(e for e in self.template.edges if isinstance(e.label, Rendezvous) and e.src[1] == i)

    def broadcasts_from(self, i: int) -> Tuple[Edge, ...]:
        return tuple(e for e in self.cross_edges if e.src[1] == i)

    def to_dict(self) -> dict:
        return {
            "prefix": self.prefix,
            "period": self.period,
            "components": [
                {
                    "index": c.index,
                    "states": [encode_state(s) for s in self.base.states if s in c.states],
                    "initial": [encode_state(s) for s in self.base.states if s in c.initial],
                    "edges": [_edge_json(e) for e in c.edges],
                }
                for c in self.components
            ],
            "cross_edges": [_edge_json(e) for e in self.cross_edges],
        }

    def to_dot(self) -> str:
        lines = ["digraph unwinding {", "  rankdir=LR;"]
        for c in self.components:
            lines.append(f"  subgraph cluster_{c.index} {{ label=\"component {c.index}\";")
            for s in self.base.states:
                if s in c.states:
                    shape = "doublecircle" if (c.index == 0 and s in c.initial) else "circle"
                    lines.append(f"    \"{fmt_state((s, c.index))}\" [shape={shape}];")
            lines.append("  }")
        for e in self.template.edges:
            style = " style=dashed" if isinstance(e.label, Broadcast) else ""
            lines.append(f"  \"{fmt_state(e.src)}\" -> \"{fmt_state(e.dst)}\" [label=\"{e.label}\"{style}];")
        lines.append("}")
        return "\n".join(lines)


def _edge_json(e: Edge) -> dict:
    return {"src": encode_state(e.src), "dst": encode_state(e.dst), "label": encode_label(e.label)}


def saturate(base: ProcessTemplate, seed: Iterable[State], index: int = 0) -> Component:
    """Least set of states/edges closed under firable rendezvous, starting from seed."""
    seed = frozenset(seed)
    unknown = seed - set(base.states)
    if unknown:
        raise ValueError(f"seed contains non-states: {sorted(map(fmt_state, unknown))}")
    k = base.arity
    rdz_edges = base.rendezvous_edges
    sources: Dict[Tuple[str, int], List[State]] = {}
    for e in rdz_edges:
        sources.setdefault((e.label.action, e.label.index), []).append(e.src)
    states: Set[State] = set(seed)
    taken: List[Edge] = []
    taken_set: Set[Edge] = set()
    changed = True
    while changed:
        changed = False
        for e in rdz_edges:
            if e in taken_set or e.src not in states:
                continue
            a, h = e.label.action, e.label.index
            if all(any(s in states for s in sources.get((a, l), ())) for l in range(1, k + 1) if l != h):
                taken.append(e)
                taken_set.add(e)
                if e.dst not in states:
                    states.add(e.dst)
                changed = True
    order = {e: i for i, e in enumerate(rdz_edges)}
    return Component(index, frozenset(states), seed, tuple(sorted(taken, key=order.__getitem__)))


def broadcast_successors(base: ProcessTemplate, states: Iterable[State]) -> FrozenSet[State]:
    states = set(states)
    return frozenset(e.dst for e in base.broadcast_edges if e.src in states)


def build_unwinding(tpl: ProcessTemplate, max_components: Optional[int] = None) -> UnwoundTemplate:
    """Compute components until the state set of a component repeats an earlier one."""
    if tpl.kind not in ("R", "RB"):
        raise ValueError(f"unwinding is defined for R and RB templates, not {tpl.kind}")
    comps: List[Component] = []
    seen: Dict[FrozenSet[State], int] = {}
    seed = frozenset(tpl.initial)
    while True:
        comp = saturate(tpl, seed, len(comps))
        if comp.states in seen:
            prefix = seen[comp.states]
            break
        if max_components is not None and len(comps) >= max_components:
            raise ResourceLimitError(f"unwinding needs more than {max_components} components")
        seen[comp.states] = len(comps)
        comps.append(comp)
        seed = broadcast_successors(tpl, comp.states)
    period = len(comps) - prefix
    last = len(comps) - 1

    states: List[State] = []
    labels = {}
    edges: List[Edge] = []
    cross: List[Edge] = []
    for c in comps:
        for s in tpl.states:
            if s in c.states:
                states.append((s, c.index))
                if tpl.label(s):
                    labels[(s, c.index)] = tpl.label(s)
        edges.extend(Edge((e.src, c.index), (e.dst, c.index), e.label) for e in c.edges)
    for c in comps:
        nxt = c.index + 1 if c.index < last else prefix
        for e in tpl.broadcast_edges:
            if e.src in c.states:
                cross.append(Edge((e.src, c.index), (e.dst, nxt), BROADCAST))
    unwound = make_template(tpl.kind, tpl.arity, states, [(s, 0) for s in tpl.states if s in tpl.initial],
                            edges + cross, labels, atoms=tpl.atoms)
    return UnwoundTemplate(tpl, tuple(comps), prefix, period, unwound, tuple(cross))


def comp_index(uw: UnwoundTemplate, i: int) -> int:
    """Component reached after i broadcasts: min(i, prefix + (i - prefix) mod period)."""
    if i < 0:
        raise ValueError("broadcast count must be nonnegative")
    n, r = uw.prefix, uw.period
    return min(i, n + ((i - n) % r))


def _strip(e: Edge) -> Edge:
    return Edge(e.src[0], e.dst[0], e.label)


def wind(run: Sequence[GlobalTransition]) -> List[GlobalTransition]:
    """Forget component indices of a run of the unwound system."""
    out = []
    for t in run:
        out.append(GlobalTransition(tuple(s[0] for s in t.source), t.label, tuple(s[0] for s in t.destination),
                                    tuple((p, _strip(e)) for p, e in t.moves)))
    return out


def unwind(uw: UnwoundTemplate, run: Sequence[GlobalTransition]) -> List[GlobalTransition]:
    """Attach to each state the component given by the number of preceding broadcasts."""
    allowed = set(uw.template.edges)
    out = []
    b = 0
    for t in run:
        src_c = comp_index(uw, b)
        dst_c = comp_index(uw, b + 1) if t.is_broadcast else src_c
        moves = []
        for p, e in t.moves:
            ue = Edge((e.src, src_c), (e.dst, dst_c), e.label)
            if ue not in allowed:
                raise ValueError(f"edge {ue} is not in the unwinding; is the input a run?")
            moves.append((p, ue))
        out.append(GlobalTransition(tuple((s, src_c) for s in t.source), t.label,
                                    tuple((s, dst_c) for s in t.destination), tuple(moves)))
        if t.is_broadcast:
            b += 1
    return out
