"""Brute-force ground truth by explicit enumeration.

Counter configurations abstract away process identities: processes in the same
state are interchangeable, so a configuration is the vector of per-state counts.
Everything here is exponential and meant for small process counts only; a search
that runs out of budget reports "not found", never "impossible".
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

import networkx as nx

from .core import (
    BROADCAST,
    Broadcast,
    Edge,
    GlobalTransition,
    Letter,
    ProcessTemplate,
    Rendezvous,
    State,
    System,
    bcast,
    make_template,
    rdz,
)
from .cvrs import Cvrs
from .unwinding import UnwoundTemplate, comp_index

if TYPE_CHECKING:
    from .automata import BAutomaton

Counts = Tuple[int, ...]


# ---------------------------------------------------------------------------
# counter abstraction


class CounterSystem:
    """Counter semantics over a fixed state order and a chosen edge set."""

    def __init__(self, states: Sequence[State], edges: Iterable[Edge], arity: int):
        self.states = tuple(states)
        self.index = {s: i for i, s in enumerate(self.states)}
        self.arity = arity
        edges = [e for e in edges if e.src in self.index and e.dst in self.index]
        self.rdz: Dict[str, List[List[Edge]]] = {}
        for e in edges:
            if isinstance(e.label, Rendezvous):
                slots = self.rdz.setdefault(e.label.action, [[] for _ in range(arity)])
                slots[e.label.index - 1].append(e)
        self.bcast: Dict[State, List[Edge]] = {}
        for e in edges:
            if isinstance(e.label, Broadcast):
                self.bcast.setdefault(e.src, []).append(e)

    def counts(self, mapping: Mapping[State, int]) -> Counts:
        v = [0] * len(self.states)
        for s, c in mapping.items():
            v[self.index[s]] += c
        return tuple(v)

    def as_dict(self, counts: Counts) -> Dict[State, int]:
        return {s: c for s, c in zip(self.states, counts) if c}

    def rendezvous_successors(self, counts: Counts) -> Iterator[Tuple[Tuple[Edge, ...], Counts]]:
        for a, slots in self.rdz.items():
            options = [[e for e in slot if counts[self.index[e.src]] > 0] for slot in slots]
            if not all(options):
                continue
            for combo in itertools.product(*options):
                need = Counter(self.index[e.src] for e in combo)
                if any(counts[i] < c for i, c in need.items()):
                    continue
                v = list(counts)
                for e in combo:
                    v[self.index[e.src]] -= 1
                    v[self.index[e.dst]] += 1
                yield combo, tuple(v)

    def broadcast_successors(self, counts: Counts) -> Iterator[Tuple[Tuple[Tuple[Edge, int], ...], Counts]]:
        per_state = []
        for i, c in enumerate(counts):
            if not c:
                continue
            out = self.bcast.get(self.states[i], [])
            if not out:
                return
            per_state.append([tuple(Counter(ch).items()) for ch in itertools.combinations_with_replacement(out, c)])
        if not per_state:
            return
        for choice in itertools.product(*per_state):
            v = [0] * len(counts)
            moves = []
            for dist in choice:
                for e, m in dist:
                    v[self.index[e.dst]] += m
                    moves.append((e, m))
            yield tuple(moves), tuple(v)

    def successors(self, counts: Counts):
        for combo, v in self.rendezvous_successors(counts):
            yield "rdz", combo, v
        for moves, v in self.broadcast_successors(counts):
            yield "bcast", moves, v


def compositions(total: int, parts: int) -> Iterator[Counts]:
    """All vectors of `parts` nonnegative integers summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars + (total + parts - 1,):
            out.append(b - prev - 1)
            prev = b
        yield tuple(out)


def enumerate_reachable(tpl: ProcessTemplate, n: int, depth: Optional[int] = None) -> Set[Tuple[Tuple[State, int], ...]]:
    """Reachable counter configurations of tpl^n (within depth steps if given)."""
    if n < 1:
        raise ValueError("need at least one process")
    cs = CounterSystem(tpl.states, tpl.edges, tpl.arity)
    init_states = sorted(tpl.initial, key=cs.index.__getitem__)
    starts = set()
    for combo in itertools.combinations_with_replacement(init_states, n):
        starts.add(cs.counts(Counter(combo)))
    seen = {s: 0 for s in starts}
    queue = deque(sorted(starts))
    while queue:
        v = queue.popleft()
        d = seen[v]
        if depth is not None and d >= depth:
            continue
        for _, _, w in cs.successors(v):
            if w not in seen:
                seen[w] = d + 1
                queue.append(w)
    return {tuple(sorted(cs.as_dict(v).items(), key=lambda kv: cs.index[kv[0]])) for v in seen}


# ---------------------------------------------------------------------------
# explicit systems


def _canonical(cfg: Tuple[State, ...], groups: Sequence[Sequence[int]]) -> Tuple[State, ...]:
    out = list(cfg)
    for g in groups:
        vals = sorted((cfg[p - 1] for p in g), key=repr)
        for p, v in zip(g, vals):
            out[p - 1] = v
    return tuple(out)


def _groups(system: System, fixed: Iterable[int]) -> List[List[int]]:
    fixed = set(fixed)
    by_tpl: Dict[int, List[int]] = {}
    for p in range(1, system.n + 1):
        if p not in fixed:
            by_tpl.setdefault(id(system.templates[p - 1]), []).append(p)
    return [g for g in by_tpl.values() if len(g) > 1]


def executions_upto(target: Union[ProcessTemplate, System], n: Optional[int] = None, length: int = 4,
                    keep: Optional[Callable[[Letter], Optional[Letter]]] = None,
                    observed: int = 1) -> Set[Tuple[Letter, ...]]:
    """Label words of process `observed` over runs, with at most `length` letters.

    keep maps a letter to its projection, or None to drop it; the default keeps
    every letter.  Processes other than the observed one are tracked up to
    permutation among processes running the same template.
    """
    system = target if isinstance(target, System) else System.uniform(target, n)
    keep = keep or (lambda w: w)
    groups = _groups(system, [observed])
    words: Set[Tuple[Letter, ...]] = set()
    seen: Set[Tuple] = set()
    queue = deque()
    for cfg in system.initial_configurations():
        first = keep(system.label(observed, cfg[observed - 1]))
        word = (first,) if first is not None else ()
        node = (_canonical(cfg, groups), word)
        if node not in seen:
            seen.add(node)
            queue.append(node)
    while queue:
        cfg, word = queue.popleft()
        words.add(word)
        for t in system.successors(cfg):
            w = word
            e = t.edge_of(observed)
            if e is not None:
                letter = keep(system.label(observed, e.dst))
                if letter is not None:
                    w = word + (letter,)
            if len(w) > length:
                continue
            node = (_canonical(t.destination, groups), w)
            if node not in seen:
                seen.add(node)
                queue.append(node)
    words.discard(())
    return words


def enumerate_runs(system: System, depth: int) -> Iterator[List[GlobalTransition]]:
    """Every maximal run of length <= depth (runs shorter than depth are deadlocked)."""
    def dfs(cfg, run):
        if len(run) == depth:
            yield list(run)
            return
        succ = system.successors(cfg)
        if not succ:
            yield list(run)
            return
        for t in succ:
            run.append(t)
            yield from dfs(t.destination, run)
            run.pop()

    for cfg in system.initial_configurations():
        yield from dfs(cfg, [])


def is_path(system: System, run: Sequence[GlobalTransition], start: Tuple[State, ...]) -> bool:
    cur = start
    for t in run:
        if t.source != cur or t not in system.successors(cur):
            return False
        cur = t.destination
    return True


# ---------------------------------------------------------------------------
# loading


def loading_witness(uw: UnwoundTemplate, broadcasts: int, max_processes: int = 8) -> Dict[State, Optional[int]]:
    """For each state s of component comp(broadcasts): the least N such that some run
    of the unwound system with N processes and exactly that many broadcasts ends with a
    process in s (None when not found within max_processes)."""
    tpl = uw.template
    target_comp = comp_index(uw, broadcasts)
    targets = {s for s in tpl.states if s[1] == target_comp}
    found: Dict[State, Optional[int]] = {s: None for s in targets}
    cs = CounterSystem(tpl.states, tpl.edges, tpl.arity)
    for n in range(1, max_processes + 1):
        missing = {s for s, v in found.items() if v is None}
        if not missing:
            break
        starts = {cs.counts(Counter(c)) for c in itertools.combinations_with_replacement(
            sorted(tpl.initial, key=cs.index.__getitem__), n)}
        seen = {(v, 0) for v in starts}
        queue = deque(seen)
        while queue and missing:
            v, b = queue.popleft()
            if b == broadcasts:
                for i, c in enumerate(v):
                    if c and cs.states[i] in missing:
                        found[cs.states[i]] = n
                        missing.discard(cs.states[i])
            for kind, _, w in cs.successors(v):
                nb = b + (kind == "bcast")
                if nb > broadcasts:
                    continue
                if (w, nb) not in seen:
                    seen.add((w, nb))
                    queue.append((w, nb))
    return found


# ---------------------------------------------------------------------------
# pseudo-cycles


@dataclass(frozen=True)
class PseudoCycleQuery:
    edge: Edge
    broadcasts: str  # "zero" or "period"
    max_processes: int = 6
    min_processes: int = 1

    def __post_init__(self) -> None:
        if self.broadcasts not in ("zero", "period"):
            raise ValueError("broadcasts must be 'zero' or 'period'")


@dataclass
class PseudoCycleResult:
    found: bool
    processes: Optional[int] = None
    start: Optional[Dict[State, int]] = None
    path: Optional[List[Tuple[str, tuple]]] = None  # counter transitions from start back to start
    explored: int = 0

    def __bool__(self) -> bool:
        return self.found


def _legal_graph(uw: UnwoundTemplate, comps: Sequence[int], n: int, with_broadcasts: bool):
    """Counter graph over legal configurations (all n processes in one component)."""
    tpl = uw.template
    cs = CounterSystem(tpl.states, tpl.edges if with_broadcasts else tpl.rendezvous_edges, tpl.arity)
    g = nx.MultiDiGraph()
    for i in comps:
        idxs = [cs.index[s] for s in tpl.states if s[1] == i]
        for vec in compositions(n, len(idxs)):
            v = [0] * len(cs.states)
            for j, c in zip(idxs, vec):
                v[j] = c
            v = tuple(v)
            g.add_node(v)
    for v in list(g.nodes):
        for kind, moves, w in cs.successors(v):
            if w in g:
                g.add_edge(v, w, kind=kind, moves=moves)
    return cs, g


def _component(cs: CounterSystem, v: Counts) -> int:
    return next(cs.states[i][1] for i, c in enumerate(v) if c)


def _uses(moves, edge: Edge) -> bool:
    return any((m[0] if isinstance(m, tuple) else m) == edge for m in moves)


def pseudo_cycle_search(uw: UnwoundTemplate, q: PseudoCycleQuery) -> PseudoCycleResult:
    """Search legal pseudo-cycles through q.edge.

    zero: no broadcasts, inside the edge's component.  period: the cycle goes around
    the noose, so its broadcast count is a multiple of the period.
    """
    e = q.edge
    comp = e.src[1]
    explored = 0
    for n in range(max(q.min_processes, 1), q.max_processes + 1):
        if q.broadcasts == "zero":
            cs, g = _legal_graph(uw, [comp], n, with_broadcasts=False)
        else:
            if comp not in uw.noose:
                return PseudoCycleResult(False, explored=explored)
            cs, g = _legal_graph(uw, list(uw.noose), n, with_broadcasts=True)
        explored += g.number_of_nodes()
        scc_of = {}
        for k, scc in enumerate(nx.strongly_connected_components(g)):
            for v in scc:
                scc_of[v] = k
        bcast_scc = {scc_of[u] for u, v, d in g.edges(data=True) if d["kind"] == "bcast" and scc_of[u] == scc_of[v]}
        for u, v, d in sorted(g.edges(data=True), key=lambda x: (x[0], x[1])):
            if scc_of[u] != scc_of[v] or not _uses(d["moves"], e):
                continue
            if q.broadcasts == "period" and scc_of[u] not in bcast_scc:
                continue
            path = _closing_path(g, u, v, d, scc_of, q.broadcasts == "period")
            if q.broadcasts == "period":
                # a cycle around the noose passes its first component; start there
                k = next(j for j, step in enumerate(path) if _component(cs, step[2]) == uw.prefix)
                path = path[k:] + path[:k]
            return PseudoCycleResult(True, n, cs.as_dict(path[0][2]), path, explored)
    return PseudoCycleResult(False, explored=explored)


def witnessed_edges(uw: UnwoundTemplate, broadcasts: str, n: int) -> FrozenSet[Edge]:
    """Every edge lying on some legal pseudo-cycle with exactly n processes."""
    if broadcasts == "zero":
        comps = [[i] for i in range(len(uw.components))]
    else:
        comps = [list(uw.noose)]
    out: Set[Edge] = set()
    for group in comps:
        _, g = _legal_graph(uw, group, n, with_broadcasts=broadcasts == "period")
        scc_of = {}
        for k, scc in enumerate(nx.strongly_connected_components(g)):
            for v in scc:
                scc_of[v] = k
        inner = [(u, v, d) for u, v, d in g.edges(data=True) if scc_of[u] == scc_of[v]]
        ok = {scc_of[u] for u, _, d in inner if d["kind"] == "bcast"} if broadcasts == "period" else None
        for u, _, d in inner:
            if ok is not None and scc_of[u] not in ok:
                continue
            for m in d["moves"]:
                out.add(m[0] if isinstance(m, tuple) else m)
    return frozenset(out)


def _closing_path(g, u, v, d, scc_of, need_broadcast: bool) -> List[Tuple[str, tuple, tuple, tuple]]:
    """u -(d)-> v, then back to u inside the SCC, passing a broadcast if required."""
    comp = {x for x in g if scc_of[x] == scc_of[u]}
    sub = g.subgraph(comp)
    steps = [(d["kind"], d["moves"], u, v)]
    cur = v
    if need_broadcast and d["kind"] != "bcast":
        # route through some broadcast inside the SCC
        bu, bv, bd = next((a, b, dd) for a, b, dd in sub.edges(data=True) if dd["kind"] == "bcast")
        steps += _walk(sub, cur, bu)
        steps.append(("bcast", bd["moves"], bu, bv))
        cur = bv
    steps += _walk(sub, cur, u)
    return steps


def _walk(sub, a, b):
    if a == b:
        return []
    nodes = nx.shortest_path(sub, a, b)
    out = []
    for x, y in zip(nodes, nodes[1:]):
        dd = next(iter(sub.get_edge_data(x, y).values()))
        out.append((dd["kind"], dd["moves"], x, y))
    return out


def lift_counter_path(tpl: ProcessTemplate, start: Mapping[State, int],
                      path: Sequence[Tuple[str, tuple, tuple, tuple]]) -> Tuple[Tuple[State, ...], List[GlobalTransition]]:
    """Concrete run (with process ids) realizing a counter path from start."""
    cfg: List[State] = []
    for s in tpl.states:
        cfg += [s] * start.get(s, 0)
    first = tuple(cfg)
    run: List[GlobalTransition] = []
    for kind, moves, _, _ in path:
        src = tuple(cfg)
        if kind == "rdz":
            used: Set[int] = set()
            bound = []
            for e in moves:
                p = next(p for p in range(1, len(cfg) + 1) if p not in used and cfg[p - 1] == e.src)
                used.add(p)
                bound.append((p, e))
            for p, e in bound:
                cfg[p - 1] = e.dst
            run.append(GlobalTransition(src, f"rdz:{moves[0].label.action}", tuple(cfg), tuple(bound)))
        else:
            pool: Dict[State, List[Edge]] = {}
            for e, m in moves:
                pool.setdefault(e.src, []).extend([e] * m)
            bound = []
            for p in range(1, len(cfg) + 1):
                e = pool[cfg[p - 1]].pop()
                bound.append((p, e))
            for p, e in bound:
                cfg[p - 1] = e.dst
            run.append(GlobalTransition(src, BROADCAST, tuple(cfg), tuple(bound)))
    return first, run


def rename_run(run: Sequence[GlobalTransition], ren: Mapping[int, int]) -> List[GlobalTransition]:
    """Process p of the input becomes process ren[p]."""
    out = []
    for t in run:
        n = len(t.source)
        src = [None] * n
        dst = [None] * n
        for p in range(1, n + 1):
            src[ren[p] - 1] = t.source[p - 1]
            dst[ren[p] - 1] = t.destination[p - 1]
        moves = tuple((ren[p], e) for p, e in t.moves)
        if t.is_broadcast:
            moves = tuple(sorted(moves, key=lambda m: m[0]))
        out.append(GlobalTransition(tuple(src), t.label, tuple(dst), moves))
    return out


def pump_pseudo_cycle(start: Tuple[State, ...], run: Sequence[GlobalTransition]) -> List[GlobalTransition]:
    """Repeat a pseudo-cycle, renaming processes each round, until it closes into a cycle."""
    end = run[-1].destination if run else start
    if sorted(end, key=repr) != sorted(start, key=repr):
        raise ValueError("endpoints are not twins")
    n = len(start)
    # sigma: the process that sits, at the end, where process q sat at the start
    free: Dict[State, List[int]] = {}
    for p in range(1, n + 1):
        free.setdefault(end[p - 1], []).append(p)
    sigma = {q: free[start[q - 1]].pop(0) for q in range(1, n + 1)}
    full = list(run)
    ren = dict(sigma)
    cur = end
    rounds = 1
    while cur != start:
        piece = rename_run(run, ren)
        full += piece
        cur = piece[-1].destination
        ren = {q: sigma[ren[q]] for q in ren}
        rounds += 1
        if rounds > math.factorial(n) + 1:
            raise AssertionError("pumping did not close")
    return full


# ---------------------------------------------------------------------------
# composition and restriction


def split_phases(run: Sequence[GlobalTransition]) -> Tuple[List[List[GlobalTransition]], List[GlobalTransition]]:
    segments: List[List[GlobalTransition]] = [[]]
    bcasts: List[GlobalTransition] = []
    for t in run:
        if t.is_broadcast:
            bcasts.append(t)
            segments.append([])
        else:
            segments[-1].append(t)
    return segments, bcasts


def compose_runs(tpl: ProcessTemplate, parts: Sequence[Tuple[Tuple[State, ...], Sequence[GlobalTransition]]],
                 host_n: Optional[int] = None) -> Tuple[Tuple[State, ...], List[GlobalTransition]]:
    """Run of tpl^host_n whose restriction to each block of processes is the given run.

    parts are (start configuration, run) pairs with equal broadcast counts; block i
    occupies the next len(start_i) process ids.  Extra processes start in an initial
    state and take their first broadcast edge at every broadcast.
    """
    sizes = [len(s) for s, _ in parts]
    total = sum(sizes)
    host_n = total if host_n is None else host_n
    if host_n < total:
        raise ValueError("host system too small for the runs")
    phases = [split_phases(r) for _, r in parts]
    counts = {len(b) for _, b in phases}
    if len(counts) > 1:
        raise ValueError("runs must have the same number of broadcasts")
    nb = counts.pop() if counts else 0
    offsets = list(itertools.accumulate([0] + sizes[:-1]))
    extra_start = min(tpl.initial, key=repr) if host_n > total else None
    cfg: List[State] = []
    for s, _ in parts:
        cfg += list(s)
    cfg += [extra_start] * (host_n - total)
    start = tuple(cfg)
    out: List[GlobalTransition] = []

    def shift(t: GlobalTransition, off: int) -> GlobalTransition:
        src = tuple(cfg)
        moves = tuple((p + off, e) for p, e in t.moves)
        for p, e in moves:
            cfg[p - 1] = e.dst
        return GlobalTransition(src, t.label, tuple(cfg), moves)

    for j in range(nb + 1):
        for (segs, _), off in zip(phases, offsets):
            for t in segs[j]:
                out.append(shift(t, off))
        if j < nb:
            src = tuple(cfg)
            moves = []
            for (_, bs), off in zip(phases, offsets):
                moves += [(p + off, e) for p, e in bs[j].moves]
            for p in range(total + 1, host_n + 1):
                e = next(e for e in tpl.out_edges(cfg[p - 1]) if e.is_broadcast)
                moves.append((p, e))
            for p, e in moves:
                cfg[p - 1] = e.dst
            out.append(GlobalTransition(src, BROADCAST, tuple(cfg), tuple(moves)))
    return start, out


def restrict_run(run: Sequence[GlobalTransition], pids: Sequence[int]) -> List[GlobalTransition]:
    """Keep the transitions involving pids, renumbered 1..len(pids) in the given order."""
    pos = {p: i + 1 for i, p in enumerate(pids)}
    out = []
    for t in run:
        moves = tuple((pos[p], e) for p, e in t.moves if p in pos)
        if not moves:
            continue
        if not t.is_broadcast and len(moves) != len(t.moves):
            raise ValueError("a rendezvous crosses the restriction boundary")
        out.append(GlobalTransition(tuple(t.source[p - 1] for p in pids), t.label,
                                    tuple(t.destination[p - 1] for p in pids), moves))
    return out


# ---------------------------------------------------------------------------
# bisimulation


def check_bisimulation(l1: ProcessTemplate, l2: ProcessTemplate, relation: Iterable[Tuple[State, State]]) -> bool:
    rel = set(relation)
    out1: Dict[State, List[Edge]] = {}
    out2: Dict[State, List[Edge]] = {}
    for e in l1.edges:
        out1.setdefault(e.src, []).append(e)
    for e in l2.edges:
        out2.setdefault(e.src, []).append(e)
    for s in l1.initial:
        if not any((s, t) in rel for t in l2.initial):
            return False
    for t in l2.initial:
        if not any((s, t) in rel for s in l1.initial):
            return False
    for s, t in rel:
        if l1.label(s) != l2.label(t):
            return False
        for e in out1.get(s, ()):
            if not any(f.label == e.label and (e.dst, f.dst) in rel for f in out2.get(t, ())):
                return False
        for f in out2.get(t, ()):
            if not any(e.label == f.label and (e.dst, f.dst) in rel for e in out1.get(s, ())):
                return False
    return True


# ---------------------------------------------------------------------------
# vector rendezvous systems


def vrs_reachable(sys: Cvrs, c: Mapping[State, int], c2: Mapping[State, int], limit: int = 200000) -> Optional[bool]:
    """Integer reachability by BFS; None if more than `limit` configurations were explored."""
    cs = CounterSystem(sys.states, sys.transitions, sys.arity)
    a, b = cs.counts(c), cs.counts(c2)
    if sum(a) != sum(b):
        return False
    seen = {a}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        if v == b:
            return True
        for _, w in cs.rendezvous_successors(v):
            if w not in seen:
                if len(seen) >= limit:
                    return None
                seen.add(w)
                queue.append(w)
    return False


def scaled_vrs_reachable(sys: Cvrs, c: Mapping[State, Fraction], c2: Mapping[State, Fraction],
                         budget: int = 24) -> bool:
    """Is L*j*c ->* L*j*c2 in the VRS for some j with total mass at most budget?

    L is the least common multiple of all denominators.
    """
    vals = [Fraction(x) for x in list(c.values()) + list(c2.values())]
    lcm = 1
    for x in vals:
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    mass = sum((Fraction(x) for x in c.values()), Fraction(0))
    j = 1
    while True:
        scale = lcm * j
        if mass * scale > budget or (mass == 0 and j > 1):
            return False
        ic = {s: int(Fraction(x) * scale) for s, x in c.items()}
        ic2 = {s: int(Fraction(x) * scale) for s, x in c2.items()}
        if vrs_reachable(sys, ic, ic2):
            return True
        j += 1


# ---------------------------------------------------------------------------
# random corpus


def random_template(rng: random.Random, max_states: int = 5, max_edges: int = 10, arity: int = 2,
                    with_broadcasts: bool = True) -> ProcessTemplate:
    """Random valid template; RB-kind templates get at least one broadcast per state."""
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    edges: List[Edge] = []
    if with_broadcasts:
        for s in states:
            edges.append(bcast(s, rng.choice(states)))
    actions = ["a", "b", "c"][: rng.randint(1, 3)]
    budget = max_edges - len(edges)
    for _ in range(rng.randint(0, max(budget, 0))):
        edges.append(rdz(rng.choice(states), rng.choice(states), rng.choice(actions), rng.randint(1, arity)))
    edges = list(dict.fromkeys(edges))
    initial = rng.sample(states, rng.randint(1, min(2, n)))
    labels = {s: {s} for s in states}
    return make_template("RB" if with_broadcasts else "R", arity, states, initial, edges, labels)


def realize_word(target: Union[ProcessTemplate, System], word: Sequence[Letter], n: Optional[int] = None,
                 observed: int = 1, limit: int = 500000) -> Optional[Tuple[Tuple[State, ...], List[GlobalTransition]]]:
    """A run whose observed process traces exactly `word`, or None if there is none
    (or the search exceeded `limit` configurations)."""
    system = target if isinstance(target, System) else System.uniform(target, n)
    if not word:
        return None
    parent: Dict[Tuple, Optional[Tuple[Tuple, GlobalTransition]]] = {}
    queue = deque()
    for cfg in system.initial_configurations():
        if system.label(observed, cfg[observed - 1]) == word[0] and (cfg, 1) not in parent:
            parent[(cfg, 1)] = None
            queue.append((cfg, 1))
    while queue:
        node = queue.popleft()
        cfg, i = node
        if i == len(word):
            run: List[GlobalTransition] = []
            cur = node
            while parent[cur] is not None:
                cur, t = parent[cur]
                run.append(t)
            run.reverse()
            return cur[0], run
        for t in system.successors(cfg):
            e = t.edge_of(observed)
            j = i
            if e is not None:
                if system.label(observed, e.dst) != word[i]:
                    continue
                j = i + 1
            nxt = (t.destination, j)
            if nxt not in parent:
                if len(parent) >= limit:
                    return None
                parent[nxt] = (node, t)
                queue.append(nxt)
    return None


def random_cvrs_instance(rng: random.Random, max_states: int = 4, max_mass: int = 4, max_denominator: int = 3,
                         max_transitions: int = 6) -> Tuple[Cvrs, Dict[State, Fraction], Dict[State, Fraction]]:
    """Random CVRS with source and target configurations of equal mass.

    Half of the targets come from a short random walk, so positive instances are
    common; the rest are arbitrary configurations of the same mass.
    """
    n = rng.randint(1, max_states)
    states = tuple(f"s{i}" for i in range(n))
    trans = []
    for _ in range(rng.randint(0, max_transitions)):
        trans.append(rdz(rng.choice(states), rng.choice(states), rng.choice("ab"), rng.randint(1, 2)))
    sys = Cvrs(2, states, tuple(dict.fromkeys(trans)))
    den = rng.randint(1, max_denominator)
    units = rng.randint(1, max_mass * den)
    c = _spread(rng, states, units, den)
    if rng.random() < 0.5:
        c2 = _random_walk(rng, sys, c, den)
    else:
        c2 = _spread(rng, states, units, den)
    return sys, c, c2


def _spread(rng: random.Random, states: Sequence[State], units: int, den: int) -> Dict[State, Fraction]:
    out: Dict[State, Fraction] = {}
    for _ in range(units):
        s = rng.choice(states)
        out[s] = out.get(s, Fraction(0)) + Fraction(1, den)
    return out


def _random_walk(rng: random.Random, sys: Cvrs, c: Dict[State, Fraction], den: int, steps: int = 4) -> Dict[State, Fraction]:
    """Random integer walk in the VRS scaled by den, mapped back."""
    cs = CounterSystem(sys.states, sys.transitions, sys.arity)
    v = cs.counts({s: int(x * den) for s, x in c.items()})
    for _ in range(rng.randint(0, steps)):
        succ = [w for _, w in cs.rendezvous_successors(v)]
        if not succ:
            break
        v = rng.choice(succ)
    return {s: Fraction(x, den) for s, x in cs.as_dict(v).items()}


# ---------------------------------------------------------------------------
# B-automata


def random_bautomaton(rng: random.Random, max_states: int = 6, atoms: Sequence[str] = ("p",),
                      density: float = 0.25) -> "BAutomaton":
    from .automata import BAutomaton, all_letters

    n = rng.randint(1, max_states)
    states = tuple(range(n))
    letters = all_letters(atoms)
    trans = []
    for s in states:
        for t in states:
            if rng.random() < density:
                trans.append((s, rng.choice(letters), t, rng.choice(("inc", "reset", "skip"))))
    initial = frozenset(rng.sample(states, rng.randint(1, min(2, n))))
    buchi = frozenset(s for s in states if rng.random() < 0.4)
    return BAutomaton(frozenset(atoms), states, initial, tuple(trans), buchi)


def brute_force_b_nonempty(b: "BAutomaton", max_cycle: int) -> bool:
    """Enumerate closed walks of length <= max_cycle from reachable states; one through a
    Buchi state whose counter commands include a reset, or no increment, gives an
    accepted lasso.  Walks are merged when they agree on (state, flags, length)."""
    out: Dict[State, List[Tuple[State, str]]] = {}
    for s, _, t, cc in b.transitions:
        out.setdefault(s, []).append((t, cc))
    reach = set(b.initial)
    stack = list(b.initial)
    while stack:
        s = stack.pop()
        for t, _ in out.get(s, ()):
            if t not in reach:
                reach.add(t)
                stack.append(t)
    for start in reach:
        # flags: (visited buchi, saw reset, saw inc)
        frontier = {(start, (start in b.buchi, False, False))}
        seen = set(frontier)
        for _ in range(max_cycle):
            nxt = set()
            for s, (bu, rs, ic) in frontier:
                for t, cc in out.get(s, ()):
                    flags = (bu or t in b.buchi, rs or cc == "reset", ic or cc == "inc")
                    if t == start and flags[0] and (flags[1] or not flags[2]):
                        return True
                    node = (t, flags)
                    if node not in seen:
                        seen.add(node)
                        nxt.add(node)
            frontier = nxt
    return False


def check_b_lasso(b: "BAutomaton", lasso) -> bool:
    """Is the lasso a run of b with a Buchi state on the cycle and a bounded counter?"""
    by_step: Dict[Tuple[State, Letter, State], Set[str]] = {}
    for s, w, t, cc in b.transitions:
        by_step.setdefault((s, frozenset(w), t), set()).add(cc)
    seq = list(lasso.prefix_states) + list(lasso.cycle_states)
    letters = list(lasso.prefix) + list(lasso.cycle)
    if not lasso.cycle or len(lasso.prefix_states) != len(lasso.prefix) or len(lasso.cycle_states) != len(lasso.cycle):
        return False
    if seq[0] not in b.initial:
        return False
    k = len(lasso.prefix)
    options = []
    for i, w in enumerate(letters):
        dst = seq[i + 1] if i + 1 < len(seq) else seq[k]
        cc = by_step.get((seq[i], frozenset(w), dst))
        if not cc:
            return False
        if i >= k:
            options.append(cc)
    if not any(s in b.buchi for s in lasso.cycle_states):
        return False
    return any("reset" in o for o in options) or all(o - {"inc"} for o in options)
