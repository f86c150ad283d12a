"""Word automata over letters that are sets of atoms.

Every automaton carries its own atom set; a letter w of a larger alphabet is read
by it as ``w & atoms``.  This lets a specification over a few atoms run against
system automata over many.

Finite-word automata here never accept the empty word: executions and finite
traces are nonempty.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import networkx as nx

from . import ltl
from .core import Letter, State, encode_state, decode_state

CC = ("skip", "inc", "reset")


def all_letters(atoms: Iterable[str]) -> List[Letter]:
    atoms = sorted(atoms)
    return [frozenset(c) for r in range(len(atoms) + 1) for c in itertools.combinations(atoms, r)]


def _index(states: Sequence[State]) -> Dict[State, int]:
    return {s: i for i, s in enumerate(states)}


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Nfw:
    atoms: FrozenSet[str]
    states: Tuple[State, ...]
    initial: FrozenSet[State]
    transitions: Tuple[Tuple[State, Letter, State], ...]
    accepting: FrozenSet[State]

    @cached_property
    def out(self) -> Dict[State, List[Tuple[Letter, State]]]:
        table: Dict[State, List[Tuple[Letter, State]]] = {}
        for s, w, t in self.transitions:
            table.setdefault(s, []).append((w, t))
        return table

    def step(self, current: Iterable[State], letter: Letter) -> FrozenSet[State]:
        w = frozenset(letter) & self.atoms
        return frozenset(t for s in current for lw, t in self.out.get(s, ()) if lw == w)

    def accepts(self, word: Sequence[Letter]) -> bool:
        if not word:
            return False
        cur = frozenset(self.initial)
        for w in word:
            cur = self.step(cur, w)
            if not cur:
                return False
        return bool(cur & self.accepting)

    def to_dict(self) -> dict:
        return _automaton_dict(self, [(s, w, t, None) for s, w, t in self.transitions], self.accepting)


@dataclass(frozen=True)
class Nbw:
    atoms: FrozenSet[str]
    states: Tuple[State, ...]
    initial: FrozenSet[State]
    transitions: Tuple[Tuple[State, Letter, State], ...]
    accepting: FrozenSet[State]

    def accepts_lasso(self, prefix: Sequence[Letter], cycle: Sequence[Letter]) -> bool:
        b = BAutomaton(self.atoms, self.states, self.initial,
                       tuple((s, w, t, "skip") for s, w, t in self.transitions), self.accepting)
        return b.accepts_lasso(prefix, cycle)

    def to_dict(self) -> dict:
        return _automaton_dict(self, [(s, w, t, None) for s, w, t in self.transitions], self.accepting)


@dataclass(frozen=True)
class BAutomaton:
    """Buchi automaton with one counter; accepting runs also keep the counter bounded."""

    atoms: FrozenSet[str]
    states: Tuple[State, ...]
    initial: FrozenSet[State]
    transitions: Tuple[Tuple[State, Letter, State, str], ...]
    buchi: FrozenSet[State]

    def __post_init__(self) -> None:
        for tr in self.transitions:
            if tr[3] not in CC:
                raise ValueError(f"counter command must be one of {CC}, got {tr[3]!r}")

    @property
    def trivial_buchi(self) -> bool:
        return set(self.buchi) >= set(self.states)

    def accepts_lasso(self, prefix: Sequence[Letter], cycle: Sequence[Letter]) -> bool:
        """Membership of prefix.cycle^omega: emptiness of the product with the word."""
        if not cycle:
            raise ValueError("cycle must be nonempty")
        word = list(prefix) + list(cycle)
        n = len(word)
        nxt = [i + 1 if i + 1 < n else len(prefix) for i in range(n)]
        states = [(s, i) for i in range(n) for s in self.states]
        trans = []
        for s, w, t, cc in self.transitions:
            for i in range(n):
                if w == frozenset(word[i]) & self.atoms:
                    trans.append(((s, i), w, (t, nxt[i]), cc))
        prod = BAutomaton(self.atoms, tuple(states), frozenset((s, 0) for s in self.initial), tuple(trans),
                          frozenset((s, i) for s in self.buchi for i in range(n)))
        return not b_emptiness(prod).empty

    def to_dict(self) -> dict:
        return _automaton_dict(self, list(self.transitions), self.buchi)


@dataclass(frozen=True)
class StreettAutomaton:
    """Acceptance: for every pair (request, response), visiting request infinitely
    often forces visiting response infinitely often."""

    atoms: FrozenSet[str]
    states: Tuple[State, ...]
    initial: FrozenSet[State]
    transitions: Tuple[Tuple[State, Letter, State], ...]
    pairs: Tuple[Tuple[FrozenSet[State], FrozenSet[State]], ...]

    def to_dict(self) -> dict:
        d = _automaton_dict(self, [(s, w, t, None) for s, w, t in self.transitions], frozenset())
        idx = _index(self.states)
        d["streett_pairs"] = [{"request": sorted(idx[s] for s in req), "response": sorted(idx[s] for s in resp)}
                              for req, resp in self.pairs]
        del d["accepting"]
        return d


def _automaton_dict(a, trans, accepting) -> dict:
    """States are renumbered 0..n-1; the original names go to "names"."""
    idx = _index(a.states)
    rows = []
    for s, w, t, cc in trans:
        row = {"src": idx[s], "letter": sorted(w), "dst": idx[t]}
        if cc is not None:
            row["cc"] = cc
        rows.append(row)
    return {
        "atoms": sorted(a.atoms),
        "states": list(range(len(a.states))),
        "names": [_state_name(s) for s in a.states],
        "initial": sorted(idx[s] for s in a.initial),
        "accepting": sorted(idx[s] for s in accepting),
        "transitions": rows,
    }


def _state_name(s: State) -> Any:
    try:
        return encode_state(s)
    except TypeError:
        return repr(s)


def automaton_from_dict(d: Mapping, kind: str = "nbw"):
    states = tuple(decode_state(s) for s in d["states"])
    atoms = frozenset(d.get("atoms", ()))
    trans = [(decode_state(t["src"]), frozenset(t["letter"]), decode_state(t["dst"]), t.get("cc"))
             for t in d["transitions"]]
    initial = frozenset(decode_state(s) for s in d["initial"])
    acc = frozenset(decode_state(s) for s in d.get("accepting", states))
    if kind == "nfw":
        return Nfw(atoms, states, initial, tuple((s, w, t) for s, w, t, _ in trans), acc)
    if kind == "nbw":
        return Nbw(atoms, states, initial, tuple((s, w, t) for s, w, t, _ in trans), acc)
    if kind == "b":
        return BAutomaton(atoms, states, initial, tuple((s, w, t, cc or "skip") for s, w, t, cc in trans), acc)
    if kind == "streett":
        pairs = tuple((frozenset(decode_state(x) for x in p["request"]), frozenset(decode_state(x) for x in p["response"]))
                      for p in d.get("streett_pairs", []))
        return StreettAutomaton(atoms, states, initial, tuple((s, w, t) for s, w, t, _ in trans), pairs)
    raise ValueError(f"unknown automaton kind {kind!r}")


# ---------------------------------------------------------------------------
# system automata from an unwinding

STOP = "stop"


def build_exec_nfw(uw) -> Nfw:
    """NFW whose language is the set of finite executions.

    The word read along a path s0 .. sl is lambda(s0) .. lambda(sl): every state
    may read its own label and move to the accepting state STOP.
    """
    tpl = uw.template
    trans = []
    for e in tpl.edges:
        trans.append((e.src, tpl.label(e.src), e.dst))
    for s in tpl.states:
        trans.append((s, tpl.label(s), STOP))
    return Nfw(tpl.atoms, tpl.states + (STOP,), frozenset(tpl.initial), tuple(trans), frozenset({STOP}))


def build_exec_bautomaton(uw, report) -> BAutomaton:
    """Three copies of the unwinding: init (all edges, counting), grn and loc."""
    tpl = uw.template
    states = tuple((c, s) for c in ("init", "grn", "loc") for s in tpl.states)
    trans = []
    for e in tpl.edges:
        w = tpl.label(e.src)
        for c in ("init", "grn", "loc"):
            trans.append((("init", e.src), w, (c, e.dst), "inc"))
    for e in tpl.edges:
        if e in report.green:
            w = tpl.label(e.src)
            if e.is_broadcast:
                cc = "reset"
            elif e in report.dark:
                cc = "inc"
            else:
                cc = "skip"
            trans.append((("grn", e.src), w, ("grn", e.dst), cc))
    for e in tpl.edges:
        if e in report.locally_reusable:
            trans.append((("loc", e.src), tpl.label(e.src), ("loc", e.dst), "skip"))
    return BAutomaton(tpl.atoms, states, frozenset(("init", s) for s in tpl.initial), tuple(trans), frozenset(states))


# ---------------------------------------------------------------------------
# LTLf -> NFW by formula progression

Elem = ltl.Formula  # literal, Next, WeakNext, Until, Release, or a pending marker
Clause = FrozenSet[Hashable]
Dnf = FrozenSet[Clause]

TRUE_DNF: Dnf = frozenset({frozenset()})
FALSE_DNF: Dnf = frozenset()


@dataclass(frozen=True)
class Pending:
    """Marks that an until obligation was postponed in this step."""

    until: ltl.Until


def _minimize(clauses: Iterable[Clause]) -> Dnf:
    cs = sorted(set(clauses), key=len)
    kept: List[Clause] = []
    for c in cs:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def _or(a: Dnf, b: Dnf) -> Dnf:
    return _minimize(a | b)


def _and(a: Dnf, b: Dnf) -> Dnf:
    return _minimize(x | y for x in a for y in b)


def _is_literal(f: ltl.Formula) -> bool:
    return isinstance(f, ltl.Atom) or (isinstance(f, ltl.Not) and isinstance(f.arg, ltl.Atom))


def dnf(f: ltl.Formula) -> Dnf:
    """Disjunctive normal form over literals and temporal elements (input in NNF)."""
    if isinstance(f, ltl.Const):
        return TRUE_DNF if f.value else FALSE_DNF
    if isinstance(f, ltl.And):
        return _and(dnf(f.left), dnf(f.right))
    if isinstance(f, ltl.Or):
        return _or(dnf(f.left), dnf(f.right))
    if _is_literal(f) or isinstance(f, (ltl.Next, ltl.WeakNext, ltl.Until, ltl.Release)):
        return frozenset({frozenset({f})})
    raise ValueError(f"formula not in negation normal form: {f}")


def _lit_holds(f: ltl.Formula, letter: Letter) -> bool:
    if isinstance(f, ltl.Atom):
        return f.name in letter
    return f.arg.name not in letter


def _prog_elem(e, letter: Letter, track: bool) -> Dnf:
    if _is_literal(e):
        return TRUE_DNF if _lit_holds(e, letter) else FALSE_DNF
    if isinstance(e, (ltl.Next, ltl.WeakNext)):
        return dnf(e.arg)
    if isinstance(e, ltl.Until):
        keep = frozenset({e, Pending(e)}) if track else frozenset({e})
        return _or(_prog(dnf(e.right), letter, track), _and(_prog(dnf(e.left), letter, track), frozenset({keep})))
    if isinstance(e, ltl.Release):
        return _and(_prog(dnf(e.right), letter, track), _or(_prog(dnf(e.left), letter, track), frozenset({frozenset({e})})))
    raise TypeError(f"unexpected element {e!r}")


def _prog(d: Dnf, letter: Letter, track: bool = False) -> Dnf:
    """Obligations for the next position after reading letter at the current one."""
    out: Set[Clause] = set()
    for clause in d:
        acc = TRUE_DNF
        for e in clause:
            if isinstance(e, Pending):
                continue
            acc = _and(acc, _prog_elem(e, letter, track))
            if not acc:
                break
        out |= acc
    return _minimize(out)


def _ends_elem(e, letter: Letter) -> bool:
    if _is_literal(e):
        return _lit_holds(e, letter)
    if isinstance(e, ltl.Next):
        return False
    if isinstance(e, ltl.WeakNext):
        return True
    if isinstance(e, (ltl.Until, ltl.Release)):
        return _ends(dnf(e.right), letter)
    return True


def _ends(d: Dnf, letter: Letter) -> bool:
    """Does the obligation hold at a position that is the last one of the word?"""
    return any(all(_ends_elem(e, letter) for e in clause) for clause in d)


ACC = "acc"


def ltlf_to_nfw(spec: Union[str, ltl.Formula], atoms: Optional[Iterable[str]] = None) -> Nfw:
    f = ltl.as_formula(spec)
    atom_set = frozenset(atoms) if atoms is not None else ltl.atoms(f)
    if not ltl.atoms(f) <= atom_set:
        raise ValueError("formula mentions atoms outside the given atom set")
    letters = all_letters(atom_set)
    start = dnf(ltl.nnf(f, finite=True))
    states: List[Hashable] = [ACC]
    seen = {ACC}
    trans = []
    todo = deque()
    if start:
        states.append(start)
        seen.add(start)
        todo.append(start)
    while todo:
        d = todo.popleft()
        for w in letters:
            if _ends(d, w):
                trans.append((d, w, ACC))
            nd = _prog(d, w)
            if nd:
                trans.append((d, w, nd))
                if nd not in seen:
                    seen.add(nd)
                    states.append(nd)
                    todo.append(nd)
    initial = frozenset({start}) if start else frozenset()
    return Nfw(atom_set, tuple(states), initial, tuple(trans), frozenset({ACC}))


# ---------------------------------------------------------------------------
# LTL -> NBW: tableau by expansion into a transition-based generalized automaton


def ltl_to_nbw(spec: Union[str, ltl.Formula], atoms: Optional[Iterable[str]] = None) -> Nbw:
    f = ltl.as_formula(spec)
    atom_set = frozenset(atoms) if atoms is not None else ltl.atoms(f)
    if not ltl.atoms(f) <= atom_set:
        raise ValueError("formula mentions atoms outside the given atom set")
    letters = all_letters(atom_set)
    g = ltl.nnf(f, finite=False)
    untils = sorted(_untils(g), key=str)
    init_clauses = sorted(dnf(g), key=lambda c: sorted(map(str, c)))

    # generalized automaton: nodes are obligation sets; edges carry satisfied until indices
    nodes: List[Clause] = []
    seen: Set[Clause] = set()
    edges: List[Tuple[Clause, Letter, Clause, FrozenSet[int]]] = []
    todo = deque()
    for c in init_clauses:
        if c not in seen:
            seen.add(c)
            nodes.append(c)
            todo.append(c)
    while todo:
        c = todo.popleft()
        for w in letters:
            for nxt in sorted(_prog(frozenset({c}), w, track=True), key=lambda x: sorted(map(str, x))):
                pending = {e.until for e in nxt if isinstance(e, Pending)}
                state = frozenset(e for e in nxt if not isinstance(e, Pending))
                sat = frozenset(j for j, u in enumerate(untils) if u not in c or u not in pending)
                edges.append((c, w, state, sat))
                if state not in seen:
                    seen.add(state)
                    nodes.append(state)
                    todo.append(state)

    # degeneralize: (node, level, wrapped); wrapped states are accepting
    n = max(1, len(untils))
    states: List[Tuple] = []
    trans = []
    initial = frozenset((c, 0, not untils) for c in init_clauses)
    seen2: Set[Tuple] = set()
    todo2 = deque(sorted(initial, key=lambda x: sorted(map(str, x[0]))))
    seen2 |= initial
    out: Dict[Clause, List[Tuple[Letter, Clause, FrozenSet[int]]]] = {}
    for c, w, d, sat in edges:
        out.setdefault(c, []).append((w, d, sat))
    while todo2:
        node = todo2.popleft()
        states.append(node)
        c, level, _ = node
        for w, d, sat in out.get(c, ()):
            if not untils:
                nlevel, wrapped = 0, True
            else:
                nlevel, wrapped = level, False
                while nlevel < n and nlevel in sat:
                    nlevel += 1
                if nlevel == n:
                    nlevel, wrapped = 0, True
            tgt = (d, nlevel, wrapped)
            trans.append((node, w, tgt))
            if tgt not in seen2:
                seen2.add(tgt)
                todo2.append(tgt)
    accepting = frozenset(s for s in states if s[2])
    return Nbw(atom_set, tuple(states), initial, tuple(trans), accepting)


def _untils(f: ltl.Formula) -> Set[ltl.Until]:
    out: Set[ltl.Until] = set()
    if isinstance(f, ltl.Until):
        out.add(f)
    if isinstance(f, ltl.UNARY):
        out |= _untils(f.arg)
    elif isinstance(f, ltl.BINARY):
        out |= _untils(f.left) | _untils(f.right)
    return out


# ---------------------------------------------------------------------------
# finite-word inclusion


@dataclass(frozen=True)
class InclusionResult:
    holds: bool
    counterexample: Optional[Tuple[Letter, ...]] = None

    def __bool__(self) -> bool:
        return self.holds


def nfw_inclusion(a: Nfw, spec: Nfw) -> InclusionResult:
    """L(a) subset of L(spec)? On failure returns a shortest word of L(a) outside L(spec)."""
    letters: Dict[State, List[Tuple[Letter, State]]] = a.out
    start = [(s, frozenset(spec.initial)) for s in sorted(a.initial, key=repr)]
    parent: Dict[Tuple, Optional[Tuple[Tuple, Letter]]] = {p: None for p in start}
    queue = deque(start)
    while queue:
        node = queue.popleft()
        s, sub = node
        for w, t in letters.get(s, ()):
            nsub = spec.step(sub, w)
            nxt = (t, nsub)
            if nxt in parent:
                continue
            parent[nxt] = (node, w)
            if t in a.accepting and not (nsub & spec.accepting):
                word = []
                cur = nxt
                while parent[cur] is not None:
                    prev, lw = parent[cur]
                    word.append(lw)
                    cur = prev
                return InclusionResult(False, tuple(reversed(word)))
            queue.append(nxt)
    return InclusionResult(True)


# ---------------------------------------------------------------------------
# Streett and B-automaton emptiness


@dataclass(frozen=True)
class Lasso:
    prefix_states: Tuple[State, ...]  # states visited before the cycle, starting with an initial state
    prefix: Tuple[Letter, ...]
    cycle_states: Tuple[State, ...]  # cycle_states[0] is re-entered after the last cycle letter
    cycle: Tuple[Letter, ...]


@dataclass(frozen=True)
class EmptinessResult:
    empty: bool
    witness: Optional[Lasso] = None

    def __bool__(self) -> bool:
        return self.empty


def _graph(states: Sequence[State], trans: Sequence[Tuple[State, Letter, State]]) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(states)
    for s, _, t in trans:
        g.add_edge(s, t)
    return g


def _reachable(g: nx.DiGraph, initial: Iterable[State]) -> Set[State]:
    out: Set[State] = set()
    for s in initial:
        if s in g and s not in out:
            out |= nx.descendants(g, s) | {s}
    return out


def _good_component(g: nx.DiGraph, nodes: Set[State], pairs, order: Mapping[State, int]) -> Optional[Set[State]]:
    sub = g.subgraph(nodes)
    comps = sorted(nx.strongly_connected_components(sub), key=lambda c: min(order[x] for x in c))
    for comp in comps:
        if len(comp) == 1:
            (x,) = comp
            if not sub.has_edge(x, x):
                continue
        bad = [req for req, resp in pairs if comp & req and not comp & resp]
        if not bad:
            return set(comp)
        rest = set(comp) - set().union(*bad)
        if rest:
            found = _good_component(g, rest, pairs, order)
            if found:
                return found
    return None


def _bfs_path(adj, src: State, goals: Set[State], allowed: Optional[Set[State]] = None):
    """Shortest nonempty-or-empty path src -> goal as a list of (letter, dst)."""
    if src in goals:
        return []
    parent = {src: None}
    q = deque([src])
    while q:
        s = q.popleft()
        for w, t in adj.get(s, ()):
            if allowed is not None and t not in allowed:
                continue
            if t in parent:
                continue
            parent[t] = (s, w)
            if t in goals:
                path = []
                cur = t
                while parent[cur] is not None:
                    prev, lw = parent[cur]
                    path.append((lw, cur))
                    cur = prev
                return list(reversed(path))
            q.append(t)
    return None


def _cycle_through(adj, comp: Set[State], entry: State, order: Mapping[State, int]) -> List[Tuple[Letter, State]]:
    """A nonempty closed walk inside comp from entry, visiting every node of comp."""
    walk: List[Tuple[Letter, State]] = []
    cur = entry
    for target in sorted(comp - {entry}, key=order.__getitem__):
        walk.extend(_bfs_path(adj, cur, {target}, comp))
        cur = target
    if cur == entry:
        w = next(w for w, t in adj.get(entry, ()) if t == entry)
        walk.append((w, entry))
    else:
        walk.extend(_bfs_path(adj, cur, {entry}, comp))
    return walk


def streett_emptiness(st: StreettAutomaton) -> EmptinessResult:
    order = _index(st.states)
    g = _graph(st.states, st.transitions)
    reach = _reachable(g, st.initial)
    comp = _good_component(g, reach, st.pairs, order)
    if comp is None:
        return EmptinessResult(True)
    adj: Dict[State, List[Tuple[Letter, State]]] = {}
    for s, w, t in st.transitions:
        adj.setdefault(s, []).append((w, t))
    best = None
    for s0 in sorted(st.initial, key=order.__getitem__):
        p = _bfs_path(adj, s0, comp)
        if p is not None and (best is None or len(p) < len(best[1])):
            best = (s0, p)
    s0, path = best
    entry = path[-1][1] if path else s0
    cyc = _cycle_through(adj, comp, entry, order)
    prefix_states = ((s0,) + tuple(t for _, t in path[:-1])) if path else ()
    cycle_states = (entry,) + tuple(t for _, t in cyc[:-1])
    return EmptinessResult(False, Lasso(prefix_states, tuple(w for w, _ in path), cycle_states,
                                        tuple(w for w, _ in cyc)))


def b_to_streett(b: BAutomaton) -> StreettAutomaton:
    """States remember the last counter command; initial states get mode reset."""
    states = tuple((s, m) for s in b.states for m in CC)
    trans = tuple(((s, m), w, (t, cc)) for s, w, t, cc in b.transitions for m in CC)
    everything = frozenset(states)
    buchi = frozenset((s, m) for s in b.buchi for m in CC)
    inc = frozenset((s, "inc") for s in b.states)
    reset = frozenset((s, "reset") for s in b.states)
    return StreettAutomaton(b.atoms, states, frozenset((s, "reset") for s in b.initial), trans,
                            ((everything, buchi), (inc, reset)))


def b_emptiness(b: BAutomaton) -> EmptinessResult:
    res = streett_emptiness(b_to_streett(b))
    if res.empty:
        return res
    w = res.witness
    return EmptinessResult(False, Lasso(tuple(s for s, _ in w.prefix_states), w.prefix,
                                        tuple(s for s, _ in w.cycle_states), w.cycle))


def b_product_nbw(b: BAutomaton, n: Nbw) -> BAutomaton:
    """Synchronous product; letters are B's letters, read by n through its atom set."""
    n_out: Dict[State, List[Tuple[Letter, State]]] = {}
    for s, w, t in n.transitions:
        n_out.setdefault(s, []).append((w, t))
    trivial = b.trivial_buchi
    init = [(bs, ns, 0) for bs in sorted(b.initial, key=repr) for ns in sorted(n.initial, key=repr)]
    seen = set(init)
    states = list(init)
    todo = deque(init)
    trans = []
    b_out: Dict[State, List[Tuple[Letter, State, str]]] = {}
    for s, w, t, cc in b.transitions:
        b_out.setdefault(s, []).append((w, t, cc))
    while todo:
        node = todo.popleft()
        bs, ns, ph = node
        if trivial:
            nph = 0
        elif ph == 0:
            nph = 1 if bs in b.buchi else 0
        else:
            nph = 0 if ns in n.accepting else 1
        for w, bt, cc in b_out.get(bs, ()):
            rw = w & n.atoms
            for nw, nt in n_out.get(ns, ()):
                if nw != rw:
                    continue
                tgt = (bt, nt, nph)
                trans.append((node, w, tgt, cc))
                if tgt not in seen:
                    seen.add(tgt)
                    states.append(tgt)
                    todo.append(tgt)
    if trivial:
        acc = frozenset(s for s in states if s[1] in n.accepting)
    else:
        acc = frozenset(s for s in states if s[2] == 1 and s[1] in n.accepting)
    return BAutomaton(b.atoms, tuple(states), frozenset(init), tuple(trans), acc)
