"""Parameterized model checking: safety via finite-word inclusion, liveness via
B-automaton emptiness, both over the reachability-unwinding."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from . import ltl
from .automata import (
    Lasso,
    Nbw,
    Nfw,
    b_emptiness,
    b_product_nbw,
    build_exec_bautomaton,
    build_exec_nfw,
    ltl_to_nbw,
    ltlf_to_nfw,
    nfw_inclusion,
)
from .core import GlobalTransition, Letter, ProcessTemplate, State, encode_state, validate_template
from .edgetypes import classify
from .oracle import realize_word
from .reductions import TNTemplate, tn_to_rb
from .unwinding import build_unwinding

Spec = Union[str, ltl.Formula]


@dataclass
class Verdict:
    answer: str  # "holds" or "violated"
    counterexample: Optional[Union[Tuple[Letter, ...], Lasso]] = None
    run: Optional[Tuple[Tuple[State, ...], List[GlobalTransition]]] = None  # realization of a finite counterexample
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.answer == "holds"

    def to_dict(self) -> dict:
        out: Dict[str, Any] = {"answer": self.answer, "diagnostics": self.diagnostics}
        cx = self.counterexample
        if isinstance(cx, Lasso):
            out["counterexample"] = {"prefix": _word_json(cx.prefix), "cycle": _word_json(cx.cycle)}
        elif cx is not None:
            out["counterexample"] = _word_json(cx)
        if self.run is not None:
            start, steps = self.run
            out["run"] = {
                "start": [encode_state(s) for s in start],
                "steps": [
                    {"label": str(t.label), "moves": [[p, str(e)] for p, e in t.moves],
                     "destination": [encode_state(s) for s in t.destination]}
                    for t in steps
                ],
            }
        return out


def _word_json(word: Sequence[Letter]) -> list:
    return [sorted(w) for w in word]


class _Clock:
    def __init__(self) -> None:
        self.times: Dict[str, float] = {}
        self._t = time.perf_counter()

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.times[name] = round(now - self._t, 6)
        self._t = now


def _checked(tpl: ProcessTemplate) -> None:
    problems = validate_template(tpl)
    if problems:
        raise ValueError("invalid template: " + "; ".join(problems))


def _spec_atoms(tpl: ProcessTemplate, spec: ltl.Formula) -> frozenset:
    return frozenset(tpl.atoms) | ltl.atoms(spec)


def check_safety(tpl: ProcessTemplate, spec: Union[Spec, Nfw], *, max_components: Optional[int] = None,
                 realize_up_to: int = 4) -> Verdict:
    """Do all finite executions, for every number of processes, satisfy spec?

    spec is an LTLf formula (or its text) or an NFW of the allowed words.  A
    violating word is realized as a concrete run with 1, 2, 4, ... processes up to
    realize_up_to; failing that, diagnostics record the exhaustion.
    """
    _checked(tpl)
    clock = _Clock()
    uw = build_unwinding(tpl, max_components)
    clock.lap("unwinding")
    exec_nfw = build_exec_nfw(uw)
    clock.lap("exec_nfw")
    if isinstance(spec, Nfw):
        spec_nfw = spec
    else:
        f = ltl.as_formula(spec)
        spec_nfw = ltlf_to_nfw(f, _spec_atoms(tpl, f))
    clock.lap("spec_nfw")
    res = nfw_inclusion(exec_nfw, spec_nfw)
    clock.lap("inclusion")
    diag: Dict[str, Any] = {
        "components": len(uw.components), "prefix": uw.prefix, "period": uw.period,
        "exec_nfw_states": len(exec_nfw.states), "spec_nfw_states": len(spec_nfw.states),
    }
    if res.holds:
        diag["timings"] = clock.times
        return Verdict("holds", diagnostics=diag)
    run = None
    n = 1
    tried = []
    while n <= realize_up_to:
        tried.append(n)
        run = realize_word(tpl, res.counterexample, n)
        if run is not None:
            diag["realized_with"] = n
            break
        n *= 2
    if run is None:
        diag["realization"] = f"not realized with n in {tried}"
    clock.lap("realization")
    diag["timings"] = clock.times
    return Verdict("violated", res.counterexample, run, diag)


def check_liveness(tpl: ProcessTemplate, spec: Union[Spec, Nbw], *, max_components: Optional[int] = None) -> Verdict:
    """Do all infinite executions, for every number of processes, satisfy spec?

    spec is an LTL formula (or its text); an Nbw is taken to accept the violations.
    A lasso counterexample is checked for membership in both the B-automaton of the
    template and the violation automaton.
    """
    _checked(tpl)
    clock = _Clock()
    uw = build_unwinding(tpl, max_components)
    clock.lap("unwinding")
    report = classify(uw)
    clock.lap("edge_types")
    bad = report.violations()
    if bad:
        raise AssertionError("edge-type invariants violated: " + "; ".join(bad))
    b = build_exec_bautomaton(uw, report)
    clock.lap("b_automaton")
    if isinstance(spec, Nbw):
        neg = spec
    else:
        f = ltl.as_formula(spec)
        neg = ltl_to_nbw(ltl.Not(f), _spec_atoms(tpl, f))
    clock.lap("negation_nbw")
    prod = b_product_nbw(b, neg)
    clock.lap("product")
    res = b_emptiness(prod)
    clock.lap("emptiness")
    diag: Dict[str, Any] = {
        "components": len(uw.components), "prefix": uw.prefix, "period": uw.period,
        "green_iterations": report.green_iterations, "b_states": len(b.states),
        "negation_nbw_states": len(neg.states), "product_states": len(prod.states),
    }
    if res.empty:
        diag["timings"] = clock.times
        return Verdict("holds", diagnostics=diag)
    w = res.witness
    ok_b = b.accepts_lasso(w.prefix, w.cycle)
    ok_n = neg.accepts_lasso(w.prefix, w.cycle)
    if not (ok_b and ok_n):
        raise AssertionError("lasso counterexample failed membership validation")
    diag["lasso_validated"] = True
    clock.lap("validation")
    diag["timings"] = clock.times
    return Verdict("violated", w, None, diag)


def check_safety_tn(tn: TNTemplate, spec: Union[Spec, Nfw], **kw: Any) -> Verdict:
    """Safety for a timed network; spec may use clock-predicate atoms such as "x>2"."""
    return check_safety(tn_to_rb(tn), spec, **kw)


def check_liveness_tn(tn: TNTemplate, spec: Union[Spec, Nbw], **kw: Any) -> Verdict:
    return check_liveness(tn_to_rb(tn), spec, **kw)
