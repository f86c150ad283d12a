"""Command-line interface.

Exit codes: 0 holds (or success), 1 violated, 2 usage or input error, 3 resource cap hit.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Any, Dict, Optional, Sequence

from . import oracle
from .core import ResourceLimitError, decode_state, encode_state, template_from_dict, template_to_dict, validate_template
from .edgetypes import classify
from .pmcp import check_liveness, check_safety
from .reductions import BoolProgram, TNTemplate, boolprog_to_rb, rb_to_tn, rba_to_rbc, rbc_to_rba, tn_to_rb
from .unwinding import build_unwinding, _edge_json
from . import ltl

EXIT_HOLDS, EXIT_VIOLATED, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def load_template(path: str):
    """ProcessTemplate, or TNTemplate when the file has kind "tn"."""
    d = _load_json(path)
    if not isinstance(d, dict) or "states" not in d:
        raise UsageError(f"{path} does not describe a template")
    try:
        if str(d.get("kind", "rb")).lower() == "tn":
            tn = TNTemplate.from_dict(d)
            problems = tn.validate()
        else:
            tn = template_from_dict(d)
            problems = validate_template(tn)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: malformed template: {exc}") from exc
    if problems:
        raise UsageError(f"{path}: invalid template: " + "; ".join(problems))
    return tn


def _as_rb(path: str):
    t = load_template(path)
    return tn_to_rb(t) if isinstance(t, TNTemplate) else t


def _max_components(args) -> Optional[int]:
    if getattr(args, "max_components", None) is not None:
        return args.max_components
    raw = os.environ.get("PMCP_MAX_COMPONENTS")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"PMCP_MAX_COMPONENTS must be an integer, got {raw!r}") from exc


def _emit(args, payload: Dict[str, Any], text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _write(path: str, content: str) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(content)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def _letter(w) -> str:
    return "{" + ",".join(sorted(w)) + "}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    tpl = _as_rb(args.template)
    try:
        spec = ltl.parse(args.spec)
    except ltl.ParseError as exc:
        raise UsageError(f"cannot parse spec: {exc}") from exc
    mc = _max_components(args)
    if args.mode == "safety":
        v = check_safety(tpl, spec, max_components=mc, realize_up_to=args.realize_up_to)
    else:
        v = check_liveness(tpl, spec, max_components=mc)
    lines = [f"{args.mode}: {v.answer}"]
    cx = v.to_dict().get("counterexample")
    if isinstance(cx, dict):
        lines.append("counterexample: " + " ".join(map(_letter, cx["prefix"])) + " ( "
                     + " ".join(map(_letter, cx["cycle"])) + " )^omega")
    elif cx is not None:
        lines.append("counterexample: " + " ".join(map(_letter, cx)))
        if "realized_with" in v.diagnostics:
            lines.append(f"realized with {v.diagnostics['realized_with']} processes")
        elif "realization" in v.diagnostics:
            lines.append(v.diagnostics["realization"])
    _emit(args, v.to_dict(), "\n".join(lines))
    return EXIT_HOLDS if v.holds else EXIT_VIOLATED


def cmd_unwind(args) -> int:
    uw = build_unwinding(_as_rb(args.template), _max_components(args))
    if args.dot:
        _write(args.dot, uw.to_dot())
    text = [f"prefix {uw.prefix}, period {uw.period}, {len(uw.components)} components"]
    for c in uw.components:
        text.append(f"  P{c.index}: " + ", ".join(sorted(map(str, c.states))))
    _emit(args, uw.to_dict(), "\n".join(text))
    return EXIT_HOLDS


def cmd_edge_types(args) -> int:
    uw = build_unwinding(_as_rb(args.template), _max_components(args))
    report = classify(uw)
    _emit(args, report.to_dict(), report.table())
    return EXIT_HOLDS


def cmd_translate(args) -> int:
    try:
        out = _translate(args)
    except ValueError as exc:
        raise UsageError(f"cannot translate: {exc}") from exc
    text = json.dumps(out, indent=2)
    if args.out:
        _write(args.out, text + "\n")
    print(text)
    return EXIT_HOLDS


def _translate(args) -> Dict[str, Any]:
    pair = (args.source, args.target)
    if pair == ("tn", "rb"):
        t = load_template(args.template)
        if not isinstance(t, TNTemplate):
            raise UsageError("--from tn needs a template of kind tn")
        out: Dict[str, Any] = template_to_dict(tn_to_rb(t, args.clip))
    elif pair == ("rb", "tn"):
        out = rb_to_tn(_require_rb(args.template)).to_dict()
    elif pair == ("rbc", "rba"):
        if not args.user:
            raise UsageError("--from rbc needs --template for the controller and --user for the user template")
        out = template_to_dict(rbc_to_rba(_require_rb(args.template), _require_rb(args.user)))
    elif pair == ("rba", "rbc"):
        ctl, usr = rba_to_rbc(_require_rb(args.template), user_atom=args.user_atom)
        out = {"controller": template_to_dict(ctl), "user": template_to_dict(usr)}
    else:
        raise UsageError(f"unsupported translation {args.source} -> {args.target}; "
                         "available: tn->rb, rb->tn, rbc->rba, rba->rbc")
    return out


def _require_rb(path: str):
    t = load_template(path)
    if isinstance(t, TNTemplate):
        raise UsageError(f"{path} is a timed network; expected a process template")
    return t


def cmd_gen_boolprog(args) -> int:
    data = _load_json(args.program)
    try:
        if isinstance(data, dict):
            prog = BoolProgram.from_json(data["instructions"], data.get("num_vars"))
        else:
            prog = BoolProgram.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.program}: malformed program: {exc}") from exc
    problems = prog.validate()
    if problems:
        raise UsageError("invalid program: " + "; ".join(problems))
    tpl, spec = boolprog_to_rb(prog)
    out = {"template": template_to_dict(tpl), "spec": ltl.to_str(spec)}
    text = json.dumps(out, indent=2)
    if args.out:
        _write(args.out, text + "\n")
    print(text)
    return EXIT_HOLDS


def _counts_json(counts) -> list:
    return [[encode_state(s), c] for s, c in counts]


def _run_json(start, steps) -> dict:
    return {
        "start": [encode_state(s) for s in start],
        "steps": [{"label": str(t.label), "moves": [[p, _edge_json(e)] for p, e in t.moves],
                   "destination": [encode_state(s) for s in t.destination]} for t in steps],
    }


def cmd_oracle(args) -> int:
    if args.oracle_cmd == "random-template":
        rng = random.Random(args.seed)
        tpls = [oracle.random_template(rng, args.max_states, args.max_edges, with_broadcasts=not args.no_broadcasts)
                for _ in range(args.count)]
        out: Any = [template_to_dict(t) for t in tpls]
        print(json.dumps(out if args.count > 1 else out[0], indent=2))
        return EXIT_HOLDS
    tpl = _as_rb(args.template)
    if args.oracle_cmd == "reachable":
        confs = sorted(oracle.enumerate_reachable(tpl, args.n, args.depth), key=repr)
        _emit(args, {"configurations": [_counts_json(c) for c in confs]},
              "\n".join("(" + ", ".join(f"{s}:{c}" for s, c in cfg) + ")" for cfg in confs))
    elif args.oracle_cmd == "executions":
        words = sorted(oracle.executions_upto(tpl, args.n, args.length), key=lambda w: (len(w), repr(w)))
        _emit(args, {"words": [[sorted(x) for x in w] for w in words]},
              "\n".join(" ".join(_letter(x) for x in w) for w in words))
    elif args.oracle_cmd == "pseudo-cycle":
        uw = build_unwinding(tpl, _max_components(args))
        edges = uw.template.edges
        if not 0 <= args.edge < len(edges):
            raise UsageError(f"--edge must be in [0, {len(edges) - 1}]")
        q = oracle.PseudoCycleQuery(edges[args.edge], args.broadcasts, args.max_processes)
        res = oracle.pseudo_cycle_search(uw, q)
        payload: Dict[str, Any] = {"edge": _edge_json(q.edge), "found": res.found, "explored": res.explored}
        text = f"{q.edge}: " + ("found" if res.found else f"inconclusive (none with <= {q.max_processes} processes)")
        if res.found:
            start, run = oracle.lift_counter_path(uw.template, res.start, res.path)
            payload["processes"] = res.processes
            payload["run"] = _run_json(start, run)
            text += f" with {res.processes} processes, {len(run)} steps"
        _emit(args, payload, text)
        return EXIT_HOLDS if res.found else EXIT_VIOLATED
    elif args.oracle_cmd == "loading":
        uw = build_unwinding(tpl, _max_components(args))
        rows = []
        for b in range(uw.last + 2):
            for s, n in sorted(oracle.loading_witness(uw, b, args.max_processes).items(), key=repr):
                rows.append({"broadcasts": b, "state": encode_state(s), "processes": n})
        _emit(args, {"loading": rows},
              "\n".join(f"b={r['broadcasts']} {r['state']}: {r['processes'] or 'not found'}" for r in rows))
        return EXIT_HOLDS if all(r["processes"] for r in rows) else EXIT_VIOLATED
    elif args.oracle_cmd == "bisim":
        other = _as_rb(args.other)
        rel = [(decode_state(a), decode_state(b)) for a, b in _load_json(args.relation)]
        ok = oracle.check_bisimulation(tpl, other, rel)
        _emit(args, {"bisimulation": ok}, "bisimulation" if ok else "not a bisimulation")
        return EXIT_HOLDS if ok else EXIT_VIOLATED
    return EXIT_HOLDS


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--max-components", type=int, default=None,
                        help="cap on unwinding components (default: $PMCP_MAX_COMPONENTS or none)")

    p = argparse.ArgumentParser(prog="pmcp", description="Parameterized model checking of rendezvous-broadcast systems.")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", parents=[common], help="decide a safety or liveness specification")
    c.add_argument("--template", required=True)
    c.add_argument("--spec", required=True, help='LTL/LTLf formula, e.g. "G !q"')
    c.add_argument("--mode", choices=("safety", "liveness"), default="safety")
    c.add_argument("--realize-up-to", type=int, default=4, help="largest process count tried for counterexample runs")
    c.set_defaults(func=cmd_check)

    u = sub.add_parser("unwind", parents=[common], help="reachability-unwinding")
    u.add_argument("--template", required=True)
    u.add_argument("--dot", help="also write a DOT rendering to this file")
    u.set_defaults(func=cmd_unwind)

    e = sub.add_parser("edge-types", parents=[common], help="classify edges of the unwinding")
    e.add_argument("--template", required=True)
    e.set_defaults(func=cmd_edge_types)

    t = sub.add_parser("translate", help="translate between template kinds")
    t.add_argument("--from", dest="source", required=True, choices=("tn", "rb", "rbc", "rba"))
    t.add_argument("--to", dest="target", required=True, choices=("tn", "rb", "rbc", "rba"))
    t.add_argument("--template", required=True, help="input template (the controller for --from rbc)")
    t.add_argument("--user", help="user template for --from rbc")
    t.add_argument("--clip", type=int, default=None, help="clock clip value for tn->rb")
    t.add_argument("--user-atom", default="p", help="fresh atom marking user processes for rba->rbc")
    t.add_argument("--out")
    t.set_defaults(func=cmd_translate)

    g = sub.add_parser("gen-boolprog", help="RB-template and spec for a Boolean program")
    g.add_argument("--program", required=True)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_boolprog)

    o = sub.add_parser("oracle", help="brute-force explicit-state checks")
    osub = o.add_subparsers(dest="oracle_cmd", required=True)
    r = osub.add_parser("reachable", parents=[common])
    r.add_argument("--template", required=True)
    r.add_argument("-n", type=int, required=True)
    r.add_argument("--depth", type=int, default=12)
    x = osub.add_parser("executions", parents=[common])
    x.add_argument("--template", required=True)
    x.add_argument("-n", type=int, required=True)
    x.add_argument("--length", type=int, default=4)
    pc = osub.add_parser("pseudo-cycle", parents=[common])
    pc.add_argument("--template", required=True)
    pc.add_argument("--edge", type=int, required=True, help="index into the unwound template's edge list")
    pc.add_argument("--broadcasts", choices=("zero", "period"), default="zero")
    pc.add_argument("--max-processes", type=int, default=8)
    ld = osub.add_parser("loading", parents=[common])
    ld.add_argument("--template", required=True)
    ld.add_argument("--max-processes", type=int, default=8)
    bs = osub.add_parser("bisim", parents=[common])
    bs.add_argument("--template", required=True)
    bs.add_argument("--other", required=True)
    bs.add_argument("--relation", required=True, help="JSON list of [state, state] pairs")
    rt = osub.add_parser("random-template", parents=[common])
    rt.add_argument("--seed", type=int, default=0)
    rt.add_argument("--count", type=int, default=1)
    rt.add_argument("--max-states", type=int, default=5)
    rt.add_argument("--max-edges", type=int, default=10)
    rt.add_argument("--no-broadcasts", action="store_true")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_HOLDS
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pmcp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"pmcp: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
