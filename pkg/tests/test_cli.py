import json
import subprocess
import sys
from pathlib import Path

import pytest

from rbpmc import figures
from rbpmc.cli import main
from rbpmc.core import bcast, make_template, rdz, template_from_dict, template_to_dict
from rbpmc.reductions import TNTemplate, tn_to_rb

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_safety_violated(capsys):
    code, out, _ = run(capsys, "check", "--template", DATA / "pstar_q.json", "--spec", "G !q")
    assert code == 1
    assert "safety: violated" in out
    assert "counterexample: {p} {q}" in out
    assert "realized with 2 processes" in out


def test_check_safety_holds_json(capsys):
    code, out, _ = run(capsys, "check", "--template", DATA / "pstar_q.json", "--spec", "G !(p & q)", "--json")
    assert code == 0
    d = json.loads(out)
    assert d["answer"] == "holds" and "counterexample" not in d


def test_check_liveness_lasso(capsys):
    code, out, _ = run(capsys, "check", "--template", DATA / "reset_broadcast.json", "--spec", "G !q",
                       "--mode", "liveness", "--json")
    assert code == 1
    d = json.loads(out)
    assert set(d["counterexample"]) == {"prefix", "cycle"}
    assert d["diagnostics"]["lasso_validated"] is True


def test_check_liveness_holds(capsys):
    code, _, _ = run(capsys, "check", "--template", DATA / "reset_broadcast.json", "--spec", "G F r",
                     "--mode", "liveness")
    assert code == 0


def test_check_timed_network(capsys):
    code, out, _ = run(capsys, "check", "--template", DATA / "timed.json", "--spec", "G !r")
    assert code == 1 and "{p} {q} {r}" in out


def test_unwind_timed(capsys):
    code, out, _ = run(capsys, "unwind", "--template", DATA / "timed_rb.json", "--json")
    assert code == 0
    d = json.loads(out)
    assert (d["prefix"], d["period"], len(d["components"])) == (3, 1, 4)


def test_unwind_dot(capsys, tmp_path):
    dot = tmp_path / "u.dot"
    code, out, _ = run(capsys, "unwind", "--template", DATA / "reset_broadcast.json", "--dot", dot)
    assert code == 0 and out.startswith("prefix 0, period 1, 1 components")
    assert dot.read_text().startswith("digraph")


def test_component_cap_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("PMCP_MAX_COMPONENTS", "2")
    code, _, err = run(capsys, "unwind", "--template", DATA / "timed_rb.json")
    assert code == 3 and "resource limit" in err
    code, _, _ = run(capsys, "unwind", "--template", DATA / "timed_rb.json", "--max-components", "10")
    assert code == 0
    monkeypatch.setenv("PMCP_MAX_COMPONENTS", "lots")
    assert run(capsys, "unwind", "--template", DATA / "timed_rb.json")[0] == 2


def test_missing_file(capsys):
    code, _, err = run(capsys, "check", "--template", "no/such/file.json", "--spec", "true")
    assert code == 2 and "cannot read" in err


@pytest.mark.parametrize("content,message", [("{", "not valid JSON"), ("[1]", "does not describe"),
                                             ('{"states": ["p"], "kind": "RB", "arity": 2, "initial": ["p"], '
                                              '"edges": []}', "invalid template")])
def test_bad_template_files(capsys, tmp_path, content, message):
    f = tmp_path / "t.json"
    f.write_text(content)
    code, _, err = run(capsys, "edge-types", "--template", f)
    assert code == 2 and message in err


def test_bad_spec_and_usage(capsys):
    assert run(capsys, "check", "--template", DATA / "pstar_q.json", "--spec", "G (")[0] == 2
    assert run(capsys, "check", "--template", DATA / "pstar_q.json")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_edge_types(capsys):
    code, out, _ = run(capsys, "edge-types", "--template", DATA / "reset_broadcast.json", "--json")
    assert code == 0
    d = json.loads(out)
    assert len(d["edges"]) == 6


def test_translate_tn_to_rb_round_trips(capsys, tmp_path):
    out_file = tmp_path / "rb.json"
    code, out, _ = run(capsys, "translate", "--from", "tn", "--to", "rb", "--template", DATA / "timed.json",
                       "--out", out_file)
    assert code == 0
    tpl = template_from_dict(json.loads(out))
    assert len(tpl.states) == 12
    assert template_from_dict(json.loads(out_file.read_text())) == tpl
    assert tpl == tn_to_rb(figures.timed_example())


def test_translate_rb_to_tn(capsys):
    code, out, _ = run(capsys, "translate", "--from", "rb", "--to", "tn", "--template", DATA / "reset_broadcast.json")
    assert code == 0
    tn = TNTemplate.from_dict(json.loads(out))
    assert not tn.validate() and tn.clocks == ("c",)


def _two_state(a, b):
    edges = [rdz(a, b, "m", 1), rdz(b, a, "m", 2), bcast(a, a), bcast(b, a)]
    return make_template("RB", 2, [a, b], [a], edges, {a: {a}, b: {b}}, {"x", "y", "u", "v"})


def test_translate_controller_pair(capsys, tmp_path):
    ctl, usr = tmp_path / "c.json", tmp_path / "u.json"
    ctl.write_text(json.dumps(template_to_dict(_two_state("x", "y"))))
    usr.write_text(json.dumps(template_to_dict(figures.selfloop_broadcast_template())))
    assert run(capsys, "translate", "--from", "rbc", "--to", "rba", "--template", ctl)[0] == 2
    code, _, err = run(capsys, "translate", "--from", "rbc", "--to", "rba", "--template", ctl, "--user", usr)
    assert code == 2 and "atom set" in err
    usr.write_text(json.dumps(template_to_dict(_two_state("u", "v"))))
    code, out, _ = run(capsys, "translate", "--from", "rbc", "--to", "rba", "--template", ctl, "--user", usr)
    assert code == 0 and template_from_dict(json.loads(out)).kind == "RBA"
    rba = tmp_path / "a.json"
    rba.write_text(out)
    # the RBA already uses the default marker p
    assert run(capsys, "translate", "--from", "rba", "--to", "rbc", "--template", rba)[0] == 2
    code, out, _ = run(capsys, "translate", "--from", "rba", "--to", "rbc", "--template", rba, "--user-atom", "usr")
    assert code == 0 and set(json.loads(out)) == {"controller", "user"}


def test_translate_unsupported_pair(capsys):
    code, _, err = run(capsys, "translate", "--from", "tn", "--to", "rba", "--template", DATA / "timed.json")
    assert code == 2 and "unsupported" in err
    code, _, err = run(capsys, "translate", "--from", "tn", "--to", "rb", "--template", DATA / "pstar_q.json")
    assert code == 2


def test_gen_boolprog(capsys):
    code, out, _ = run(capsys, "gen-boolprog", "--program", DATA / "boolprog_reaches.json")
    assert code == 0
    d = json.loads(out)
    assert template_from_dict(d["template"]).kind == "RB"
    assert d["spec"]


def test_gen_boolprog_rejects_invalid(capsys, tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"num_vars": 1, "instructions": [{"op": "toggle", "var": 5}]}))
    assert run(capsys, "gen-boolprog", "--program", f)[0] == 2


def test_oracle_reachable(capsys):
    code, out, _ = run(capsys, "oracle", "reachable", "--template", DATA / "pstar_q.json", "-n", 2, "--json")
    assert code == 0
    confs = json.loads(out)["configurations"]
    assert sorted(sorted(map(tuple, c)) for c in confs) == [[("p", 1), ("q", 1)], [("p", 2)]]


def test_oracle_executions(capsys):
    code, out, _ = run(capsys, "oracle", "executions", "--template", DATA / "pstar_q.json", "-n", 2, "--length", 3)
    assert code == 0
    assert out.split("\n")[:3] == ["{p}", "{p} {p}", "{p} {q}"]


def test_oracle_pseudo_cycle(capsys):
    code, out, _ = run(capsys, "oracle", "pseudo-cycle", "--template", DATA / "reset_broadcast.json", "--edge", 0,
                       "--broadcasts", "period", "--max-processes", 4, "--json")
    assert code == 0
    d = json.loads(out)
    assert d["found"] and d["run"]["steps"]
    code, out, _ = run(capsys, "oracle", "pseudo-cycle", "--template", DATA / "reset_broadcast.json", "--edge", 0,
                       "--max-processes", 4)
    assert code == 1 and "inconclusive" in out
    assert run(capsys, "oracle", "pseudo-cycle", "--template", DATA / "reset_broadcast.json", "--edge", 99)[0] == 2


def test_oracle_loading(capsys):
    code, out, _ = run(capsys, "oracle", "loading", "--template", DATA / "timed_rb.json", "--json")
    assert code == 0
    assert all(r["processes"] for r in json.loads(out)["loading"])


def test_oracle_bisim(capsys, tmp_path):
    rel = tmp_path / "rel.json"
    tpl = figures.pstar_q_template()
    rel.write_text(json.dumps([[s, s] for s in tpl.states]))
    args = ["oracle", "bisim", "--template", DATA / "pstar_q.json", "--other", DATA / "pstar_q.json", "--relation", rel]
    assert run(capsys, *args)[0] == 0
    rel.write_text(json.dumps([["p", "p"]]))
    assert run(capsys, *args)[0] == 1


def test_oracle_random_template_is_seeded(capsys):
    _, a, _ = run(capsys, "oracle", "random-template", "--seed", 7, "--count", 3)
    _, b, _ = run(capsys, "oracle", "random-template", "--seed", 7, "--count", 3)
    assert a == b
    tpls = [template_from_dict(d) for d in json.loads(a)]
    assert len(tpls) == 3


def test_exit_codes_are_stable(capsys):
    args = ["check", "--template", DATA / "reset_broadcast.json", "--spec", "G !q", "--mode", "liveness", "--json"]
    outcomes = []
    for _ in range(2):
        code, out, _ = run(capsys, *args)
        outcomes.append((code, json.loads(out)["counterexample"]))
    assert outcomes[0] == outcomes[1]


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "rbpmc.cli", "check", "--template", str(DATA / "pstar_q.json"),
                          "--spec", "G !q"], capture_output=True, text=True)
    assert res.returncode == 1 and "violated" in res.stdout
