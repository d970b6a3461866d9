import io
import json
import os
import subprocess
import sys

import pytest

from conftest import GOLDEN
from redlab.acceptability import classify_calculus
from redlab.calculus import builtin
from redlab.cli import dumps, run
from redlab.infer import reconstruct
from redlab.meaning import denotation, sense
from redlab.terms import parse_term

PAIR = "app(lam y. lam x. x, lam y. y)"


def cli(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    old = dict(os.environ)
    if env:
        os.environ.update(env)
    try:
        code = run(list(argv), out, err)
    finally:
        os.environ.clear()
        os.environ.update(old)
    return code, out.getvalue(), err.getvalue()


def golden(name):
    with open(os.path.join(GOLDEN, name), encoding="utf-8") as fh:
        return fh.read()


@pytest.mark.parametrize("argv,name", [
    (["infer", "app(y, app(x, t))"], "infer_nested.txt"),
    (["infer", "--calculus", "tonk", "k'(k(t))"], "infer_tonk.txt"),
    (["infer", "--format", "json", "app(y, app(x, t))"], "infer_nested.json"),
    (["classify", "--format", "json", "--calculus", "core"], "classify_core.json"),
    (["sense", "--format", "json", PAIR], "sense_pair.json"),
    (["denotation", "--format", "json", PAIR], "denotation_pair.json"),
    (["graph", "--format", "dot", "app(lam x. x, app(lam y. y, z))"], "graph_small.dot"),
])
def test_goldens(argv, name):
    code, out, _ = cli(*argv)
    assert code == 0
    assert out == golden(name)


def test_json_matches_library():
    calc = builtin("stlc")
    t = parse_term("app(y, app(x, t))")
    _, out, _ = cli("infer", "--format", "json", "app(y, app(x, t))")
    (b,) = reconstruct(calc, t).branches
    got = json.loads(out)["branches"][0]
    got.pop("display")
    assert got == b.to_json(calc)

    _, out, _ = cli("classify", "--format", "json", "--calculus", "core")
    core = builtin("core")
    assert json.loads(out)["classifications"] == [c.to_json(core) for c in classify_calculus(core)]

    _, out, _ = cli("sense", "--format", "json", PAIR)
    assert json.loads(out)["sense"] == sense(calc, parse_term(PAIR)).to_json()
    _, out, _ = cli("denotation", "--format", "json", PAIR)
    assert json.loads(out)["denotation"] == denotation(calc, parse_term(PAIR)).to_json()


@pytest.mark.parametrize("argv", [
    ["infer", "--format", "json", "lam x. x"],
    ["reduce", "--format", "json", "app(lam x. x, y)"],
    ["graph", "--format", "json", "app(lam x. x, app(lam y. y, z))"],
    ["confluence", "--format", "json", "app(lam x. x, app(lam y. y, z))"],
    ["classify", "--format", "json", "--calculus", "tonk"],
    ["sr-instances", "--format", "json", "--calculus", "tonk", "--rule", "tonk-red",
     "--trials", "10"],
    ["typecheck", "--format", "json", "--type", "s -> s", "lam z. z"],
    ["validate", "--format", "json", "--calculus", "liar"],
])
def test_json_roundtrip_is_byte_identical(argv):
    code, out, _ = cli(*argv)
    assert code == 0
    data = json.loads(out)
    assert data["schema_version"] == 1
    assert dumps(data) == out


def test_text_outputs():
    assert cli("infer", "lam x. x") == (0, "lam x. x : A -> A\n", "")
    assert cli("reduce", "app(lam x. x, y)")[1] == "normal form y in 1 step\n"
    assert cli("reduce", "--single", "app(lam x. x, app(lam y. y, z))")[1] == \
        "app(lam y. y, z)    (beta@root)\n"
    assert cli("reduce", "--at", "1", "app(lam x. x, app(lam y. y, z))")[1] == \
        "app(lam x. x, z)    (beta@1)\n"
    assert cli("typecheck", "--type", "rho", "lam z. z")[1] == "false\n"
    assert cli("typecheck", "--type", "q", "--ctx", "f: p -> q, a: p", "app(f, a)")[1] == "true\n"
    assert cli("denotation", PAIR)[1] == "lam x. x\n"
    assert cli("classify", "--calculus", "tonk", "--rule", "tonk-red")[1].startswith(
        "reduction tonk-red: REJECTED")


def test_cycle_and_confluence_text(fixture_path):
    code, out, _ = cli("reduce", "--calculus-file", fixture_path("loop.rcalc"),
                       "app(lam x. app(x, x), lam x. app(x, x))")
    assert code == 0 and out.startswith("cycle: ")
    code, out, _ = cli("confluence", "--calculus-file", fixture_path("pick.rcalc"),
                       "pick(a, b)")
    assert "NOT confluent" in out
    code, out, _ = cli("confluence", "a", "b")
    assert out == "not joined within bounds\n"
    code, out, _ = cli("confluence", "--calculus", "core", "--search-size", "3")
    assert out.startswith("no term up to size 3 has two normal forms")


def test_term_file(tmp_path):
    f = tmp_path / "t.txt"
    f.write_text("app(lam x. x, y)\n")
    assert cli("reduce", "--term-file", str(f))[1] == "normal form y in 1 step\n"


def test_seed_from_environment():
    a = cli("sr-instances", "--format", "json", "--calculus", "stlc+ekman", "--rule", "ekman",
            "--trials", "30", env={"REDLAB_SEED": "5"})[1]
    b = cli("sr-instances", "--format", "json", "--calculus", "stlc+ekman", "--rule", "ekman",
            "--trials", "30", "--seed", "5")[1]
    assert a == b
    assert json.loads(a)["seed"] == 5
    assert cli("sr-instances", "--calculus", "tonk", "--rule", "tonk-red",
               env={"REDLAB_SEED": "x"})[0] == 2


@pytest.mark.parametrize("argv,code", [
    (["infer", "app(x, x)"], 1),
    (["sense", "--branch", "3", "lam x. x"], 1),
    (["classify", "--rule", "mix"], 2),
    (["infer", "app(x"], 2),
    (["infer", "k(x)"], 2),
    (["infer", "--calculus", "nope", "x"], 2),
    (["infer", "--calculus-file", "/nonexistent.rcalc", "x"], 2),
    (["reduce", "--format", "dot", "x"], 2),
    (["reduce", "--max-steps", "0", "x"], 2),
    (["frobnicate"], 2),
    (["infer"], 2),
    (["confluence", "a", "b", "c"], 2),
    (["classify", "--calculus", "tonk"], 0),
])
def test_exit_codes(argv, code):
    assert cli(*argv)[0] == code


def test_validate_reports_diagnostics(tmp_path, fixture_path):
    bad = tmp_path / "bad.rcalc"
    bad.write_text(open(fixture_path("stlc.rcalc")).read().replace("~>  $t[$s/x]", "~> $u"))
    code, out, _ = cli("validate", "--calculus-file", str(bad))
    assert code == 1
    assert "ContractumMetaNotInRedex" in out
    code, _, err = cli("infer", "--calculus-file", str(bad), "x")
    assert code == 2 and "ContractumMetaNotInRedex" in err
    broken = tmp_path / "broken.rcalc"
    broken.write_text("calculus b\nhead\n")
    code, _, err = cli("validate", "--calculus-file", str(broken))
    assert code == 2 and ":2:" in err


def test_classify_untypable_rule_exit(fixture_path):
    assert cli("classify", "--calculus-file", fixture_path("clash.rcalc"), "--rule", "mix")[0] == 1
    code, out, _ = cli("classify", "--calculus-file", fixture_path("clash.rcalc"))
    assert code == 0 and "error" in out


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "redlab", "infer", "lam x. x"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout == "lam x. x : A -> A\n"
    r = subprocess.run([sys.executable, "-m", "redlab", "infer", "app(x, x)"],
                       capture_output=True, text=True)
    assert r.returncode == 1
