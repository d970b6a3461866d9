from dataclasses import replace

import pytest

from redlab.calculus import (BUILTIN_NAMES, BUILTIN_SOURCES, Calculus, Diagnostic, ParseError,
                             UnknownCalculus, ValidationError, builtin, load_calculus,
                             parse_calculus, pretty_print, term_diagnostics, validate)
from redlab.terms import MetaSubst, parse_term
from redlab.typelang import FROWN, MetaVar, TCon, parse_type

BASE = """\
calculus t
typecon -> 2 infix
head lam constructor 1 binds 0
head app destructor 2
rule arrow-I: [x: ?A] |- $t : ?B ==> lam x. $t : ?A -> ?B
rule arrow-E: $s : ?A -> ?B , $t : ?A ==> app($s, $t) : ?B
reduction beta: app(lam x. $t, $s) ~> $t[$s/x]
"""


def codes(src):
    return sorted({d.code for d in validate(parse_calculus(src, validate_result=False))})


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_validate_and_roundtrip(name):
    c = builtin(name)
    assert validate(c) == []
    text = pretty_print(c)
    assert parse_calculus(text) == c
    assert pretty_print(parse_calculus(text)) == text


def test_builtin_shapes():
    core = builtin("core")
    assert [r.name for r in core.rules_for("lam")] == ["arrow-I", "arrow-I-bang"]
    assert core.rules_for("lam")[1].premises[0].hat is FROWN
    beta = core.reduction("beta")
    assert beta.contractum == MetaSubst("t", "s", "x")
    assert builtin("tonk").is_infix("tonk")
    assert builtin("stlc+ekman").reduction("ekman").redex == parse_term(
        "app($y, app($x, $t))", allow_meta=True)
    with pytest.raises(KeyError):
        core.reduction("eta")
    with pytest.raises(UnknownCalculus):
        builtin("nope")


def test_hand_formatted_file_matches_builtin(fixture_path):
    assert load_calculus(fixture_path("stlc.rcalc")) == builtin("stlc")


def test_show_hat_prefix_connective():
    src = BASE.replace("typecon -> 2 infix", "typecon -> 2 infix\ntypecon neg 1")
    c = parse_calculus(src)
    h = parse_type("neg(p -> q)", c.connectives())
    assert c.show_hat(h) == "neg(p -> q)"


@pytest.mark.parametrize("mutation,code", [
    (("head app destructor 2", "head app destructor 2\nhead app constructor 2"), "DuplicateHead"),
    (("head lam constructor 1 binds 0", "head lam constructor 2 binds 0"), "BinderMismatch"),
    (("typecon -> 2 infix", "typecon -> 2 infix\ntypecon -> 2 infix"), "DuplicateTypeCon"),
    (("rule arrow-E:", "rule arrow-I:"), "DuplicateRule"),
    (("head app destructor 2", "head app destructor 2\nhead pair constructor 2"),
     "MissingTypingRule"),
    (("reduction beta:", "reduction beta: app(lam x. $t, $s) ~> $t[$s/x]\nreduction beta:"),
     "DuplicateReduction"),
    (("==> app($s, $t)", "==> app($s, app($t, $t))"), "NotSyntaxDirected"),
    (("==> app($s, $t)", "==> foo($s, $t)"), "UnknownHead"),
    (("==> app($s, $t) : ?B", "==> app($s) : ?B"), "ArityMismatch"),
    (("$s : ?A -> ?B , $t : ?A", "$s : ?A -> ?B , $u : ?A"), "UnknownMetavariable"),
    (("[x: ?A] |- $t", "[y: ?A] |- $t"), "BadHypothesis"),
    (("[x: ?A] |- $t", "[x: FROWN] |- $t"), "FrownHypothesis"),
    (("$s : ?A -> ?B , $t : ?A", "$s : ?A -> ?B"), "UntypedArgument"),
    (("$s : ?A -> ?B , $t : ?A", "$s : ?A -> ?B , $t : ?A , $t : ?B"), "DuplicateTyping"),
    (("reduction beta: app(lam x. $t, $s) ~> $t[$s/x]", "reduction beta: $t ~> $t"),
     "RedexNotRigid"),
    (("app(lam x. $t, $s) ~>", "app(lam x. $t, $t) ~>"), "NonLinearRedex"),
    (("app(lam x. $t, $s) ~>", "app(lam x. $t, y) ~>"), "FreeVariableInRedex"),
    (("app(lam x. $t, $s) ~> $t[$s/x]", "app(lam x. lam x. $t, $s) ~> $s"), "DuplicateBinder"),
    (("~> $t[$s/x]", "~> $u"), "ContractumMetaNotInRedex"),
    (("~> $t[$s/x]", "~> $t"), "ContractumEscapesBinder"),
    (("~> $t[$s/x]", "~> $t[$s/y]"), "BadSubstitutionForm"),
    (("~> $t[$s/x]", "~> app($t, $s)"), "BadContractum"),
])
def test_each_mutation_is_diagnosed(mutation, code):
    old, new = mutation
    assert old in BASE
    assert code in codes(BASE.replace(old, new, 1))


@pytest.mark.parametrize("hat,code", [
    (TCon("box", (MetaVar("B"),)), "UnknownTypeCon"),
    (TCon("->", (MetaVar("B"),)), "TypeArityMismatch"),
    (TCon("->", (FROWN, MetaVar("B"))), "FrownInType"),
])
def test_constructed_hats_are_diagnosed(hat, code):
    # the parser cannot produce these, so build the rule directly
    c = parse_calculus(BASE)
    rules = tuple(replace(r, hat=hat) if r.name == "arrow-E" else r for r in c.rules)
    bad = Calculus(c.name, c.typecons, c.heads, rules, c.reductions)
    assert code in {d.code for d in validate(bad)}


def test_frown_nested_in_a_type_is_rejected():
    src = BASE.replace("==> app($s, $t) : ?B", "==> app($s, $t) : ?B -> ?B")
    assert codes(src) == []
    with pytest.raises((ParseError, ValidationError)):
        parse_calculus(BASE.replace("==> app($s, $t) : ?B", "==> app($s, $t) : FROWN -> ?B"))


def test_parse_errors_report_line_and_column():
    with pytest.raises(ParseError) as e:
        parse_calculus(BASE + "head bad\n")
    assert e.value.line == 8
    with pytest.raises(ParseError) as e:
        parse_calculus(BASE.replace("==> lam x. $t", "==> lam x. $t )"))
    assert e.value.line == 5
    assert e.value.col > 1
    with pytest.raises(ParseError):
        parse_calculus(BASE + "frobnicate\n")


def test_validation_error_raised_by_default():
    with pytest.raises(ValidationError) as e:
        parse_calculus(BASE.replace("~> $t[$s/x]", "~> $u"))
    assert all(isinstance(d, Diagnostic) for d in e.value.diagnostics)


def test_term_diagnostics():
    c = builtin("stlc")
    assert term_diagnostics(c, parse_term("app(lam x. x, y)")) == []
    assert [d.code for d in term_diagnostics(c, parse_term("app(x)"))] == ["ArityMismatch"]
    assert [d.code for d in term_diagnostics(c, parse_term("k(x)"))] == ["UnknownHead"]


def test_calculus_equality_ignores_index():
    a = builtin("stlc")
    b = parse_calculus(BUILTIN_SOURCES["stlc"])
    assert a == b and a is not b
    assert isinstance(a.renamed("s2"), Calculus)
    assert a.renamed("s2").rules == a.rules
