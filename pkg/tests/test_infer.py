import pytest
from hypothesis import given, strategies as st

from conftest import lambda_terms
from oracles import (brute_check, ground_types, instance_of, oracle_principal,
                     same_up_to_renaming)
from redlab.calculus import builtin
from redlab.infer import (BranchLimitExceeded, UnknownHead, reconstruct, reconstruct_schema,
                          replay, typecheck)
from redlab.rewrite import all_steps, enumerate_terms, generate_well_typed
from redlab.terms import parse_term, show
from redlab.typelang import FROWN, Atom, MetaVar, TCon, arrow, parse_type

STLC = builtin("stlc")
CORE = builtin("core")
A, B, C = MetaVar(0), MetaVar(1), MetaVar(2)
p, q = Atom("p"), Atom("q")


def judgment(calc, text):
    r = reconstruct(calc, parse_term(text))
    return [(calc.show_hat(b.conclusion, True),
             [(x, calc.show_hat(h, True)) for x, h in b.context]) for b in r.branches]


def test_identity():
    assert judgment(STLC, "lam x. x") == [("A -> A", [])]


def test_nested_application_context_shape():
    assert judgment(STLC, "app(y, app(x, t))") == [
        ("A", [("y", "B -> A"), ("x", "C -> B"), ("t", "C")])]


def test_tonk_conclusion_disconnected_from_subject():
    tonk = builtin("tonk")
    assert judgment(tonk, "k'(k(t))") == [("A", [("t", "B")])]


def test_untypable():
    assert not reconstruct(STLC, parse_term("app(x, x)")).typable
    assert not reconstruct(STLC, parse_term("lam x. app(x, x)")).typable


def test_beta_schema():
    r = reconstruct_schema(STLC, STLC.reduction("beta").redex)
    (b,) = r.branches
    assert b.conclusion == A
    assert b.schema_hat("t") == A
    assert b.schema_hat("s") == B
    assert b.schema_hyps("t") == (("x", B),)
    assert b.rules == ("arrow-E", "arrow-I")


def test_core_beta_schema_has_a_frown_branch():
    r = reconstruct_schema(CORE, CORE.reduction("beta").redex)
    assert [b.rules for b in r.branches] == [("arrow-E", "arrow-I"), ("arrow-E", "arrow-I-bang")]
    assert r.branches[1].schema_hat("t") is FROWN
    assert r.branches[1].conclusion == A


def test_core_plain_terms_branch_per_binder():
    r = reconstruct(CORE, parse_term("lam x. lam y. y"))
    # the inner body y is a typed leaf, so the bang rule never fires
    assert len(r.branches) == 1


def test_derivation_structure_and_replay():
    for calc, text in [(STLC, "app(lam x. x, y)"), (builtin("tonk"), "k'(k(t))"),
                       (builtin("liar"), "l'(l(t))"), (CORE, "app(lam x. x, lam y. y)")]:
        for b in reconstruct(calc, parse_term(text)).branches:
            assert replay(calc, b)
            assert b.derivation.subject == parse_term(text)
            assert b.derivation.hat == b.conclusion


def test_render_tree():
    (b,) = reconstruct(STLC, parse_term("app(lam x. x, y)")).branches
    assert b.derivation.render(STLC) == (
        "app(lam x. x, y) : A    (arrow-E)\n"
        "  lam x. x : A -> A    (arrow-I)\n"
        "    x : A    (hyp)\n"
        "  y : A    (var)")


def test_unknown_head():
    with pytest.raises(UnknownHead):
        reconstruct(STLC, parse_term("k(x)"))


def test_branch_cap():
    # two independent binders with FROWN-able bodies double the branches
    redex = parse_term("app(lam x. $a, lam y. $b)", allow_meta=True)
    assert len(reconstruct_schema(CORE, redex).branches) == 4
    with pytest.raises(BranchLimitExceeded):
        reconstruct_schema(CORE, redex, cap=3)


# --- typecheck -----------------------------------------------------------------

def test_typecheck_identity():
    idz = parse_term("lam z. z")
    assert not typecheck(STLC, {}, idz, Atom("rho"))
    assert typecheck(STLC, {}, idz, parse_type("s -> s"))
    assert not typecheck(STLC, {}, idz, parse_type("s -> t"))


def test_typecheck_context():
    t = parse_term("app(f, a)")
    assert typecheck(STLC, {"f": arrow(p, q), "a": p}, t, q)
    assert not typecheck(STLC, {"f": arrow(p, q), "a": q}, t, q)
    assert not typecheck(STLC, {"f": arrow(p, q)}, t, q)
    with pytest.raises(ValueError):
        typecheck(STLC, {"f": FROWN}, t, q)


def test_typecheck_metavariables_are_rigid():
    idz = parse_term("lam z. z")
    assert typecheck(STLC, {}, idz, arrow(A, A))
    assert not typecheck(STLC, {}, idz, arrow(A, B))
    assert not typecheck(STLC, {}, parse_term("x"), A)  # free x is not in the context
    assert not typecheck(STLC, {"x": B}, parse_term("x"), A)


# --- principality -----------------------------------------------------------------

def _principal_tuple(branch):
    names = sorted(x for x, _ in branch.context)
    ctx = dict(branch.context)
    return TCon("judg", (branch.conclusion,) + tuple(ctx[x] for x in names)), names


def _oracle_tuple(result):
    ctx, ty = result
    names = sorted(ctx)
    return TCon("judg", (ty,) + tuple(ctx[x] for x in names)), names


SMALL = [t for n in range(1, 5) for t in enumerate_terms(STLC, n, ("x", "y"), free=("f",))]


def test_small_corpus_size():
    assert len(SMALL) > 500


@pytest.mark.parametrize("chunk", range(4))
def test_principal_matches_oracle_exhaustive(chunk):
    for t in SMALL[chunk::4]:
        mine = reconstruct(STLC, t).branches
        theirs = oracle_principal(t)
        assert (theirs is None) == (not mine), show(t)
        if theirs is not None:
            (b,) = mine
            j1, n1 = _principal_tuple(b)
            j2, n2 = _oracle_tuple(theirs)
            assert n1 == n2
            assert same_up_to_renaming(j1, j2), show(t)


@given(lambda_terms(10))
def test_principal_matches_oracle(t):
    mine = reconstruct(STLC, t).branches
    theirs = oracle_principal(t)
    assert (theirs is None) == (not mine)
    if theirs is not None:
        j1, _ = _principal_tuple(mine[0])
        j2, _ = _oracle_tuple(theirs)
        assert same_up_to_renaming(j1, j2)


CLOSED = [t for n in range(1, 5) for t in enumerate_terms(STLC, n, ("x", "y"))]
TARGETS = ground_types(1)
CUTS = ground_types(2)


def test_principal_type_against_brute_force_ground_typing():
    """Every ground typing is an instance of the principal type, and conversely."""
    checked = 0
    for t in CLOSED:
        r = reconstruct(STLC, t)
        for g in TARGETS:
            brute = brute_check(t, g, CUTS)
            inst = bool(r.branches) and instance_of(r.branches[0].conclusion, g)
            assert brute == inst, (show(t), g)
            assert typecheck(STLC, {}, t, g) == inst
            checked += 1
    assert checked == len(CLOSED) * len(TARGETS)


# --- subject reduction and expansion ----------------------------------------

@given(st.integers(1, 12), st.integers(0, 2**32))
def test_subject_reduction_on_generated_terms(size, seed):
    t = generate_well_typed(STLC, size, seed)
    (b,) = reconstruct(STLC, t).branches
    for r in all_steps(STLC, t):
        assert typecheck(STLC, {}, r.next, b.conclusion), (show(t), show(r.next))


def find_expansion_witness(max_size=5):
    """A beta-step whose contractum has a type its redex lacks."""
    for n in range(1, max_size + 1):
        for t in enumerate_terms(STLC, n, ("x", "y")):
            for r in all_steps(STLC, t):
                con = reconstruct(STLC, r.next).branches
                if not con:
                    continue
                ty = con[0].conclusion
                if not typecheck(STLC, {}, t, ty):
                    return t, r.next, ty
    return None


def test_subject_expansion_fails():
    w = find_expansion_witness()
    assert w is not None
    redex, contractum, ty = w
    assert typecheck(STLC, {}, contractum, ty)
    assert not typecheck(STLC, {}, redex, ty)
    assert any(alt.next == contractum for alt in all_steps(STLC, redex))
