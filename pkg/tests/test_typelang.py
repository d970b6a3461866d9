import pytest
from hypothesis import given, strategies as st

from oracles import oracle_unify, resolve, same_up_to_renaming
from redlab.typelang import (ARROW, FROWN, Atom, HatVar, MetaVar, OccursCheck, TCon,
                             TypeSyntaxError, UnifyMismatch, apply, arrow, meta_vars,
                             parse_type, rename_canonical, rename_jointly, show_type, unify)

A, B, C = MetaVar(0), MetaVar(1), MetaVar(2)
p, q = Atom("p"), Atom("q")

types = st.recursive(
    st.one_of(st.sampled_from([p, q]), st.builds(MetaVar, st.integers(0, 3))),
    lambda kids: st.builds(arrow, kids, kids),
    max_leaves=8,
)
ground = st.recursive(st.sampled_from([p, q]), lambda kids: st.builds(arrow, kids, kids),
                      max_leaves=6)


def test_parse_and_show():
    t = parse_type("?A -> ?B -> ?A")
    assert t == arrow(MetaVar("A"), arrow(MetaVar("B"), MetaVar("A")))
    assert parse_type("(p -> q) -> p") == arrow(arrow(p, q), p)
    assert show_type(arrow(arrow(A, B), A), letters=True) == "(A -> B) -> A"
    assert show_type(arrow(A, arrow(B, A))) == "?0 -> ?1 -> ?0"
    assert parse_type("FROWN") is FROWN
    assert parse_type("?^h") == HatVar("h")
    assert show_type(HatVar(0), letters=True) == "^A"


def test_prefix_connectives():
    conns = {"->": (2, "infix"), "pair": (2, "prefix"), "neg": (1, "prefix")}
    t = parse_type("pair(neg(p), q -> p)", conns)
    assert t == TCon("pair", (TCon("neg", (p,)), arrow(q, p)))
    assert show_type(t, infix=lambda n: n == ARROW) == "pair(neg(p), q -> p)"


@pytest.mark.parametrize("text", ["p -> FROWN", "FROWN -> p", "p ->", "(p", "p q"])
def test_bad_types(text):
    with pytest.raises(TypeSyntaxError):
        parse_type(text)


def test_frown_can_be_disallowed():
    with pytest.raises(TypeSyntaxError):
        parse_type("FROWN", allow_frown=False)


def test_unify_basic():
    s = unify(arrow(A, B), arrow(p, arrow(A, A)))
    assert apply(s, B) == arrow(p, p)
    with pytest.raises(OccursCheck):
        unify(A, arrow(A, p))
    with pytest.raises(UnifyMismatch):
        unify(p, q)


def test_frown_only_meets_hat_variables():
    with pytest.raises(UnifyMismatch):
        unify(A, FROWN)
    with pytest.raises(UnifyMismatch):
        unify(FROWN, arrow(p, p))
    assert unify(FROWN, FROWN) == {}
    s = unify(HatVar(0), FROWN)
    assert apply(s, HatVar(0)) is FROWN


def test_unify_does_not_mutate():
    s0 = {A: p}
    unify(B, q, s0)
    assert s0 == {A: p}


def test_rename_jointly_first_occurrence():
    hats, mapping = rename_jointly([arrow(MetaVar("x"), MetaVar("y")), MetaVar("y"), HatVar("h")])
    assert hats == [arrow(A, B), B, HatVar(2)]
    assert mapping[MetaVar("x")] == A
    assert rename_canonical(arrow(MetaVar(7), MetaVar(3))) == arrow(A, B)


@given(types)
def test_show_parse_roundtrip(t):
    assert parse_type(show_type(t)) == t


@given(types, types)
def test_unify_agrees_with_oracle(a, b):
    o = oracle_unify(a, b, {})
    try:
        s = unify(a, b)
    except (OccursCheck, UnifyMismatch):
        assert o is None
        return
    assert o is not None
    assert apply(s, a) == apply(s, b)
    # idempotent
    for v, t in s.items():
        assert not (meta_vars(t) & set(s))
    # both are most general, so the unified types agree up to renaming
    assert same_up_to_renaming(resolve(o, a), apply(s, a))


assignments = st.fixed_dictionaries({MetaVar(i): ground for i in range(4)})


@given(types, assignments, st.data())
def test_mgu_factors_every_ground_unifier(a, u, data):
    # b is built so that u unifies a and b: swap variables for their values
    # and values back for variables at random
    inverse = {v: k for k, v in u.items()}

    def disguise(t):
        if isinstance(t, MetaVar) and data.draw(st.booleans()):
            return u[t]
        if t in inverse and data.draw(st.booleans()):
            return inverse[t]
        if isinstance(t, TCon):
            return TCon(t.name, tuple(disguise(x) for x in t.args))
        return t

    b = disguise(a)
    assert apply(u, a) == apply(u, b)
    s = unify(a, b)
    for v in meta_vars(a) | meta_vars(b):
        assert apply(u, apply(s, v)) == apply(u, v)
