import pytest

from jacobiform import terms as T
from jacobiform.check import TypedTerm, synthesize, type_check
from jacobiform.errors import (ArityMismatch, IndexOutOfRange, TypeCheckError,
                               TypeMismatch, UnboundVariable)
from jacobiform.terms import (App11, App1N, AppM1, AppMN, Comp111, Comp1K1,
                              CompM1N, CompMKN, Context, Fun11, Fun1N, FunM1,
                              FunMN, Index, LamSS, LamST, LamTS, LamTT, Mul,
                              Prime, ProjK, ProjKI, ProjMN, ProjMNI, ProjN,
                              ProjNI, Scalar, SubstK, SubstKI, SubstMN,
                              SubstMNI, SubstN, SubstNI, SumIdx, Tuple, Var,
                              lookup, shift)

EMPTY = Context()


def ctx(*entries):
    return Context(tuple(entries))


def ty(context, term):
    return synthesize(context, term)


# -- context lookup ------------------------------------------------------------

def test_lookup_most_recent_is_zero():
    assert lookup(ctx(("x", Scalar())), 0) == ("x", Scalar())


def test_lookup_shifts_past_newer_bindings():
    assert lookup(ctx(("x", Scalar()), ("y", Tuple(2))), 1) == ("x", Scalar())


def test_lookup_empty_context_fails():
    with pytest.raises(IndexOutOfRange):
        lookup(EMPTY, 0)


# -- variable and binder rules ---------------------------------------------------

def test_identity_function_checks_to_fun11():
    t = LamSS("x", Var("x", 0))
    assert type_check(EMPTY, t).type == Fun11()


def test_variable_names_do_not_matter_for_equality():
    assert LamSS("x", Var("x", 0)) == LamSS("y", Var("y", 0))


def test_unbound_variable_reports_path():
    with pytest.raises(UnboundVariable) as err:
        type_check(EMPTY, Prime(Var("f", 0)))
    assert err.value.path == ("inner",)


def test_each_binder_rule():
    two = ctx(("u", Tuple(2)))
    assert ty(EMPTY, LamTT(2, "x", Var("x", 0))) == FunMN(2, 2)
    assert ty(EMPTY, LamTS(2, "x", ProjK(Var("x", 0), 0))) == FunM1(2)
    assert ty(two, LamST("s", Var("u", 1))) == Fun1N(2)
    assert ty(EMPTY, LamSS("s", Var("s", 0))) == Fun11()
    assert ty(two, SumIdx(2, "i", ProjKI(Var("u", 1), Var("i", 0)))) \
        == Scalar()


def test_binder_body_sort_is_enforced():
    with pytest.raises(TypeMismatch):
        ty(EMPTY, LamSS("s", LamSS("t", Var("t", 0))))  # body not scalar
    with pytest.raises(TypeMismatch):
        ty(EMPTY, LamST("s", Var("s", 0)))  # body not a tuple
    with pytest.raises(TypeMismatch):
        ty(ctx(("u", Tuple(2))), LamTT(2, "x", ProjK(Var("x", 0), 0)))
    with pytest.raises(TypeMismatch):
        ty(ctx(("u", Tuple(2))), LamTS(2, "x", Var("x", 0)))
    with pytest.raises(TypeMismatch):
        ty(ctx(("u", Tuple(2))), SumIdx(2, "i", Var("u", 1)))


def test_arity_zero_and_cap_rejected():
    with pytest.raises(ArityMismatch):
        ty(EMPTY, LamTT(0, "x", Var("x", 0)))
    with pytest.raises(ArityMismatch):
        ty(EMPTY, LamTT(17, "x", Var("x", 0)))


# -- applications ----------------------------------------------------------------

FULL = ctx(("s", Scalar()), ("u", Tuple(2)), ("w", Fun11()),
           ("p", FunM1(2)), ("q", Fun1N(3)), ("r", FunMN(2, 3)),
           ("e", Index(3)))
S, U, W = Var("s", 6), Var("u", 5), Var("w", 4)
P, Q, R, E = Var("p", 3), Var("q", 2), Var("r", 1), Var("e", 0)


def test_application_rules():
    assert ty(FULL, App11(W, S)) == Scalar()
    assert ty(FULL, AppM1(P, U)) == Scalar()
    assert ty(FULL, App1N(Q, S)) == Tuple(3)
    assert ty(FULL, AppMN(R, U)) == Tuple(3)


def test_application_rejections():
    with pytest.raises(TypeMismatch):
        ty(FULL, App11(W, U))
    with pytest.raises(TypeMismatch):
        ty(FULL, AppM1(W, U))  # fun11 used with the funM1 application
    with pytest.raises(TypeMismatch):
        ty(FULL, App1N(Q, U))
    with pytest.raises(TypeMismatch):
        ty(FULL, AppMN(W, U))  # no funMN rule matches a fun11 head


def test_application_arity_must_match():
    three = ctx(("t3", Tuple(3)), ("r", FunMN(2, 3)))
    with pytest.raises(TypeMismatch):
        ty(three, AppMN(Var("r", 0), Var("t3", 1)))


# -- substitutions and projections -----------------------------------------------

def test_substitution_rules():
    assert ty(FULL, SubstK(U, 1, S)) == Tuple(2)
    assert ty(FULL, SubstN(Q, 2, S)) == Fun1N(3)
    assert ty(FULL, SubstMN(R, 0, S)) == FunMN(2, 3)
    two = ctx(("u", Tuple(2)), ("s", Scalar()), ("e2", Index(2)))
    assert ty(two, SubstKI(Var("u", 2), Var("e2", 0), Var("s", 1))) \
        == Tuple(2)


def test_substitution_index_typed_rules():
    i3 = Var("e", 0)
    assert ty(FULL, SubstNI(Q, i3, S)) == Fun1N(3)
    assert ty(FULL, SubstMNI(R, i3, S)) == FunMN(2, 3)
    with pytest.raises(TypeMismatch):
        ty(FULL, SubstKI(U, i3, S))  # index bound 3 against tuple 2


def test_substitution_rejects_out_of_range_literal():
    with pytest.raises(TypeCheckError):
        ty(FULL, SubstK(U, 2, S))
    with pytest.raises(TypeMismatch):
        ty(FULL, SubstK(U, 0, U))  # replacement must be scalar


def test_projection_rules():
    assert ty(FULL, ProjK(U, 1)) == Scalar()
    assert ty(FULL, ProjN(Q, 0)) == Fun11()
    assert ty(FULL, ProjMN(R, 2)) == FunM1(2)
    assert ty(FULL, ProjNI(Q, E)) == Fun11()
    assert ty(FULL, ProjMNI(R, E)) == FunM1(2)
    with pytest.raises(TypeMismatch):
        ty(FULL, ProjKI(U, E))


def test_projection_rejections():
    with pytest.raises(TypeMismatch):
        ty(FULL, ProjK(W, 0))  # scalars have no components
    with pytest.raises(TypeCheckError):
        ty(FULL, ProjMN(R, 3))
    with pytest.raises(TypeMismatch):
        ty(FULL, ProjN(R, 0))


# -- compositions, prime, mul -----------------------------------------------------

def test_composition_rules():
    assert ty(FULL, Comp111(W, W)) == Fun11()
    three = ctx(("p3", FunM1(3)), ("q", Fun1N(3)))
    assert ty(three, Comp1K1(Var("p3", 1), Var("q", 0))) == Fun11()
    mats = ctx(("a", FunMN(3, 2)), ("b", FunMN(2, 3)))
    assert ty(mats, CompMKN(Var("a", 1), Var("b", 0))) == FunMN(2, 2)
    assert ty(FULL, CompM1N(Q, P)) == FunMN(2, 3)


def test_composition_rejections():
    with pytest.raises(TypeMismatch):
        ty(FULL, Comp111(W, P))
    with pytest.raises(TypeMismatch):
        ty(FULL, Comp1K1(P, Q))  # inner arity 3 vs outer arity 2
    mats = ctx(("a", FunMN(3, 2)), ("b", FunMN(2, 2)))
    with pytest.raises(TypeMismatch):
        ty(mats, CompMKN(Var("a", 1), Var("b", 0)))  # 2 outputs into 3 slots
    with pytest.raises(TypeMismatch):
        ty(FULL, CompM1N(P, Q))


def test_prime_and_mul():
    assert ty(FULL, Prime(W)) == Fun11()
    assert ty(FULL, Mul(S, S)) == Scalar()
    with pytest.raises(TypeMismatch):
        ty(FULL, Prime(P))  # derivative symbol is univariate only
    with pytest.raises(TypeMismatch):
        ty(FULL, Mul(S, U))


# -- determinism and weakening -----------------------------------------------------

def test_type_check_is_deterministic():
    t = LamTS(2, "x", Mul(ProjK(Var("x", 0), 0), ProjK(Var("x", 0), 1)))
    first = type_check(EMPTY, t)
    second = type_check(EMPTY, t)
    assert isinstance(first, TypedTerm)
    assert first.type == second.type == FunM1(2)


def test_weakening_after_lift():
    t = AppM1(P, U)
    assert ty(FULL, t) == Scalar()
    extended = Context((("new", Scalar()),) + FULL.entries)
    # the new entry sits at the *front* (oldest end): indices are unchanged
    assert ty(extended, t) == Scalar()
    # extending at the binding end requires the standard lift
    extended_recent = FULL.extend("new", Scalar())
    assert ty(extended_recent, shift(t, 1)) == Scalar()
