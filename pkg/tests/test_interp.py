from fractions import Fraction

import pytest

from jacobiform import generic as G
from jacobiform import terms as T
from jacobiform.check import type_check
from jacobiform.errors import EnvironmentMismatch
from jacobiform.interp import (VFun11, VFunM1, VFunMN, VIndex, VScalar,
                               VTuple, check_assumed_equalities,
                               environment_from_sexpr, eval_raw, eval_term,
                               value_from_sexpr, value_to_sexpr)
from jacobiform.poly import parse_poly
from jacobiform.terms import (Context, Fun11, FunMN, Index, Scalar, Tuple,
                              Var)

from oracles import diff_quotient_partial


def P(nvars, text):
    return parse_poly(nvars, text)


def typed(ctx, term):
    return type_check(ctx, term)


def test_variable_lookup():
    ctx = Context((("x", Scalar()),))
    v = eval_term((VScalar(Fraction(7, 2)),), typed(ctx, Var("x", 0)))
    assert v == VScalar(Fraction(7, 2))


def test_application_of_polynomial_value():
    # oracle: 3^2 + 1 = 10 by long-hand rational arithmetic
    ctx = Context((("f", Fun11()), ("c", Scalar())))
    env = (VFun11(P(1, "1 x1^2 + 1")), VScalar(Fraction(3)))
    t = typed(ctx, T.App11(Var("f", 1), Var("c", 0)))
    assert eval_term(env, t) == VScalar(Fraction(10))


def test_sum_over_index_typed_projection():
    # oracle: brute force over both index values, 2 + 5 = 7
    ctx = Context((("t", Tuple(2)),))
    env = (VTuple((Fraction(2), Fraction(5))),)
    t = typed(ctx, T.SumIdx(2, "i", T.ProjKI(Var("t", 1), Var("i", 0))))
    assert eval_term(env, t) == VScalar(Fraction(7))


def test_lambda_binders_produce_polynomials():
    ctx = Context()
    square = typed(ctx, T.LamSS("z", T.Mul(Var("z", 0), Var("z", 0))))
    assert eval_term((), square) == VFun11(P(1, "1 x1^2"))

    pair = typed(ctx, T.LamTS(2, "x", T.Mul(T.ProjK(Var("x", 0), 0),
                                            T.ProjK(Var("x", 0), 1))))
    assert eval_term((), pair) == VFunM1(2, P(2, "1 x1 x2"))


def test_nested_binder_with_captured_outer_variable():
    # z -> (w -> z * w)(z): the inner closure's value carries the outer
    # indeterminate as an exact coefficient
    inner = T.LamSS("w", T.Mul(Var("z", 1), Var("w", 0)))
    term = T.LamSS("z", T.App11(inner, Var("z", 0)))
    v = eval_term((), typed(Context(), term))
    assert v == VFun11(P(1, "1 x1^2"))


def test_prime_is_the_coefficient_rule():
    ctx = Context((("f", Fun11()),))
    env = (VFun11(P(1, "3 x1^2 + 2 x1")),)
    t = typed(ctx, T.Prime(Var("f", 0)))
    assert eval_term(env, t) == VFun11(P(1, "6 x1 + 2"))


def test_composition_value():
    ctx = Context((("f", Fun11()), ("g", Fun11())))
    env = (VFun11(P(1, "1 x1^2")), VFun11(P(1, "1 x1 + 1")))
    t = typed(ctx, T.Comp111(Var("f", 1), Var("g", 0)))
    assert eval_term(env, t) == VFun11(P(1, "1 x1^2 + 2 x1 + 1"))


def test_substitution_on_function_value_replaces_component():
    ctx = Context((("r", FunMN(2, 2)), ("c", Scalar())))
    env = (VFunMN(2, 2, (P(2, "1 x1"), P(2, "1 x2"))), VScalar(Fraction(4)))
    t = typed(ctx, T.SubstMN(Var("r", 1), 1, Var("c", 0)))
    assert eval_term(env, t) == VFunMN(2, 2, (P(2, "1 x1"), P(2, "4")))


def test_index_typed_substitution_and_projection():
    ctx = Context((("r", FunMN(2, 2)), ("c", Scalar()), ("e", Index(2))))
    env = (VFunMN(2, 2, (P(2, "1 x1"), P(2, "1 x2"))),
           VScalar(Fraction(4)), VIndex(1, 2))
    tproj = typed(ctx, T.ProjMNI(Var("r", 2), Var("e", 0)))
    assert eval_term(env, tproj) == VFunM1(2, P(2, "1 x2"))
    tsub = typed(ctx, T.SubstMNI(Var("r", 2), Var("e", 0), Var("c", 1)))
    assert eval_term(env, tsub) == VFunMN(2, 2, (P(2, "1 x1"), P(2, "4")))


def test_environment_mismatch_is_rejected():
    ctx = Context((("x", Scalar()),))
    with pytest.raises(EnvironmentMismatch):
        eval_term((), typed(ctx, Var("x", 0)))
    with pytest.raises(EnvironmentMismatch):
        eval_term((VTuple((Fraction(1),)),), typed(ctx, Var("x", 0)))


def test_meta_nodes_evaluate():
    ctx = Context((("s", Scalar()), ("t", Tuple(2))))
    env = (VScalar(Fraction(2)), VTuple((Fraction(3), Fraction(5))))
    plus = G.Plus((Var("s", 1), Var("s", 1)))
    assert eval_raw(ctx, env, plus) == VScalar(Fraction(4))
    expand = G.Expand(Var("t", 0))
    assert eval_raw(ctx, env, expand) == VTuple((Fraction(3), Fraction(5)))
    esub = G.ExpandSubst(Var("t", 0), 0, Var("s", 1))
    assert eval_raw(ctx, env, esub) == VTuple((Fraction(2), Fraction(5)))
    ssym = G.SumSym("k", 2, T.ProjK(Var("t", 0), "k"))
    assert eval_raw(ctx, env, ssym) == VScalar(Fraction(8))


def test_partial_macro_matches_its_unfolding():
    ctx = Context((("r", FunMN(2, 2)),))
    env = (VFunMN(2, 2, (P(2, "1 x1^2 x2"), P(2, "1 x2"))),)
    macro = G.PartialD(T.ProjMN(Var("r", 0), 0), 1, "x")
    unfolded = G.unfold_partial_derivative(macro, 2)
    assert eval_raw(ctx, env, macro) == eval_raw(ctx, env, unfolded)
    assert eval_raw(ctx, env, macro) == VFunM1(2, P(2, "1 x1^2"))


def test_partial_macro_agrees_with_difference_quotient_oracle():
    p = P(2, "2 x1^3 x2 + -1/2 x1 x2^2")
    ctx = Context((("r", FunMN(2, 1)),))
    env = (VFunMN(2, 1, (p,)),)
    for i in (0, 1):
        macro = G.PartialD(T.ProjMN(Var("r", 0), 0), i, "x")
        assert eval_raw(ctx, env, macro) == VFunM1(2, diff_quotient_partial(p, i))


def test_check_assumed_equalities_worked_example():
    # f = y1*y2, g = (x1+x2, x1*x2); both identities hold exactly, and both
    # sides of the chain rule evaluate to 21 at the point (2, 3):
    # composite (x1)^2 x2 + x1 (x2)^2 has d/dx1 = 2 x1 x2 + x2^2 = 12+9 = 21,
    # independently 6*1 + 5*3 = 21 contracts the Jacobian sum.
    f = VFunMN(2, 1, (P(2, "1 x1 x2"),))
    g = VFunMN(2, 2, (P(2, "1 x1 + 1 x2"), P(2, "1 x1 x2")))
    report = check_assumed_equalities(f, g, trials=5, seed=7)
    assert report.all_equal
    assert report.lin_symbolic_equal and report.chain_symbolic_equal

    from jacobiform.interp import _chain_local_sides
    composite = P(2, "1 x1^2 x2 + 1 x1 x2^2")
    assert composite.partial(0).eval_at((2, 3)) == 21
    lhs, _ = _chain_local_sides(2, 2, 0, 0)
    ctx = Context((("f", FunMN(2, 1)), ("g", FunMN(2, 2))))
    value = eval_raw(ctx, (f, g), lhs)
    assert value.poly.eval_at((2, 3)) == Fraction(21)


def test_chain_rule_reduces_to_plain_partial_for_identity_inner_map():
    f = VFunMN(2, 2, (P(2, "1 x1^2 + 1 x2"), P(2, "3 x1 x2")))
    identity = VFunMN(2, 2, (P(2, "1 x1"), P(2, "1 x2")))
    report = check_assumed_equalities(f, identity, trials=3, seed=1, j=1, i=0)
    assert report.all_equal


def test_constant_f_gives_zero_everywhere():
    f = VFunMN(2, 1, (P(2, "5"),))
    g = VFunMN(2, 2, (P(2, "1 x1 + 1 x2"), P(2, "1 x1 x2")))
    report = check_assumed_equalities(f, g, trials=3, seed=2)
    assert report.all_equal
    ctx = Context((("f", FunMN(2, 1)), ("g", FunMN(2, 2))))
    from jacobiform.interp import _chain_local_sides
    lhs, rhs = _chain_local_sides(2, 2, 0, 0)
    assert eval_raw(ctx, (f, g), lhs).poly.is_zero()
    assert eval_raw(ctx, (f, g), rhs).poly.is_zero()


def test_value_sexpr_round_trip():
    from jacobiform.sexpr import read_sexpr
    values = [VScalar(Fraction(-7, 3)),
              VTuple((Fraction(1), Fraction(1, 2))),
              VIndex(1, 3),
              VFun11(P(1, "1 x1^2 + -1")),
              VFunM1(2, P(2, "1 x1 x2")),
              VFunMN(2, 2, (P(2, "1 x1"), P(2, "2 x2")))]
    for v in values:
        assert value_from_sexpr(read_sexpr(value_to_sexpr(v))) == v


def test_environment_file_parsing():
    text = ('(env (f (fun-11 (poly 1 "1 x1^2 + 1")))'
            ' (c (scalar 3)))')
    ctx, env = environment_from_sexpr(text)
    assert ctx.entries == (("f", Fun11()), ("c", Scalar()))
    t = typed(ctx, T.App11(Var("f", 1), Var("c", 0)))
    assert eval_term(env, t) == VScalar(Fraction(10))
