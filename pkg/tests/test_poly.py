from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from jacobiform.errors import ArityMismatch, ParseError, ResourceLimit
from jacobiform.poly import (MultiPoly, format_poly, parse_poly,
                             poly_compose, poly_derivative)

from oracles import diff_quotient_partial


def P(nvars, text):
    return parse_poly(nvars, text)


def test_canonical_form_drops_zero_coefficients():
    p = MultiPoly(1, {(2,): Fraction(1), (0,): Fraction(0)})
    assert (0,) not in p.terms
    assert p == P(1, "1 x1^2")


def test_literal_round_trip():
    p = P(2, "3/2 x1^2 x2 + -1 x2")
    assert parse_poly(2, format_poly(p)) == p
    assert p.terms == {(2, 1): Fraction(3, 2), (0, 1): Fraction(-1)}


def test_literal_rejects_garbage():
    with pytest.raises(ParseError):
        parse_poly(1, "x1")  # coefficient is mandatory
    with pytest.raises(ParseError):
        parse_poly(1, "1 y1")
    with pytest.raises(ParseError):
        parse_poly(1, "1 x2")


def test_derivative_of_constant_is_zero():
    assert poly_derivative(P(1, "5")) == MultiPoly(1, {})


def test_derivative_of_identity_is_one():
    assert poly_derivative(P(1, "1 x1")) == P(1, "1")


def test_derivative_matches_difference_quotient_oracle():
    # oracle: expand (p(z+h)-p(z))/h exactly, then h := 0
    p = P(1, "3 x1^2 + 2 x1")
    expected = diff_quotient_partial(p, 0)
    assert expected == P(1, "6 x1 + 2")  # frozen from the oracle
    assert poly_derivative(p) == expected


def test_derivative_requires_univariate():
    with pytest.raises(ArityMismatch):
        poly_derivative(P(2, "1 x1 x2"))


def test_compose_projection_returns_inner():
    outer = P(2, "1 x1")
    inners = [P(2, "1 x1 + 1 x2"), P(2, "1 x1 x2")]
    assert poly_compose(outer, inners) == inners[0]


def test_compose_constant_ignores_inners():
    outer = P(2, "7/3")
    inners = [P(3, "1 x1"), P(3, "1 x2 x3")]
    assert poly_compose(outer, inners) == P(3, "7/3")


def test_compose_agrees_with_pointwise_evaluation():
    # oracle: evaluate both sides at 10 fixed rational points, exactly
    outer = P(2, "1 x1 x2")
    inners = [P(2, "1 x1 + 1 x2"), P(2, "1 x1 x2")]
    composed = poly_compose(outer, inners)
    assert composed == P(2, "1 x1^2 x2 + 1 x1 x2^2")
    points = [(Fraction(a, b), Fraction(c, 3))
              for a, b, c in [(1, 2, 1), (2, 3, 5), (-4, 5, 2), (7, 2, -1),
                              (0, 1, 4), (5, 7, -8), (-1, 3, 0), (9, 4, 7),
                              (-3, 8, -5), (11, 6, 1)]]
    for pt in points:
        lhs = composed.eval_at(pt)
        rhs = outer.eval_at([q.eval_at(pt) for q in inners])
        assert lhs == rhs


@given(st.lists(st.fractions(max_denominator=9), min_size=4, max_size=4),
       st.lists(st.fractions(max_denominator=9), min_size=4, max_size=4))
def test_leibniz_rule(cs, ds):
    p = MultiPoly(1, {(i,): c for i, c in enumerate(cs)})
    q = MultiPoly(1, {(i,): d for i, d in enumerate(ds)})
    lhs = poly_derivative(p * q)
    rhs = poly_derivative(p) * q + p * poly_derivative(q)
    assert lhs == rhs


@given(st.lists(st.fractions(max_denominator=9), min_size=3, max_size=3))
def test_partial_matches_oracle_on_random_bivariate(cs):
    p = MultiPoly(2, {(2, 1): cs[0], (1, 1): cs[1], (0, 2): cs[2]})
    for var in (0, 1):
        assert p.partial(var) == diff_quotient_partial(p, var)


def test_degree_cap_enforced():
    with pytest.raises(ResourceLimit):
        MultiPoly(1, {(65,): Fraction(1)})


def test_pad_and_insert_vars():
    p = P(1, "2 x1")
    assert p.pad(3) == P(3, "2 x1")
    assert p.insert_vars(0, 2) == P(3, "2 x3")
