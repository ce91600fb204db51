import pytest
from hypothesis import given, strategies as st

from jacobiform import generic as G
from jacobiform import terms as T
from jacobiform.errors import ParseError
from jacobiform.sexpr import parse_term, read_sexpr, term_to_sexpr


def test_identity_round_trip():
    t = parse_term("(lam-ss x (var x 0))")
    assert t == T.LamSS("x", T.Var("x", 0))
    assert term_to_sexpr(t) == "(lam-ss x (var x 0))"


def test_prime_of_variable():
    assert parse_term("(prime (var f 0))") == T.Prime(T.Var("f", 0))


def test_unbalanced_input_is_a_syntax_error():
    with pytest.raises(ParseError):
        parse_term("(app-11 (var f 0)")


def test_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_term("(var x 0))")
    assert err.value.line == 1
    assert err.value.column == 10


def test_generic_forms():
    t = parse_term("(lam-ts (arity-var m) x (proj-k (var x 0) i))",
                   generic=True)
    assert t == T.LamTS("m", "x", T.ProjK(T.Var("x", 0), "i"))
    assert parse_term(term_to_sexpr(t), generic=True) == t


def test_expansion_forms_round_trip():
    text = "(expand-subst (var x 0) i (var z 1))"
    t = parse_term(text, generic=True)
    assert t == G.ExpandSubst(T.Var("x", 0), "i", T.Var("z", 1))
    assert parse_term(term_to_sexpr(t), generic=True) == t


def test_generic_forms_rejected_in_core_mode():
    with pytest.raises(ParseError):
        parse_term("(expand (var x 0))")


def test_arity_zero_rejected_at_parse_time():
    with pytest.raises(ParseError):
        parse_term("(lam-tt 0 x (var x 0))")


names = st.sampled_from(["x", "y", "z", "f", "g", "h2"])
indices = st.integers(min_value=0, max_value=3)
arities = st.integers(min_value=1, max_value=4)


def _terms(depth):
    if depth == 0:
        return st.builds(T.Var, names, indices)
    sub = _terms(depth - 1)
    return st.one_of(
        st.builds(T.Var, names, indices),
        st.builds(T.LamSS, names, sub),
        st.builds(T.LamTS, arities, names, sub),
        st.builds(T.LamTT, arities, names, sub),
        st.builds(T.SumIdx, arities, names, sub),
        st.builds(T.App11, sub, sub),
        st.builds(T.AppMN, sub, sub),
        st.builds(T.SubstK, sub, indices, sub),
        st.builds(T.SubstKI, sub, sub, sub),
        st.builds(T.ProjMN, sub, indices),
        st.builds(T.ProjNI, sub, sub),
        st.builds(T.Comp1K1, sub, sub),
        st.builds(T.CompM1N, sub, sub),
        st.builds(T.Prime, sub),
        st.builds(T.Mul, sub, sub),
    )


@given(_terms(3))
def test_print_parse_round_trip(t):
    assert parse_term(term_to_sexpr(t)) == t


def test_read_sexpr_nested_lists_and_strings():
    node = read_sexpr('(poly 2 "3/2 x1^2 x2 + -1 x2")')
    assert node[0] == "poly"
    assert node[1] == "2"
    assert str(node[2]) == "3/2 x1^2 x2 + -1 x2"
