"""Independent oracles used to freeze expected values in the test suite.

These deliberately avoid the code paths they check: derivatives come from a
symbolic difference quotient (exact division by h, then h := 0), and
determinants from cofactor expansion rather than the Leibniz sum.
"""

from __future__ import annotations

from fractions import Fraction

from jacobiform.poly import MultiPoly


def diff_quotient_partial(p: MultiPoly, var: int) -> MultiPoly:
    """Expand (p(.., x_var + h, ..) - p(..)) / h exactly, then set h := 0.

    The quotient is by construction a polynomial in the original variables
    and h; dividing by h shifts the h-exponent down, and h := 0 keeps the
    h-free part.  No limits, no rounding.
    """
    n = p.nvars
    # work in n+1 variables, h last
    shifted_args = []
    for i in range(n):
        xi = MultiPoly.variable(i, n + 1)
        if i == var:
            xi = xi + MultiPoly.variable(n, n + 1)
        shifted_args.append(xi)
    numerator = p.compose(shifted_args) - p.pad(n + 1)
    # divide by h: every monomial must carry h^(>=1)
    quotient_terms = {}
    for exps, coeff in numerator.terms.items():
        assert exps[n] >= 1, "difference quotient not divisible by h"
        quotient_terms[exps[:n] + (exps[n] - 1,)] = coeff
    quotient = MultiPoly(n + 1, quotient_terms)
    at_zero = {}
    for exps, coeff in quotient.terms.items():
        if exps[n] == 0:
            at_zero[exps[:n]] = coeff
    return MultiPoly(n, at_zero)


def cofactor_determinant(rows: list[list[MultiPoly]]) -> MultiPoly:
    """Determinant by first-row cofactor expansion."""
    n = len(rows)
    assert all(len(r) == n for r in rows)
    nvars = rows[0][0].nvars
    if n == 1:
        return rows[0][0]
    total = MultiPoly.constant(0, nvars)
    for col in range(n):
        minor = [[rows[r][c] for c in range(n) if c != col]
                 for r in range(1, n)]
        term = rows[0][col] * cofactor_determinant(minor)
        total = total + (term if col % 2 == 0 else -term)
    return total


def rational_matmul(a: list[list[Fraction]],
                    b: list[list[Fraction]]) -> list[list[Fraction]]:
    """Plain rational matrix multiplication (hand rules)."""
    rows, inner, cols = len(a), len(b), len(b[0])
    assert all(len(r) == inner for r in a)
    return [[sum((a[r][k] * b[k][c] for k in range(inner)), Fraction(0))
             for c in range(cols)] for r in range(rows)]
