"""Encoding the partial derivative through the univariate derivative symbol.

Given a multivariate map f and indices j (output) and i (input slot), the
encoded term is

    (x...) -> (z -> f^j(x...[slot i := z]))'(x^i)

built from the ordinary constructors: an outer tuple binder, an inner scalar
binder, a substitution at slot i, the j-projection, the derivative symbol,
and an application at the i-projection.  Binder names are cosmetic; the
construction captures no free variable of f.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import terms as T
from .check import TypedTerm, synthesize, type_check
from .errors import IndexOutOfRange, TypeMismatch
from .generic import (CompScalar, PartialD, erase_markers, generic_type,
                      unfold_partial_derivative)
from .terms import (Context, Fun1N, FunM1, FunMN, Term, Tuple, Var)


@dataclass(frozen=True)
class PartialDerivativeSpec:
    """f : funMN m n (concrete or generic), with j < n and i < m."""

    f: Term
    context: Context
    j: int
    i: int


def project_component(f: TypedTerm, j) -> TypedTerm:
    """The j-th component f^j, typed by the matching projection rule."""
    match f.type:
        case Tuple():
            term = T.ProjK(f.term, j)
        case Fun1N():
            term = T.ProjN(f.term, j)
        case FunMN():
            term = T.ProjMN(f.term, j)
        case other:
            raise TypeMismatch("a projectable type (tuple, fun1N, funMN)",
                               other)
    return TypedTerm(term, f.context, synthesize(f.context, term,
                                                 strict=False))


def encode_partial_derivative(spec: PartialDerivativeSpec) -> TypedTerm:
    """Build the encoded partial derivative; checks to funM1 m."""
    from .check import _core_only

    fty = generic_type(spec.context, spec.f)
    match fty:
        case FunMN(m=m, n=n):
            if isinstance(n, int) and isinstance(spec.j, int) \
                    and not 0 <= spec.j < n:
                raise IndexOutOfRange(spec.j, n)
            subject = T.ProjMN(spec.f, spec.j)
        case FunM1(m=m):
            # already scalar-valued (an explicit f^j . g composite, say)
            if spec.j not in (0, None):
                raise IndexOutOfRange(spec.j, 1)
            subject = spec.f
        case other:
            raise TypeMismatch("funMN (or funM1)", other)
    if isinstance(m, int) and isinstance(spec.i, int) \
            and not 0 <= spec.i < m:
        raise IndexOutOfRange(spec.i, m)
    term = unfold_partial_derivative(PartialD(subject, spec.i, "x"), m)
    if isinstance(m, int) and isinstance(spec.i, int):
        term = erase_markers(term)
        if _core_only(term):
            return type_check(spec.context, term)
    return TypedTerm(term, spec.context,
                     generic_type(spec.context, term))


def partial_derivative_of_var(ctx: Context, name: str, index: int, j, i) \
        -> TypedTerm:
    """Convenience: encode the partial derivative of a context variable."""
    return encode_partial_derivative(
        PartialDerivativeSpec(Var(name, index), ctx, j, i))


def partial_derivative_of_composition(ctx: Context, f: Term, g: Term, j, i) \
        -> TypedTerm:
    """Encode the partial derivative of f^j . g (f after g)."""
    subject = CompScalar(T.ProjMN(f, j), g)
    return encode_partial_derivative(
        PartialDerivativeSpec(subject, ctx, 0, i))
