"""The term language: type universe, contexts, and the raw syntax tree.

Terms follow the seven-type universe (index/fun11/funM1/fun1N/funMN/tuple/
scalar) and carry variables as de Bruijn indices with a purely cosmetic
display name.  Structural equality therefore *is* alpha-equivalence: every
name field is excluded from comparisons.

Arity and literal-index fields normally hold ints; the expansion layer
reuses the same constructors with symbolic names (strings) in those slots,
and the core checker rejects anything symbolic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Union

from .errors import IndexOutOfRange

# int in core terms, a declared arity/index variable in generic ones
Nat = Union[int, str]

ARITY_CAP = 16


# -- types -------------------------------------------------------------------

class TypeExpr:
    """Base class; the seven constructors below are the whole universe."""

    __slots__ = ()


@dataclass(frozen=True)
class Scalar(TypeExpr):
    def __str__(self):
        return "scalar"


@dataclass(frozen=True)
class Fun11(TypeExpr):
    def __str__(self):
        return "fun11"


@dataclass(frozen=True)
class Index(TypeExpr):
    bound: Nat

    def __str__(self):
        return f"(index {self.bound})"


@dataclass(frozen=True)
class FunM1(TypeExpr):
    m: Nat

    def __str__(self):
        return f"(fun-m1 {self.m})"


@dataclass(frozen=True)
class Fun1N(TypeExpr):
    n: Nat

    def __str__(self):
        return f"(fun-1n {self.n})"


@dataclass(frozen=True)
class FunMN(TypeExpr):
    m: Nat
    n: Nat

    def __str__(self):
        return f"(fun-mn {self.m} {self.n})"


@dataclass(frozen=True)
class Tuple(TypeExpr):
    width: Nat

    def __str__(self):
        return f"(tuple {self.width})"


# -- contexts ------------------------------------------------------------------

@dataclass(frozen=True)
class Context:
    """Ordered (name, type) bindings, most recently bound last."""

    entries: tuple[tuple[str, TypeExpr], ...] = ()

    def extend(self, name: str, ty: TypeExpr) -> "Context":
        return Context(self.entries + ((name, ty),))

    def __len__(self):
        return len(self.entries)


def lookup(ctx: Context, index: int) -> tuple[str, TypeExpr]:
    """Resolve a de Bruijn index (0 = most recent binding)."""
    if not 0 <= index < len(ctx.entries):
        raise IndexOutOfRange(index, len(ctx.entries))
    return ctx.entries[-1 - index]


# -- terms ---------------------------------------------------------------------

class Term:
    """Base class for raw syntax trees (possibly ill-typed)."""

    __slots__ = ()


def _name():
    return field(compare=False)


@dataclass(frozen=True)
class Var(Term):
    name: str = _name()
    index: int = 0


# binders: each binds exactly one context entry
@dataclass(frozen=True)
class LamTT(Term):  # tuple m -> tuple n
    arity: Nat
    name: str = _name()
    body: Term = None


@dataclass(frozen=True)
class LamTS(Term):  # tuple m -> scalar
    arity: Nat
    name: str = _name()
    body: Term = None


@dataclass(frozen=True)
class LamST(Term):  # scalar -> tuple n
    name: str = _name()
    body: Term = None


@dataclass(frozen=True)
class LamSS(Term):  # scalar -> scalar
    name: str = _name()
    body: Term = None


@dataclass(frozen=True)
class SumIdx(Term):  # finite sum over index k
    bound: Nat
    name: str = _name()
    body: Term = None


@dataclass(frozen=True)
class App11(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class AppM1(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class App1N(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class AppMN(Term):
    fn: Term
    arg: Term


# substitutions with a literal position
@dataclass(frozen=True)
class SubstK(Term):  # on tuple k
    subject: Term
    pos: Nat
    repl: Term


@dataclass(frozen=True)
class SubstN(Term):  # on fun1N n
    subject: Term
    pos: Nat
    repl: Term


@dataclass(frozen=True)
class SubstMN(Term):  # on funMN m n
    subject: Term
    pos: Nat
    repl: Term


# substitutions with an index-typed position
@dataclass(frozen=True)
class SubstKI(Term):
    subject: Term
    pos_term: Term
    repl: Term


@dataclass(frozen=True)
class SubstNI(Term):
    subject: Term
    pos_term: Term
    repl: Term


@dataclass(frozen=True)
class SubstMNI(Term):
    subject: Term
    pos_term: Term
    repl: Term


# projections
@dataclass(frozen=True)
class ProjK(Term):
    subject: Term
    pos: Nat


@dataclass(frozen=True)
class ProjN(Term):
    subject: Term
    pos: Nat


@dataclass(frozen=True)
class ProjMN(Term):
    subject: Term
    pos: Nat


@dataclass(frozen=True)
class ProjKI(Term):
    subject: Term
    pos_term: Term


@dataclass(frozen=True)
class ProjNI(Term):
    subject: Term
    pos_term: Term


@dataclass(frozen=True)
class ProjMNI(Term):
    subject: Term
    pos_term: Term


# compositions
@dataclass(frozen=True)
class Comp111(Term):
    outer: Term
    inner: Term


@dataclass(frozen=True)
class Comp1K1(Term):
    outer: Term
    inner: Term


@dataclass(frozen=True)
class CompMKN(Term):
    outer: Term
    inner: Term


@dataclass(frozen=True)
class CompM1N(Term):
    outer: Term
    inner: Term


@dataclass(frozen=True)
class Prime(Term):  # univariate derivative symbol
    inner: Term


@dataclass(frozen=True)
class Mul(Term):  # scalar multiplication
    left: Term
    right: Term


BINDERS = (LamTT, LamTS, LamST, LamSS, SumIdx)

# constructors of Fig-6 shape; the expansion layer adds its own node kinds
CORE_NODES = (
    Var, LamTT, LamTS, LamST, LamSS, SumIdx,
    App11, AppM1, App1N, AppMN,
    SubstK, SubstN, SubstMN, SubstKI, SubstNI, SubstMNI,
    ProjK, ProjN, ProjMN, ProjKI, ProjNI, ProjMNI,
    Comp111, Comp1K1, CompMKN, CompM1N, Prime, Mul,
)


# -- generic tree plumbing -----------------------------------------------------

def child_slots(t: Term) -> list[tuple[object, Term]]:
    """(slot, child) pairs; slots are field names, or ints into a tuple field."""
    out = []
    for f in fields(t):
        value = getattr(t, f.name)
        if isinstance(value, Term):
            out.append((f.name, value))
        elif isinstance(value, tuple) and value and all(
                isinstance(v, Term) for v in value):
            out.extend(enumerate(value))
    return out


def get_sub(t: Term, path: tuple) -> Term:
    for slot in path:
        if isinstance(slot, int):
            t = t.terms[slot]
        else:
            t = getattr(t, slot)
    return t


def replace_sub(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    slot, rest = path[0], path[1:]
    if isinstance(slot, int):
        items = list(t.terms)
        items[slot] = replace_sub(items[slot], rest, new)
        return replace(t, terms=tuple(items))
    return replace(t, **{slot: replace_sub(getattr(t, slot), rest, new)})


def binds_term_var(t: Term) -> bool:
    return isinstance(t, BINDERS)


def map_children(t: Term, fn) -> Term:
    updates = {}
    for f in fields(t):
        value = getattr(t, f.name)
        if isinstance(value, Term):
            updates[f.name] = fn(value)
        elif isinstance(value, tuple) and value and all(
                isinstance(v, Term) for v in value):
            updates[f.name] = tuple(fn(v) for v in value)
    return replace(t, **updates) if updates else t


def shift(t: Term, by: int, cutoff: int = 0) -> Term:
    """Standard de Bruijn lift of free variables by `by`."""
    if isinstance(t, Var):
        if t.index >= cutoff:
            return Var(t.name, t.index + by)
        return t
    inner_cut = cutoff + 1 if binds_term_var(t) else cutoff
    return map_children(t, lambda c: shift(c, by, inner_cut))


def is_free_in(t: Term, index: int) -> bool:
    if isinstance(t, Var):
        return t.index == index
    bump = 1 if binds_term_var(t) else 0
    return any(is_free_in(c, index + bump) for _, c in child_slots(t))
