"""Generic-arity terms: tuple expansion, arity variables, instantiation.

This layer reuses the core constructors (whose arity and position fields may
hold declared symbols) and adds the notation-level nodes that the appendix
listings need: expansion markers, the finite/symbolic scalar sums produced by
the derivative-linearity rule, the partial-derivative macro, named local
definitions, the scalar-valued composition f^j . g, and the point-free
operators.  Instantiating an arity assignment turns expansion markers into
plain Fig-6 substitutions; symbolic sums unroll into explicit ones.

Symbol binding for sum indices is by name (SumSym/OPlus bind no de Bruijn
variable), so one summation symbol must not shadow another; the derivation
engine never nests same-named sums.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import check as C
from . import terms as T
from .errors import (JacobiformError, PositionOutOfRange, TypeCheckError,
                     TypeMismatch, UnassignedArity)
from .terms import (App11, App1N, AppM1, AppMN, Comp111, CompMKN, Context,
                    Fun11, Fun1N, FunM1, FunMN, Index, LamSS, LamST, LamTS,
                    LamTT, Nat, ProjK, ProjMN, ProjN, Scalar, SubstK, SumIdx,
                    Term, Tuple, TypeExpr, Var, child_slots, map_children,
                    shift, _name)


# -- expansion-layer nodes -----------------------------------------------------

@dataclass(frozen=True)
class Expand(Term):
    """Display marker for the tuple expansion `subject...`."""

    subject: Term


@dataclass(frozen=True)
class ExpandSubst(Term):
    """`subject...[bullet^pos := repl]`: expansion with one slot replaced."""

    subject: Term
    pos: Nat
    repl: Term


@dataclass(frozen=True)
class SumSym(Term):
    """Scalar sum over a symbolic index (name-bound, not de Bruijn)."""

    sym: str
    bound: Nat
    body: Term


@dataclass(frozen=True)
class Plus(Term):
    """Explicit n-ary scalar sum (the unrolled form of SumSym)."""

    terms: tuple[Term, ...]


@dataclass(frozen=True)
class PartialD(Term):
    """Partial-derivative macro over a scalar-valued map (funM1)."""

    subject: Term
    pos: Nat
    varname: str = _name()


@dataclass(frozen=True)
class DefSym(Term):
    """A locally named definition (the a^k / b^k abbreviations)."""

    base: str = _name()
    sup: Nat = _name()
    defn: Term = None


@dataclass(frozen=True)
class CompScalar(Term):
    """funM1 k composed with funMN m k; has no Fig-6 constructor."""

    outer: Term
    inner: Term


@dataclass(frozen=True)
class OTimes(Term):
    """Point-wise product of two scalar-valued maps."""

    left: Term
    right: Term


@dataclass(frozen=True)
class OTimesPre(Term):
    """Product with the left factor precomposed: (left . pre) * right."""

    left: Term
    right: Term
    pre: Term


@dataclass(frozen=True)
class OPlus(Term):
    """Function-level sum over a symbolic index."""

    sym: str
    bound: Nat
    body: Term


@dataclass(frozen=True)
class OPlusLit(Term):
    terms: tuple[Term, ...]


META_NODES = (Expand, ExpandSubst, SumSym, Plus, PartialD, DefSym, CompScalar,
              OTimes, OTimesPre, OPlus, OPlusLit)


# -- generic typing rules (registered with the checker) -------------------------

def _rule_expand(ctx, t, path, sub):
    sty = sub(ctx, t.subject, path + ("subject",))
    if not isinstance(sty, Tuple):
        raise TypeMismatch("tuple", sty, path + ("subject",))
    return sty


def _rule_expand_subst(ctx, t, path, sub):
    sty = sub(ctx, t.subject, path + ("subject",))
    if not isinstance(sty, Tuple):
        raise TypeMismatch("tuple", sty, path + ("subject",))
    C._fin_ok(t.pos, sty.width, path, strict=False)
    rty = sub(ctx, t.repl, path + ("repl",))
    if not isinstance(rty, Scalar):
        raise TypeMismatch(Scalar(), rty, path + ("repl",))
    return sty


def _rule_sum_sym(ctx, t, path, sub):
    bty = sub(ctx, t.body, path + ("body",))
    if not isinstance(bty, Scalar):
        raise TypeMismatch(Scalar(), bty, path + ("body",))
    return Scalar()


def _rule_plus(ctx, t, path, sub):
    if not t.terms:
        raise TypeCheckError("empty sum", path)
    for i, item in enumerate(t.terms):
        ity = sub(ctx, item, path + (i,))
        if not isinstance(ity, Scalar):
            raise TypeMismatch(Scalar(), ity, path + (i,))
    return Scalar()


def _rule_partial(ctx, t, path, sub):
    sty = sub(ctx, t.subject, path + ("subject",))
    if not isinstance(sty, FunM1):
        raise TypeMismatch("funM1", sty, path + ("subject",))
    C._fin_ok(t.pos, sty.m, path, strict=False)
    return sty


def _rule_def_sym(ctx, t, path, sub):
    return sub(ctx, t.defn, path + ("defn",))


def _rule_comp_scalar(ctx, t, path, sub):
    fty = sub(ctx, t.outer, path + ("outer",))
    gty = sub(ctx, t.inner, path + ("inner",))
    if not isinstance(fty, FunM1):
        raise TypeMismatch("funM1", fty, path + ("outer",))
    if not isinstance(gty, FunMN) or not C.same_nat(gty.n, fty.m):
        raise TypeMismatch("funMN with matching output arity", gty,
                           path + ("inner",))
    return FunM1(gty.m)


def _rule_otimes(ctx, t, path, sub):
    lty = sub(ctx, t.left, path + ("left",))
    rty = sub(ctx, t.right, path + ("right",))
    if not isinstance(lty, FunM1) or not isinstance(rty, FunM1) \
            or not C.same_nat(lty.m, rty.m):
        raise TypeMismatch("two funM1 of equal arity", (lty, rty), path)
    return lty


def _rule_otimes_pre(ctx, t, path, sub):
    lty = sub(ctx, t.left, path + ("left",))
    rty = sub(ctx, t.right, path + ("right",))
    pty = sub(ctx, t.pre, path + ("pre",))
    if not isinstance(lty, FunM1):
        raise TypeMismatch("funM1", lty, path + ("left",))
    if not isinstance(pty, FunMN) or not C.same_nat(pty.n, lty.m):
        raise TypeMismatch("funMN matching left factor", pty, path + ("pre",))
    if not isinstance(rty, FunM1) or not C.same_nat(rty.m, pty.m):
        raise TypeMismatch("funM1 matching precomposition", rty,
                           path + ("right",))
    return rty


def _rule_oplus(ctx, t, path, sub):
    bty = sub(ctx, t.body, path + ("body",))
    if not isinstance(bty, FunM1):
        raise TypeMismatch("funM1", bty, path + ("body",))
    return bty


def _rule_oplus_lit(ctx, t, path, sub):
    if not t.terms:
        raise TypeCheckError("empty function sum", path)
    types = [sub(ctx, item, path + (i,)) for i, item in enumerate(t.terms)]
    first = types[0]
    for ity in types[1:]:
        if ity != first:
            raise TypeMismatch(first, ity, path)
    return first


C.META_RULES.update({
    Expand: _rule_expand,
    ExpandSubst: _rule_expand_subst,
    SumSym: _rule_sum_sym,
    Plus: _rule_plus,
    PartialD: _rule_partial,
    DefSym: _rule_def_sym,
    CompScalar: _rule_comp_scalar,
    OTimes: _rule_otimes,
    OTimesPre: _rule_otimes_pre,
    OPlus: _rule_oplus,
    OPlusLit: _rule_oplus_lit,
})


def generic_type(ctx: Context, t: Term) -> TypeExpr:
    """Type synthesis accepting symbolic arities and expansion-layer nodes."""
    return C.synthesize(ctx, t, strict=False)


# -- capture-avoiding substitution with display normalization -------------------

def subst_var(t: Term, target: int, repl: Term, depth: int = 0) -> Term:
    """Beta substitution: replace Var(target+depth), decrement higher frees."""
    if isinstance(t, Var):
        if t.index == target + depth:
            return shift(repl, depth)
        if t.index > target + depth:
            return Var(t.name, t.index - 1)
        return t
    bump = 1 if T.binds_term_var(t) else 0
    out = map_children(t, lambda c: subst_var(c, target, repl, depth + bump))
    return _normalize_node(out)


def subst_same_depth(t: Term, repl: Term, depth: int = 0) -> Term:
    """Replace Var(depth) by repl without renumbering anything else.

    Used to merge (z -> body1) . (z -> body2) into z -> body1[z := body2]:
    both bodies sit under one binder before and after.
    """
    if isinstance(t, Var):
        if t.index == depth:
            return shift(repl, depth)
        return t
    bump = 1 if T.binds_term_var(t) else 0
    out = map_children(t, lambda c: subst_same_depth(c, repl, depth + bump))
    return _normalize_node(out)


def _normalize_node(t: Term) -> Term:
    """Local display identities applied after substitution.

    Projections of built tuples resolve to the building block, and a slot
    substituted by its own projection is the unmodified expansion
    (the beta identity relating multivariate and univariate application).
    """
    while True:
        match t:
            case Expand(subject=Expand() as s):
                t = Expand(s.subject)
            case ExpandSubst(subject=Expand() as s, pos=p, repl=r):
                t = ExpandSubst(s.subject, p, r)
            case ExpandSubst(subject=s, pos=p, repl=ProjK(subject=s2, pos=p2)) \
                    if s == s2 and p == p2:
                t = Expand(s)
            case SubstK(subject=s, pos=p, repl=ProjK(subject=s2, pos=p2)) \
                    if s == s2 and p == p2:
                t = s
            case ProjK(subject=Expand() as s, pos=p):
                t = ProjK(s.subject, p)
            case ProjK(subject=AppMN(fn=f, arg=u), pos=p):
                t = AppM1(ProjMN(f, p), u)
            case ProjK(subject=App1N(fn=f, arg=u), pos=p):
                t = App11(ProjN(f, p), u)
            case ProjK(subject=ExpandSubst(subject=s, pos=q, repl=r), pos=p) \
                    if p == q:
                t = r
            case ProjK(subject=ExpandSubst(subject=s, pos=q, repl=r), pos=p) \
                    if isinstance(p, int) and isinstance(q, int):
                t = ProjK(s, p)
            case ProjK(subject=SubstK(subject=s, pos=q, repl=r), pos=p) \
                    if p == q:
                t = r
            case ProjK(subject=SubstK(subject=s, pos=q, repl=r), pos=p) \
                    if isinstance(p, int) and isinstance(q, int):
                t = ProjK(s, p)
            case _:
                return t


def normalize_markers(t: Term) -> Term:
    """Bottom-up pass of the local identities above."""
    return _normalize_node(map_children(t, normalize_markers))


# -- symbol substitution and instantiation --------------------------------------

_NAT_FIELDS = {
    LamTT: ("arity",), LamTS: ("arity",), SumIdx: ("bound",),
    T.SubstK: ("pos",), T.SubstN: ("pos",), T.SubstMN: ("pos",),
    ProjK: ("pos",), ProjN: ("pos",), ProjMN: ("pos",),
    ExpandSubst: ("pos",), PartialD: ("pos",), DefSym: ("sup",),
    SumSym: ("bound",), OPlus: ("bound",),
}


def substitute_symbols(t: Term, assignment: dict[str, int]) -> Term:
    """Resolve arity/index symbols; unroll symbolic sums with known bounds.

    Structure-preserving: expansion markers and macros stay in place, which
    is what the derivation engine wants.  Unassigned symbols are kept.
    """
    def resolve(v):
        return assignment.get(v, v) if isinstance(v, str) else v

    if isinstance(t, (SumSym, OPlus)):
        bound = resolve(t.bound)
        if isinstance(bound, int):
            copies = []
            for value in range(bound):
                inner = dict(assignment)
                inner[t.sym] = value
                copies.append(substitute_symbols(t.body, inner))
            if len(copies) == 1:
                return copies[0]
            return (Plus if isinstance(t, SumSym) else OPlusLit)(tuple(copies))
        inner = {k: v for k, v in assignment.items() if k != t.sym}
        return replace(t, bound=bound,
                       body=substitute_symbols(t.body, inner))

    out = map_children(t, lambda c: substitute_symbols(c, assignment))
    updates = {}
    for field_name in _NAT_FIELDS.get(type(t), ()):
        value = getattr(t, field_name)
        resolved = resolve(value)
        if resolved != value:
            updates[field_name] = resolved
    if updates:
        out = replace(out, **updates)
    return _normalize_node(out)


def free_symbols(t: Term, bound: frozenset[str] = frozenset()) -> set[str]:
    """Arity/index symbols not bound by an enclosing symbolic sum."""
    out = set()
    for field_name in _NAT_FIELDS.get(type(t), ()):
        value = getattr(t, field_name)
        if isinstance(value, str) and value not in bound:
            out.add(value)
    inner = bound | {t.sym} if isinstance(t, (SumSym, OPlus)) else bound
    for _, child in child_slots(t):
        out |= free_symbols(child, inner)
    return out


def erase_markers(t: Term) -> Term:
    """Lower expansion markers onto plain Fig-6 constructors."""
    t = map_children(t, erase_markers)
    match t:
        case Expand(subject=s):
            return s
        case ExpandSubst(subject=s, pos=p, repl=r):
            return SubstK(s, p, r)
    return t


def instantiate_arity(g: Term, assignment: dict[str, int],
                      ctx: Context | None = None) -> Term:
    """Instantiate every declared symbol and lower expansions to Fig-6 form.

    The assignment must cover all free symbols of `g` (arity variables and
    free positions alike; sum-bound indices are enumerated internally).
    With a context supplied the result is checked and position errors are
    reported as PositionOutOfRange.
    """
    missing = free_symbols(g) - set(assignment)
    if missing:
        raise UnassignedArity(sorted(missing)[0])
    for name, value in assignment.items():
        if not isinstance(value, int) or value < 0:
            raise UnassignedArity(name)
    concrete = erase_markers(substitute_symbols(g, assignment))
    if ctx is not None:
        try:
            C.synthesize(ctx, concrete, strict=False)
        except TypeCheckError as err:
            if "not below" in str(err):
                raise PositionOutOfRange(str(err), assignment) from err
            raise
    return concrete


# -- one-tuple identification ----------------------------------------------------

def _identify_type(ty: TypeExpr) -> TypeExpr:
    match ty:
        case Tuple(width=1):
            return Scalar()
        case FunM1(m=1) | Fun1N(n=1):
            return Fun11()
        case FunMN(m=1, n=1):
            return Fun11()
        case FunMN(m=1, n=n):
            return Fun1N(n)
        case FunMN(m=m, n=1):
            return FunM1(m)
    return ty


def identify_one_tuples(ctx: Context, t: Term) -> Term:
    """Rewrite arity-1 tuple constructs as their scalar counterparts.

    This realizes the identification of scalars with one-tuples under which
    the multivariate rewrite rules instantiated at arity 1 become the
    univariate ones, literally.
    """
    def ty_of(term, context):
        return C.synthesize(context, term, strict=False)

    def go(term: Term, context: Context) -> Term:
        match term:
            case Var():
                return term
            case Expand(subject=s):
                inner = go(s, context)
                return inner if ty_of(s, context) == Tuple(1) else Expand(inner)
            case ExpandSubst(subject=s, pos=p, repl=r):
                if ty_of(s, context) == Tuple(1):
                    return go(r, context)
                return ExpandSubst(go(s, context), p, go(r, context))
            case SubstK(subject=s, pos=p, repl=r):
                if ty_of(s, context) == Tuple(1):
                    return go(r, context)
                return SubstK(go(s, context), p, go(r, context))
            case ProjK(subject=s, pos=p):
                if ty_of(s, context) == Tuple(1):
                    return go(s, context)
                return ProjK(go(s, context), p)
            case ProjMN(subject=s, pos=p):
                sty = ty_of(s, context)
                inner = go(s, context)
                if sty == FunMN(1, 1):
                    return inner
                if isinstance(sty, FunMN) and sty.n == 1:
                    return inner
                if isinstance(sty, FunMN) and sty.m == 1:
                    return ProjN(inner, p)
                return ProjMN(inner, p)
            case LamTT(arity=1, name=x, body=b):
                inner_ctx = context.extend(x, Tuple(1))
                body = go(b, inner_ctx)
                if _identify_type(ty_of(b, inner_ctx)) == Scalar():
                    return LamSS(x, body)
                return LamST(x, body)
            case LamTT(arity=m, name=x, body=b):
                inner_ctx = context.extend(x, Tuple(m))
                body = go(b, inner_ctx)
                if _identify_type(ty_of(b, inner_ctx)) == Scalar():
                    return LamTS(m, x, body)
                return LamTT(m, x, body)
            case LamTS(arity=1, name=x, body=b):
                return LamSS(x, go(b, context.extend(x, Tuple(1))))
            case AppMN(fn=f, arg=a) | AppM1(fn=f, arg=a) | App1N(fn=f, arg=a):
                fty = _identify_type(ty_of(f, context))
                fn2 = go(f, context)
                arg2 = go(a, context)
                match fty:
                    case Fun11():
                        return App11(fn2, arg2)
                    case FunM1():
                        return AppM1(fn2, arg2)
                    case Fun1N():
                        return App1N(fn2, arg2)
                return AppMN(fn2, arg2)
            case CompMKN(outer=f, inner=g) | CompScalar(outer=f, inner=g):
                fty = _identify_type(ty_of(f, context))
                gty = _identify_type(ty_of(g, context))
                fn2, gn2 = go(f, context), go(g, context)
                match (fty, gty):
                    case (Fun11(), Fun11()):
                        return Comp111(fn2, gn2)
                    case (FunM1(), FunMN()):
                        return CompScalar(fn2, gn2)
                return CompMKN(fn2, gn2)
        out = map_children(term, lambda c: _go_under(term, c, context))
        return out

    def _go_under(parent: Term, child: Term, context: Context) -> Term:
        if T.binds_term_var(parent):
            name, ty = _binder_entry(parent)
            return go(child, context.extend(name, ty))
        return go(child, context)

    def _binder_entry(binder: Term):
        match binder:
            case LamTT(arity=m, name=x) | LamTS(arity=m, name=x):
                return x, Tuple(m)
            case LamST(name=x) | LamSS(name=x):
                return x, Scalar()
            case SumIdx(bound=k, name=x):
                return x, Index(k)
        raise JacobiformError("not a binder")

    return go(t, ctx)


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


# -- the partial-derivative unfolding -------------------------------------------

def unfold_partial_derivative(node: PartialD, m: Nat) -> Term:
    """(x...) -> (z -> subject(x...[pos := z]))'(x^pos), de Bruijn form."""
    subject = shift(node.subject, 2)
    x_inner = Var(node.varname, 1)
    z = Var("z", 0)
    body = App11(
        T.Prime(LamSS("z", AppM1(subject, ExpandSubst(x_inner, node.pos, z)))),
        ProjK(Var(node.varname, 0), node.pos))
    return LamTS(m, node.varname, body)
