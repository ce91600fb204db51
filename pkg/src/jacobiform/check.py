"""Syntax-directed type checker for the core term language.

Each constructor matches exactly one rule, so synthesis is deterministic and
typing is unique.  `type_check` is the strict entry point: it insists on
literal arities and core constructors and returns a TypedTerm certificate.
The expansion layer reuses `synthesize` in permissive mode, where arity
fields may be symbols and extra node kinds dispatch through META_RULES.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArityMismatch, TypeCheckError, TypeMismatch, UnboundVariable
from .terms import (ARITY_CAP, CORE_NODES, App11, App1N, AppM1, AppMN, Comp111,
                    Comp1K1, CompM1N, CompMKN, Context, Fun11, Fun1N, FunM1,
                    FunMN, Index, LamSS, LamST, LamTS, LamTT, Mul, Prime,
                    ProjK, ProjKI, ProjMN, ProjMNI, ProjN, ProjNI, Scalar,
                    SubstK, SubstKI, SubstMN, SubstMNI, SubstN, SubstNI,
                    SumIdx, Term, Tuple, TypeExpr, Var)

# permissive-mode rules for expansion-layer nodes, keyed by node class;
# populated by jacobiform.generic at import time
META_RULES: dict[type, object] = {}


@dataclass(frozen=True)
class TypedTerm:
    """A term paired with the context and type under which it checked."""

    term: Term
    context: Context
    type: TypeExpr


def same_nat(a, b) -> bool:
    return a == b


def _arity_ok(value, path, *, strict: bool) -> None:
    if isinstance(value, int):
        if not 1 <= value <= ARITY_CAP:
            raise ArityMismatch(f"arity {value} outside 1..{ARITY_CAP}", path)
    elif strict or not isinstance(value, str):
        raise ArityMismatch(f"arity {value!r} is not a literal", path)


def _fin_ok(pos, bound, path, *, strict: bool) -> None:
    if isinstance(pos, int) and isinstance(bound, int):
        if not 0 <= pos < bound:
            raise TypeCheckError(f"index {pos} not below {bound}", path)
    elif strict:
        raise TypeCheckError(f"index {pos!r} is not a literal", path)


def synthesize(ctx: Context, t: Term, path: tuple = (), *,
               strict: bool = True) -> TypeExpr:
    def sub(slot, term, context=ctx):
        return synthesize(context, term, path + (slot,), strict=strict)

    match t:
        case Var(index=i):
            try:
                _, ty = ctx.entries[-1 - i] if 0 <= i < len(ctx.entries) \
                    else (None, None)
            except TypeError:  # pragma: no cover
                ty = None
            if ty is None:
                raise UnboundVariable(i, len(ctx.entries), path)
            return ty

        case LamTT(arity=m, name=x, body=body):
            _arity_ok(m, path, strict=strict)
            inner = sub("body", body, ctx.extend(x, Tuple(m)))
            if not isinstance(inner, Tuple):
                raise TypeMismatch("tuple body", inner, path + ("body",))
            return FunMN(m, inner.width)

        case LamTS(arity=m, name=x, body=body):
            _arity_ok(m, path, strict=strict)
            inner = sub("body", body, ctx.extend(x, Tuple(m)))
            if not isinstance(inner, Scalar):
                raise TypeMismatch(Scalar(), inner, path + ("body",))
            return FunM1(m)

        case LamST(name=x, body=body):
            inner = sub("body", body, ctx.extend(x, Scalar()))
            if not isinstance(inner, Tuple):
                raise TypeMismatch("tuple body", inner, path + ("body",))
            return Fun1N(inner.width)

        case LamSS(name=x, body=body):
            inner = sub("body", body, ctx.extend(x, Scalar()))
            if not isinstance(inner, Scalar):
                raise TypeMismatch(Scalar(), inner, path + ("body",))
            return Fun11()

        case SumIdx(bound=k, name=x, body=body):
            _arity_ok(k, path, strict=strict)
            inner = sub("body", body, ctx.extend(x, Index(k)))
            if not isinstance(inner, Scalar):
                raise TypeMismatch(Scalar(), inner, path + ("body",))
            return Scalar()

        case App11(fn=fn, arg=arg):
            fty, aty = sub("fn", fn), sub("arg", arg)
            if not isinstance(fty, Fun11):
                raise TypeMismatch(Fun11(), fty, path + ("fn",))
            if not isinstance(aty, Scalar):
                raise TypeMismatch(Scalar(), aty, path + ("arg",))
            return Scalar()

        case AppM1(fn=fn, arg=arg):
            fty, aty = sub("fn", fn), sub("arg", arg)
            if not isinstance(fty, FunM1):
                raise TypeMismatch("funM1", fty, path + ("fn",))
            if not isinstance(aty, Tuple) or not same_nat(aty.width, fty.m):
                raise TypeMismatch(Tuple(fty.m), aty, path + ("arg",))
            return Scalar()

        case App1N(fn=fn, arg=arg):
            fty, aty = sub("fn", fn), sub("arg", arg)
            if not isinstance(fty, Fun1N):
                raise TypeMismatch("fun1N", fty, path + ("fn",))
            if not isinstance(aty, Scalar):
                raise TypeMismatch(Scalar(), aty, path + ("arg",))
            return Tuple(fty.n)

        case AppMN(fn=fn, arg=arg):
            fty, aty = sub("fn", fn), sub("arg", arg)
            if not isinstance(fty, FunMN):
                raise TypeMismatch("funMN", fty, path + ("fn",))
            if not isinstance(aty, Tuple) or not same_nat(aty.width, fty.m):
                raise TypeMismatch(Tuple(fty.m), aty, path + ("arg",))
            return Tuple(fty.n)

        case SubstK(subject=s, pos=i, repl=r):
            sty, rty = sub("subject", s), sub("repl", r)
            if not isinstance(sty, Tuple):
                raise TypeMismatch("tuple", sty, path + ("subject",))
            _fin_ok(i, sty.width, path, strict=strict)
            if not isinstance(rty, Scalar):
                raise TypeMismatch(Scalar(), rty, path + ("repl",))
            return sty

        case SubstN(subject=s, pos=i, repl=r):
            sty, rty = sub("subject", s), sub("repl", r)
            if not isinstance(sty, Fun1N):
                raise TypeMismatch("fun1N", sty, path + ("subject",))
            _fin_ok(i, sty.n, path, strict=strict)
            if not isinstance(rty, Scalar):
                raise TypeMismatch(Scalar(), rty, path + ("repl",))
            return sty

        case SubstMN(subject=s, pos=i, repl=r):
            sty, rty = sub("subject", s), sub("repl", r)
            if not isinstance(sty, FunMN):
                raise TypeMismatch("funMN", sty, path + ("subject",))
            _fin_ok(i, sty.n, path, strict=strict)
            if not isinstance(rty, Scalar):
                raise TypeMismatch(Scalar(), rty, path + ("repl",))
            return sty

        case SubstKI(subject=s, pos_term=u, repl=r) | \
                SubstNI(subject=s, pos_term=u, repl=r) | \
                SubstMNI(subject=s, pos_term=u, repl=r):
            sty = sub("subject", s)
            uty = sub("pos_term", u)
            rty = sub("repl", r)
            want = {SubstKI: Tuple, SubstNI: Fun1N, SubstMNI: FunMN}[type(t)]
            if not isinstance(sty, want):
                raise TypeMismatch(want.__name__, sty, path + ("subject",))
            bound = sty.width if isinstance(sty, Tuple) else sty.n
            if not isinstance(uty, Index) or not same_nat(uty.bound, bound):
                raise TypeMismatch(Index(bound), uty, path + ("pos_term",))
            if not isinstance(rty, Scalar):
                raise TypeMismatch(Scalar(), rty, path + ("repl",))
            return sty

        case ProjK(subject=s, pos=i):
            sty = sub("subject", s)
            if not isinstance(sty, Tuple):
                raise TypeMismatch("tuple", sty, path + ("subject",))
            _fin_ok(i, sty.width, path, strict=strict)
            return Scalar()

        case ProjN(subject=s, pos=i):
            sty = sub("subject", s)
            if not isinstance(sty, Fun1N):
                raise TypeMismatch("fun1N", sty, path + ("subject",))
            _fin_ok(i, sty.n, path, strict=strict)
            return Fun11()

        case ProjMN(subject=s, pos=i):
            sty = sub("subject", s)
            if not isinstance(sty, FunMN):
                raise TypeMismatch("funMN", sty, path + ("subject",))
            _fin_ok(i, sty.n, path, strict=strict)
            return FunM1(sty.m)

        case ProjKI(subject=s, pos_term=u) | ProjNI(subject=s, pos_term=u) | \
                ProjMNI(subject=s, pos_term=u):
            sty = sub("subject", s)
            uty = sub("pos_term", u)
            want = {ProjKI: Tuple, ProjNI: Fun1N, ProjMNI: FunMN}[type(t)]
            if not isinstance(sty, want):
                raise TypeMismatch(want.__name__, sty, path + ("subject",))
            bound = sty.width if isinstance(sty, Tuple) else sty.n
            if not isinstance(uty, Index) or not same_nat(uty.bound, bound):
                raise TypeMismatch(Index(bound), uty, path + ("pos_term",))
            if isinstance(t, ProjKI):
                return Scalar()
            if isinstance(t, ProjNI):
                return Fun11()
            return FunM1(sty.m)

        case Comp111(outer=f, inner=g):
            fty, gty = sub("outer", f), sub("inner", g)
            if not isinstance(fty, Fun11):
                raise TypeMismatch(Fun11(), fty, path + ("outer",))
            if not isinstance(gty, Fun11):
                raise TypeMismatch(Fun11(), gty, path + ("inner",))
            return Fun11()

        case Comp1K1(outer=f, inner=g):
            fty, gty = sub("outer", f), sub("inner", g)
            if not isinstance(fty, FunM1):
                raise TypeMismatch("funM1", fty, path + ("outer",))
            if not isinstance(gty, Fun1N) or not same_nat(gty.n, fty.m):
                raise TypeMismatch(Fun1N(fty.m), gty, path + ("inner",))
            return Fun11()

        case CompMKN(outer=f, inner=g):
            fty, gty = sub("outer", f), sub("inner", g)
            if not isinstance(fty, FunMN):
                raise TypeMismatch("funMN", fty, path + ("outer",))
            if not isinstance(gty, FunMN) or not same_nat(gty.n, fty.m):
                raise TypeMismatch("funMN with matching arity", gty,
                                   path + ("inner",))
            return FunMN(gty.m, fty.n)

        case CompM1N(outer=f, inner=g):
            fty, gty = sub("outer", f), sub("inner", g)
            if not isinstance(fty, Fun1N):
                raise TypeMismatch("fun1N", fty, path + ("outer",))
            if not isinstance(gty, FunM1):
                raise TypeMismatch("funM1", gty, path + ("inner",))
            return FunMN(gty.m, fty.n)

        case Prime(inner=f):
            fty = sub("inner", f)
            if not isinstance(fty, Fun11):
                raise TypeMismatch(Fun11(), fty, path + ("inner",))
            return Fun11()

        case Mul(left=a, right=b):
            aty, bty = sub("left", a), sub("right", b)
            if not isinstance(aty, Scalar):
                raise TypeMismatch(Scalar(), aty, path + ("left",))
            if not isinstance(bty, Scalar):
                raise TypeMismatch(Scalar(), bty, path + ("right",))
            return Scalar()

    rule = META_RULES.get(type(t))
    if rule is not None and not strict:
        return rule(ctx, t, path,
                    lambda c, term, p: synthesize(c, term, p, strict=False))
    raise TypeCheckError(f"no typing rule for {type(t).__name__}", path)


def type_check(ctx: Context, t: Term) -> TypedTerm:
    """Check a raw core term; the TypedTerm certificate is only minted here."""
    if not _core_only(t):
        raise TypeCheckError("term uses expansion-layer constructors; "
                             "instantiate it first")
    return TypedTerm(t, ctx, synthesize(ctx, t, strict=True))


def _core_only(t: Term) -> bool:
    from .terms import child_slots
    if not isinstance(t, CORE_NODES):
        return False
    return all(_core_only(c) for _, c in child_slots(t))
