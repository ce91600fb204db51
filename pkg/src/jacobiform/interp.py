"""Evaluation of typed terms into exact polynomial values.

Types are interpreted as: scalars are rationals, tuples are rational
vectors, indices are bounded naturals, and every function type is a vector
of multivariate polynomials over exact rationals.  Evaluating a binder
extends the environment with fresh polynomial indeterminates and evaluates
the body, so functions are data, application is polynomial substitution,
and the derivative symbol is the coefficient rule; everything stays exact.

Internally scalars evaluated under N enclosing binders are polynomials in
the N live indeterminates ("ambient" variables, ordered by binder entry);
function values append their parameter variables after the ambient block.
At the public boundary the ambient block is empty, which recovers the
simple value shapes above.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import generic as G
from . import terms as T
from .check import TypedTerm, synthesize
from .errors import (EnvironmentMismatch, IndexOutOfRange, JacobiformError,
                     ParseError, UnassignedArity)
from .poly import MultiPoly, format_poly, parse_poly
from .sexpr import StringAtom, read_sexpr
from .terms import (Context, Fun11, Fun1N, FunM1, FunMN, Index, Scalar, Term,
                    Tuple, TypeExpr)

DEFAULT_SEED = 271828


# -- public value shapes -------------------------------------------------------

@dataclass(frozen=True)
class VScalar:
    value: Fraction


@dataclass(frozen=True)
class VTuple:
    items: tuple[Fraction, ...]


@dataclass(frozen=True)
class VIndex:
    value: int
    bound: int


@dataclass(frozen=True)
class VFun11:
    poly: MultiPoly  # nvars = 1


@dataclass(frozen=True)
class VFunM1:
    m: int
    poly: MultiPoly  # nvars = m


@dataclass(frozen=True)
class VFun1N:
    n: int
    polys: tuple[MultiPoly, ...]  # each nvars = 1


@dataclass(frozen=True)
class VFunMN:
    m: int
    n: int
    polys: tuple[MultiPoly, ...]  # each nvars = m


Value = VScalar | VTuple | VIndex | VFun11 | VFunM1 | VFun1N | VFunMN

Environment = tuple  # of Value, parallel to a Context (oldest first)


def value_type(v: Value) -> TypeExpr:
    match v:
        case VScalar():
            return Scalar()
        case VTuple(items=items):
            return Tuple(len(items))
        case VIndex(bound=k):
            return Index(k)
        case VFun11():
            return Fun11()
        case VFunM1(m=m):
            return FunM1(m)
        case VFun1N(n=n):
            return Fun1N(n)
        case VFunMN(m=m, n=n):
            return FunMN(m, n)
    raise EnvironmentMismatch(f"not a value: {v!r}")


def check_environment(ctx: Context, env) -> None:
    if len(env) != len(ctx.entries):
        raise EnvironmentMismatch(
            f"environment has {len(env)} values for {len(ctx.entries)} "
            f"context entries")
    for (name, ty), v in zip(ctx.entries, env):
        if value_type(v) != ty:
            raise EnvironmentMismatch(
                f"value for {name!r} has type {value_type(v)}, context "
                f"says {ty}")


# -- internal ambient-aware representation ----------------------------------------

# ival shapes: ("s", poly) | ("t", tuple[poly]) | ("i", value, bound)
#            | ("f", m, tuple[poly])   with parameters as the last m variables


def _from_value(v: Value):
    match v:
        case VScalar(value=c):
            return ("s", MultiPoly.constant(c, 0))
        case VTuple(items=items):
            return ("t", tuple(MultiPoly.constant(c, 0) for c in items))
        case VIndex(value=i, bound=k):
            return ("i", i, k)
        case VFun11(poly=p):
            return ("f", 1, (p,))
        case VFunM1(m=m, poly=p):
            return ("f", m, (p,))
        case VFun1N(polys=ps):
            return ("f", 1, tuple(ps))
        case VFunMN(m=m, polys=ps):
            return ("f", m, tuple(ps))
    raise EnvironmentMismatch(f"not a value: {v!r}")


def _to_value(ival, ty: TypeExpr) -> Value:
    tag = ival[0]
    match ty, tag:
        case Scalar(), "s":
            return VScalar(ival[1].constant_value())
        case Tuple(), "t":
            return VTuple(tuple(p.constant_value() for p in ival[1]))
        case Index(), "i":
            return VIndex(ival[1], ival[2])
        case Fun11(), "f":
            return VFun11(ival[2][0])
        case FunM1(m=m), "f":
            return VFunM1(m, ival[2][0])
        case Fun1N(n=n), "f":
            return VFun1N(n, ival[2])
        case FunMN(m=m, n=n), "f":
            return VFunMN(m, n, ival[2])
    raise EnvironmentMismatch(f"value tag {tag!r} does not fit type {ty}")


def _embed(ival, amb0: int, amb: int):
    if amb0 == amb:
        return ival
    grow = amb - amb0
    match ival:
        case ("s", p):
            return ("s", p.pad(amb))
        case ("t", ps):
            return ("t", tuple(p.pad(amb) for p in ps))
        case ("i", *_):
            return ival
        case ("f", m, ps):
            return ("f", m, tuple(p.insert_vars(amb0, grow) for p in ps))
    raise JacobiformError(f"bad internal value {ival!r}")


def _identity_prefix(amb: int, nvars: int) -> list[MultiPoly]:
    return [MultiPoly.variable(i, nvars) for i in range(amb)]


def _apply_fun(fn_ival, args: list[MultiPoly], amb: int) -> tuple:
    _, m, outs = fn_ival
    if len(args) != m:
        raise EnvironmentMismatch(f"function of {m} inputs got {len(args)}")
    mapping = _identity_prefix(amb, amb) + [a for a in args]
    return tuple(p.compose(mapping) for p in outs)


def _compose_funs(outer_ival, inner_ival, amb: int):
    _, k, outs = outer_ival
    _, m, inner_outs = inner_ival
    if len(inner_outs) != k:
        raise EnvironmentMismatch(
            f"composition arity mismatch: {len(inner_outs)} outputs into "
            f"{k} inputs")
    mapping = _identity_prefix(amb, amb + m) + list(inner_outs)
    return ("f", m, tuple(p.compose(mapping) for p in outs))


def _int_pos(pos, isym: dict[str, int]):
    if isinstance(pos, int):
        return pos
    if isinstance(pos, str) and pos in isym:
        return isym[pos]
    raise UnassignedArity(str(pos))


def _slot(items: tuple, pos: int):
    if not 0 <= pos < len(items):
        raise IndexOutOfRange(pos, len(items))
    return pos


def _eval(t: Term, env: list, amb: int, isym: dict[str, int]):
    def rec(term, env2=None, amb2=None):
        return _eval(term, env if env2 is None else env2,
                     amb if amb2 is None else amb2, isym)

    match t:
        case T.Var(index=i):
            if not 0 <= i < len(env):
                raise EnvironmentMismatch(f"unbound variable index {i}")
        case _:
            pass

    match t:
        case T.Var(index=i):
            ival, amb0 = env[-1 - i]
            return _embed(ival, amb0, amb)

        case T.LamTT(arity=m, body=body) | T.LamTS(arity=m, body=body):
            m = _int_pos(m, isym)
            params = ("t", tuple(MultiPoly.variable(amb + j, amb + m)
                                 for j in range(m)))
            inner = rec(body, env + [(params, amb + m)], amb + m)
            outs = inner[1] if inner[0] == "t" else (inner[1],)
            return ("f", m, tuple(outs))

        case T.LamST(body=body) | T.LamSS(body=body):
            param = ("s", MultiPoly.variable(amb, amb + 1))
            inner = rec(body, env + [(param, amb + 1)], amb + 1)
            outs = inner[1] if inner[0] == "t" else (inner[1],)
            return ("f", 1, tuple(outs))

        case T.SumIdx(bound=k, body=body):
            k = _int_pos(k, isym)
            total = MultiPoly.constant(0, amb)
            for v in range(k):
                entry = (("i", v, k), amb)
                total = total + rec(body, env + [entry], amb)[1]
            return ("s", total)

        case T.App11(fn=fn, arg=arg) | T.AppM1(fn=fn, arg=arg) | \
                T.App1N(fn=fn, arg=arg) | T.AppMN(fn=fn, arg=arg):
            fn_ival = rec(fn)
            arg_ival = rec(arg)
            args = [arg_ival[1]] if arg_ival[0] == "s" else list(arg_ival[1])
            outs = _apply_fun(fn_ival, args, amb)
            if isinstance(t, (T.App11, T.AppM1)):
                return ("s", outs[0])
            return ("t", outs)

        case T.SubstK(subject=s, pos=p, repl=r) | \
                G.ExpandSubst(subject=s, pos=p, repl=r):
            _, items = rec(s)
            pos = _slot(items, _int_pos(p, isym))
            repl = rec(r)[1]
            return ("t", items[:pos] + (repl,) + items[pos + 1:])

        case T.SubstN(subject=s, pos=p, repl=r) | \
                T.SubstMN(subject=s, pos=p, repl=r):
            _, m, outs = rec(s)
            pos = _slot(outs, _int_pos(p, isym))
            repl = rec(r)[1].insert_vars(amb, m)
            return ("f", m, outs[:pos] + (repl,) + outs[pos + 1:])

        case T.SubstKI(subject=s, pos_term=u, repl=r):
            _, items = rec(s)
            pos = _slot(items, rec(u)[1])
            repl = rec(r)[1]
            return ("t", items[:pos] + (repl,) + items[pos + 1:])

        case T.SubstNI(subject=s, pos_term=u, repl=r) | \
                T.SubstMNI(subject=s, pos_term=u, repl=r):
            _, m, outs = rec(s)
            pos = _slot(outs, rec(u)[1])
            repl = rec(r)[1].insert_vars(amb, m)
            return ("f", m, outs[:pos] + (repl,) + outs[pos + 1:])

        case T.ProjK(subject=s, pos=p):
            _, items = rec(s)
            return ("s", items[_slot(items, _int_pos(p, isym))])

        case T.ProjN(subject=s, pos=p) | T.ProjMN(subject=s, pos=p):
            _, m, outs = rec(s)
            return ("f", m, (outs[_slot(outs, _int_pos(p, isym))],))

        case T.ProjKI(subject=s, pos_term=u):
            _, items = rec(s)
            return ("s", items[_slot(items, rec(u)[1])])

        case T.ProjNI(subject=s, pos_term=u) | T.ProjMNI(subject=s,
                                                         pos_term=u):
            _, m, outs = rec(s)
            return ("f", m, (outs[_slot(outs, rec(u)[1])],))

        case T.Comp111(outer=f, inner=g) | T.Comp1K1(outer=f, inner=g) | \
                T.CompMKN(outer=f, inner=g) | T.CompM1N(outer=f, inner=g) | \
                G.CompScalar(outer=f, inner=g):
            return _compose_funs(rec(f), rec(g), amb)

        case T.Prime(inner=f):
            _, m, outs = rec(f)
            if m != 1 or len(outs) != 1:
                raise EnvironmentMismatch("derivative of a non-univariate "
                                          "function value")
            return ("f", 1, (outs[0].partial(amb),))

        case T.Mul(left=a, right=b):
            return ("s", rec(a)[1] * rec(b)[1])

        case G.Expand(subject=s):
            return rec(s)

        case G.SumSym(sym=x, bound=k, body=body):
            k = _int_pos(k, isym)
            total = MultiPoly.constant(0, amb)
            for v in range(k):
                total = total + _eval(body, env, amb, {**isym, x: v})[1]
            return ("s", total)

        case G.Plus(terms=ts):
            total = MultiPoly.constant(0, amb)
            for item in ts:
                total = total + rec(item)[1]
            return ("s", total)

        case G.PartialD(subject=s, pos=p):
            _, m, outs = rec(s)
            if len(outs) != 1:
                raise EnvironmentMismatch("partial derivative of a "
                                          "tuple-valued function value")
            pos = _int_pos(p, isym)
            if not 0 <= pos < m:
                raise IndexOutOfRange(pos, m)
            return ("f", m, (outs[0].partial(amb + pos),))

        case G.DefSym(defn=d):
            return rec(d)

        case G.OTimes(left=a, right=b):
            _, m, (pa,) = rec(a)
            _, m2, (pb,) = rec(b)
            return ("f", m, (pa * pb,))

        case G.OTimesPre(left=a, right=b, pre=g):
            left = _compose_funs(rec(a), rec(g), amb)
            _, m, (pb,) = rec(b)
            return ("f", m, (left[2][0] * pb,))

        case G.OPlus(sym=x, bound=k, body=body):
            k = _int_pos(k, isym)
            acc, mm = None, 1
            for v in range(k):
                _, mm, (p,) = _eval(body, env, amb, {**isym, x: v})
                acc = p if acc is None else acc + p
            return ("f", mm, (acc,))

        case G.OPlusLit(terms=ts):
            acc, mm = None, 1
            for item in ts:
                _, mm, (p,) = rec(item)
                acc = p if acc is None else acc + p
            return ("f", mm, (acc,))

    raise JacobiformError(f"no evaluation rule for {type(t).__name__}")


# -- public entry points ----------------------------------------------------------

def eval_term(env: Environment, typed: TypedTerm) -> Value:
    """Evaluate a checked term under an environment matching its context."""
    check_environment(typed.context, env)
    ienv = [(_from_value(v), 0) for v in env]
    ival = _eval(typed.term, ienv, 0, {})
    return _to_value(ival, typed.type)


def eval_raw(ctx: Context, env: Environment, t: Term,
             isym: dict[str, int] | None = None) -> Value:
    """Evaluate a raw (possibly expansion-layer) term; types are synthesized.

    Symbolic index positions are resolved through `isym`; symbolic arities
    must already be concrete.
    """
    check_environment(ctx, env)
    ty = synthesize(ctx, G.substitute_symbols(t, dict(isym or {})),
                    strict=False)
    ienv = [(_from_value(v), 0) for v in env]
    ival = _eval(t, ienv, 0, dict(isym or {}))
    return _to_value(ival, ty)


# -- the two assumed equalities under this interpretation -------------------------

@dataclass(frozen=True)
class TrialVerdict:
    index: int
    point: tuple[Fraction, ...]
    lin_equal: bool
    chain_equal: bool


@dataclass(frozen=True)
class AssumptionReport:
    seed: int
    j: int
    i: int
    lin_symbolic_equal: bool | None
    chain_symbolic_equal: bool | None
    trials: tuple[TrialVerdict, ...]

    @property
    def all_equal(self) -> bool:
        per_trial = all(t.lin_equal and t.chain_equal for t in self.trials)
        sym = (self.lin_symbolic_equal is not False
               and self.chain_symbolic_equal is not False)
        return per_trial and sym


def _lin_gen_sides(m: int, k: int, j: int, i: int):
    """Terms for both sides of the derivative-linearity identity.

    Context: [f : funMN k n, g : funMN m k]; both sides are funM1 m maps
    built over the j-th output of f.
    """
    f2, g2 = T.Var("f", 3), T.Var("g", 2)
    x1, z0 = T.Var("x", 1), T.Var("z", 0)
    fj = T.ProjMN(f2, j)
    lhs_body = T.App11(
        T.Prime(T.LamSS("z", T.AppM1(fj, T.AppMN(g2, T.SubstK(x1, i, z0))))),
        T.ProjK(T.Var("x", 0), i))
    lhs = T.LamTS(m, "x", lhs_body)

    summands = []
    for kk in range(k):
        inner = T.AppM1(
            fj, T.SubstK(T.AppMN(g2, x1), kk,
                         T.AppM1(T.ProjMN(g2, kk), T.SubstK(x1, i, z0))))
        summands.append(T.App11(T.Prime(T.LamSS("z", inner)),
                                T.ProjK(T.Var("x", 0), i)))
    rhs = T.LamTS(m, "x", G.Plus(tuple(summands)))
    return lhs, rhs


def _chain_local_sides(m: int, k: int, j: int, i: int):
    """Terms for both sides of the partial-derivative chain rule.

    Same context as _lin_gen_sides; both sides are funM1 m maps.
    """
    f1, g0 = T.Var("f", 1), T.Var("g", 0)
    lhs = G.PartialD(T.ProjMN(T.CompMKN(f1, g0), j), i, "x")

    f_in, g_in = T.Var("f", 2), T.Var("g", 1)  # under the x binder
    x0 = T.Var("x", 0)
    summands = []
    for kk in range(k):
        df = G.PartialD(T.ProjMN(f_in, j), kk, "y")
        dg = G.PartialD(T.ProjMN(g_in, kk), i, "x")
        summands.append(T.Mul(T.AppM1(df, T.AppMN(g_in, x0)),
                              T.AppM1(dg, x0)))
    rhs = T.LamTS(m, "x", G.Plus(tuple(summands)))
    return lhs, rhs


def check_assumed_equalities(f: VFunMN, g: VFunMN, trials: int = 50,
                             seed: int = DEFAULT_SEED, j: int = 0,
                             i: int = 0) -> AssumptionReport:
    """Check the linearity and chain-rule assumptions for given f, g.

    Both identities are evaluated symbolically (canonical polynomial
    equality of both sides, when the composite degree stays within 8) and
    at `trials` random rational points, all exactly.
    """
    import random

    if g.n != f.m:
        raise EnvironmentMismatch(
            f"maps do not compose: g has {g.n} outputs, f takes {f.m}")
    m, k = g.m, f.m
    if not 0 <= j < f.n:
        raise IndexOutOfRange(j, f.n)
    if not 0 <= i < m:
        raise IndexOutOfRange(i, m)

    ctx = Context((("f", FunMN(k, f.n)), ("g", FunMN(m, k))))
    env = (f, g)

    lin_lhs_t, lin_rhs_t = _lin_gen_sides(m, k, j, i)
    chain_lhs_t, chain_rhs_t = _chain_local_sides(m, k, j, i)
    lin_lhs = eval_raw(ctx, env, lin_lhs_t)
    lin_rhs = eval_raw(ctx, env, lin_rhs_t)
    chain_lhs = eval_raw(ctx, env, chain_lhs_t)
    chain_rhs = eval_raw(ctx, env, chain_rhs_t)

    degree = max([p.degree() for p in (lin_lhs.poly, lin_rhs.poly,
                                       chain_lhs.poly, chain_rhs.poly)])
    lin_sym = lin_lhs.poly == lin_rhs.poly if degree <= 8 else None
    chain_sym = chain_lhs.poly == chain_rhs.poly if degree <= 8 else None

    rng = random.Random(seed)
    out = []
    for t in range(trials):
        point = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 9))
                      for _ in range(m))
        out.append(TrialVerdict(
            t, point,
            lin_lhs.poly.eval_at(point) == lin_rhs.poly.eval_at(point),
            chain_lhs.poly.eval_at(point) == chain_rhs.poly.eval_at(point)))
    return AssumptionReport(seed, j, i, lin_sym, chain_sym, tuple(out))


# -- value and environment files ----------------------------------------------------

def _poly_from_sexpr(node) -> MultiPoly:
    if (not isinstance(node, list) or len(node) != 3 or node[0] != "poly"
            or not isinstance(node[2], StringAtom)):
        raise ParseError('bad polynomial: expected (poly NVARS "...")')
    return parse_poly(int(node[1]), str(node[2]))


def _poly_to_sexpr(p: MultiPoly) -> str:
    return f'(poly {p.nvars} "{format_poly(p)}")'


def value_from_sexpr(node) -> Value:
    if not isinstance(node, list) or not node:
        raise ParseError(f"bad value: {node!r}")
    head, *args = node
    match head:
        case "scalar":
            return VScalar(Fraction(args[0]))
        case "tuple":
            return VTuple(tuple(Fraction(a) for a in args))
        case "index":
            return VIndex(int(args[0]), int(args[1]))
        case "fun-11":
            return VFun11(_poly_from_sexpr(args[0]))
        case "fun-m1":
            return VFunM1(int(args[0]), _poly_from_sexpr(args[1]))
        case "fun-1n":
            return VFun1N(int(args[0]),
                          tuple(_poly_from_sexpr(a) for a in args[1:]))
        case "fun-mn":
            return VFunMN(int(args[0]), int(args[1]),
                          tuple(_poly_from_sexpr(a) for a in args[2:]))
    raise ParseError(f"unknown value form {head!r}")


def value_to_sexpr(v: Value) -> str:
    match v:
        case VScalar(value=c):
            return f"(scalar {c})"
        case VTuple(items=items):
            return "(tuple " + " ".join(str(c) for c in items) + ")"
        case VIndex(value=i, bound=k):
            return f"(index {i} {k})"
        case VFun11(poly=p):
            return f"(fun-11 {_poly_to_sexpr(p)})"
        case VFunM1(m=m, poly=p):
            return f"(fun-m1 {m} {_poly_to_sexpr(p)})"
        case VFun1N(n=n, polys=ps):
            inner = " ".join(_poly_to_sexpr(p) for p in ps)
            return f"(fun-1n {n} {inner})"
        case VFunMN(m=m, n=n, polys=ps):
            inner = " ".join(_poly_to_sexpr(p) for p in ps)
            return f"(fun-mn {m} {n} {inner})"
    raise ParseError(f"cannot serialize {v!r}")


def environment_from_sexpr(text: str) -> tuple[Context, Environment]:
    """Environment files pair context names with values, oldest first."""
    node = read_sexpr(text)
    if not isinstance(node, list) or not node or node[0] != "env":
        raise ParseError("environment file must start with (env ...)")
    names, values = [], []
    for entry in node[1:]:
        if not isinstance(entry, list) or len(entry) != 2:
            raise ParseError(f"bad environment entry: {entry!r}")
        names.append(str(entry[0]))
        values.append(value_from_sexpr(entry[1]))
    ctx = Context(tuple((name, value_type(v))
                        for name, v in zip(names, values)))
    return ctx, tuple(values)
