"""Directed rewrite steps and the chain-rule derivation engine.

The computational equivalences (eta, alpha, beta, composition, expansion
markers, definition folding) and the two assumed equalities of the
univariate derivative (linearity over multiply occurring arguments, the
univariate chain rule) are rewrite rules on terms.  Each rule has a forward
orientation implemented in `rule_forward`; reverse applications supply the
replacement subterm and are validated by running the rule forwards on it.

A derivation trace records one presentation step per listing line; a step
may bundle several primitive rule applications (e.g. a composition step
followed by the beta identity relating multivariate and univariate
application), all of which are replayed and re-validated by `replay`.

The canonical chain-rule derivation is scripted: `derive_chain_rule` runs
the fixed schedule from the start form d(f^j . g)/dx^i to the summed
product-of-partials form, optionally continuing to the point-free shape,
for symbolic or concrete arities alike.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace as dc_replace

from . import generic as G
from . import terms as T
from .check import TypedTerm, synthesize
from .errors import JacobiformError, RuleNotApplicable, TypeMismatch
from .generic import (CompScalar, DefSym, Expand, ExpandSubst, OPlus,
                      OPlusLit, OTimes, OTimesPre, PartialD, Plus, SumSym,
                      generic_type, subst_same_depth, subst_var,
                      unfold_partial_derivative)
from .terms import (App11, App1N, AppM1, AppMN, Comp111, Comp1K1, CompM1N,
                    CompMKN, Context, Fun1N, FunM1, FunMN, Index, LamSS,
                    LamST, LamTS, LamTT, Mul, Prime, ProjK, ProjMN, ProjN,
                    Scalar, SumIdx, Term, Tuple, Var, get_sub, is_free_in,
                    replace_sub, shift)

TermPath = tuple


class RuleTag(enum.Enum):
    ETA = "eta"
    ALPHA = "alpha"
    BETA = "beta"
    COMP = "comp"
    M_EXPAND = "m"
    DEF = "def"
    LIN_PRIME = "lin'"
    CHAIN_PRIME = "chain'"


# which tags are computational equivalences vs assumed equalities
EQUIVALENCES = frozenset({RuleTag.ETA, RuleTag.ALPHA, RuleTag.BETA,
                          RuleTag.COMP, RuleTag.M_EXPAND, RuleTag.DEF})
ASSUMED = frozenset({RuleTag.LIN_PRIME, RuleTag.CHAIN_PRIME})


@dataclass(frozen=True)
class Micro:
    """One primitive rule application inside a presentation step."""

    rule: RuleTag
    path: TermPath
    reverse: bool = False
    replacement: Term | None = None
    payload: tuple = ()


@dataclass(frozen=True)
class Annotation:
    """An over/under-brace on the subterm at `path`, labelled by a term."""

    path: TermPath
    kind: str  # "over" | "under"
    label: Term


@dataclass(frozen=True)
class Step:
    tag: RuleTag
    path: TermPath
    term: Term
    micros: tuple[Micro, ...]
    annotations: tuple[Annotation, ...] = ()


@dataclass(frozen=True)
class DerivationTrace:
    context: Context
    start: Term
    steps: tuple[Step, ...]
    # display data for the optional tensor-correspondence coda
    j_disp: object = "j"
    i_disp: object = "i"
    k_bound: object = "k"
    tensor_coda: bool = False

    @property
    def terms(self) -> list[Term]:
        return [self.start] + [s.term for s in self.steps]

    @property
    def tags(self) -> list[RuleTag]:
        return [s.tag for s in self.steps]


# -- primitive forward rules -----------------------------------------------------

_APP_NODES = (App11, AppM1, App1N, AppMN)
_LAM_NODES = (LamSS, LamST, LamTS, LamTT)

# (outer application, inner application) -> composition constructor
_MERGE_TABLE = {
    (App11, App11): (Comp111, App11),
    (AppM1, App1N): (Comp1K1, App11),
    (AppMN, AppMN): (CompMKN, AppMN),
    (App1N, AppM1): (CompM1N, AppMN),
    (AppM1, AppMN): (CompScalar, AppM1),
}


def _payload(micro_payload: tuple) -> dict:
    return dict(micro_payload)


def _unwrap_expand(t: Term) -> Term:
    return t.subject if isinstance(t, Expand) else t


def rule_forward(rule: RuleTag, sub: Term, payload: dict | None = None,
                 path: TermPath = ()) -> Term:
    """Apply `rule` left-to-right to the subterm `sub`."""
    payload = payload or {}

    def fail(reason):
        raise RuleNotApplicable(rule.value, path, reason)

    if rule is RuleTag.BETA:
        if isinstance(sub, _APP_NODES) and isinstance(sub.fn, _LAM_NODES):
            return subst_var(sub.fn.body, 0, sub.arg)
        fail("not an application of an abstraction")

    if rule is RuleTag.ETA:
        if isinstance(sub, _LAM_NODES):
            body = sub.body
            if isinstance(body, _APP_NODES) \
                    and _unwrap_expand(body.arg) == Var("", 0) \
                    and not is_free_in(body.fn, 0):
                return shift(body.fn, -1)
        fail("not an eta-expanded abstraction")

    if rule is RuleTag.ALPHA:
        name = payload.get("name")
        if name is None:
            fail("alpha needs a replacement display name")
        if isinstance(sub, _LAM_NODES + (SumIdx,)):
            return dc_replace(sub, name=name)
        fail("not a binder")

    if rule is RuleTag.M_EXPAND:
        if isinstance(sub, Expand):
            return sub.subject
        if isinstance(sub, ExpandSubst):
            return T.SubstK(sub.subject, sub.pos, sub.repl)
        fail("not an expansion marker")

    if rule is RuleTag.COMP:
        # application-level merge: F(G(x)) -> (F . G)(x)
        if isinstance(sub, _APP_NODES):
            inner = _unwrap_expand(sub.arg)
            if isinstance(inner, _APP_NODES):
                key = (type(sub), type(inner))
                if key in _MERGE_TABLE:
                    comp_cls, app_cls = _MERGE_TABLE[key]
                    return app_cls(comp_cls(sub.fn, inner.fn), inner.arg)
            fail("argument is not an application that composes")
        # abstraction-level merge: (z -> C[z]) . (z -> S) -> z -> C[S]
        if isinstance(sub, Comp111) and isinstance(sub.outer, LamSS) \
                and isinstance(sub.inner, LamSS):
            merged = subst_same_depth(sub.outer.body, sub.inner.body)
            return LamSS(sub.inner.name, merged)
        fail("not a composable application or pair of abstractions")

    if rule is RuleTag.DEF:
        return _def_unfold(sub, payload, fail)

    if rule is RuleTag.CHAIN_PRIME:
        if isinstance(sub, App11) and isinstance(sub.fn, Prime) \
                and isinstance(sub.fn.inner, Comp111):
            outer, inner = sub.fn.inner.outer, sub.fn.inner.inner
            return Mul(App11(Comp111(Prime(outer), inner), sub.arg),
                       App11(Prime(inner), sub.arg))
        fail("not an applied derivative of a composition")

    if rule is RuleTag.LIN_PRIME:
        return _lin_prime(sub, payload, fail)

    fail("unknown rule")


def _def_unfold(sub: Term, payload: dict, fail) -> Term:
    if isinstance(sub, PartialD):
        m = payload.get("m")
        if m is None:
            fail("unfolding a partial-derivative macro needs its arity")
        return unfold_partial_derivative(sub, m)
    if isinstance(sub, DefSym):
        if sub.defn is None:
            fail("display-only name without a recorded definition")
        return sub.defn
    if isinstance(sub, _APP_NODES) and isinstance(sub.fn, OTimes):
        return Mul(AppM1(sub.fn.left, sub.arg), AppM1(sub.fn.right, sub.arg))
    if isinstance(sub, _APP_NODES) and isinstance(sub.fn, OTimesPre):
        merged = OTimes(CompScalar(sub.fn.left, sub.fn.pre), sub.fn.right)
        return type(sub)(merged, sub.arg)
    if isinstance(sub, (OPlus, OPlusLit)):
        m = payload.get("m")
        if m is None:
            fail("unfolding a function-level sum needs its arity")
        x = Var("x", 0)
        if isinstance(sub, OPlus):
            body = AppM1(shift(sub.body, 1), Expand(x))
            return LamTS(m, "x", SumSym(sub.sym, sub.bound, body))
        items = tuple(AppM1(shift(item, 1), Expand(x)) for item in sub.terms)
        return LamTS(m, "x", Plus(items))
    fail("not a definitional form")


def _lin_prime(sub: Term, payload: dict, fail) -> Term:
    if not (isinstance(sub, App11) and isinstance(sub.fn, Prime)
            and isinstance(sub.fn.inner, LamSS)):
        fail("not an applied derivative of an abstraction")
    lam = sub.fn.inner
    at = sub.arg
    body = lam.body

    # component pattern: body = F(G(U)) with the bound variable inside U
    comp = _match_component_pattern(body)
    if comp is not None:
        fn, g_term, u, marked = comp
        bound = payload.get("k_arity")
        sym = payload.get("sym", "k")
        if bound is None:
            fail("component splitting needs the inner map's output arity")
        reverted = subst_same_depth(u, shift(at, 1))

        def summand(kk):
            partial = AppM1(T.ProjMN(g_term, kk), u)
            base = AppMN(g_term, reverted)
            if marked:
                new_arg = ExpandSubst(base, kk, partial)
            else:
                new_arg = T.SubstK(base, kk, partial)
            return App11(Prime(LamSS(lam.name, type(body)(fn, new_arg))),
                         at)

        if isinstance(bound, int):
            if bound == 1:
                return summand(0)
            return Plus(tuple(summand(kk) for kk in range(bound)))
        return SumSym(sym, bound, summand(sym))

    # occurrence pattern: split on literal occurrences of the bound variable
    occurrences = _var_occurrences(body, 0)
    if not occurrences:
        fail("bound variable does not occur")
    if len(occurrences) == 1:
        return sub
    summands = []
    for keep in range(len(occurrences)):
        new_body = body
        for idx, (path, depth) in enumerate(occurrences):
            if idx != keep:
                new_body = replace_sub(new_body, path, shift(at, 1 + depth))
        summands.append(App11(Prime(LamSS(lam.name, new_body)), at))
    return Plus(tuple(summands))


def _match_component_pattern(body: Term):
    """Recognize F(G(U)) with the abstraction variable free only in U."""
    if not isinstance(body, (AppM1, App11)):
        return None
    arg = body.arg
    marked = isinstance(arg, Expand)
    inner = _unwrap_expand(arg)
    if not isinstance(inner, (AppMN, App1N)):
        return None
    u = inner.arg
    if not is_free_in(u, 0):
        return None
    if is_free_in(body.fn, 0) or is_free_in(inner.fn, 0):
        return None
    return body.fn, inner.fn, u, marked


def _var_occurrences(t: Term, target: int, path: TermPath = (),
                     depth: int = 0) -> list[tuple[TermPath, int]]:
    if isinstance(t, Var):
        return [(path, depth)] if t.index == target + depth else []
    bump = 1 if T.binds_term_var(t) else 0
    out = []
    for slot, child in T.child_slots(t):
        out.extend(_var_occurrences(child, target, path + (slot,),
                                    depth + bump))
    return out


# -- applying rules to whole terms --------------------------------------------------

def apply_micro(term: Term, micro: Micro) -> Term:
    old = get_sub(term, micro.path)
    payload = _payload(micro.payload)
    if micro.reverse:
        if micro.replacement is None:
            raise RuleNotApplicable(micro.rule.value, micro.path,
                                    "reverse application needs the "
                                    "replacement term")
        back = rule_forward(micro.rule, micro.replacement, payload,
                            micro.path)
        if back != old:
            raise RuleNotApplicable(
                micro.rule.value, micro.path,
                "replacement does not rewrite back to the redex")
        new = micro.replacement
    else:
        new = rule_forward(micro.rule, old, payload, micro.path)
        if micro.replacement is not None and new != micro.replacement:
            raise RuleNotApplicable(micro.rule.value, micro.path,
                                    "recorded result does not match")
    return replace_sub(term, micro.path, new)


def context_at(ctx: Context, term: Term, path: TermPath) -> Context:
    """The typing context in force at `path` (binders along the way)."""
    for slot in path:
        if T.binds_term_var(term) and slot == "body":
            match term:
                case LamTT(arity=m, name=x) | LamTS(arity=m, name=x):
                    ctx = ctx.extend(x, Tuple(m))
                case LamST(name=x) | LamSS(name=x):
                    ctx = ctx.extend(x, Scalar())
                case SumIdx(bound=k, name=x):
                    ctx = ctx.extend(x, Index(k))
        term = term.terms[slot] if isinstance(slot, int) \
            else getattr(term, slot)
    return ctx


def apply_rule(t: TypedTerm, rule: RuleTag, at: TermPath, *,
               reverse: bool = False, replacement: Term | None = None,
               **params) -> TypedTerm:
    """Rewrite the redex at `at`; the result checks to the same type."""
    payload = dict(params)
    node = get_sub(t.term, at)
    if rule is RuleTag.DEF and isinstance(node, PartialD) \
            and "m" not in payload and not reverse:
        local = context_at(t.context, t.term, at)
        subject_ty = generic_type(local, node.subject)
        payload["m"] = subject_ty.m
    micro = Micro(rule, at, reverse, replacement,
                  tuple(sorted(payload.items())))
    term2 = apply_micro(t.term, micro)
    ty2 = generic_type(t.context, term2)
    if ty2 != t.type:
        raise TypeMismatch(t.type, ty2, at)
    return TypedTerm(term2, t.context, ty2)


def beta_normalize(t: TypedTerm, fuel: int = 10_000) -> TypedTerm:
    """Contract beta redexes until none remain (simply typed: terminates)."""
    term = t.term
    for _ in range(fuel):
        redex = _find_beta_redex(term, ())
        if redex is None:
            ty = generic_type(t.context, term)
            if ty != t.type:
                raise TypeMismatch(t.type, ty)
            return TypedTerm(term, t.context, t.type)
        new = rule_forward(RuleTag.BETA, get_sub(term, redex), {}, redex)
        term = replace_sub(term, redex, new)
    raise JacobiformError("beta normalization ran out of fuel")


def _find_beta_redex(t: Term, path: TermPath) -> TermPath | None:
    if isinstance(t, _APP_NODES) and isinstance(t.fn, _LAM_NODES):
        return path
    for slot, child in T.child_slots(t):
        found = _find_beta_redex(child, path + (slot,))
        if found is not None:
            return found
    return None


def replay(trace: DerivationTrace) -> list[Term]:
    """Re-run every recorded micro step; returns all intermediate terms."""
    term = trace.start
    start_ty = generic_type(trace.context, term)
    seen = [term]
    for step in trace.steps:
        for micro in step.micros:
            term = apply_micro(term, micro)
        if term != step.term:
            raise JacobiformError(
                f"replayed step {step.tag.value} diverges from the record")
        ty = generic_type(trace.context, term)
        if ty != start_ty:
            raise TypeMismatch(start_ty, ty)
        seen.append(term)
    return seen


# -- the scripted derivation ---------------------------------------------------------

def standard_context(m, n, k) -> Context:
    return Context((("f", FunMN(k, n)), ("g", FunMN(m, k))))


def derive_chain_rule(f: Term | None = None, g: Term | None = None, *,
                      ctx: Context | None = None, m="m", n="n", k="k",
                      j="j", i="i", pointfree: bool = False,
                      tensor_coda: bool = False) -> DerivationTrace:
    """Derive the chain rule for d(f^j . g)/dx^i along the fixed schedule.

    With symbolic arities this reproduces the general listing; with ints
    (and a literal i) the fully expanded one.  `f` and `g` default to free
    variables in the standard two-entry context.
    """
    if ctx is None:
        ctx = standard_context(m, n, k)
        f = Var("f", 1)
        g = Var("g", 0)
    fty = generic_type(ctx, f)
    gty = generic_type(ctx, g)
    if not (isinstance(fty, FunMN) and isinstance(gty, FunMN)
            and fty.m == gty.n):
        raise TypeMismatch("composable funMN maps", (fty, gty))
    m, k, n = gty.m, gty.n, fty.n

    def fj(d):
        return ProjMN(shift(f, d), j)

    def gk(d, kk):
        return ProjMN(shift(g, d), kk)

    def gat(d):
        return shift(g, d)

    x0, x1 = Var("x", 0), Var("x", 1)
    z0 = Var("z", 0)
    xi = ProjK(x0, i)

    steps: list[Step] = []
    start = PartialD(CompScalar(fj(0), gat(0)), i, "x")
    term = start

    def push(tag, micros, annotations=()):
        nonlocal term
        for micro in micros:
            term = apply_micro(term, micro)
        steps.append(Step(tag, micros[0].path, term, tuple(micros),
                          tuple(annotations)))

    # definition of the partial derivative
    push(RuleTag.DEF, [Micro(RuleTag.DEF, (), payload=(("m", m),))])

    # composition unfolds inside the inner abstraction
    a3_app = AppM1(fj(2), Expand(AppMN(gat(2), ExpandSubst(x1, i, z0))))
    push(RuleTag.COMP, [Micro(RuleTag.COMP, ("body", "fn", "inner", "body"),
                              reverse=True, replacement=a3_app)])

    # linearity of the univariate derivative over the expanded argument
    push(RuleTag.LIN_PRIME,
         [Micro(RuleTag.LIN_PRIME, ("body",),
                payload=(("k_arity", k), ("sym", "k")))])

    symbolic = isinstance(k, str)
    if symbolic:
        prefixes = [("body", "body")]
        kvals = ["k"]
    elif k == 1:
        prefixes = [("body",)]
        kvals = [0]
    else:
        prefixes = [("body", kk) for kk in range(k)]
        kvals = list(range(k))

    def per_summand(make):
        """Build one micro (and optional annotations) per summand."""
        micros, notes = [], []
        for prefix, kk in zip(prefixes, kvals):
            got = make(prefix, kk)
            micros.extend(got[0])
            notes.extend(got[1])
        return micros, notes

    # nested substitution becomes a composition of univariate functions
    def a5_parts(prefix, kk):
        lam_a = LamSS("z", AppM1(fj(2), ExpandSubst(
            AppMN(gat(2), Expand(x1)), kk, z0)))
        lam_b = LamSS("z", AppM1(gk(2, kk), ExpandSubst(x1, i, z0)))
        comp = Comp111(lam_a, lam_b)
        micro = Micro(RuleTag.COMP, prefix + ("fn", "inner"), reverse=True,
                      replacement=comp)
        notes = [Annotation(prefix + ("fn", "inner", "outer"), "over",
                            DefSym("a", kk, None)),
                 Annotation(prefix + ("fn", "inner", "inner"), "over",
                            DefSym("b", kk, None))]
        return [micro], notes

    push(RuleTag.COMP, *per_summand(a5_parts))

    # name the two factors
    def a6_parts(prefix, kk):
        comp = get_sub(term, prefix + ("fn", "inner"))
        micros = [Micro(RuleTag.DEF, prefix + ("fn", "inner", "outer"),
                        reverse=True,
                        replacement=DefSym("a", kk, comp.outer)),
                  Micro(RuleTag.DEF, prefix + ("fn", "inner", "inner"),
                        reverse=True,
                        replacement=DefSym("b", kk, comp.inner))]
        return micros, []

    push(RuleTag.DEF, *per_summand(a6_parts))

    # the univariate chain rule, once per summand
    push(RuleTag.CHAIN_PRIME,
         *per_summand(lambda prefix, kk:
                      ([Micro(RuleTag.CHAIN_PRIME, prefix)], [])))

    # unfold the names again, annotating the partial-derivative readings
    def label_df_at_gk(kk):
        return AppM1(PartialD(fj(1), kk, "y"),
                     AppM1(gk(1, kk), Expand(x0)))

    def label_dg(kk):
        return AppM1(PartialD(gk(1, kk), i, "x"), Expand(x0))

    def a8_parts(prefix, kk):
        left_a = get_sub(term, prefix + ("left", "fn", "outer", "inner"))
        left_b = get_sub(term, prefix + ("left", "fn", "inner"))
        right_b = get_sub(term, prefix + ("right", "fn", "inner"))
        micros = [
            Micro(RuleTag.DEF, prefix + ("left", "fn", "outer", "inner"),
                  replacement=left_a.defn),
            Micro(RuleTag.DEF, prefix + ("left", "fn", "inner"),
                  replacement=left_b.defn),
            Micro(RuleTag.DEF, prefix + ("right", "fn", "inner"),
                  replacement=right_b.defn),
        ]
        notes = [
            Annotation(prefix + ("left", "fn", "outer"), "over",
                       Prime(DefSym("a", kk, None))),
            Annotation(prefix + ("left", "fn", "inner"), "over",
                       DefSym("b", kk, None)),
            Annotation(prefix + ("left",), "under", label_df_at_gk(kk)),
            Annotation(prefix + ("right",), "over",
                       App11(Prime(DefSym("b", kk, None)), xi)),
            Annotation(prefix + ("right",), "under", label_dg(kk)),
        ]
        return micros, notes

    push(RuleTag.DEF, *per_summand(a8_parts))

    # abstract the right factor into the partial derivative of g
    def a9_parts(prefix, kk):
        lam = LamTS(m, "y", App11(
            Prime(LamSS("z", AppM1(gk(3, kk),
                                   ExpandSubst(Var("y", 1), i, z0)))),
            ProjK(Var("y", 0), i)))
        micro = Micro(RuleTag.BETA, prefix + ("right",), reverse=True,
                      replacement=AppM1(lam, Expand(x0)))
        notes = [Annotation(prefix + ("right", "fn"), "under",
                            PartialD(gk(1, kk), i, "x"))]
        return [micro], notes

    push(RuleTag.BETA, *per_summand(a9_parts))

    # fold it into the macro
    def a10_parts(prefix, kk):
        micro = Micro(RuleTag.DEF, prefix + ("right", "fn"), reverse=True,
                      replacement=PartialD(gk(1, kk), i, "x"),
                      payload=(("m", m),))
        notes = [Annotation(prefix + ("left",), "under", label_df_at_gk(kk))]
        return [micro], notes

    push(RuleTag.DEF, *per_summand(a10_parts))

    # split the left factor's composition and contract the inner redex
    def a11_parts(prefix, kk):
        left = get_sub(term, prefix + ("left",))
        split = App11(left.fn.outer, App11(left.fn.inner, left.arg))
        micros = [Micro(RuleTag.COMP, prefix + ("left",), reverse=True,
                        replacement=split),
                  Micro(RuleTag.BETA, prefix + ("left", "arg"))]
        notes = [Annotation(prefix + ("left",), "under", label_df_at_gk(kk))]
        return micros, notes

    push(RuleTag.COMP, *per_summand(a11_parts))

    # abstract the left factor into the partial derivative of f
    def a12_parts(prefix, kk):
        lam = LamTS(k, "y", App11(
            Prime(LamSS("z", AppM1(fj(3),
                                   ExpandSubst(Var("y", 1), kk, z0)))),
            ProjK(Var("y", 0), kk)))
        arg = Expand(AppMN(gat(1), Expand(x0)))
        micro = Micro(RuleTag.BETA, prefix + ("left",), reverse=True,
                      replacement=AppM1(lam, arg))
        notes = [Annotation(prefix + ("left", "fn"), "under",
                            PartialD(fj(1), kk, "y"))]
        return [micro], notes

    push(RuleTag.BETA, *per_summand(a12_parts))

    def a13_parts(prefix, kk):
        micro = Micro(RuleTag.DEF, prefix + ("left", "fn"), reverse=True,
                      replacement=PartialD(fj(1), kk, "y"),
                      payload=(("m", k),))
        return [micro], []

    push(RuleTag.DEF, *per_summand(a13_parts))

    if pointfree:
        # compose the f-partial with g
        push(RuleTag.COMP,
             *per_summand(lambda prefix, kk:
                          ([Micro(RuleTag.COMP, prefix + ("left",))], [])))

        # point-wise product of the two partials
        def a15_parts(prefix, kk):
            node = OTimes(CompScalar(PartialD(fj(1), kk, "y"), gat(1)),
                          PartialD(gk(1, kk), i, "x"))
            micro = Micro(RuleTag.DEF, prefix, reverse=True,
                          replacement=AppM1(node, Expand(x0)))
            return [micro], []

        push(RuleTag.DEF, *per_summand(a15_parts))

        # fold the precomposition into the product operator
        def a16_parts(prefix, kk):
            node = OTimesPre(PartialD(fj(1), kk, "y"),
                             PartialD(gk(1, kk), i, "x"), gat(1))
            micro = Micro(RuleTag.DEF, prefix, reverse=True,
                          replacement=AppM1(node, Expand(x0)))
            return [micro], []

        push(RuleTag.DEF, *per_summand(a16_parts))

        # function-level sum: drop the argument tuple entirely
        body = term.body
        if isinstance(body, SumSym):
            node = OPlus(body.sym, body.bound, shift(body.body.fn, -1))
            micro = Micro(RuleTag.DEF, (), reverse=True, replacement=node,
                          payload=(("m", m),))
        elif isinstance(body, Plus):
            node = OPlusLit(tuple(shift(item.fn, -1) for item in body.terms))
            micro = Micro(RuleTag.DEF, (), reverse=True, replacement=node,
                          payload=(("m", m),))
        else:
            # single summand: nothing to sum over, plain eta-contraction
            micro = Micro(RuleTag.ETA, ())
        push(RuleTag.DEF, [micro])

    return DerivationTrace(Context(ctx.entries), start, tuple(steps),
                           j_disp=j, i_disp=i, k_bound=k,
                           tensor_coda=tensor_coda)
