"""Pretty printers: S-expressions, barred-arrow text, and listing LaTeX.

The LaTeX style follows the appendix conventions: barred arrows for
abstraction, overset primes, bullet-substitution brackets, underlined
captured tuples with trailing dots for generic arities, and expanded comma
lists with 1-based superscripts once arities are concrete.  Indices are
0-based internally and printed 1-based.
"""

from __future__ import annotations

from jacobiform import generic as G
from jacobiform import terms as T
from .check import synthesize
from .errors import JacobiformError
from .generic import (CompScalar, DefSym, Expand, ExpandSubst, OPlus,
                      OPlusLit, OTimes, OTimesPre, PartialD, Plus, SumSym)
from .rewrite import DerivationTrace, RuleTag
from .sexpr import term_to_sexpr
from .terms import (App11, App1N, AppM1, AppMN, Comp111, Comp1K1, CompM1N,
                    CompMKN, Context, Fun1N, FunM1, FunMN, Index, LamSS,
                    LamST, LamTS, LamTT, Mul, Prime, ProjK, ProjKI, ProjMN,
                    ProjMNI, ProjN, ProjNI, Scalar, SubstK, SubstKI, SubstMN,
                    SubstMNI, SubstN, SubstNI, SumIdx, Term, Tuple, TypeExpr,
                    Var)

_APPS = (App11, AppM1, App1N, AppMN)
_LAMS = (LamSS, LamST, LamTS, LamTT)
_COMPS = (Comp111, Comp1K1, CompMKN, CompM1N, CompScalar)


class _Renderer:
    def __init__(self, style: str, entries, bold_syms=frozenset(),
                 annotations=None):
        self.latex = style == "latex"
        # stack of (name, type, kind); kind in free/tuple/scalar/index
        self.stack = [(name, ty, "free") for name, ty in entries]
        self.bold = set(bold_syms)
        self.notes = annotations or {}

    # -- helpers ---------------------------------------------------------

    def typeof(self, t: Term) -> TypeExpr:
        ctx = Context(tuple((n, ty) for n, ty, _ in self.stack))
        return synthesize(ctx, t, strict=False)

    def pos(self, p) -> str:
        if isinstance(p, int):
            return str(p + 1)
        if self.latex and p in self.bold:
            return f"\\mathbf{{{p}}}"
        return str(p)

    def annotate(self, s: str, path) -> str:
        for kind, label in self.notes.get(path, ()):
            if not self.latex:
                continue  # the text style is brace-free
            label_s = self.render(label, "top", path + ("#label",))
            if kind == "over":
                s = f"\\overbrace{{{s}}}^{{{label_s}}}"
            else:
                s = f"\\underbrace{{{s}}}_{{{label_s}}}"
        return s

    def parens(self, s: str) -> str:
        return f"({s})"

    # -- main dispatch ------------------------------------------------------

    def render(self, t: Term, rctx: str, path=(), underline=False) -> str:
        s = self._render(t, rctx, path, underline)
        return self.annotate(s, path)

    def _render(self, t: Term, rctx: str, path, underline) -> str:
        r = self.render
        match t:
            case Var(name=name, index=idx):
                if not 0 <= idx < len(self.stack):
                    return name
                entry = self.stack[-1 - idx]
                s = entry[0]
                if self.latex and entry[2] == "scalar":
                    s = f"\\mathbf{{{s}}}"
                if self.latex and underline and isinstance(
                        entry[1], (Tuple, FunMN, Fun1N)):
                    s = f"\\underline{{{s}}}"
                return s

            case LamTT(arity=m, name=x, body=body) | \
                    LamTS(arity=m, name=x, body=body):
                if isinstance(m, int):
                    names = ",".join(self._sup(x, c) for c in range(m))
                    head = f"({names})"
                else:
                    head = f"(\\underline{{{x}}}...)" if self.latex \
                        else f"({x}...)"
                self.stack.append((x, Tuple(m), "tuple"))
                body_s = r(body, "bind-body", path + ("body",))
                self.stack.pop()
                s = head + self._mapsto() + body_s
                if rctx in ("app-head", "comp-op", "prime-inner"):
                    s = self.parens(s)
                return s

            case LamSS(name=x, body=body) | LamST(name=x, body=body):
                head = f"\\mathbf{{{x}}}" if self.latex else x
                self.stack.append((x, Scalar(), "scalar"))
                body_s = r(body, "bind-body", path + ("body",))
                self.stack.pop()
                s = head + self._mapsto() + body_s
                if rctx in ("app-head", "comp-op", "prime-inner"):
                    s = self.parens(s)
                return s

            case SumIdx(bound=k, name=x, body=body):
                self.stack.append((x, Index(k), "index"))
                body_s = r(body, "sum-body", path + ("body",))
                self.stack.pop()
                return self._sum(x) + body_s

            case SumSym(sym=x, body=body):
                return self._sum(x) + r(body, "sum-body", path + ("body",))

            case Plus(terms=items):
                joined = " + ".join(r(item, "plus-item", path + (c,))
                                    for c, item in enumerate(items))
                return self.parens(joined) if rctx in ("mul-left",
                                                       "mul-right") \
                    else joined

            case Prime(inner=f):
                inner = r(f, "prime-inner", path + ("inner",))
                if self.latex:
                    return f"{{{inner}}}^{{\\mathbf{{'}}}}"
                return inner + "'"

            case Mul(left=a, right=b):
                dot = "\\cdot " if self.latex else " \u00b7 "
                return (r(a, "mul-left", path + ("left",))
                        + dot + r(b, "mul-right", path + ("right",)))

            case App11() | AppM1() | App1N() | AppMN():
                return self._render_app(t, rctx, path, underline)

            case Comp111(outer=f, inner=g) | Comp1K1(outer=f, inner=g) | \
                    CompMKN(outer=f, inner=g) | CompM1N(outer=f, inner=g) | \
                    CompScalar(outer=f, inner=g):
                circ = "\\circ " if self.latex else " \u2218 "
                s = (r(f, "comp-op", path + ("outer",), underline)
                     + circ + r(g, "comp-op", path + ("inner",), underline))
                if rctx in ("app-head", "prime-inner", "partial-subject",
                            "otimes-op"):
                    s = self.parens(s)
                return s

            case ProjK(subject=s0, pos=p) | ProjN(subject=s0, pos=p) | \
                    ProjMN(subject=s0, pos=p):
                base = r(s0, "proj-subject", path + ("subject",))
                if not isinstance(s0, Var):
                    base = self.parens(base)
                return f"{base}^{{{self.pos(p)}}}" if self.latex \
                    else f"{base}^{self.pos(p)}"

            case ProjKI(subject=s0, pos_term=u) | \
                    ProjNI(subject=s0, pos_term=u) | \
                    ProjMNI(subject=s0, pos_term=u):
                base = r(s0, "proj-subject", path + ("subject",))
                if not isinstance(s0, Var):
                    base = self.parens(base)
                idx = r(u, "arg", path + ("pos_term",))
                return f"{base}^{{{idx}}}" if self.latex else f"{base}^{idx}"

            case Expand(subject=s0):
                width = self._width_of(s0)
                if isinstance(width, int):
                    return ",".join(self._slots(s0, width, path))
                return r(s0, "expand-subject", path + ("subject",),
                         underline=True) + "..."

            case ExpandSubst() | SubstK():
                width = self._width_of(t.subject)
                if isinstance(width, int) and isinstance(t.pos, int):
                    return ",".join(self._slots(t, width, path))
                base = r(t.subject, "expand-subject", path + ("subject",),
                         underline=True)
                repl = r(t.repl, "arg", path + ("repl",))
                bullet = "\\bullet" if self.latex else "\u2022"
                sup = f"^{{{self.pos(t.pos)}}}" if self.latex \
                    else f"^{self.pos(t.pos)}"
                return f"{base}...[{bullet}{sup} := {repl}]"

            case SubstN() | SubstMN():
                base = r(t.subject, "proj-subject", path + ("subject",))
                repl = r(t.repl, "arg", path + ("repl",))
                bullet = "\\bullet" if self.latex else "\u2022"
                sup = f"^{{{self.pos(t.pos)}}}" if self.latex \
                    else f"^{self.pos(t.pos)}"
                return f"{base}[{bullet}{sup} := {repl}]"

            case SubstKI() | SubstNI() | SubstMNI():
                base = r(t.subject, "proj-subject", path + ("subject",))
                idx = r(t.pos_term, "arg", path + ("pos_term",))
                repl = r(t.repl, "arg", path + ("repl",))
                bullet = "\\bullet" if self.latex else "\u2022"
                return f"{base}[{bullet}^{{{idx}}} := {repl}]" if self.latex \
                    else f"{base}[{bullet}^{idx} := {repl}]"

            case PartialD(subject=s0, pos=p, varname=v):
                subj = r(s0, "partial-subject", path + ("subject",))
                if self.latex:
                    return (f"\\frac{{\\partial {subj}}}"
                            f"{{\\partial {v}^{{{self.pos(p)}}}}}")
                return f"\u2202{subj}/\u2202{v}^{self.pos(p)}"

            case DefSym(base=b, sup=sup):
                if sup is None:
                    return b
                return f"{b}^{{{self.pos(sup)}}}" if self.latex \
                    else f"{b}^{self.pos(sup)}"

            case OTimes(left=a, right=b):
                op = "\\otimes " if self.latex else " \u2297 "
                s = (r(a, "otimes-op", path + ("left",)) + op
                     + r(b, "otimes-op", path + ("right",)))
                if rctx in ("app-head", "oplus-body", "oplus-item"):
                    s = self.parens(s)
                return s

            case OTimesPre(left=a, right=b, pre=g):
                pre = r(g, "arg", path + ("pre",))
                if self.latex:
                    op = f"\\otimes^{{({pre}\\times\\text{{id}})}} "
                else:
                    op = f" \u2297^({pre}\u00d7id) "
                s = (r(a, "otimes-op", path + ("left",)) + op
                     + r(b, "otimes-op", path + ("right",)))
                if rctx in ("app-head", "oplus-body", "oplus-item"):
                    s = self.parens(s)
                return s

            case OPlus(sym=x, body=body):
                big = f"\\bigoplus_{{{x}}}" if self.latex \
                    else f"\u2a01_{x}"
                return big + r(body, "oplus-body", path + ("body",))

            case OPlusLit(terms=items):
                op = "\\oplus " if self.latex else " \u2295 "
                return op.join(r(item, "oplus-item", path + (c,))
                               for c, item in enumerate(items))

        raise JacobiformError(f"no renderer for {type(t).__name__}")

    # -- applications and expanded tuples -----------------------------------

    def _render_app(self, t, rctx, path, underline) -> str:
        fn_s = self.render(t.fn, "app-head", path + ("fn",), underline)
        arg = t.arg
        width = self._width_of(arg) if isinstance(t, (AppM1, AppMN)) else None
        if isinstance(width, int):
            arg_s = ",".join(self._slots(arg, width, path + ("arg",)))
        else:
            arg_s = self.render(arg, "arg", path + ("arg",), underline)
        s = f"{fn_s}({arg_s})"
        if rctx == "mul-left" and self._prime_spine(t.fn):
            s = self.parens(s)
        return s

    def _prime_spine(self, fn) -> bool:
        if isinstance(fn, Prime):
            return True
        return isinstance(fn, _COMPS) and isinstance(fn.outer, Prime)

    def _width_of(self, t: Term):
        try:
            ty = self.typeof(t)
        except JacobiformError:
            return None
        return ty.width if isinstance(ty, Tuple) else None

    def _slots(self, t: Term, width: int, path) -> list[str]:
        fake = path + ("#slot",)
        match t:
            case Expand(subject=s):
                return self._slots(s, width, path)
            case ExpandSubst(subject=s, pos=p, repl=rr) | \
                    SubstK(subject=s, pos=p, repl=rr) if isinstance(p, int):
                base = self._slots(s, width, path)
                base[p] = self.render(rr, "arg", path + ("repl",))
                return base
            case AppMN(fn=f, arg=a) | App1N(fn=f, arg=a):
                proj = ProjMN if isinstance(t, AppMN) else ProjN
                app = AppM1 if isinstance(t, AppMN) else App11
                return [self.render(app(proj(f, c), a), "arg", fake)
                        for c in range(width)]
            case _:
                return [self.render(ProjK(t, c), "arg", fake)
                        for c in range(width)]

    def _sup(self, name: str, c: int) -> str:
        return f"{name}^{{{c + 1}}}" if self.latex else f"{name}^{c + 1}"

    def _mapsto(self) -> str:
        return " \\mapsto " if self.latex else " \u21a6 "

    def _sum(self, sym: str) -> str:
        return f"\\sum_{{{sym}}} " if self.latex else f"\u03a3_{sym} "


def print_term(t: Term, style: str = "sexpr", ctx: Context | None = None,
               bold_syms=frozenset(), annotations=None) -> str:
    """Render a term as S-expression, barred-arrow text, or listing LaTeX."""
    if style == "sexpr":
        return term_to_sexpr(t)
    if style not in ("barred-arrow", "latex", "text"):
        raise JacobiformError(f"unknown print style {style!r}")
    entries = ctx.entries if ctx is not None else ()
    renderer = _Renderer("latex" if style == "latex" else "text",
                         entries, bold_syms, annotations)
    return renderer.render(t, "top")


# -- listing emission --------------------------------------------------------------

_REL_LATEX = {
    RuleTag.ETA: "\\equiv_{\\eta}",
    RuleTag.ALPHA: "\\equiv_{\\alpha}",
    RuleTag.BETA: "\\equiv_{\\beta}",
    RuleTag.COMP: "\\equiv_{\\circ}",
    RuleTag.M_EXPAND: "\\equiv_{m}",
    RuleTag.DEF: "\\equiv_{\\text{def}}",
    RuleTag.LIN_PRIME: "=_{\\text{lin}'}",
    RuleTag.CHAIN_PRIME: "=_{\\text{chain}'}",
}

_REL_TEXT = {
    RuleTag.ETA: "\u2261_\u03b7",
    RuleTag.ALPHA: "\u2261_\u03b1",
    RuleTag.BETA: "\u2261_\u03b2",
    RuleTag.COMP: "\u2261_\u2218",
    RuleTag.M_EXPAND: "\u2261_m",
    RuleTag.DEF: "\u2261_def",
    RuleTag.LIN_PRIME: "=_lin'",
    RuleTag.CHAIN_PRIME: "=_chain'",
}


def emit_listing(trace: DerivationTrace, fmt: str = "latex") -> str:
    """Render a derivation trace as an aligned listing, one step per line."""
    if fmt not in ("latex", "text"):
        raise JacobiformError(f"unknown listing format {fmt!r}")
    latex = fmt == "latex"
    bold = {v for v in (trace.j_disp, trace.i_disp) if isinstance(v, str)}

    def render(term, annotations):
        notes = {}
        for note in annotations:
            notes.setdefault(note.path, []).append((note.kind, note.label))
        renderer = _Renderer("latex" if latex else "text",
                             trace.context.entries, bold, notes)
        return renderer.render(term, "top")

    lines = []
    if latex:
        lines.append(f"& &&{render(trace.start, ())} \\\\")
        for step in trace.steps:
            rel = _REL_LATEX[step.tag]
            lines.append(f"&{rel}&&{render(step.term, step.annotations)} \\\\")
    else:
        lines.append("          " + render(trace.start, ()))
        for step in trace.steps:
            rel = _REL_TEXT[step.tag]
            lines.append(f"{rel:<9} " + render(step.term, step.annotations))

    if trace.tensor_coda:
        lines.extend(_tensor_lines(trace, latex))

    if latex:
        return "\\begin{align*}\n" + "\n".join(lines) + "\n\\end{align*}\n"
    return "\n".join(lines) + "\n"


def _tensor_lines(trace: DerivationTrace, latex: bool) -> list[str]:
    """The correspondence into index notation, printed as annotation only.

    The mapping into decorated tensor indices is left open by design, so
    these lines carry no term and are never type-checked or evaluated.
    """
    bold = {v for v in (trace.j_disp, trace.i_disp) if isinstance(v, str)}

    def disp(v, decorate=""):
        if isinstance(v, int):
            return f"{v + 1}{decorate}"
        body = f"\\mathbf{{{v}}}" if latex and v in bold else str(v)
        return f"{body}{decorate}"

    j = disp(trace.j_disp)
    i = disp(trace.i_disp, "''")
    if isinstance(trace.k_bound, int):
        ks = [disp(c, "'") for c in range(trace.k_bound)]
    else:
        ks = [disp(trace.k_bound, "'")]

    if latex:
        pairs = [f"\\text{{J}}^{{{j}}}_{{{kk}}}\\text{{J}}^{{{kk}}}_{{{i}}}"
                 for kk in ks]
        first = " +_{T} ".join(f"({p})" for p in pairs)
        second = " +_{T} ".join(pairs)
        return [f"&\\cong_{{\\text{{T}}}}&&{first} \\\\",
                f"&\\equiv&&{second} \\\\"]
    pairs = [f"J^{j}_{kk} J^{kk}_{i}" for kk in ks]
    first = " +_T ".join(f"({p})" for p in pairs)
    second = " +_T ".join(pairs)
    return [f"\u2245_T      {first}", f"\u2261        {second}"]
