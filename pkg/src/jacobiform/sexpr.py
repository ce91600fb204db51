"""S-expression reader/printer for terms and the on-disk data formats.

Core grammar (one form per Fig-6 constructor, UTF-8):

    (var x 0)  (lam-ss z term)  (lam-ts 2 x term)  (app-m1 t u)
    (subst-k t 0 u)  (proj-mn t 1)  (comp-mkn t u)  (prime t)  (mul t u) ...

Generic terms extend it with (expand t), (expand-subst t POS t) and
(arity-var NAME); symbolic positions are written as bare names.  Natural
literals are decimal, names match [A-Za-z][A-Za-z0-9_]*.
"""

from __future__ import annotations

import re

from . import terms as T
from .errors import ParseError

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")

_TOKEN_RE = re.compile(r"""
    (?P<lparen>\() | (?P<rparen>\)) |
    (?P<string>"(?:[^"\\]|\\.)*") |
    (?P<atom>[^()\s"]+) |
    (?P<ws>\s+)
""", re.VERBOSE)


class Token:
    __slots__ = ("kind", "text", "line", "column")

    def __init__(self, kind, text, line, column):
        self.kind, self.text, self.line, self.column = kind, text, line, column


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"stray character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    return tokens


def read_sexpr(text: str):
    """Parse one toplevel S-expression into nested lists of atom strings."""
    tokens = tokenize(text)
    node, rest = _read(tokens, 0)
    if rest != len(tokens):
        tok = tokens[rest]
        raise ParseError("trailing input", tok.line, tok.column)
    return node


def read_all_sexprs(text: str) -> list:
    tokens = tokenize(text)
    out, pos = [], 0
    while pos < len(tokens):
        node, pos = _read(tokens, pos)
        out.append(node)
    return out


def _read(tokens: list[Token], pos: int):
    if pos >= len(tokens):
        raise ParseError("unexpected end of input", expected="expression")
    tok = tokens[pos]
    if tok.kind == "lparen":
        items = []
        pos += 1
        while True:
            if pos >= len(tokens):
                raise ParseError("unbalanced parentheses", tok.line,
                                 tok.column, expected=")")
            if tokens[pos].kind == "rparen":
                return items, pos + 1
            node, pos = _read(tokens, pos)
            items.append(node)
    if tok.kind == "rparen":
        raise ParseError("unexpected ')'", tok.line, tok.column)
    if tok.kind == "string":
        return StringAtom(tok.text[1:-1].replace('\\"', '"')), pos + 1
    return tok.text, pos + 1


class StringAtom(str):
    """Marks atoms that were written as quoted strings."""


# -- term parsing -------------------------------------------------------------

def parse_term(text: str, *, generic: bool = False) -> T.Term:
    return term_from_sexpr(read_sexpr(text), generic=generic)


def _nat(atom, *, generic: bool, what: str):
    if isinstance(atom, list):
        if generic and len(atom) == 2 and atom[0] == "arity-var":
            return _name(atom[1])
        raise ParseError(f"bad {what}: {format_sexpr(atom)}")
    if isinstance(atom, str) and atom.isdigit():
        return int(atom)
    if generic and isinstance(atom, str) and NAME_RE.match(atom):
        return atom
    raise ParseError(f"bad {what}: {atom!r}", expected="natural number")


def _arity(atom, *, generic: bool):
    value = _nat(atom, generic=generic, what="arity")
    if isinstance(value, int) and not 1 <= value <= T.ARITY_CAP:
        raise ParseError(f"arity {value} outside 1..{T.ARITY_CAP}")
    return value


def _name(atom) -> str:
    if isinstance(atom, str) and not isinstance(atom, StringAtom) \
            and NAME_RE.match(atom):
        return str(atom)
    raise ParseError(f"bad name: {atom!r}", expected="identifier")


def term_from_sexpr(node, *, generic: bool = False) -> T.Term:
    from . import generic as G

    def rec(n):
        return term_from_sexpr(n, generic=generic)

    def arity(a):
        return _arity(a, generic=generic)

    def pos(a):
        return _nat(a, generic=generic, what="position")

    if not isinstance(node, list) or not node or isinstance(node[0], list):
        raise ParseError(f"bad term: {format_sexpr(node)}",
                         expected="(constructor ...)")
    head, *args = node

    def want(n):
        if len(args) != n:
            raise ParseError(f"{head} takes {n} arguments, got {len(args)}")

    match head:
        case "var":
            want(2)
            return T.Var(_name(args[0]),
                         _nat(args[1], generic=False, what="de Bruijn index"))
        case "lam-tt":
            want(3)
            return T.LamTT(arity(args[0]), _name(args[1]), rec(args[2]))
        case "lam-ts":
            want(3)
            return T.LamTS(arity(args[0]), _name(args[1]), rec(args[2]))
        case "lam-st":
            want(2)
            return T.LamST(_name(args[0]), rec(args[1]))
        case "lam-ss":
            want(2)
            return T.LamSS(_name(args[0]), rec(args[1]))
        case "sum":
            want(3)
            return T.SumIdx(arity(args[0]), _name(args[1]), rec(args[2]))
        case "app-11" | "app-m1" | "app-1n" | "app-mn":
            want(2)
            cls = {"app-11": T.App11, "app-m1": T.AppM1,
                   "app-1n": T.App1N, "app-mn": T.AppMN}[head]
            return cls(rec(args[0]), rec(args[1]))
        case "subst-k" | "subst-n" | "subst-mn":
            want(3)
            cls = {"subst-k": T.SubstK, "subst-n": T.SubstN,
                   "subst-mn": T.SubstMN}[head]
            return cls(rec(args[0]), pos(args[1]), rec(args[2]))
        case "subst-ki" | "subst-ni" | "subst-mni":
            want(3)
            cls = {"subst-ki": T.SubstKI, "subst-ni": T.SubstNI,
                   "subst-mni": T.SubstMNI}[head]
            return cls(rec(args[0]), rec(args[1]), rec(args[2]))
        case "proj-k" | "proj-n" | "proj-mn":
            want(2)
            cls = {"proj-k": T.ProjK, "proj-n": T.ProjN,
                   "proj-mn": T.ProjMN}[head]
            return cls(rec(args[0]), pos(args[1]))
        case "proj-ki" | "proj-ni" | "proj-mni":
            want(2)
            cls = {"proj-ki": T.ProjKI, "proj-ni": T.ProjNI,
                   "proj-mni": T.ProjMNI}[head]
            return cls(rec(args[0]), rec(args[1]))
        case "comp-111" | "comp-1k1" | "comp-mkn" | "comp-m1n":
            want(2)
            cls = {"comp-111": T.Comp111, "comp-1k1": T.Comp1K1,
                   "comp-mkn": T.CompMKN, "comp-m1n": T.CompM1N}[head]
            return cls(rec(args[0]), rec(args[1]))
        case "prime":
            want(1)
            return T.Prime(rec(args[0]))
        case "mul":
            want(2)
            return T.Mul(rec(args[0]), rec(args[1]))

    if generic:
        match head:
            case "expand":
                want(1)
                return G.Expand(rec(args[0]))
            case "expand-subst":
                want(3)
                return G.ExpandSubst(rec(args[0]), pos(args[1]), rec(args[2]))
            case "plus":
                return G.Plus(tuple(rec(a) for a in args))
            case "sum-sym":
                want(3)
                return G.SumSym(_name(args[1]), arity(args[0]), rec(args[2]))
            case "partial":
                want(3)
                return G.PartialD(rec(args[0]), pos(args[1]), _name(args[2]))
            case "def-sym":
                want(3)
                return G.DefSym(_name(args[0]), pos(args[1]), rec(args[2]))
            case "comp-scalar":
                want(2)
                return G.CompScalar(rec(args[0]), rec(args[1]))
            case "otimes":
                want(2)
                return G.OTimes(rec(args[0]), rec(args[1]))
            case "otimes-pre":
                want(3)
                return G.OTimesPre(rec(args[0]), rec(args[1]), rec(args[2]))
            case "oplus":
                want(3)
                return G.OPlus(_name(args[1]), arity(args[0]), rec(args[2]))
            case "oplus-lit":
                return G.OPlusLit(tuple(rec(a) for a in args))

    raise ParseError(f"unknown constructor {head!r}")


# -- printing -----------------------------------------------------------------

def _nat_out(value) -> str:
    return str(value) if isinstance(value, int) else f"(arity-var {value})"


def _pos_out(value) -> str:
    return str(value)


def term_to_sexpr(t: T.Term) -> str:
    from . import generic as G
    r = term_to_sexpr
    match t:
        case T.Var(name=x, index=i):
            return f"(var {x} {i})"
        case T.LamTT(arity=m, name=x, body=b):
            return f"(lam-tt {_nat_out(m)} {x} {r(b)})"
        case T.LamTS(arity=m, name=x, body=b):
            return f"(lam-ts {_nat_out(m)} {x} {r(b)})"
        case T.LamST(name=x, body=b):
            return f"(lam-st {x} {r(b)})"
        case T.LamSS(name=x, body=b):
            return f"(lam-ss {x} {r(b)})"
        case T.SumIdx(bound=k, name=x, body=b):
            return f"(sum {_nat_out(k)} {x} {r(b)})"
        case T.App11(fn=f, arg=a):
            return f"(app-11 {r(f)} {r(a)})"
        case T.AppM1(fn=f, arg=a):
            return f"(app-m1 {r(f)} {r(a)})"
        case T.App1N(fn=f, arg=a):
            return f"(app-1n {r(f)} {r(a)})"
        case T.AppMN(fn=f, arg=a):
            return f"(app-mn {r(f)} {r(a)})"
        case T.SubstK(subject=s, pos=i, repl=u):
            return f"(subst-k {r(s)} {_pos_out(i)} {r(u)})"
        case T.SubstN(subject=s, pos=i, repl=u):
            return f"(subst-n {r(s)} {_pos_out(i)} {r(u)})"
        case T.SubstMN(subject=s, pos=i, repl=u):
            return f"(subst-mn {r(s)} {_pos_out(i)} {r(u)})"
        case T.SubstKI(subject=s, pos_term=u, repl=v):
            return f"(subst-ki {r(s)} {r(u)} {r(v)})"
        case T.SubstNI(subject=s, pos_term=u, repl=v):
            return f"(subst-ni {r(s)} {r(u)} {r(v)})"
        case T.SubstMNI(subject=s, pos_term=u, repl=v):
            return f"(subst-mni {r(s)} {r(u)} {r(v)})"
        case T.ProjK(subject=s, pos=i):
            return f"(proj-k {r(s)} {_pos_out(i)})"
        case T.ProjN(subject=s, pos=i):
            return f"(proj-n {r(s)} {_pos_out(i)})"
        case T.ProjMN(subject=s, pos=i):
            return f"(proj-mn {r(s)} {_pos_out(i)})"
        case T.ProjKI(subject=s, pos_term=u):
            return f"(proj-ki {r(s)} {r(u)})"
        case T.ProjNI(subject=s, pos_term=u):
            return f"(proj-ni {r(s)} {r(u)})"
        case T.ProjMNI(subject=s, pos_term=u):
            return f"(proj-mni {r(s)} {r(u)})"
        case T.Comp111(outer=f, inner=g):
            return f"(comp-111 {r(f)} {r(g)})"
        case T.Comp1K1(outer=f, inner=g):
            return f"(comp-1k1 {r(f)} {r(g)})"
        case T.CompMKN(outer=f, inner=g):
            return f"(comp-mkn {r(f)} {r(g)})"
        case T.CompM1N(outer=f, inner=g):
            return f"(comp-m1n {r(f)} {r(g)})"
        case T.Prime(inner=f):
            return f"(prime {r(f)})"
        case T.Mul(left=a, right=b):
            return f"(mul {r(a)} {r(b)})"
        case G.Expand(subject=s):
            return f"(expand {r(s)})"
        case G.ExpandSubst(subject=s, pos=i, repl=u):
            return f"(expand-subst {r(s)} {_pos_out(i)} {r(u)})"
        case G.Plus(terms=ts):
            return "(plus " + " ".join(r(x) for x in ts) + ")"
        case G.SumSym(sym=k, bound=b, body=x):
            return f"(sum-sym {_nat_out(b)} {k} {r(x)})"
        case G.PartialD(subject=s, pos=i, varname=v):
            return f"(partial {r(s)} {_pos_out(i)} {v})"
        case G.DefSym(base=b, sup=i, defn=d):
            return f"(def-sym {b} {_pos_out(i)} {r(d)})"
        case G.CompScalar(outer=f, inner=g):
            return f"(comp-scalar {r(f)} {r(g)})"
        case G.OTimes(left=a, right=b):
            return f"(otimes {r(a)} {r(b)})"
        case G.OTimesPre(left=a, right=b, pre=g):
            return f"(otimes-pre {r(a)} {r(b)} {r(g)})"
        case G.OPlus(sym=k, bound=b, body=x):
            return f"(oplus {_nat_out(b)} {k} {r(x)})"
        case G.OPlusLit(terms=ts):
            return "(oplus-lit " + " ".join(r(x) for x in ts) + ")"
    raise ParseError(f"cannot print {type(t).__name__} as an S-expression")


def format_sexpr(node) -> str:
    if isinstance(node, StringAtom):
        return '"' + str(node).replace('"', '\\"') + '"'
    if isinstance(node, list):
        return "(" + " ".join(format_sexpr(n) for n in node) + ")"
    return str(node)
