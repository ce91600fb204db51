"""Exact multivariate polynomials over rationals.

Sparse representation: a mapping from exponent vectors (tuples of naturals,
one slot per variable) to nonzero Fraction coefficients.  The zero polynomial
stores no terms, so equal polynomials compare equal structurally.  All
arithmetic is exact; degree and term-count caps guard against composition
blowup.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ArityMismatch, ParseError, ResourceLimit

DEGREE_CAP = 64
TERM_CAP = 10**6

Exponents = tuple[int, ...]


def _check_caps(terms: Mapping[Exponents, Fraction]) -> None:
    if len(terms) > TERM_CAP:
        raise ResourceLimit(f"polynomial has {len(terms)} terms (cap {TERM_CAP})")
    for exps in terms:
        if sum(exps) > DEGREE_CAP:
            raise ResourceLimit(f"monomial degree {sum(exps)} exceeds cap {DEGREE_CAP}")


@dataclass(frozen=True)
class MultiPoly:
    """Polynomial in `nvars` variables with exact rational coefficients."""

    nvars: int
    terms: Mapping[Exponents, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for exps, coeff in self.terms.items():
            coeff = Fraction(coeff)
            if len(exps) != self.nvars:
                raise ArityMismatch(
                    f"exponent vector {exps} does not match nvars={self.nvars}")
            if coeff != 0:
                clean[tuple(int(e) for e in exps)] = coeff
        _check_caps(clean)
        object.__setattr__(self, "terms", clean)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(value, nvars: int = 0) -> "MultiPoly":
        value = Fraction(value)
        if value == 0:
            return MultiPoly(nvars, {})
        return MultiPoly(nvars, {(0,) * nvars: value})

    @staticmethod
    def variable(index: int, nvars: int) -> "MultiPoly":
        if not 0 <= index < nvars:
            raise ArityMismatch(f"variable index {index} not below nvars={nvars}")
        exps = tuple(1 if i == index else 0 for i in range(nvars))
        return MultiPoly(nvars, {exps: Fraction(1)})

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ArityMismatch("polynomial is not constant")
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; zero polynomial reports 0."""
        return max((sum(e) for e in self.terms), default=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- arithmetic ----------------------------------------------------------

    def _require_same_shape(self, other: "MultiPoly") -> None:
        if self.nvars != other.nvars:
            raise ArityMismatch(
                f"nvars mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._require_same_shape(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            terms[exps] = terms.get(exps, Fraction(0)) + coeff
        return MultiPoly(self.nvars, terms)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._require_same_shape(other)
        terms: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                terms[exps] = terms.get(exps, Fraction(0)) + c1 * c2
        return MultiPoly(self.nvars, terms)

    def scale(self, factor) -> "MultiPoly":
        factor = Fraction(factor)
        return MultiPoly(self.nvars,
                         {e: c * factor for e, c in self.terms.items()})

    def __pow__(self, power: int) -> "MultiPoly":
        if power < 0:
            raise ArityMismatch("negative powers leave the polynomial carrier")
        result = MultiPoly.constant(1, self.nvars)
        for _ in range(power):
            result = result * self
        return result

    # -- substitution and calculus -----------------------------------------

    def compose(self, inners: Iterable["MultiPoly"]) -> "MultiPoly":
        """Substitute variable i by inners[i]; exact, canonical result."""
        inners = list(inners)
        if len(inners) != self.nvars:
            raise ArityMismatch(
                f"need {self.nvars} substituents, got {len(inners)}")
        out_nvars = inners[0].nvars if inners else 0
        for p in inners:
            if p.nvars != out_nvars:
                raise ArityMismatch("substituents disagree on nvars")
        result = MultiPoly.constant(0, out_nvars)
        for exps, coeff in self.terms.items():
            term = MultiPoly.constant(coeff, out_nvars)
            for var, power in enumerate(exps):
                if power:
                    term = term * inners[var] ** power
            result = result + term
        return result

    def partial(self, var: int) -> "MultiPoly":
        """Coefficient-rule partial derivative in variable `var`."""
        if not 0 <= var < self.nvars:
            raise ArityMismatch(f"variable {var} not below nvars={self.nvars}")
        terms: dict[Exponents, Fraction] = {}
        for exps, coeff in self.terms.items():
            e = exps[var]
            if e == 0:
                continue
            lowered = exps[:var] + (e - 1,) + exps[var + 1:]
            terms[lowered] = terms.get(lowered, Fraction(0)) + coeff * e
        return MultiPoly(self.nvars, terms)

    def eval_at(self, point: Iterable) -> Fraction:
        point = [Fraction(v) for v in point]
        if len(point) != self.nvars:
            raise ArityMismatch(
                f"need {self.nvars} coordinates, got {len(point)}")
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            value = coeff
            for base, power in zip(point, exps):
                value *= base ** power
            total += value
        return total

    # -- reshaping helpers used by the evaluator ----------------------------

    def pad(self, nvars: int) -> "MultiPoly":
        """Reinterpret over a wider variable set (new trailing variables)."""
        if nvars < self.nvars:
            raise ArityMismatch("pad cannot drop variables")
        extra = (0,) * (nvars - self.nvars)
        return MultiPoly(nvars, {e + extra: c for e, c in self.terms.items()})

    def insert_vars(self, at: int, count: int) -> "MultiPoly":
        """Insert `count` fresh (unused) variables at position `at`."""
        if count == 0:
            return self
        terms = {e[:at] + (0,) * count + e[at:]: c
                 for e, c in self.terms.items()}
        return MultiPoly(self.nvars + count, terms)

    def __str__(self) -> str:
        return format_poly(self)

    __repr__ = __str__


def poly_derivative(p: MultiPoly) -> MultiPoly:
    """Univariate coefficient-rule derivative (c z^e -> c e z^(e-1))."""
    if p.nvars != 1:
        raise ArityMismatch(f"poly_derivative needs nvars=1, got {p.nvars}")
    return p.partial(0)


def poly_compose(outer: MultiPoly, inners: Iterable[MultiPoly]) -> MultiPoly:
    """Exact polynomial substitution of `inners` into `outer`."""
    return outer.compose(inners)


# -- textual literal format -------------------------------------------------
#
# "3/2 x1^2 x2 + -1 x2" means (3/2) x1^2 x2 - x2.  The coefficient is
# mandatory, factors are xN or xN^E with N counted from 1, an omitted
# exponent is 1 and an absent variable has exponent 0.

def parse_poly(nvars: int, text: str) -> MultiPoly:
    terms: dict[Exponents, Fraction] = {}
    body = text.strip()
    if not body or body == "0":
        return MultiPoly(nvars, {})
    for chunk in body.split("+"):
        parts = chunk.split()
        if not parts:
            raise ParseError("empty monomial in polynomial literal")
        try:
            coeff = Fraction(parts[0])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad coefficient {parts[0]!r} in polynomial "
                             f"literal") from None
        exps = [0] * nvars
        for factor in parts[1:]:
            name, _, power = factor.partition("^")
            if not name.startswith("x"):
                raise ParseError(f"bad factor {factor!r}: variables are "
                                 f"named x1..x{nvars}")
            try:
                var = int(name[1:]) - 1
                exponent = int(power) if power else 1
            except ValueError:
                raise ParseError(f"bad factor {factor!r}") from None
            if not 0 <= var < nvars:
                raise ParseError(f"variable {name} out of range for "
                                 f"{nvars} variables")
            if exponent < 0:
                raise ParseError(f"negative exponent in {factor!r}")
            exps[var] += exponent
        key = tuple(exps)
        terms[key] = terms.get(key, Fraction(0)) + coeff
    return MultiPoly(nvars, terms)


def format_poly(p: MultiPoly) -> str:
    if not p.terms:
        return "0"
    chunks = []
    for exps in sorted(p.terms, key=lambda e: (sum(e), e), reverse=True):
        coeff = p.terms[exps]
        factors = [str(coeff)]
        for var, power in enumerate(exps):
            if power == 1:
                factors.append(f"x{var + 1}")
            elif power > 1:
                factors.append(f"x{var + 1}^{power}")
        chunks.append(" ".join(factors))
    return " + ".join(chunks)
