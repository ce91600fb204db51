"""Exception hierarchy shared by all jacobiform modules.

Domain errors (bad terms, bad indices, bad dimensions) derive from
JacobiformError so the CLI can map them to exit status 1; genuine input
syntax problems use ParseError and map to exit status 2.
"""

from __future__ import annotations


class JacobiformError(Exception):
    """Base class for every error raised by this package."""


class ParseError(JacobiformError):
    """Malformed textual input (S-expressions, polynomial literals)."""

    def __init__(self, message: str, line: int = 0, column: int = 0,
                 expected: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected
        where = f" at {line}:{column}" if line else ""
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message}{where}{hint}")


class TypeCheckError(JacobiformError):
    """Base for checker failures; `path` locates the offending subterm."""

    def __init__(self, message: str, path: tuple = ()):
        self.path = path
        super().__init__(f"{message} [at {render_path(path)}]")


class TypeMismatch(TypeCheckError):
    def __init__(self, expected, found, path: tuple = ()):
        self.expected = expected
        self.found = found
        super().__init__(f"expected {expected}, found {found}", path)


class UnboundVariable(TypeCheckError):
    def __init__(self, index, length, path: tuple = ()):
        self.index = index
        self.length = length
        super().__init__(f"de Bruijn index {index} unbound (context has "
                         f"{length} entries)", path)


class ArityMismatch(TypeCheckError):
    def __init__(self, message: str, path: tuple = ()):
        super().__init__(message, path)


class IndexOutOfRange(JacobiformError):
    def __init__(self, index, bound, path: tuple = ()):
        self.index = index
        self.bound = bound
        self.path = path
        super().__init__(f"index {index} out of range (bound {bound})")


class RuleNotApplicable(JacobiformError):
    def __init__(self, rule, path: tuple, reason: str):
        self.rule = rule
        self.rule_path = path
        self.reason = reason
        super().__init__(f"rule {rule} not applicable at "
                         f"{render_path(path)}: {reason}")


class UnassignedArity(JacobiformError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"arity variable {name!r} has no assignment")


class PositionOutOfRange(JacobiformError):
    def __init__(self, position, arity):
        self.position = position
        self.arity = arity
        super().__init__(f"position {position} out of range for arity {arity}")


class EnvironmentMismatch(JacobiformError):
    pass


class NonPolynomialBody(JacobiformError):
    """Reserved: a binder body left the polynomial fragment."""


class ResourceLimit(JacobiformError):
    """Polynomial degree or term count exceeded the safety caps."""


class DimensionMismatch(JacobiformError):
    pass


class MissingInverse(JacobiformError):
    pass


class NonSquare(JacobiformError):
    pass


class NonUnitDeterminant(JacobiformError):
    pass


class InverseMismatch(JacobiformError):
    """Claimed inverse of a transition map fails the identity check."""


def render_path(path: tuple) -> str:
    return "root" if not path else ".".join(str(p) for p in path)
