"""Exception hierarchy shared by the kernel, the jet-space layer and the CLI."""

from __future__ import annotations


class JetflatError(Exception):
    """Base class for every error raised by the library."""


class DivisionByZeroExpr(JetflatError, ZeroDivisionError):
    pass


class UnknownVariable(JetflatError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else "unknown variable"


class SubstitutionSingularity(JetflatError):
    pass


class NonSquareMatrix(JetflatError, ValueError):
    pass


class UniverseMismatch(JetflatError, ValueError):
    pass


class IndexOutOfRange(JetflatError, IndexError):
    pass


class DegreeTooHigh(JetflatError, ValueError):
    pass


class DegenerateJacobian(JetflatError, ValueError):
    pass


class NotSymmetric(JetflatError, ValueError):
    pass


class JetVariableNotAllowed(JetflatError, ValueError):
    pass


class ThetaNotEliminated(JetflatError, AssertionError):
    """Principal-unknown symbols survived an elimination that must remove them."""
