"""Exact computer-algebra kernel.

Sparse polynomials and canonical rational functions over Q, with partial
derivatives, simultaneous substitution, determinants and linear solving over
the rational-function field.  Every value is immutable.
"""

from __future__ import annotations

from typing import Literal, Mapping

from jetflat.errors import DivisionByZeroExpr
from jetflat.symcore.linalg import (
    Inconsistent,
    Solution,
    Underdetermined,
    determinant,
    solve_linear,
)
from jetflat.symcore.poly import Polynomial, Scalar
from jetflat.symcore.rational import RationalExpr
from jetflat.symcore.universe import VarUniverse

__all__ = [
    "Inconsistent",
    "Polynomial",
    "RationalExpr",
    "Scalar",
    "Solution",
    "Underdetermined",
    "VarUniverse",
    "arith",
    "determinant",
    "differentiate",
    "is_zero",
    "solve_linear",
    "substitute",
]


def arith(a: RationalExpr, b: RationalExpr, op: Literal["add", "sub", "mul", "div"]) -> RationalExpr:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b.is_zero():
            raise DivisionByZeroExpr(f"division of {a} by canonical zero")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def differentiate(e: RationalExpr, v: str) -> RationalExpr:
    return e.diff(v)


def substitute(e: RationalExpr, bindings: Mapping[str, RationalExpr]) -> RationalExpr:
    return e.subs(bindings)


def is_zero(e: RationalExpr) -> bool:
    """Authoritative zero test: the canonical numerator is the zero polynomial."""
    return e.is_zero()
