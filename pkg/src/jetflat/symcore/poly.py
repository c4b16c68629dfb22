"""Sparse multivariate polynomials over Q.

Storage and the multivariate gcd are delegated to FLINT's ``fmpq_mpoly``;
this class pins a polynomial to a :class:`VarUniverse` and exposes the
operations the rest of the package relies on.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterator

import flint

from jetflat.errors import UniverseMismatch
from jetflat.symcore.universe import VarUniverse

Scalar = Fraction
Monomial = tuple[int, ...]


def to_fraction(c: flint.fmpq) -> Fraction:
    return Fraction(int(c.p), int(c.q))


def to_fmpq(c: int | Fraction) -> flint.fmpq:
    if isinstance(c, Fraction):
        return flint.fmpq(c.numerator, c.denominator)
    return flint.fmpq(c)


class Polynomial:
    """Immutable polynomial in the variables of ``universe``.

    ``terms`` iterates in descending graded-lex order on the universe's
    variable order; no stored coefficient is zero.
    """

    __slots__ = ("universe", "raw")

    def __init__(self, universe: VarUniverse, raw: flint.fmpq_mpoly | None = None):
        self.universe = universe
        self.raw = universe.ctx.from_dict({}) if raw is None else raw

    @classmethod
    def from_terms(cls, universe: VarUniverse, terms: dict[Monomial, int | Fraction]) -> "Polynomial":
        data = {m: to_fmpq(c) for m, c in terms.items() if c}
        return cls(universe, universe.ctx.from_dict(data))

    @classmethod
    def constant(cls, universe: VarUniverse, c: int | Fraction) -> "Polynomial":
        return cls(universe, universe.ctx.constant(to_fmpq(c)))

    @classmethod
    def var(cls, universe: VarUniverse, name: str) -> "Polynomial":
        return cls(universe, universe.ctx.gen(universe.position(name)))

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return {m: to_fraction(c) for m, c in self.raw.terms()}

    def __iter__(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.raw)

    def is_zero(self) -> bool:
        return self.raw.is_zero()

    def is_constant(self) -> bool:
        return self.raw.is_constant()

    def total_degree(self) -> int:
        return -1 if self.raw.is_zero() else int(self.raw.total_degree())

    def degrees(self) -> tuple[int, ...]:
        return tuple(int(d) for d in self.raw.degrees())

    def leading_coefficient(self) -> Fraction:
        return to_fraction(self.raw.leading_coefficient())

    def _other(self, other: "Polynomial") -> flint.fmpq_mpoly:
        if isinstance(other, Polynomial):
            if other.universe != self.universe:
                raise UniverseMismatch(f"{other.universe} vs {self.universe}")
            return other.raw
        return self.universe.ctx.constant(to_fmpq(other))

    def __add__(self, other):
        return Polynomial(self.universe, self.raw + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Polynomial(self.universe, self.raw - self._other(other))

    def __rsub__(self, other):
        return Polynomial(self.universe, self._other(other) - self.raw)

    def __mul__(self, other):
        return Polynomial(self.universe, self.raw * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Polynomial(self.universe, -self.raw)

    def __pow__(self, k: int):
        return Polynomial(self.universe, self.raw**k)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.universe == other.universe and self.raw == other.raw
        if isinstance(other, (int, Fraction)):
            return self.raw == self.universe.ctx.constant(to_fmpq(other))
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.universe, tuple(self.raw.terms())))

    def exact_div(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(self.universe, self.raw / self._other(other))

    def gcd(self, other: "Polynomial") -> "Polynomial":
        """Monic gcd (zero only when both inputs are zero)."""
        return Polynomial(self.universe, self.raw.gcd(self._other(other)))

    def diff(self, name: str) -> "Polynomial":
        return Polynomial(self.universe, self.raw.derivative(self.universe.position(name)))

    def __repr__(self) -> str:
        return f"Polynomial({self.raw})"


def integer_normalizer(raw: flint.fmpq_mpoly) -> Fraction:
    """Scale factor making ``raw`` integral, primitive, with positive leading coefficient."""
    coeffs = raw.coeffs()
    den = 1
    for c in coeffs:
        den = lcm(den, int(c.q))
    num = 0
    for c in coeffs:
        num = gcd(num, int(c.p) * (den // int(c.q)))
    scale = Fraction(den, num)
    return -scale if coeffs[0] < 0 else scale
