"""Typed variable universes for second-order jet spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import flint

from jetflat.errors import IndexOutOfRange, UnknownVariable

BASE, DEPENDENT, JET1, JET2, AUX = "base", "dependent", "jet1", "jet2", "aux"


@dataclass(frozen=True)
class VarUniverse:
    """Ordered variable set ``x1..xn, y, p1..pn, q{i}_{j} (i <= j), extras``.

    ``p{i}`` stands for y_{x^i} and ``q{i}_{j}`` for y_{x^i x^j``.  Extras are
    auxiliary symbols (principal unknowns, symbolic coefficients) placed after
    the jet variables.  The order fixes the graded-lex monomial order.
    """

    n: int
    extras: tuple[str, ...] = ()
    names: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("a universe needs at least one base variable")
        names = [f"x{i}" for i in range(1, self.n + 1)]
        names.append("y")
        names += [f"p{i}" for i in range(1, self.n + 1)]
        names += [f"q{i}_{j}" for i in range(1, self.n + 1) for j in range(i, self.n + 1)]
        if len(set(self.extras)) != len(self.extras) or set(self.extras) & set(names):
            raise ValueError(f"extra symbols clash: {self.extras}")
        names += list(self.extras)
        object.__setattr__(self, "names", tuple(names))

    @cached_property
    def index(self) -> dict[str, int]:
        return {name: k for k, name in enumerate(self.names)}

    @cached_property
    def ctx(self) -> flint.fmpq_mpoly_ctx:
        return flint.fmpq_mpoly_ctx.get(self.names, "deglex")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def kind(self, name: str) -> str:
        k = self.position(name)
        n = self.n
        if k < n:
            return BASE
        if k == n:
            return DEPENDENT
        if k <= 2 * n:
            return JET1
        if k < 2 * n + 1 + n * (n + 1) // 2:
            return JET2
        return AUX

    def position(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UnknownVariable(f"{name!r} is not a variable of {self}") from None

    def _check(self, i: int, top: int) -> None:
        if not 1 <= i <= top:
            raise IndexOutOfRange(f"index {i} outside 1..{top}")

    # Variable-name helpers, 1-based as in the mathematics.
    def x(self, i: int) -> str:
        """Name of x^i; ``x(n+1)`` aliases the dependent variable y."""
        self._check(i, self.n + 1)
        return "y" if i == self.n + 1 else f"x{i}"

    def p(self, i: int) -> str:
        self._check(i, self.n)
        return f"p{i}"

    def q(self, i: int, j: int) -> str:
        self._check(i, self.n)
        self._check(j, self.n)
        i, j = min(i, j), max(i, j)
        return f"q{i}_{j}"

    @property
    def base_names(self) -> tuple[str, ...]:
        return self.names[: self.n + 1]

    @property
    def jet1_names(self) -> tuple[str, ...]:
        return self.names[self.n + 1 : 2 * self.n + 1]

    @property
    def jet2_names(self) -> tuple[str, ...]:
        return self.names[2 * self.n + 1 : 2 * self.n + 1 + self.n * (self.n + 1) // 2]

    def with_extras(self, extras: tuple[str, ...]) -> "VarUniverse":
        """A universe with the same jet variables and additional symbols appended."""
        return VarUniverse(self.n, self.extras + tuple(e for e in extras if e not in self.extras))

    def display(self, name: str) -> str:
        """Spelling of a variable in the input grammar."""
        kind = self.kind(name)
        if kind == BASE:
            return f"x[{name[1:]}]"
        if kind == DEPENDENT:
            return "y"
        if kind == JET1:
            return f"dy[{name[1:]}]"
        if kind == JET2:
            i, j = name[1:].split("_")
            return f"ddy[{i}][{j}]"
        return name
