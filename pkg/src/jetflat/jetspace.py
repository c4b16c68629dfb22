"""Second-order jet-space scaffolding.

A :class:`PdeSystem` is the symmetric family of right-hand sides
``y_{x^i x^j} = F^{i,j}(x, y, y_x)``.  Total derivatives differentiate
through the system, and the integrability residuals are the cross-derivative
defects whose vanishing is complete integrability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping

from jetflat.errors import IndexOutOfRange, JetVariableNotAllowed, NotSymmetric
from jetflat.symcore import RationalExpr, VarUniverse


@dataclass(frozen=True)
class JetContext:
    """Dimension ``n >= 2`` and its jet universe; index ``n+1`` aliases y."""

    n: int
    extras: tuple[str, ...] = ()
    universe: VarUniverse = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        object.__setattr__(self, "universe", VarUniverse(self.n, self.extras))

    def with_extras(self, extras: tuple[str, ...]) -> "JetContext":
        return JetContext(self.n, self.universe.with_extras(extras).extras)

    # Expression helpers.  Indices are 1-based.
    def const(self, c) -> RationalExpr:
        return RationalExpr.const(self.universe, c)

    def zero(self) -> RationalExpr:
        return RationalExpr.zero(self.universe)

    def sym(self, name: str) -> RationalExpr:
        return RationalExpr.var(self.universe, name)

    def x(self, i: int) -> RationalExpr:
        """Coordinate x^i, with x^{n+1} meaning y."""
        return self.sym(self.universe.x(i))

    @property
    def y(self) -> RationalExpr:
        return self.sym("y")

    def p(self, i: int) -> RationalExpr:
        """First-order jet variable y_{x^i}."""
        return self.sym(self.universe.p(i))

    def q(self, i: int, j: int) -> RationalExpr:
        """Second-order jet variable y_{x^i x^j}."""
        return self.sym(self.universe.q(i, j))

    def d(self, e: RationalExpr, i: int) -> RationalExpr:
        """Partial derivative along x^i (i = n+1 means along y)."""
        return e.diff(self.universe.x(i))

    def check_index(self, i: int, top: int | None = None) -> None:
        top = self.n if top is None else top
        if not 1 <= i <= top:
            raise IndexOutOfRange(f"index {i} outside 1..{top}")

    @property
    def indices(self) -> range:
        return range(1, self.n + 1)

    @property
    def all_indices(self) -> range:
        return range(1, self.n + 2)

    @property
    def point_names(self) -> tuple[str, ...]:
        return self.universe.base_names

    @property
    def jet1_names(self) -> tuple[str, ...]:
        return self.universe.jet1_names

    @property
    def jet2_names(self) -> tuple[str, ...]:
        return self.universe.jet2_names


def delta(a: int, b: int) -> int:
    return 1 if a == b else 0


class PdeSystem:
    """Right-hand sides ``F^{j1,j2}``, stored upper-triangular and mirrored on read."""

    def __init__(self, ctx: JetContext, entries: Mapping[tuple[int, int], RationalExpr]):
        stored: dict[tuple[int, int], RationalExpr] = {}
        for (i, j), e in entries.items():
            ctx.check_index(i)
            ctx.check_index(j)
            if not isinstance(e, RationalExpr):
                e = ctx.const(e)
            e = e.lift(ctx.universe)
            if e.depends_on(ctx.jet2_names):
                raise JetVariableNotAllowed(f"F[{i}][{j}] mentions second-order jet variables")
            key = (min(i, j), max(i, j))
            if key in stored and stored[key] != e:
                raise NotSymmetric(f"F[{i}][{j}] differs from F[{j}][{i}]")
            stored[key] = e
        zero = ctx.zero()
        self.ctx = ctx
        self._f = {
            (i, j): stored.get((i, j), zero) for i in ctx.indices for j in ctx.indices if i <= j
        }

    @classmethod
    def from_matrix(cls, ctx: JetContext, rows) -> "PdeSystem":
        """Build from a full n x n array, rejecting asymmetric input."""
        entries = {}
        for i in ctx.indices:
            for j in ctx.indices:
                entries[(i, j)] = rows[i - 1][j - 1]
        return cls(ctx, entries)

    @classmethod
    def zero(cls, ctx: JetContext) -> "PdeSystem":
        return cls(ctx, {})

    @property
    def n(self) -> int:
        return self.ctx.n

    def F(self, i: int, j: int) -> RationalExpr:
        return self._f[(i, j) if i <= j else (j, i)]

    def items(self):
        return self._f.items()

    def __eq__(self, other) -> bool:
        return isinstance(other, PdeSystem) and self.ctx == other.ctx and self._f == other._f

    def __repr__(self) -> str:
        body = ", ".join(f"F[{i}][{j}]={e}" for (i, j), e in self._f.items())
        return f"PdeSystem(n={self.n}, {body})"


def total_derivative(sys: PdeSystem, e: RationalExpr, j: int) -> RationalExpr:
    """``D_{x^j} e = e_{x^j} + y_{x^j} e_y + sum_l F^{j,l} e_{y_{x^l}}``."""
    ctx = sys.ctx
    ctx.check_index(j)
    if e.depends_on(ctx.jet2_names):
        raise JetVariableNotAllowed("total_derivative takes functions of (x, y, y_x) only")
    out = ctx.d(e, j)
    free = e.free_names()
    if "y" in free:
        out = out + ctx.p(j) * e.diff("y")
    for l in ctx.indices:
        name = ctx.universe.p(l)
        if name in free:
            out = out + sys.F(j, l) * e.diff(name)
    return out


def jet_total_derivative(ctx: JetContext, e: RationalExpr, k: int) -> RationalExpr:
    """``D_k`` on the second-order jet space, with y_{x^k x^l} left symbolic."""
    ctx.check_index(k)
    out = ctx.d(e, k)
    free = e.free_names()
    if "y" in free:
        out = out + ctx.p(k) * e.diff("y")
    for l in ctx.indices:
        name = ctx.universe.p(l)
        if name in free:
            out = out + ctx.q(k, l) * e.diff(name)
    return out


@dataclass(frozen=True)
class IntegrabilityResiduals:
    """Residuals keyed ``(j1, j2, j3)`` with ``j2 < j3``; the rest follows by antisymmetry."""

    n: int
    residuals: dict[tuple[int, int, int], RationalExpr]

    def __getitem__(self, key: tuple[int, int, int]) -> RationalExpr:
        j1, j2, j3 = key
        if j2 == j3:
            return self.residuals[(j1, 1, 2)] * 0
        if j2 < j3:
            return self.residuals[key]
        return -self.residuals[(j1, j3, j2)]

    def nonzero(self) -> list[tuple[int, int, int]]:
        return [k for k, v in self.residuals.items() if not v.is_zero()]

    def all_zero(self) -> bool:
        return not self.nonzero()


def integrability_residuals(sys: PdeSystem) -> IntegrabilityResiduals:
    """``D_{x^{j3}} F^{j1,j2} - D_{x^{j2}} F^{j1,j3}`` for all j1 and j2 < j3."""
    ctx = sys.ctx
    cache: dict[tuple[int, int, int], RationalExpr] = {}

    def dF(a: int, b: int, c: int) -> RationalExpr:
        key = (min(a, b), max(a, b), c)
        if key not in cache:
            cache[key] = total_derivative(sys, sys.F(a, b), c)
        return cache[key]

    out = {}
    for j1 in ctx.indices:
        for j2, j3 in combinations(ctx.indices, 2):
            out[(j1, j2, j3)] = dF(j1, j2, j3) - dF(j1, j3, j2)
    return IntegrabilityResiduals(ctx.n, out)
