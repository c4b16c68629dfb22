"""Point transformations, square functions and second prolongations.

Indices of the square table run over ``1..n+1`` with ``x^{n+1}`` standing
for ``y``; component ``n+1`` of a transformation is ``Y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from jetflat.cubic import CubicForm
from jetflat.errors import DegenerateJacobian, IndexOutOfRange
from jetflat.jetspace import JetContext, PdeSystem, delta, jet_total_derivative
from jetflat.symcore import RationalExpr, Solution, determinant, solve_linear

HALF = Fraction(1, 2)


class PointTransformation:
    """``(x, y) -> (X^1, ..., X^n, Y)`` with rational components in ``(x, y)``."""

    def __init__(self, ctx: JetContext, X: Sequence[RationalExpr], Y: RationalExpr):
        if len(X) != ctx.n:
            raise IndexOutOfRange(f"expected {ctx.n} components X, got {len(X)}")
        u = ctx.universe
        jets = ctx.jet1_names + ctx.jet2_names
        comps = []
        for e in list(X) + [Y]:
            e = e if isinstance(e, RationalExpr) else ctx.const(e)
            e = e.lift(u)
            if e.depends_on(jets):
                raise ValueError("transformation components must be functions of (x, y)")
            comps.append(e)
        self.ctx = ctx
        self._comps = tuple(comps)
        self._d1: dict = {}
        self._d2: dict = {}

    @classmethod
    def identity(cls, ctx: JetContext) -> "PointTransformation":
        return cls(ctx, [ctx.x(i) for i in ctx.indices], ctx.y)

    @property
    def n(self) -> int:
        return self.ctx.n

    @property
    def X(self) -> tuple[RationalExpr, ...]:
        return self._comps[:-1]

    @property
    def Y(self) -> RationalExpr:
        return self._comps[-1]

    def component(self, l: int) -> RationalExpr:
        """``X^l`` for l <= n, ``Y`` for l = n+1."""
        return self._comps[l - 1]

    def d1(self, l: int, a: int) -> RationalExpr:
        key = (l, a)
        if key not in self._d1:
            self._d1[key] = self.ctx.d(self.component(l), a)
        return self._d1[key]

    def d2(self, l: int, a: int, b: int) -> RationalExpr:
        a, b = min(a, b), max(a, b)
        key = (l, a, b)
        if key not in self._d2:
            self._d2[key] = self.ctx.d(self.d1(l, a), b)
        return self._d2[key]

    def jacobian_matrix(self) -> list[list[RationalExpr]]:
        """Rows X^1..X^n, Y; columns x^1..x^n, y."""
        top = self.n + 1
        return [[self.d1(l, a) for a in range(1, top + 1)] for l in range(1, top + 1)]

    def __repr__(self) -> str:
        xs = ", ".join(str(e) for e in self.X)
        return f"PointTransformation(X=({xs}), Y={self.Y})"


def jacobian(t: PointTransformation) -> RationalExpr:
    return determinant(t.jacobian_matrix())


def modified_jacobian(t: PointTransformation, columns: Sequence[tuple[int, ...]]) -> RationalExpr:
    """Determinant whose column ``c`` holds the derivatives named by ``columns[c]``.

    A 1-tuple ``(a,)`` is a first derivative along x^a and a pair ``(a, b)``
    a second derivative; index n+1 means y.
    """
    top = t.n + 1
    if len(columns) != top:
        raise IndexOutOfRange(f"expected {top} columns")
    cols = []
    for col in columns:
        if len(col) == 1:
            cols.append([t.d1(l, col[0]) for l in range(1, top + 1)])
        else:
            cols.append([t.d2(l, *col) for l in range(1, top + 1)])
    return determinant([[cols[c][r] for c in range(top)] for r in range(top)])


@dataclass(frozen=True)
class SquareTable:
    """``entries[(j1, j2, k)]`` with ``j1 <= j2`` is the square function of index k at (j1, j2)."""

    n: int
    entries: dict[tuple[int, int, int], RationalExpr]

    def __call__(self, k: int, j1: int, j2: int) -> RationalExpr:
        if j1 > j2:
            j1, j2 = j2, j1
        return self.entries[(j1, j2, k)]

    def __len__(self) -> int:
        return len(self.entries)

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries.values())


def _pairs(top: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(1, top + 1) for b in range(a, top + 1)]


def squares(t: PointTransformation, *, method: str = "determinant") -> SquareTable:
    """Square functions as ratios of modified Jacobians to the Jacobian.

    ``method="solve"`` obtains the same table by solving the Jacobian system
    for each column of second derivatives (Cramer's rule read backwards).
    """
    top = t.n + 1
    jac = t.jacobian_matrix()
    det = determinant(jac)
    if det.is_zero():
        raise DegenerateJacobian("Jacobian determinant vanishes identically")
    out = {}
    for a, b in _pairs(top):
        rhs = [t.d2(l, a, b) for l in range(1, top + 1)]
        if method == "solve":
            sol = solve_linear(jac, rhs)
            if not isinstance(sol, Solution):  # pragma: no cover - det != 0
                raise DegenerateJacobian("Jacobian system is singular")
            for k in range(1, top + 1):
                out[(a, b, k)] = sol.values[k - 1]
            continue
        if all(e.is_zero() for e in rhs):
            for k in range(1, top + 1):
                out[(a, b, k)] = t.ctx.zero()
            continue
        for k in range(1, top + 1):
            m = [row[:] for row in jac]
            for r in range(top):
                m[r][k - 1] = rhs[r]
            out[(a, b, k)] = determinant(m) / det
    return SquareTable(t.n, out)


def _table(t_or_s) -> SquareTable:
    return t_or_s if isinstance(t_or_s, SquareTable) else squares(t_or_s)


def synthesize(t: PointTransformation, sq: SquareTable | None = None) -> PdeSystem:
    """The flat-equivalent system built term by term from the square functions."""
    ctx = t.ctx
    s = sq if sq is not None else squares(t)
    y = ctx.n + 1
    p = {k: ctx.p(k) for k in ctx.indices}
    entries = {}
    for j1 in ctx.indices:
        for j2 in range(j1, ctx.n + 1):
            f = -s(y, j1, j2)
            for k in ctx.indices:
                inner = (
                    s(k, j1, j2)
                    - delta(j1, k) * s(y, j2, y)
                    - delta(j2, k) * s(y, j1, y)
                    + p[j1] * (s(k, j2, y) - HALF * delta(j2, k) * s(y, y, y))
                    + p[j2] * (s(k, j1, y) - HALF * delta(j1, k) * s(y, y, y))
                    + p[j1] * p[j2] * s(k, y, y)
                )
                f = f + p[k] * inner
            entries[(j1, j2)] = f
    return PdeSystem(ctx, entries)


def ghlm_from_squares(t_or_s, ctx: JetContext | None = None) -> CubicForm:
    """``G, H, L, M`` read off the square functions."""
    s = _table(t_or_s)
    ctx = ctx or t_or_s.ctx
    y = s.n + 1
    idx = ctx.indices
    G = {(a, b): -s(y, a, b) for a in idx for b in idx if a <= b}
    H = {
        (k, a, b): s(k, a, b) - delta(a, k) * s(y, b, y) - delta(b, k) * s(y, a, y)
        for k in idx for a in idx for b in idx if a <= b
    }
    L = {(k, j): 2 * s(k, j, y) - delta(j, k) * s(y, y, y) for k in idx for j in idx}
    M = {k: s(k, y, y) for k in idx}
    return CubicForm(ctx, G, H, L, M)


def synthesize_n2_display(s: SquareTable, ctx: JetContext) -> PdeSystem:
    """The three right-hand sides written out for two independent variables."""
    if ctx.n != 2:
        raise IndexOutOfRange("the two-variable display needs n = 2")
    p1, p2 = ctx.p(1), ctx.p(2)
    Y = 3
    f11 = (
        -s(3, 1, 1)
        + p1 * (-2 * s(3, 1, Y) + s(1, 1, 1))
        + p2 * s(2, 1, 1)
        + p1 * p1 * (-s(3, Y, Y) + 2 * s(1, 1, Y))
        + p1 * p2 * (2 * s(2, 1, Y))
        + p1 * p1 * p1 * s(1, Y, Y)
        + p1 * p1 * p2 * s(2, Y, Y)
    )
    f12 = (
        -s(3, 1, 2)
        + p1 * (-s(3, 2, Y) + s(1, 1, 2))
        + p2 * (-s(3, 1, Y) + s(2, 1, 2))
        + p1 * p1 * s(1, 2, Y)
        + p1 * p2 * (-s(3, Y, Y) + s(1, 1, Y) + s(2, 2, Y))
        + p2 * p2 * s(2, 1, Y)
        + p1 * p1 * p2 * s(1, Y, Y)
        + p1 * p2 * p2 * s(2, Y, Y)
    )
    f22 = (
        -s(3, 2, 2)
        + p1 * s(1, 2, 2)
        + p2 * (-2 * s(3, 2, Y) + s(2, 2, 2))
        + p1 * p2 * (2 * s(1, 2, Y))
        + p2 * p2 * (-s(3, Y, Y) + 2 * s(2, 2, Y))
        + p1 * p2 * p2 * s(1, Y, Y)
        + p2 * p2 * p2 * s(2, Y, Y)
    )
    return PdeSystem(ctx, {(1, 1): f11, (1, 2): f12, (2, 2): f22})


def determinantal_identities_n2(t: PointTransformation, *, printed_entry: bool = False) -> dict:
    """The three expanded determinant equations for n = 2, as jet polynomials.

    Keys ``(1, 1)``, ``(1, 2)``, ``(2, 2)``.  Each is ``Delta`` times
    ``y_{x^i x^j}`` plus determinant-weighted jet monomials; substituting a
    synthesized system must make every one vanish.  With ``printed_entry``
    the ``y_{x^1}`` coefficient of the last identity keeps the mixed second
    derivative in its middle row, which breaks the identity.
    """
    ctx = t.ctx
    if ctx.n != 2:
        raise IndexOutOfRange("the determinant identities are written for n = 2")
    p1, p2 = ctx.p(1), ctx.p(2)
    y = 3

    def D(*cols):
        return modified_jacobian(t, cols)

    jac = D((1,), (2,), (y,))
    e11 = (
        ctx.q(1, 1) * jac
        + D((1,), (2,), (1, 1))
        + p1 * (2 * D((1,), (2,), (1, y)) - D((1, 1), (2,), (y,)))
        + p2 * (-D((1,), (1, 1), (y,)))
        + p1 * p1 * (D((1,), (2,), (y, y)) - 2 * D((1, y), (2,), (y,)))
        + p1 * p2 * (-2 * D((1,), (1, y), (y,)))
        + p1 * p1 * p1 * (-D((y, y), (2,), (y,)))
        + p1 * p1 * p2 * (-D((1,), (y, y), (y,)))
    )
    e12 = (
        ctx.q(1, 2) * jac
        + D((1,), (2,), (1, 2))
        + p1 * (D((1,), (2,), (2, y)) - D((1, 2), (2,), (y,)))
        + p2 * (D((1,), (2,), (1, y)) - D((1,), (1, 2), (y,)))
        + p1 * p1 * (-D((2, y), (2,), (y,)))
        + p1 * p2 * (D((1,), (2,), (y, y)) - D((1, y), (2,), (y,)) - D((1,), (2, y), (y,)))
        + p2 * p2 * (-D((1,), (1, y), (y,)))
        + p1 * p1 * p2 * (-D((y, y), (2,), (y,)))
        + p1 * p2 * p2 * (-D((1,), (y, y), (y,)))
    )
    if printed_entry:
        col = [t.d2(1, 2, 2), t.d2(2, 1, 2), t.d2(3, 2, 2)]
        m = [[col[r], t.d1(r + 1, 2), t.d1(r + 1, y)] for r in range(3)]
        odd = determinant(m)
    else:
        odd = D((2, 2), (2,), (y,))
    e22 = (
        ctx.q(2, 2) * jac
        + D((1,), (2,), (2, 2))
        + p1 * (-odd)
        + p2 * (2 * D((1,), (2,), (2, y)) - D((1,), (2, 2), (y,)))
        + p1 * p2 * (-2 * D((2, y), (2,), (y,)))
        + p2 * p2 * (D((1,), (2,), (y, y)) - 2 * D((1,), (2, y), (y,)))
        + p1 * p2 * p2 * (-D((y, y), (2,), (y,)))
        + p2 * p2 * p2 * (-D((1,), (y, y), (y,)))
    )
    return {(1, 1): e11, (1, 2): e12, (2, 2): e22}


def substitute_system(sys: PdeSystem, e: RationalExpr) -> RationalExpr:
    """Replace every ``y_{x^i x^j}`` in ``e`` by ``F^{i,j}``."""
    ctx = sys.ctx
    binds = {ctx.universe.q(i, j): f for (i, j), f in sys.items()}
    return e.subs(binds)


def pullback_residual(t: PointTransformation, sys: PdeSystem) -> dict[tuple[int, int], RationalExpr]:
    """Entries ``(k, i)`` of ``D_k(DX) . Y_X - D_k(DY)`` with jets of order two replaced by F.

    ``Y_X`` is solved from ``DX . Y_X = DY`` by elimination.  All entries
    vanish exactly when ``t`` carries ``sys`` to the flat system.
    """
    ctx = t.ctx
    n = ctx.n
    if jacobian(t).is_zero():
        raise DegenerateJacobian("Jacobian determinant vanishes identically")
    idx = ctx.indices
    DX = [[jet_total_derivative(ctx, t.component(j), i) for j in idx] for i in idx]
    DY = [jet_total_derivative(ctx, t.Y, i) for i in idx]
    sol = solve_linear(DX, DY)
    if not isinstance(sol, Solution):
        raise DegenerateJacobian("the matrix of total derivatives of X is singular")
    YX = sol.values
    out = {}
    for k in idx:
        for i in range(n):
            acc = -jet_total_derivative(ctx, DY[i], k)
            for j in range(n):
                acc = acc + jet_total_derivative(ctx, DX[i][j], k) * YX[j]
            out[(k, i + 1)] = substitute_system(sys, acc)
    return out


# -- vector fields -------------------------------------------------------

class VectorField:
    """``sum_k Xcoef^k d/dx^k + Ycoef d/dy`` with coefficients in ``(x, y)``."""

    def __init__(self, ctx: JetContext, Xcoef: Sequence[RationalExpr], Ycoef: RationalExpr):
        if len(Xcoef) != ctx.n:
            raise IndexOutOfRange(f"expected {ctx.n} coefficients, got {len(Xcoef)}")
        u = ctx.universe
        conv = lambda e: (e if isinstance(e, RationalExpr) else ctx.const(e)).lift(u)  # noqa: E731
        self.ctx = ctx
        self.Xcoef = tuple(conv(e) for e in Xcoef)
        self.Ycoef = conv(Ycoef)

    def coef(self, l: int) -> RationalExpr:
        return self.Ycoef if l == self.ctx.n + 1 else self.Xcoef[l - 1]

    def d2(self, l: int, a: int, b: int) -> RationalExpr:
        return self.ctx.d(self.ctx.d(self.coef(l), a), b)


@dataclass(frozen=True)
class SecondProlongation:
    n: int
    Y2: dict[tuple[int, int], RationalExpr]

    def __getitem__(self, key: tuple[int, int]) -> RationalExpr:
        a, b = key
        return self.Y2[(min(a, b), max(a, b))]

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.Y2.values())


def prolong2(v: VectorField) -> SecondProlongation:
    """Second-order coefficients by the general Kronecker formula."""
    ctx = v.ctx
    n = ctx.n
    y = n + 1
    idx = ctx.indices
    p = {k: ctx.p(k) for k in idx}
    out = {}
    for j1 in idx:
        for j2 in range(j1, n + 1):
            e = v.d2(y, j1, j2)
            for k1 in idx:
                e = e + p[k1] * (
                    delta(j1, k1) * v.d2(y, j2, y) + delta(j2, k1) * v.d2(y, j1, y) - v.d2(k1, j1, j2)
                )
            for k1 in idx:
                for k2 in idx:
                    c = (
                        delta(j1, k1) * delta(j2, k2) * v.d2(y, y, y)
                        - delta(j1, k1) * v.d2(k2, j2, y)
                        - delta(j2, k1) * v.d2(k2, j1, y)
                    )
                    if not c.is_zero():
                        e = e + p[k1] * p[k2] * c
            for k1 in idx:
                for k2 in idx:
                    if not (delta(j1, k1) and delta(j2, k2)):
                        continue
                    for k3 in idx:
                        e = e - p[k1] * p[k2] * p[k3] * v.d2(k3, y, y)
            out[(j1, j2)] = e
    return SecondProlongation(n, out)


def prolong2_n2_display(v: VectorField) -> SecondProlongation:
    """The three coefficients written out for two independent variables."""
    ctx = v.ctx
    if ctx.n != 2:
        raise IndexOutOfRange("the two-variable display needs n = 2")
    p1, p2 = ctx.p(1), ctx.p(2)
    y = 3
    X = lambda k, a, b: v.d2(k, a, b)  # noqa: E731
    Yc = lambda a, b: v.d2(y, a, b)  # noqa: E731
    y11 = (
        Yc(1, 1)
        + p1 * (2 * Yc(1, y) - X(1, 1, 1))
        + p2 * (-X(2, 1, 1))
        + p1 * p1 * (Yc(y, y) - 2 * X(1, 1, y))
        + p1 * p2 * (-2 * X(2, 1, y))
        + p1 * p1 * p1 * (-X(1, y, y))
        + p1 * p1 * p2 * (-X(2, y, y))
    )
    y12 = (
        Yc(1, 2)
        + p1 * (Yc(2, y) - X(1, 1, 2))
        + p2 * (Yc(1, y) - X(2, 1, 2))
        + p1 * p1 * (-X(1, 2, y))
        + p1 * p2 * (Yc(y, y) - X(1, 1, y) - X(2, 2, y))
        + p2 * p2 * (-X(2, 1, y))
        + p1 * p1 * p2 * (-X(1, y, y))
        + p1 * p2 * p2 * (-X(2, y, y))
    )
    y22 = (
        Yc(2, 2)
        + p1 * (-X(1, 2, 2))
        + p2 * (2 * Yc(2, y) - X(2, 2, 2))
        + p1 * p2 * (-2 * X(1, 2, y))
        + p2 * p2 * (Yc(y, y) - 2 * X(2, 2, y))
        + p1 * p2 * p2 * (-X(1, y, y))
        + p2 * p2 * p2 * (-X(2, y, y))
    )
    return SecondProlongation(2, {(1, 1): y11, (1, 2): y12, (2, 2): y22})


# -- counting ------------------------------------------------------------

def square_counts(n: int) -> dict[str, int]:
    """Sizes of the six square-function families, by enumeration."""
    idx = range(1, n + 1)
    return {
        "xx^k": sum(1 for k in idx for a in idx for b in idx if a <= b),
        "xy^k": sum(1 for k in idx for a in idx),
        "yy^k": sum(1 for k in idx),
        "xx^y": sum(1 for a in idx for b in idx if a <= b),
        "xy^y": sum(1 for a in idx),
        "yy^y": 1,
    }


def ghlm_counts(n: int) -> dict[str, int]:
    idx = range(1, n + 1)
    return {
        "G": sum(1 for a in idx for b in idx if a <= b),
        "H": sum(1 for k in idx for a in idx for b in idx if a <= b),
        "L": sum(1 for k in idx for j in idx),
        "M": sum(1 for k in idx),
    }


def counting_excess(n: int) -> int:
    """Number of square functions minus the number of G, H, L, M components."""
    table = sum(1 for _ in _pairs(n + 1)) * (n + 1)
    assert table == sum(square_counts(n).values())
    return table - sum(ghlm_counts(n).values())
