"""Auxiliary systems behind the converse direction of the flatness theorem.

The square functions of a point transformation, renamed ``Pi``, satisfy a
complete first-order system.  Solving the linear relations between ``Pi`` and
the cubic coefficients up to ``n + 1`` principal unknowns ``Theta`` turns it
into a second system on ``Theta`` alone, whose compatibility conditions are
checked here instance by instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable

from jetflat.cubic import CubicForm, _Partials, flatness_residuals
from jetflat.errors import IndexOutOfRange, ThetaNotEliminated
from jetflat.jetspace import JetContext, delta
from jetflat.symcore import RationalExpr
from jetflat.transform import SquareTable

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
THIRD = Fraction(1, 3)

Residuals = dict[tuple[int, ...], RationalExpr]


def _sum(zero: RationalExpr, terms) -> RationalExpr:
    out = zero
    for coef, e in terms:
        if coef and not e.is_zero():
            out = out + (e if coef == 1 else e * coef)
    return out


def _all_zero(families: dict[str, Residuals]) -> bool:
    return all(e.is_zero() for fam in families.values() for e in fam.values())


def _first_nonzero(families: dict[str, Residuals]) -> tuple[str, tuple[int, ...], RationalExpr] | None:
    for name, fam in families.items():
        for key, e in fam.items():
            if not e.is_zero():
                return name, key, e
    return None


class PiTable:
    """``Pi^k_{j1,j2}`` for all indices in ``1..n+1``, symmetric in the lower pair."""

    def __init__(self, ctx: JetContext, entries: dict[tuple[int, int, int], RationalExpr]):
        top = ctx.n + 1
        zero = ctx.zero()
        stored = {}
        for (j1, j2, k), e in entries.items():
            for i in (j1, j2, k):
                ctx.check_index(i, top)
            stored[(min(j1, j2), max(j1, j2), k)] = e if isinstance(e, RationalExpr) else ctx.const(e)
        self.ctx = ctx
        self.entries = {
            (a, b, k): stored.get((a, b, k), zero)
            for a in range(1, top + 1)
            for b in range(a, top + 1)
            for k in range(1, top + 1)
        }

    @property
    def n(self) -> int:
        return self.ctx.n

    def __call__(self, k: int, j1: int, j2: int) -> RationalExpr:
        if j1 > j2:
            j1, j2 = j2, j1
        return self.entries[(j1, j2, k)]

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries.values())

    def nonzero(self) -> dict[tuple[int, int, int], RationalExpr]:
        return {k: e for k, e in self.entries.items() if not e.is_zero()}

    def __eq__(self, other) -> bool:
        return isinstance(other, PiTable) and self.ctx == other.ctx and self.entries == other.entries

    def __repr__(self) -> str:
        body = ", ".join(f"Pi^{k}_{a},{b}={e}" for (a, b, k), e in self.nonzero().items())
        return f"PiTable(n={self.n}, {body or '0'})"


@dataclass(frozen=True)
class ThetaFields:
    """Principal unknowns ``Theta^1..Theta^n, Theta^{n+1}``."""

    theta: tuple[RationalExpr, ...]

    def __call__(self, a: int) -> RationalExpr:
        if not 1 <= a <= len(self.theta):
            raise IndexOutOfRange(f"Theta index {a} outside 1..{len(self.theta)}")
        return self.theta[a - 1]

    @classmethod
    def zero(cls, ctx: JetContext) -> "ThetaFields":
        return cls(tuple(ctx.zero() for _ in ctx.all_indices))


def pi_from_squares(s: SquareTable, ctx: JetContext) -> PiTable:
    return PiTable(ctx, dict(s.entries))


def theta_from_squares(s: SquareTable | PiTable) -> ThetaFields:
    """Diagonal square functions ``Theta^a = square^a_{x^a x^a}``, a in 1..n+1."""
    return ThetaFields(tuple(s(a, a, a) for a in range(1, s.n + 2)))


def cross_diff_residuals(p: PiTable) -> Residuals:
    """Cross-derivative defects of the first auxiliary system.

    Keyed ``(j1, j2, j3, k)`` with ``j2 < j3`` and every index in ``1..n+1``.
    """
    ctx = p.ctx
    top = ctx.n + 1
    rng = range(1, top + 1)
    out = {}
    for j1 in rng:
        for j2, j3 in combinations(rng, 2):
            for k in rng:
                e = ctx.d(p(k, j1, j2), j3) - ctx.d(p(k, j1, j3), j2)
                for k2 in rng:
                    e = e + p(k2, j1, j2) * p(k, j3, k2) - p(k2, j1, j3) * p(k, j2, k2)
                out[(j1, j2, j3, k)] = e
    return out


@dataclass(frozen=True)
class SixFamilies:
    """Cross-derivative defects split along ``{1..n}`` versus ``n+1``.

    Keys: ``fam1 (j1, j2, j3)``, ``fam2 (j1, j2)``, ``fam3 (j1,)``,
    ``fam4 (j1, j2, j3, k1)``, ``fam5 (j1, j2, k1)``, ``fam6 (j1, k1)``,
    with ``j2 < j3`` wherever both occur.
    """

    fam1: Residuals
    fam2: Residuals
    fam3: Residuals
    fam4: Residuals
    fam5: Residuals
    fam6: Residuals

    def families(self) -> dict[str, Residuals]:
        return {f"fam{i}": getattr(self, f"fam{i}") for i in range(1, 7)}

    def all_zero(self) -> bool:
        return _all_zero(self.families())

    def first_nonzero(self):
        return _first_nonzero(self.families())


def split_families(p: PiTable) -> SixFamilies:
    """The six families written out with the ``n+1`` slot separated from the sums."""
    ctx = p.ctx
    n = ctx.n
    y = n + 1
    idx = ctx.indices
    d = ctx.d

    def rhs(k: int, a: int, b: int, c: int) -> RationalExpr:
        # -sum Pi^{k2}_{a,b} Pi^k_{c,k2} - Pi^y_{a,b} Pi^k_{c,y} + (b <-> c)
        e = -p(y, a, b) * p(k, c, y) + p(y, a, c) * p(k, b, y)
        for k2 in idx:
            e = e - p(k2, a, b) * p(k, c, k2) + p(k2, a, c) * p(k, b, k2)
        return e

    fam1, fam2, fam3, fam4, fam5, fam6 = {}, {}, {}, {}, {}, {}
    for j1 in idx:
        for j2, j3 in combinations(idx, 2):
            fam1[(j1, j2, j3)] = d(p(y, j1, j2), j3) - d(p(y, j1, j3), j2) - rhs(y, j1, j2, j3)
            for k1 in idx:
                fam4[(j1, j2, j3, k1)] = (
                    d(p(k1, j1, j2), j3) - d(p(k1, j1, j3), j2) - rhs(k1, j1, j2, j3)
                )
        for j2 in idx:
            fam2[(j1, j2)] = d(p(y, j1, j2), y) - d(p(y, j1, y), j2) - rhs(y, j1, j2, y)
            for k1 in idx:
                fam5[(j1, j2, k1)] = d(p(k1, j1, j2), y) - d(p(k1, j1, y), j2) - rhs(k1, j1, j2, y)
        # Third family: the two marked products cancel.
        marked_a = p(y, j1, y) * p(y, y, y)
        marked_b = p(y, y, y) * p(y, j1, y)
        if marked_a != marked_b:
            raise AssertionError("marked products of the third family do not cancel")
        e = d(p(y, j1, y), y) - d(p(y, y, y), j1)
        for k2 in idx:
            e = e + p(k2, j1, y) * p(y, y, k2) - p(k2, y, y) * p(y, j1, k2)
        fam3[(j1,)] = e
        for k1 in idx:
            e = d(p(k1, j1, y), y) - d(p(k1, y, y), j1)
            e = e + p(y, j1, y) * p(k1, y, y) - p(y, y, y) * p(k1, j1, y)
            for k2 in idx:
                e = e + p(k2, j1, y) * p(k1, y, k2) - p(k2, y, y) * p(k1, j1, k2)
            fam6[(j1, k1)] = e
    return SixFamilies(fam1, fam2, fam3, fam4, fam5, fam6)


def quasi_invert(c: CubicForm, th: ThetaFields) -> PiTable:
    """Rebuild every ``Pi`` from the cubic coefficients and the principal unknowns."""
    ctx = c.ctx
    n = ctx.n
    y = n + 1
    idx = ctx.indices
    G, H, L, M = c.G, c.H, c.L, c.M
    out = {}
    for j1 in idx:
        for j2 in range(j1, n + 1):
            for k in idx:
                out[(j1, j2, k)] = (
                    H(k, j1, j2)
                    + (th(j2) - H(j2, j2, j2)) * (HALF * delta(k, j1))
                    + (th(j1) - H(j1, j1, j1)) * (HALF * delta(k, j2))
                )
            out[(j1, j2, y)] = -G(j1, j2)
        for k in idx:
            out[(j1, y, k)] = (L(k, j1) + th(y) * delta(k, j1)) * HALF
        out[(j1, y, y)] = (th(j1) - H(j1, j1, j1)) * HALF
    for k in idx:
        out[(y, y, k)] = M(k)
    out[(y, y, y)] = th(y)
    return PiTable(ctx, out)


class _Fields:
    """Shared accessors for the displayed families: cubic tables, Theta, partials."""

    def __init__(self, c: CubicForm, th: ThetaFields):
        self.ctx = c.ctx
        self.n = c.n
        self.y = c.n + 1
        self.idx = c.ctx.indices
        self.zero = c.ctx.zero()
        self.G, self.H, self.L, self.M = c.G, c.H, c.L, c.M
        self.T = th
        self.dc = _Partials(c)
        self._dT: dict = {}

    def dG(self, a, b, v):
        return self.dc("G", (a, b), v)

    def dH(self, k, a, b, v):
        return self.dc("H", (k, a, b), v)

    def dL(self, k, j, v):
        return self.dc("L", (k, j), v)

    def dM(self, k, v):
        return self.dc("M", (k,), v)

    def dT(self, a, v):
        if (a, v) not in self._dT:
            self._dT[(a, v)] = self.ctx.d(self.T(a), v)
        return self._dT[(a, v)]

    def Hd(self, k):
        return self.H(k, k, k)

    def s(self, terms) -> RationalExpr:
        return _sum(self.zero, terms)


@dataclass(frozen=True)
class DisplayedFamilies:
    """Residuals of the six displayed families after quasi-inversion.

    Keys: ``g_cross (j1, j2, j3)``, ``theta_x (j1, j2)``, ``theta_y_mix (j1,)``,
    ``h_cross (j1, j2, j3, k1)``, ``l_cross (j1, j2, k1)``, ``top_y (j1, k1)``.
    """

    g_cross: Residuals
    theta_x: Residuals
    theta_y_mix: Residuals
    h_cross: Residuals
    l_cross: Residuals
    top_y: Residuals

    def families(self) -> dict[str, Residuals]:
        names = ("g_cross", "theta_x", "theta_y_mix", "h_cross", "l_cross", "top_y")
        return {name: getattr(self, name) for name in names}

    def all_zero(self) -> bool:
        return _all_zero(self.families())

    def first_nonzero(self):
        return _first_nonzero(self.families())


def _theta_x_rhs(f: _Fields, j1: int, j2: int) -> RationalExpr:
    """Right side for ``Theta^{j1}_{x^{j2}}``."""
    G, H, L, T, y, idx = f.G, f.H, f.L, f.T, f.y, f.idx
    return f.s(
        [(-2, f.dG(j1, j2, y)), (1, f.dH(j1, j1, j1, j2))]
        + [(1, G(j2, k) * L(k, j1)) for k in idx]
        + [(HALF, f.Hd(j1) * f.Hd(j2))]
        + [(-1, H(k, j1, j2) * f.Hd(k)) for k in idx]
        + [(-1, G(j1, j2) * T(y)), (-HALF, f.Hd(j1) * T(j2)), (-HALF, f.Hd(j2) * T(j1))]
        + [(1, H(k, j1, j2) * T(k)) for k in idx]
        + [(HALF, T(j1) * T(j2))]
    )


def six_family_residuals(c: CubicForm, th: ThetaFields) -> DisplayedFamilies:
    f = _Fields(c, th)
    G, H, L, M, T, y, idx, s = f.G, f.H, f.L, f.M, f.T, f.y, f.idx, f.s
    g_cross, theta_x, theta_y_mix, h_cross, l_cross, top_y = {}, {}, {}, {}, {}, {}
    for j1 in idx:
        for j2, j3 in combinations(idx, 2):
            g_cross[(j1, j2, j3)] = s(
                [(1, f.dG(j1, j2, j3)), (-1, f.dG(j1, j3, j2))]
                + [(1, G(j3, k) * H(k, j1, j2)) for k in idx]
                + [(-1, G(j2, k) * H(k, j1, j3)) for k in idx]
            )
            for k1 in idx:
                d1, d2, d3 = delta(k1, j1), delta(k1, j2), delta(k1, j3)
                lhs = s(
                    [
                        (HALF * d1, f.dT(j2, j3)),
                        (-HALF * d1, f.dT(j3, j2)),
                        (HALF * d2, f.dT(j1, j3)),
                        (-HALF * d3, f.dT(j1, j2)),
                    ]
                )
                rhs = s(
                    [
                        (-1, f.dH(k1, j1, j2, j3)),
                        (1, f.dH(k1, j1, j3, j2)),
                        (-HALF * d1, f.dH(j3, j3, j3, j2)),
                        (HALF * d1, f.dH(j2, j2, j2, j3)),
                        (-HALF * d3, f.dH(j1, j1, j1, j2)),
                        (HALF * d2, f.dH(j1, j1, j1, j3)),
                        (HALF, G(j1, j2) * L(k1, j3)),
                        (-HALF, G(j1, j3) * L(k1, j2)),
                        (-QUARTER * d3, f.Hd(j1) * f.Hd(j2)),
                        (QUARTER * d2, f.Hd(j1) * f.Hd(j3)),
                    ]
                    + [(-1, H(k2, j1, j2) * H(k1, j3, k2)) for k2 in idx]
                    + [(1, H(k2, j1, j3) * H(k1, j2, k2)) for k2 in idx]
                    + [(-HALF * d2, H(k2, j1, j3) * f.Hd(k2)) for k2 in idx]
                    + [(HALF * d3, H(k2, j1, j2) * f.Hd(k2)) for k2 in idx]
                    + [
                        (-HALF * d2, G(j1, j3) * T(y)),
                        (HALF * d3, G(j1, j2) * T(y)),
                        (-QUARTER * d2, f.Hd(j1) * T(j3)),
                        (QUARTER * d3, f.Hd(j1) * T(j2)),
                        (-QUARTER * d2, f.Hd(j3) * T(j1)),
                        (QUARTER * d3, f.Hd(j2) * T(j1)),
                    ]
                    + [(-HALF * d3, H(k2, j1, j2) * T(k2)) for k2 in idx]
                    + [(HALF * d2, H(k2, j1, j3) * T(k2)) for k2 in idx]
                    + [(-QUARTER * d3, T(j1) * T(j2)), (QUARTER * d2, T(j1) * T(j3))]
                )
                h_cross[(j1, j2, j3, k1)] = lhs - rhs
        for j2 in idx:
            theta_x[(j1, j2)] = f.dT(j1, j2) - _theta_x_rhs(f, j1, j2)
            for k1 in idx:
                d1, d2 = delta(k1, j1), delta(k1, j2)
                lhs = s([(HALF * d1, f.dT(j2, y)), (HALF * d2, f.dT(j1, y)), (-HALF * d1, f.dT(y, j2))])
                rhs = s(
                    [
                        (-1, f.dH(k1, j1, j2, y)),
                        (HALF * d1, f.dH(j2, j2, j2, y)),
                        (HALF * d2, f.dH(j1, j1, j1, y)),
                        (HALF, f.dL(k1, j1, j2)),
                        (1, G(j1, j2) * M(k1)),
                    ]
                    + [(HALF, H(k1, j2, k2) * L(k2, j1)) for k2 in idx]
                    + [(-HALF, H(k2, j1, j2) * L(k1, k2)) for k2 in idx]
                    + [(-QUARTER * d2, f.Hd(k2) * L(k2, j1)) for k2 in idx]
                    + [(-QUARTER * d2, f.Hd(j1) * T(y))]
                    + [(QUARTER * d2, L(k2, j1) * T(k2)) for k2 in idx]
                    + [(QUARTER * d2, T(j1) * T(y))]
                )
                l_cross[(j1, j2, k1)] = lhs - rhs
        lhs = s([(-1, f.dT(y, j1)), (HALF, f.dT(j1, y))])
        rhs = s(
            [(HALF, f.dH(j1, j1, j1, y))]
            + [(-1, G(j1, k) * M(k)) for k in idx]
            + [(QUARTER, f.Hd(k) * L(k, j1)) for k in idx]
            + [(QUARTER, f.Hd(j1) * T(y))]
            + [(-QUARTER, L(k, j1) * T(k)) for k in idx]
            + [(-QUARTER, T(j1) * T(y))]
        )
        theta_y_mix[(j1,)] = lhs - rhs
        for k1 in idx:
            d1 = delta(k1, j1)
            rhs = s(
                [(-1, f.dL(k1, j1, y)), (2, f.dM(k1, j1))]
                + [(2, H(k1, j1, k2) * M(k2)) for k2 in idx]
                + [(-d1, f.Hd(k2) * M(k2)) for k2 in idx]
                + [(-HALF, L(k2, j1) * L(k1, k2)) for k2 in idx]
                + [(d1, M(k2) * T(k2)) for k2 in idx]
                + [(HALF * d1, T(y) * T(y))]
            )
            top_y[(j1, k1)] = f.dT(y, y) * d1 - rhs
    return DisplayedFamilies(g_cross, theta_x, theta_y_mix, h_cross, l_cross, top_y)


def _theta_y_rhs(f: _Fields, j1: int) -> RationalExpr:
    """Right side for ``Theta^{j1}_y``."""
    G, H, L, M, T, y, idx = f.G, f.H, f.L, f.M, f.T, f.y, f.idx
    return f.s(
        [(-THIRD, f.dH(j1, j1, j1, y)), (2 * THIRD, f.dL(j1, j1, j1))]
        + [(4 * THIRD, G(j1, j1) * M(j1))]
        + [(2 * THIRD, G(j1, l) * M(l)) for l in idx]
        + [(-HALF, f.Hd(l) * L(l, j1)) for l in idx]
        + [(2 * THIRD, H(j1, j1, l) * L(l, j1)) for l in idx]
        + [(-2 * THIRD, H(l, j1, j1) * L(j1, l)) for l in idx]
        + [(-HALF, f.Hd(j1) * T(y))]
        + [(HALF, L(l, j1) * T(l)) for l in idx]
        + [(HALF, T(j1) * T(y))]
    )


def _theta_top_x_rhs(f: _Fields, j1: int) -> RationalExpr:
    """Right side for ``Theta^{n+1}_{x^{j1}}``."""
    G, H, L, M, T, y, idx = f.G, f.H, f.L, f.M, f.T, f.y, f.idx
    return f.s(
        [(-2 * THIRD, f.dH(j1, j1, j1, y)), (THIRD, f.dL(j1, j1, j1))]
        + [(2 * THIRD, G(j1, j1) * M(j1))]
        + [(4 * THIRD, G(j1, l) * M(l)) for l in idx]
        + [(-HALF, f.Hd(l) * L(l, j1)) for l in idx]
        + [(THIRD, H(j1, j1, l) * L(l, j1)) for l in idx]
        + [(-THIRD, H(l, j1, j1) * L(j1, l)) for l in idx]
        + [(-HALF, f.Hd(j1) * T(y))]
        + [(HALF, L(l, j1) * T(l)) for l in idx]
        + [(HALF, T(j1) * T(y))]
    )


def _theta_top_y_rhs(f: _Fields, j1: int) -> RationalExpr:
    """Right side for ``Theta^{n+1}_y``, written with a free index j1."""
    H, L, M, T, y, idx = f.H, f.L, f.M, f.T, f.y, f.idx
    return f.s(
        [(-1, f.dL(j1, j1, y)), (2, f.dM(j1, j1))]
        + [(2, H(j1, j1, l) * M(l)) for l in idx]
        + [(-1, f.Hd(l) * M(l)) for l in idx]
        + [(-HALF, L(l, j1) * L(j1, l)) for l in idx]
        + [(1, M(l) * T(l)) for l in idx]
        + [(HALF, T(y) * T(y))]
    )


@dataclass(frozen=True)
class ThetaSystemResiduals:
    """Gradient of Theta minus the solved right sides.

    Keys: ``theta_x (j1, j2)`` for ``Theta^{j1}_{x^{j2}}``, ``theta_y (j1,)`` for
    ``Theta^{j1}_y``, ``top_x (j1,)`` for ``Theta^{n+1}_{x^{j1}}`` and
    ``top_y (j1,)`` for ``Theta^{n+1}_y`` with its free index set to j1.
    """

    theta_x: Residuals
    theta_y: Residuals
    top_x: Residuals
    top_y: Residuals

    def families(self) -> dict[str, Residuals]:
        return {name: getattr(self, name) for name in ("theta_x", "theta_y", "top_x", "top_y")}

    def all_zero(self) -> bool:
        return _all_zero(self.families())

    def first_nonzero(self):
        return _first_nonzero(self.families())


def theta_system_residuals(c: CubicForm, th: ThetaFields) -> ThetaSystemResiduals:
    f = _Fields(c, th)
    y, idx = f.y, f.idx
    theta_x = {(j1, j2): f.dT(j1, j2) - _theta_x_rhs(f, j1, j2) for j1 in idx for j2 in idx}
    theta_y = {(j1,): f.dT(j1, y) - _theta_y_rhs(f, j1) for j1 in idx}
    top_x = {(j1,): f.dT(y, j1) - _theta_top_x_rhs(f, j1) for j1 in idx}
    top_y = {(j1,): f.dT(y, y) - _theta_top_y_rhs(f, j1) for j1 in idx}
    return ThetaSystemResiduals(theta_x, theta_y, top_x, top_y)


# Compatibility of the second auxiliary system.

def theta_symbols(n: int) -> tuple[str, ...]:
    return tuple(f"Theta{a}" for a in range(1, n + 2))


def _lift_cubic(c: CubicForm, ctx: JetContext) -> CubicForm:
    tables: dict[str, dict] = {"G": {}, "H": {}, "L": {}, "M": {}}
    for kind, key, e in c.entries():
        tables[kind][key if kind != "M" else key[0]] = e.lift(ctx.universe)
    return CubicForm(ctx, **tables)


class ThetaGradient:
    """The solved Theta gradient over a context with one symbol per Theta.

    ``D(e, v)`` differentiates along ``x^v`` (``v = n+1`` means y), treating
    each Theta symbol as a function whose derivatives are the solved right
    sides.  ``Theta^{n+1}_y`` is the mean of its ``n`` written forms.
    """

    def __init__(self, c: CubicForm):
        n = c.n
        self.base = c.ctx
        self.names = theta_symbols(n)
        self.ctx = c.ctx.with_extras(self.names)
        ce = _lift_cubic(c, self.ctx)
        th = ThetaFields(tuple(self.ctx.sym(s) for s in self.names))
        f = _Fields(ce, th)
        self.fields = f
        y = n + 1
        idx = self.ctx.indices
        grad: dict[tuple[int, int], RationalExpr] = {}
        for j1 in idx:
            for j2 in idx:
                grad[(j1, j2)] = _theta_x_rhs(f, j1, j2)
            grad[(j1, y)] = _theta_y_rhs(f, j1)
            grad[(y, j1)] = _theta_top_x_rhs(f, j1)
        grad[(y, y)] = f.s([(Fraction(1, n), _theta_top_y_rhs(f, j1)) for j1 in idx])
        self.grad = grad

    def D(self, e: RationalExpr, v: int) -> RationalExpr:
        out = self.ctx.d(e, v)
        free = e.free_names()
        for a, name in enumerate(self.names, start=1):
            if name in free:
                out = out + e.diff(name) * self.grad[(a, v)]
        return out

    def split(self, e: RationalExpr) -> tuple[RationalExpr, bool]:
        """Theta-free part over the base context, and whether Theta occurred."""
        if not e.depends_on(self.names):
            return e.lift(self.base.universe), False
        zero = self.ctx.zero()
        return e.subs({name: zero for name in self.names}).lift(self.base.universe), True


@dataclass(frozen=True)
class CompatResiduals:
    """Compatibility defects of the second auxiliary system.

    Keys: ``c1 (j1, j2, j3)`` with ``j2 < j3``, ``c2 (j1, j2)``,
    ``c3 (j1, j2)`` with ``j1 < j2``, ``c4 (j2,)``.  Entries are the
    Theta-free parts; ``theta_dependent`` lists the keys where Theta terms
    survived the substitution, which only happens off the flat locus.
    """

    c1: Residuals
    c2: Residuals
    c3: Residuals
    c4: Residuals
    theta_dependent: tuple[tuple[str, tuple[int, ...]], ...] = ()

    def families(self) -> dict[str, Residuals]:
        return {name: getattr(self, name) for name in ("c1", "c2", "c3", "c4")}

    def all_zero(self) -> bool:
        return _all_zero(self.families())

    def first_nonzero(self):
        return _first_nonzero(self.families())


def compat_first_family(c: CubicForm) -> Residuals:
    """First compatibility family as a closed expression in G, H, L, M."""
    f = _Fields(c, ThetaFields.zero(c.ctx))
    G, H, L, M, y, idx, s = f.G, f.H, f.L, f.M, f.y, f.idx, f.s
    dc = f.dc
    out = {}
    for j1 in idx:
        for j2, j3 in combinations(idx, 2):
            terms = [
                (-2, dc.second("G", (j1, j2), j3, y)),
                (2, dc.second("G", (j1, j3), j2, y)),
                (-1, f.dG(j1, j2, y) * f.Hd(j3)),
                (1, f.dG(j1, j3, y) * f.Hd(j2)),
                (-2 * THIRD, f.dH(j2, j2, j2, y) * G(j1, j3)),
                (2 * THIRD, f.dH(j3, j3, j3, y) * G(j1, j2)),
                (-THIRD, f.dL(j3, j3, j3) * G(j1, j2)),
                (THIRD, f.dL(j2, j2, j2) * G(j1, j3)),
                (-2 * THIRD, G(j1, j2) * G(j3, j3) * M(j3)),
                (2 * THIRD, G(j1, j3) * G(j2, j2) * M(j2)),
            ]
            for l in idx:
                terms += [
                    (-1, f.dG(j3, l, j2) * L(l, j1)),
                    (1, f.dG(j2, l, j3) * L(l, j1)),
                    (-2, f.dG(l, j3, y) * H(l, j1, j2)),
                    (2, f.dG(l, j2, y) * H(l, j1, j3)),
                    (-1, f.dH(l, j1, j2, j3) * f.Hd(l)),
                    (1, f.dH(l, j1, j3, j2) * f.Hd(l)),
                    (-1, f.dL(l, j1, j2) * G(j3, l)),
                    (1, f.dL(l, j1, j3) * G(j2, l)),
                    (-4 * THIRD, G(j1, j2) * G(j3, l) * M(l)),
                    (4 * THIRD, G(j1, j3) * G(j2, l) * M(l)),
                    (-HALF, G(j3, l) * f.Hd(j1) * L(l, j2)),
                    (HALF, G(j2, l) * f.Hd(j1) * L(l, j3)),
                    (-HALF, G(j3, l) * f.Hd(j2) * L(l, j1)),
                    (HALF, G(j2, l) * f.Hd(j3) * L(l, j1)),
                    (-HALF, G(j1, j3) * f.Hd(l) * L(l, j2)),
                    (HALF, G(j1, j2) * f.Hd(l) * L(l, j3)),
                    (-THIRD, G(j1, j2) * H(j3, j3, l) * L(l, j3)),
                    (THIRD, G(j1, j3) * H(j2, j2, l) * L(l, j2)),
                    (-THIRD, G(j1, j3) * H(l, j2, j2) * L(j2, l)),
                    (THIRD, G(j1, j2) * H(l, j3, j3) * L(j3, l)),
                ]
                for p in idx:
                    terms += [
                        (-1, G(j2, p) * H(l, j1, j3) * L(p, l)),
                        (1, G(j3, p) * H(l, j1, j2) * L(p, l)),
                        (-1, H(l, j1, j2) * H(p, l, j3) * f.Hd(p)),
                        (1, H(l, j1, j3) * H(p, l, j2) * f.Hd(p)),
                    ]
            out[(j1, j2, j3)] = s(terms)
    return out


def compat_mechanical(c: CubicForm, *, first: bool = True) -> CompatResiduals:
    """Compatibility families by formal cross-differentiation of the solved gradient.

    Each Theta derivative produced by the differentiation is replaced by its
    solved value, so the result is a polynomial in the Theta symbols.  With
    ``first=False`` the first family is skipped (left empty).
    """
    tg = ThetaGradient(c)
    g, D = tg.grad, tg.D
    y = c.n + 1
    idx = c.ctx.indices
    fams: dict[str, Residuals] = {"c1": {}, "c2": {}, "c3": {}, "c4": {}}
    raw: list[tuple[str, tuple[int, ...], Callable[[], RationalExpr]]] = []
    for j1 in idx:
        if first:
            for j2, j3 in combinations(idx, 2):
                raw.append(("c1", (j1, j2, j3), lambda a=j1, b=j2, e=j3: D(g[(a, b)], e) - D(g[(a, e)], b)))
        for j2 in idx:
            raw.append(("c2", (j1, j2), lambda a=j1, b=j2: D(g[(a, b)], y) - D(g[(a, y)], b)))
    for j1, j2 in combinations(idx, 2):
        raw.append(("c3", (j1, j2), lambda a=j1, b=j2: D(g[(y, a)], b) - D(g[(y, b)], a)))
    for j2 in idx:
        raw.append(("c4", (j2,), lambda b=j2: D(g[(y, b)], y) - D(g[(y, y)], b)))
    dependent = []
    for fam, key, make in raw:
        value, had_theta = tg.split(make())
        fams[fam][key] = value
        if had_theta:
            dependent.append((fam, key))
    return CompatResiduals(**fams, theta_dependent=tuple(dependent))


def compat_residuals(c: CubicForm) -> CompatResiduals:
    """First family in closed form, the other three by formal cross-differentiation.

    Theta must drop out whenever ``c`` satisfies (I')-(IV'); if it does not,
    ThetaNotEliminated is raised.
    """
    mech = compat_mechanical(c, first=False)
    if mech.theta_dependent and flatness_residuals(c).all_zero():
        fam, key = mech.theta_dependent[0]
        raise ThetaNotEliminated(f"{fam}{list(key)} keeps Theta terms although (I')-(IV') hold")
    return CompatResiduals(
        compat_first_family(c), mech.c2, mech.c3, mech.c4, theta_dependent=mech.theta_dependent
    )
