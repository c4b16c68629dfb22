"""Determinants and linear solving over the rational-function field."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from jetflat.errors import NonSquareMatrix
from jetflat.symcore.rational import RationalExpr

Matrix = Sequence[Sequence[RationalExpr]]


def determinant(m: Matrix) -> RationalExpr:
    """Exact determinant: cofactor expansion up to 3x3, Bareiss beyond."""
    k = len(m)
    if k == 0 or any(len(row) != k for row in m):
        raise NonSquareMatrix(f"expected a square matrix, got {k} rows of lengths {[len(r) for r in m]}")
    if k == 1:
        return m[0][0]
    if k == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if k == 3:
        (a, b, c), (d, e, f), (g, h, i) = m
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    return _bareiss(m)


def _bareiss(m: Matrix) -> RationalExpr:
    # Clear row denominators so the elimination runs on polynomials and every
    # Bareiss division is exact.
    u = m[0][0].universe
    ctx = u.ctx
    rows = []
    scale = RationalExpr.one(u)
    for row in m:
        lcm = ctx.constant(1)
        for e in row:
            d = e._den
            if not d.is_one():
                lcm = lcm * (d / lcm.gcd(d))
        rows.append([e._num * (lcm / e._den) for e in row])
        scale = scale * RationalExpr(u, lcm)
    k = len(rows)
    sign = 1
    prev = ctx.constant(1)
    for c in range(k - 1):
        if rows[c][c].is_zero():
            for r in range(c + 1, k):
                if not rows[r][c].is_zero():
                    rows[c], rows[r] = rows[r], rows[c]
                    sign = -sign
                    break
            else:
                return RationalExpr.zero(u)
        piv = rows[c][c]
        for r in range(c + 1, k):
            for j in range(c + 1, k):
                rows[r][j] = (piv * rows[r][j] - rows[r][c] * rows[c][j]) / prev
            rows[r][c] = ctx.from_dict({})
        prev = piv
    det = RationalExpr(u, rows[k - 1][k - 1] * sign)
    return det / scale


@dataclass(frozen=True)
class Solution:
    values: tuple[RationalExpr, ...]


@dataclass(frozen=True)
class Inconsistent:
    row: int  # original index of an equation reduced to 0 = nonzero
    residual: RationalExpr


@dataclass(frozen=True)
class Underdetermined:
    particular: tuple[RationalExpr, ...]
    kernel: tuple[tuple[RationalExpr, ...], ...]


def _weight(e: RationalExpr) -> int:
    return e.num.total_degree() + e.den.total_degree()


def solve_linear(a: Matrix, b: Sequence[RationalExpr]) -> Solution | Inconsistent | Underdetermined:
    """Gauss-Jordan elimination with a deterministic pivot rule.

    Columns are processed left to right; within a column the pivot is the
    remaining entry of lowest total degree (numerator plus denominator),
    ties broken by lowest original row index.  In the underdetermined case
    every free unknown is set to 1 in the particular solution.
    """
    rows = len(a)
    if rows != len(b):
        raise ValueError("row count of A and length of b differ")
    cols = len(a[0]) if rows else 0
    if rows == 0:
        raise ValueError("empty system")
    u = b[0].universe
    zero = RationalExpr.zero(u)
    aug = [list(a[i]) + [b[i]] for i in range(rows)]
    origin = list(range(rows))
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        cands = [i for i in range(r, rows) if not aug[i][c].is_zero()]
        if not cands:
            continue
        p = min(cands, key=lambda i: (_weight(aug[i][c]), origin[i]))
        aug[r], aug[p] = aug[p], aug[r]
        origin[r], origin[p] = origin[p], origin[r]
        inv = 1 / aug[r][c]
        aug[r] = [zero if e.is_zero() else e * inv for e in aug[r]]
        for i in range(rows):
            if i != r and not aug[i][c].is_zero():
                f = aug[i][c]
                aug[i] = [
                    ei if ej.is_zero() else ei - f * ej for ei, ej in zip(aug[i], aug[r])
                ]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if not aug[i][cols].is_zero():
            return Inconsistent(origin[i], aug[i][cols])
    if len(pivots) == cols:
        return Solution(tuple(aug[i][cols] for i in range(cols)))
    free = [c for c in range(cols) if c not in pivots]
    one = RationalExpr.one(u)
    particular = [one if c in free else zero for c in range(cols)]
    for i, c in enumerate(pivots):
        v = aug[i][cols]
        for f in free:
            v = v - aug[i][f]
        particular[c] = v
    kernel = []
    for f in free:
        vec = [zero] * cols
        vec[f] = one
        for i, c in enumerate(pivots):
            vec[c] = -aug[i][f]
        kernel.append(tuple(vec))
    return Underdetermined(tuple(particular), tuple(kernel))
