"""Fixed-seed corpus of nondegenerate point transformations and cubic forms."""

from __future__ import annotations

import random
from itertools import combinations_with_replacement

from jetflat.cubic import CubicForm
from jetflat.jetspace import JetContext
from jetflat.symcore import RationalExpr
from jetflat.transform import PointTransformation, jacobian

DEFAULT_SEED = 1


def _monomials(ctx: JetContext, max_degree: int) -> list[RationalExpr]:
    names = ctx.point_names
    out = []
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(names, d):
            m = ctx.const(1)
            for v in combo:
                m = m * ctx.sym(v)
            out.append(m)
    return out


def random_polynomial(
    ctx: JetContext, rng: random.Random, *, max_degree: int = 2, terms: int = 2, coef: int = 2
) -> RationalExpr:
    """Sparse polynomial in ``(x, y)`` with small nonzero integer coefficients."""
    monos = _monomials(ctx, max_degree)
    e = ctx.zero()
    for m in rng.sample(monos, min(terms, len(monos))):
        c = 0
        while c == 0:
            c = rng.randint(-coef, coef)
        e = e + m * c
    return e


def random_transformation(
    ctx: JetContext, rng: random.Random, *, max_degree: int = 2, density: float = 0.6
) -> PointTransformation:
    """Identity plus sparse integer perturbations, redrawn until the Jacobian is nonzero.

    At least one component is perturbed by a term of degree two or more, so
    every draw has nonvanishing second derivatives.
    """
    while True:
        comps = []
        for l in range(1, ctx.n + 2):
            base = ctx.x(l)
            if rng.random() < density:
                base = base + random_polynomial(ctx, rng, max_degree=max_degree, terms=rng.randint(1, 2))
            comps.append(base)
        t = PointTransformation(ctx, comps[:-1], comps[-1])
        curved = any(c.degree_in(ctx.point_names) >= 2 for c in comps)
        if curved and not jacobian(t).is_zero():
            return t


def transformation_corpus(
    n: int, count: int = 20, *, seed: int = DEFAULT_SEED, max_degree: int = 2
) -> list[PointTransformation]:
    """``count`` transformations for dimension ``n``; the first is the identity."""
    ctx = JetContext(n)
    rng = random.Random(f"{seed}:{n}")
    out = [PointTransformation.identity(ctx)]
    seen = {tuple(out[0].X) + (out[0].Y,)}
    while len(out) < count:
        t = random_transformation(ctx, rng, max_degree=max_degree)
        key = tuple(t.X) + (t.Y,)
        if key not in seen:
            seen.add(key)
            out.append(t)
    return out


def random_cubic_form(
    ctx: JetContext, rng: random.Random, *, max_degree: int = 2, terms: int = 3
) -> CubicForm:
    """Cubic form with independent random polynomial entries (generally not flat)."""
    idx = ctx.indices

    def draw() -> RationalExpr:
        return random_polynomial(ctx, rng, max_degree=max_degree, terms=rng.randint(0, terms), coef=3)

    return CubicForm(
        ctx,
        {(a, b): draw() for a in idx for b in idx if a <= b},
        {(k, a, b): draw() for k in idx for a in idx for b in idx if a <= b},
        {(k, j): draw() for k in idx for j in idx},
        {k: draw() for k in idx},
    )
