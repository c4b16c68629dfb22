"""Shared random generators for the property suites."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from jetflat.jetspace import JetContext
from jetflat.symcore import RationalExpr

SEED = 20240611
CASES = 1000


def random_poly(ctx: JetContext, rng: random.Random, names, *, terms: int = 3, degree: int = 2) -> RationalExpr:
    e = ctx.zero()
    for _ in range(rng.randint(0, terms)):
        m = ctx.const(Fraction(rng.randint(-5, 5), rng.choice((1, 1, 2, 3))))
        for _ in range(rng.randint(0, degree)):
            m = m * ctx.sym(rng.choice(names))
        e = e + m
    return e


def random_rational(ctx: JetContext, rng: random.Random, names) -> RationalExpr:
    den = ctx.zero()
    while den.is_zero():
        den = random_poly(ctx, rng, names, terms=2)
    return random_poly(ctx, rng, names) / den


@pytest.fixture
def rng() -> random.Random:
    return random.Random(SEED)


@pytest.fixture
def ctx2() -> JetContext:
    return JetContext(2)


@pytest.fixture
def ctx3() -> JetContext:
    return JetContext(3)
