from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import CASES, SEED, random_poly, random_rational
from jetflat.cli.parser import parse_expr
from jetflat.errors import DivisionByZeroExpr, NonSquareMatrix, SubstitutionSingularity, UnknownVariable
from jetflat.jetspace import JetContext
from jetflat.symcore import (
    Inconsistent,
    RationalExpr,
    Solution,
    Underdetermined,
    VarUniverse,
    arith,
    determinant,
    differentiate,
    is_zero,
    solve_linear,
    substitute,
)

CTX = JetContext(2)
NAMES = ("x1", "x2", "y", "p1", "p2")
x1, x2, y = CTX.x(1), CTX.x(2), CTX.y


def _draws(kind: str, arity: int):
    rng = random.Random(f"{SEED}:{kind}")
    for _ in range(CASES):
        yield tuple(random_rational(CTX, rng, NAMES) for _ in range(arity))


# Examples.

def test_arith_examples():
    assert arith(x1, x1, "sub").is_zero()
    assert arith(1 / (1 + x1), 1 + x1, "mul") == CTX.const(1)
    assert arith(x1**2 - 1, x1 - 1, "div") == x1 + 1


def test_division_by_canonical_zero():
    with pytest.raises(DivisionByZeroExpr):
        arith(x1, x1 - x1, "div")


def test_differentiate_examples():
    assert differentiate(y * (1 + x1), "x1") == y
    assert differentiate(1 / (1 + x1), "x1") == -1 / (1 + x1) ** 2
    assert differentiate(x1**3 * y**2, "y") == 2 * x1**3 * y


def test_differentiate_unknown_variable():
    with pytest.raises(UnknownVariable):
        differentiate(x1, "z9")


def test_substitute_examples():
    f11 = -2 * CTX.p(1) / (1 + x1)
    assert substitute(CTX.q(1, 1), {"q1_1": f11}) == f11
    assert substitute(x1 + y, {}) == x1 + y
    with pytest.raises(SubstitutionSingularity):
        substitute(1 / (y - x1), {"y": x1})


def test_substitution_is_simultaneous():
    assert substitute(x1 + 2 * x2, {"x1": x2, "x2": x1}) == x2 + 2 * x1


def test_determinant_examples():
    one, zero = CTX.const(1), CTX.zero()
    ident = [[one if i == j else zero for j in range(3)] for i in range(3)]
    assert determinant(ident) == one
    m = [[one, zero, zero], [zero, one, zero], [y, zero, 1 + x1]]
    assert determinant(m) == 1 + x1
    m = [[zero, zero, zero], [zero, one, zero], [CTX.const(2), zero, one]]
    assert determinant(m).is_zero()


def test_determinant_rejects_non_square():
    with pytest.raises(NonSquareMatrix):
        determinant([[x1, y]])


def _cofactor(m):
    if len(m) == 1:
        return m[0][0]
    total = CTX.zero()
    for c in range(len(m)):
        minor = [row[:c] + row[c + 1:] for row in m[1:]]
        term = m[0][c] * _cofactor(minor)
        total = total + term if c % 2 == 0 else total - term
    return total


def test_determinant_matches_cofactor_expansion(rng):
    for _ in range(60):
        k = rng.randint(1, 4)
        m = [[random_poly(CTX, rng, NAMES, terms=2) for _ in range(k)] for _ in range(k)]
        assert determinant(m) == _cofactor(m)


def test_solve_linear_examples():
    one, zero = CTX.const(1), CTX.zero()
    b = [x1, y / (1 + x2)]
    assert solve_linear([[one, zero], [zero, one]], b) == Solution(tuple(b))
    assert isinstance(solve_linear([[one], [one]], [one, CTX.const(2)]), Inconsistent)
    res = solve_linear([[x1, one]], [x1 + 1])
    assert isinstance(res, Underdetermined)
    assert res.particular == (one, one)
    for vec in res.kernel:
        assert (x1 * vec[0] + vec[1]).is_zero()


def test_solve_linear_recovers_random_solutions(rng):
    for _ in range(40):
        k = rng.randint(1, 3)
        a = [[random_poly(CTX, rng, NAMES, terms=2) for _ in range(k)] for _ in range(k)]
        if determinant(a).is_zero():
            continue
        sol = [random_rational(CTX, rng, NAMES) for _ in range(k)]
        b = [sum((a[i][j] * sol[j] for j in range(k)), CTX.zero()) for i in range(k)]
        assert solve_linear(a, b) == Solution(tuple(sol))


def test_is_zero_examples():
    assert is_zero((x1 + y) - (y + x1))
    assert is_zero((x1**2 - 1) - (x1 - 1) * (x1 + 1))
    assert not is_zero(x1 - x2)


def test_canonical_form_of_fraction():
    e = (2 * x1 + 2) / (4 * x1**2 - 4)
    assert e == 1 / (2 * x1 - 2)
    assert e.den.leading_coefficient() > 0
    assert (-x1 / -y) == x1 / y


def test_universe_order_and_extras():
    u = VarUniverse(2, ("a",))
    assert u.names == ("x1", "x2", "y", "p1", "p2", "q1_1", "q1_2", "q2_2", "a")
    with pytest.raises(ValueError):
        VarUniverse(2, ("y",))


def test_lift_into_larger_universe():
    big = JetContext(2).with_extras(("Theta1",))
    e = x1 * y / (1 + CTX.p(2))
    lifted = e.lift(big.universe)
    assert lifted.render() == e.render()
    assert lifted.lift(CTX.universe) == e


def test_constant_value():
    assert CTX.const(Fraction(3, 4)).constant_value() == Fraction(3, 4)


# Property suites: 1000 cases per law, fixed seed.

def test_ring_laws():
    for a, b, c in _draws("ring", 3):
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert (a - a).is_zero()
        assert a + 0 == a and a * 1 == a


def test_field_inverse():
    for (a,) in _draws("field", 1):
        if a.is_zero():
            continue
        assert a * (1 / a) == CTX.const(1)
        assert a / a == CTX.const(1)


def test_leibniz_rule():
    rng = random.Random(f"{SEED}:leibniz")
    for a, b in _draws("leibniz", 2):
        v = rng.choice(NAMES)
        assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


def test_quotient_rule():
    rng = random.Random(f"{SEED}:quotient")
    for a, b in _draws("quotient", 2):
        if b.is_zero():
            continue
        v = rng.choice(NAMES)
        assert (a / b).diff(v) == (a.diff(v) * b - a * b.diff(v)) / b**2


def test_mixed_partials_commute():
    rng = random.Random(f"{SEED}:mixed")
    for (a,) in _draws("mixed", 1):
        u, v = rng.sample(NAMES, 2)
        assert a.diff(u).diff(v) == a.diff(v).diff(u)


def test_chain_rule():
    rng = random.Random(f"{SEED}:chain")
    done = 0
    while done < CASES:
        f = random_rational(CTX, rng, ("x1", "y"))
        g = random_rational(CTX, rng, ("x1", "x2"))
        try:
            composed = f.subs({"x1": g})
            outer = f.diff("x1").subs({"x1": g})
        except SubstitutionSingularity:
            continue
        assert composed.diff("x2") == outer * g.diff("x2")
        done += 1


def test_canonical_idempotence():
    for (a,) in _draws("canon", 1):
        again = RationalExpr(a.universe, a.num, a.den)
        assert again == a
        assert again.num == a.num and again.den == a.den
        assert hash(again) == hash(a)


def test_parse_print_round_trip():
    for (a,) in _draws("roundtrip", 1):
        text = a.render()
        back = parse_expr(text, CTX)
        assert back == a
        assert back.render() == text
