from __future__ import annotations

import random

import pytest

from conftest import SEED
from jetflat.corpus import random_polynomial, transformation_corpus
from jetflat.cubic import CubicForm
from jetflat.errors import DegenerateJacobian, IndexOutOfRange
from jetflat.jetspace import JetContext, PdeSystem
from jetflat.transform import (
    PointTransformation,
    VectorField,
    counting_excess,
    determinantal_identities_n2,
    ghlm_counts,
    ghlm_from_squares,
    jacobian,
    prolong2,
    prolong2_n2_display,
    pullback_residual,
    square_counts,
    squares,
    substitute_system,
    synthesize,
    synthesize_n2_display,
)
from oracles import COUNTING_EXCESS

CTX = JetContext(2)
x1, x2, y = CTX.x(1), CTX.x(2), CTX.y
p1, p2 = CTX.p(1), CTX.p(2)
IDENTITY = PointTransformation.identity(CTX)
SHIFT = PointTransformation(CTX, [x1, x2], y + x1**2)
SCALE = PointTransformation(CTX, [x1, x2], y * (1 + x1))


def test_jacobian_examples():
    assert jacobian(IDENTITY) == CTX.const(1)
    assert jacobian(SCALE) == 1 + x1
    assert jacobian(PointTransformation(CTX, [x1 + x2, x2], y)) == CTX.const(1)


def test_degenerate_transformation_rejected():
    t = PointTransformation(CTX, [x1 + y, x1 + y], y)
    with pytest.raises(DegenerateJacobian):
        squares(t)


def test_components_must_not_mention_jets():
    with pytest.raises(ValueError):
        PointTransformation(CTX, [x1, p1], y)


def test_squares_examples():
    assert squares(IDENTITY).is_zero()
    s = squares(SHIFT)
    assert s(3, 1, 1) == CTX.const(2)
    assert all(e.is_zero() for key, e in s.entries.items() if key != (1, 1, 3))
    s = squares(SCALE)
    assert s(3, 1, 3) == 1 / (1 + x1)
    assert all(e.is_zero() for key, e in s.entries.items() if key != (1, 3, 3))


@pytest.mark.parametrize("n", [2, 3])
def test_squares_by_determinants_and_by_solving_agree(n):
    for t in transformation_corpus(n, count=5, seed=SEED):
        assert squares(t) == squares(t, method="solve")


def test_synthesize_examples():
    assert synthesize(IDENTITY) == PdeSystem.zero(CTX)
    assert synthesize(SHIFT) == PdeSystem(CTX, {(1, 1): -2})
    # y = u/(1 + x1) with u affine also forces y_{x1 x2} = -y_{x2}/(1 + x1).
    assert synthesize(SCALE) == PdeSystem(CTX, {(1, 1): -2 * p1 / (1 + x1), (1, 2): -p2 / (1 + x1)})


def test_ghlm_examples():
    assert ghlm_from_squares(IDENTITY).is_zero()
    assert ghlm_from_squares(SHIFT) == CubicForm(CTX, G={(1, 1): -2})
    expected = CubicForm(CTX, H={(1, 1, 1): -2 / (1 + x1), (2, 1, 2): -1 / (1 + x1)})
    assert ghlm_from_squares(SCALE) == expected


def test_pullback_examples():
    assert all(e.is_zero() for e in pullback_residual(IDENTITY, PdeSystem.zero(CTX)).values())
    assert all(e.is_zero() for e in pullback_residual(SHIFT, synthesize(SHIFT)).values())
    res = pullback_residual(SHIFT, PdeSystem.zero(CTX))
    assert res[(1, 1)] == CTX.const(-2)
    assert not all(e.is_zero() for e in res.values())


def test_prolongation_examples():
    v = VectorField(CTX, [x1, x2], y)
    assert prolong2(v).is_zero()
    v = VectorField(CTX, [x1 * y, 0], 0)
    assert prolong2(v)[(1, 1)] == -2 * p1**2


def test_prolongation_general_formula_matches_two_variable_display():
    rng = random.Random(f"{SEED}:prolong")
    for _ in range(20):
        v = VectorField(
            CTX,
            [random_polynomial(CTX, rng, max_degree=3, terms=4) for _ in CTX.indices],
            random_polynomial(CTX, rng, max_degree=3, terms=4),
        )
        assert prolong2(v).Y2 == prolong2_n2_display(v).Y2


def test_two_variable_displays_need_n2():
    with pytest.raises(IndexOutOfRange):
        prolong2_n2_display(VectorField(JetContext(3), [0, 0, 0], 0))


def test_synthesis_general_formula_matches_two_variable_display():
    for t in transformation_corpus(2, count=8, seed=SEED):
        assert synthesize(t) == synthesize_n2_display(squares(t), CTX)


def test_determinant_identities_vanish_on_synthesized_systems():
    for t in transformation_corpus(2, count=8, seed=SEED):
        sys = synthesize(t)
        for e in determinantal_identities_n2(t).values():
            assert substitute_system(sys, e).is_zero()


def test_determinant_identity_with_mixed_middle_row_fails():
    t = PointTransformation(CTX, [x1 + x2**2, x2 + x1 * x2], y)
    sys = synthesize(t)
    e = determinantal_identities_n2(t, printed_entry=True)[(2, 2)]
    assert not substitute_system(sys, e).is_zero()


@pytest.mark.parametrize("n", range(2, 7))
def test_counting_excess(n):
    assert counting_excess(n) == COUNTING_EXCESS[n]
    assert sum(square_counts(n).values()) - sum(ghlm_counts(n).values()) == n + 1
