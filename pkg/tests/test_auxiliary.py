from __future__ import annotations

import random

import pytest

from conftest import SEED
from jetflat.auxiliary import (
    PiTable,
    ThetaFields,
    ThetaGradient,
    compat_first_family,
    compat_mechanical,
    compat_residuals,
    cross_diff_residuals,
    pi_from_squares,
    quasi_invert,
    six_family_residuals,
    split_families,
    theta_from_squares,
    theta_system_residuals,
)
from jetflat.corpus import random_cubic_form, random_polynomial, transformation_corpus
from jetflat.cubic import CubicForm
from jetflat.jetspace import JetContext
from jetflat.transform import PointTransformation, ghlm_from_squares, squares

CTX = JetContext(2)
x1, x2, y = CTX.x(1), CTX.x(2), CTX.y

# displayed family = factor * split family, per key
DISPLAY_FACTORS = {
    "g_cross": ("fam1", -1),
    "theta_x": ("fam2", -2),
    "theta_y_mix": ("fam3", 1),
    "h_cross": ("fam4", 1),
    "l_cross": ("fam5", 1),
    "top_y": ("fam6", 2),
}


def _random_theta(ctx: JetContext, rng: random.Random) -> ThetaFields:
    return ThetaFields(tuple(random_polynomial(ctx, rng, terms=2) for _ in ctx.all_indices))


def _random_pi(ctx: JetContext, rng: random.Random) -> PiTable:
    top = ctx.n + 1
    entries = {
        (a, b, k): random_polynomial(ctx, rng, terms=2)
        for a in range(1, top + 1) for b in range(a, top + 1) for k in range(1, top + 1)
    }
    return PiTable(ctx, entries)


def test_pi_from_squares_examples():
    assert pi_from_squares(squares(PointTransformation.identity(CTX)), CTX).is_zero()
    p = pi_from_squares(squares(PointTransformation(CTX, [x1, x2], y + x1**2)), CTX)
    assert p.nonzero() == {(1, 1, 3): CTX.const(2)}
    p = pi_from_squares(squares(PointTransformation(CTX, [x1, x2], y * (1 + x1))), CTX)
    assert p(3, 1, 3) == 1 / (1 + x1)
    assert p(3, 3, 1) == p(3, 1, 3)


def test_cross_diff_examples():
    assert all(e.is_zero() for e in cross_diff_residuals(PiTable(CTX, {})).values())
    res = cross_diff_residuals(PiTable(CTX, {(1, 1, 3): x2}))
    assert res[(1, 1, 2, 3)] == CTX.const(1)


def test_split_families_zero_table():
    assert split_families(PiTable(CTX, {})).all_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_split_families_reindex_cross_diff(n):
    ctx = JetContext(n)
    rng = random.Random(f"{SEED}:split:{n}")
    for _ in range(4):
        p = _random_pi(ctx, rng)
        full = cross_diff_residuals(p)
        split = split_families(p)
        y_ = n + 1
        for (j1, j2, j3), e in split.fam1.items():
            assert e == full[(j1, j2, j3, y_)]
        for (j1, j2, j3, k), e in split.fam4.items():
            assert e == full[(j1, j2, j3, k)]


def test_quasi_invert_examples():
    assert quasi_invert(CubicForm(CTX), ThetaFields.zero(CTX)).is_zero()
    p = quasi_invert(CubicForm(CTX, L={(1, 1): 2}), ThetaFields.zero(CTX))
    assert p.nonzero() == {(1, 3, 1): CTX.const(1)}


def test_theta_system_examples():
    assert theta_system_residuals(CubicForm(CTX), ThetaFields.zero(CTX)).all_zero()
    th = ThetaFields((x1, CTX.zero(), CTX.zero()))
    res = theta_system_residuals(CubicForm(CTX), th)
    assert res.theta_x[(1, 1)] == 1 - x1**2 / 2


def test_compat_examples():
    assert compat_residuals(CubicForm(CTX)).all_zero()
    res = compat_residuals(CubicForm(CTX, G={(1, 1): y}))
    assert res.c1[(1, 1, 2)].is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_displayed_families_equal_split_families(n):
    ctx = JetContext(n)
    rng = random.Random(f"{SEED}:six:{n}")
    for _ in range(4 if n == 2 else 2):
        c, th = random_cubic_form(ctx, rng), _random_theta(ctx, rng)
        shown = six_family_residuals(c, th).families()
        split = split_families(quasi_invert(c, th)).families()
        for name, (fam, factor) in DISPLAY_FACTORS.items():
            assert shown[name].keys() == split[fam].keys()
            for key, e in shown[name].items():
                assert e == split[fam][key] * factor


@pytest.mark.parametrize("n", [2, 3])
def test_closed_first_compat_family_matches_cross_differentiation(n):
    ctx = JetContext(n)
    rng = random.Random(f"{SEED}:compat:{n}")
    for _ in range(3 if n == 2 else 1):
        c = random_cubic_form(ctx, rng)
        assert compat_first_family(c) == compat_mechanical(c).c1


def test_theta_gradient_symbols_are_extras():
    tg = ThetaGradient(CubicForm(CTX))
    assert tg.names == ("Theta1", "Theta2", "Theta3")


def test_compat_off_the_flat_locus_reports_theta_dependence():
    rng = random.Random(f"{SEED}:offlocus")
    c = random_cubic_form(CTX, rng)
    res = compat_residuals(c)
    assert isinstance(res.theta_dependent, tuple)


@pytest.mark.parametrize("n", [2, 3])
def test_corpus_auxiliary_systems(n):
    ctx = JetContext(n)
    for t in transformation_corpus(n, count=4, seed=SEED):
        s = squares(t)
        p = pi_from_squares(s, ctx)
        c, th = ghlm_from_squares(s, ctx), theta_from_squares(s)
        assert all(e.is_zero() for e in cross_diff_residuals(p).values())
        assert split_families(p).all_zero()
        assert quasi_invert(c, th) == p
        assert six_family_residuals(c, th).all_zero()
        assert theta_system_residuals(c, th).all_zero()
        res = compat_residuals(c)
        assert res.all_zero() and res.theta_dependent == ()
