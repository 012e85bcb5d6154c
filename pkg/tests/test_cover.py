import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowleaf.cover import (
    BRANCH_POINTS,
    EquivarianceViolation,
    InvolutionModel,
    check_descent,
    quotient_representative,
    symmetrize,
)
from shadowleaf.dynamics import FourierTerm, Perturbation, PerturbedLift, shadowing_constant
from shadowleaf.shadowing import choose_shadow_constant

EVEN_INJECTED = Perturbation((FourierTerm((0, 1), sx=0.03), FourierTerm((1, 0), sy=0.02),
                              FourierTerm((1, 0), cx=0.02)))


def _sc(lift):
    return choose_shadow_constant(shadowing_constant(lift, 256), lift.frame.lam)


def test_symmetrize_keeps_odd_part(rng):
    odd = symmetrize(EVEN_INJECTED)
    assert odd.is_odd
    x = rng.uniform(-1, 1, (100, 2))
    np.testing.assert_allclose(odd(x), (EVEN_INJECTED(x) - EVEN_INJECTED(-x)) / 2, atol=1e-16)


def test_from_perturbation_symmetrizes(cat):
    model = InvolutionModel.from_perturbation(cat, EVEN_INJECTED)
    assert model.is_odd
    np.testing.assert_array_equal(model.involution([0.2, -0.4]), [-0.2, 0.4])


coords = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(coords, coords, st.integers(-3, 3), st.integers(-3, 3))
def test_quotient_representative_is_invariant(a, b, k1, k2):
    x = np.array([a, b])
    r = quotient_representative(x)
    assert np.all((0 <= r) & (r < 1))
    for other in (quotient_representative(-x), quotient_representative(x + [k1, k2])):
        # same point of the quotient; ties at the domain edge may pick either lift
        assert min(_torus_gap(other, r), _torus_gap(other, -r)) <= 1e-12


def _torus_gap(a, b):
    d = np.abs(a - b) % 1.0
    return float(np.max(np.minimum(d, 1 - d)))


def test_branch_points_are_their_own_representatives():
    np.testing.assert_array_equal(quotient_representative(BRANCH_POINTS), BRANCH_POINTS)


def test_descent_holds_for_odd_lift(ctx):
    report = check_descent(InvolutionModel(ctx.lift), ctx.sc, 300, 1e-8, seed=3)
    assert report.passed
    assert report["descent_stable"].worst_residual <= 2e-8


def test_descent_fails_with_even_term(cat):
    lift = PerturbedLift(cat, EVEN_INJECTED)
    with pytest.raises(EquivarianceViolation) as info:
        check_descent(InvolutionModel(lift), _sc(lift), 200, 1e-8)
    assert not info.value.report.passed
    assert info.value.worst_sample is not None


def test_symmetrized_lift_descends(cat):
    model = InvolutionModel.from_perturbation(cat, EVEN_INJECTED)
    assert check_descent(model, _sc(model.lift), 200, 1e-8).passed
