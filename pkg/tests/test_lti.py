import numpy as np
import pytest

from entrain.blocks import filter_one
from entrain.lti import (
    LtiSystem,
    has_zero_at_origin,
    lti_rhs,
    sinusoid_steady_state,
    transfer_eval,
)

F1 = filter_one()


def test_filter_one_shapes_and_matrices():
    assert F1.A.shape == (1, 1)
    assert F1.A[0, 0] == -1.0
    assert F1.B[0] == -1.0
    assert F1.C[0] == 1.0
    assert F1.D == 1.0


def test_transfer_matches_closed_form():
    # W(s) = s / (s + 1) for the bundled first-order filter
    for s in (0.0, 1.0, 1j, 2.0 + 3.0j, 100j, 0.01j):
        expected = s / (s + 1.0)
        assert transfer_eval(F1, s) == pytest.approx(expected, abs=1e-14)


def test_zero_at_origin():
    assert abs(transfer_eval(F1, 0.0)) < 1e-12
    assert has_zero_at_origin(F1)
    # a plain lag 1/(s+1) has no zero at the origin
    lag = LtiSystem(A=[[-1.0]], B=[1.0], C=[1.0], D=0.0)
    assert not has_zero_at_origin(lag)


def test_gain_at_reference_frequencies():
    assert abs(transfer_eval(F1, 1j)) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert abs(transfer_eval(F1, 100j)) == pytest.approx(0.99995, abs=1e-5)
    assert abs(transfer_eval(F1, 0.01j)) == pytest.approx(0.0099995, abs=1e-7)


def test_sinusoid_steady_state_gain_and_phase():
    gain, phase = sinusoid_steady_state(F1, 1.0)
    assert gain == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert phase == pytest.approx(np.pi / 4, abs=1e-12)


def test_sinusoid_steady_state_requires_hurwitz():
    unstable = LtiSystem(A=[[1.0]], B=[1.0], C=[1.0], D=0.0)
    assert not unstable.is_hurwitz
    with pytest.raises(ValueError):
        sinusoid_steady_state(unstable, 1.0)


def test_transfer_eval_near_pole_raises():
    # the filter has a pole at s = -1; evaluation there is singular
    with pytest.raises(ValueError):
        transfer_eval(F1, -1.0)


def test_lti_rhs_linear_dynamics():
    dx, y = lti_rhs(F1, np.array([2.0]), 3.0)
    # dx = A x + B u = -2 - 3; y = C x + D u = 2 + 3
    assert dx[0] == pytest.approx(-5.0)
    assert y == pytest.approx(5.0)


def test_lti_rhs_shape_check():
    with pytest.raises(ValueError):
        lti_rhs(F1, np.array([1.0, 2.0]), 0.0)


def test_normalization_from_nested_lists():
    sys = LtiSystem(A=[[0.0, 1.0], [-2.0, -3.0]], B=[0.0, 1.0], C=[1.0, 0.0], D=0.0)
    assert sys.n == 2
    assert sys.is_hurwitz
    # W(s) = 1 / (s^2 + 3 s + 2); check at s = 1j
    w = transfer_eval(sys, 1j)
    assert w == pytest.approx(1.0 / ((1j) ** 2 + 3 * 1j + 2), abs=1e-14)
