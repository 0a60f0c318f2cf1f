import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artrac.errors import UndefinedSlip
from artrac.slip import (
    SlipVector,
    WheelSlipState,
    detect_component,
    lambda_l,
    s_l,
    undetectable_basis,
)

EPS = 1e-3
M = 7.5


def test_spinning_wheel_on_stationary_ground():
    st_ = WheelSlipState(omega=EPS, v=0.0, r=1.0)
    assert lambda_l(st_) == 1.0
    assert s_l(st_) == EPS


def test_fast_wheel_at_half_speed_ground():
    st_ = WheelSlipState(omega=2 * M, v=M, r=1.0)
    assert lambda_l(st_) == 0.5
    assert s_l(st_) == M


def test_rolling_gives_zero_slip():
    st_ = WheelSlipState(omega=2.0, v=2.0 * 0.955, r=0.955)
    assert s_l(st_) == pytest.approx(0.0, abs=1e-15)
    assert lambda_l(st_) == pytest.approx(0.0, abs=1e-15)


def test_braking_branch():
    st_ = WheelSlipState(omega=1.0, v=4.0, r=1.0)
    assert lambda_l(st_) == 0.75
    assert s_l(st_) == -3.0


def test_undefined_slip():
    with pytest.raises(UndefinedSlip):
        lambda_l(WheelSlipState(0.0, 0.0))
    with pytest.raises(UndefinedSlip):
        lambda_l(WheelSlipState(0.0, 0.0, alpha=0.2, r=0.955))


def test_state_validation():
    with pytest.raises(ValueError):
        WheelSlipState(-1.0, 1.0)
    with pytest.raises(ValueError):
        WheelSlipState(1.0, 1.0, r=0.0)


pos = st.floats(0.01, 50.0)
ang = st.floats(-0.3, 0.3)


@given(pos, pos, ang, st.floats(0.3, 1.5))
def test_lambda_in_unit_interval(w, v, a, r):
    lam = lambda_l(WheelSlipState(w, v, a, r))
    assert 0.0 <= lam <= 1.0


@given(pos, pos, ang, st.floats(0.1, 10.0))
def test_lambda_scale_invariant(w, v, a, k):
    assert lambda_l(WheelSlipState(w * k, v * k, a)) == pytest.approx(lambda_l(WheelSlipState(w, v, a)), abs=1e-12)


@given(pos, pos, pos, ang)
def test_s_linear(w1, w2, v, a):
    base = s_l(WheelSlipState(w1, v, a)) + s_l(WheelSlipState(w2, v, a))
    assert s_l(WheelSlipState(w1 + w2, 2 * v, a)) == pytest.approx(base, abs=1e-9)


@given(pos, ang)
def test_branches_meet_at_rolling(v, a):
    st_ = WheelSlipState(v * math.cos(a), v, a, 1.0)
    assert lambda_l(st_) == pytest.approx(0.0, abs=1e-12)


def test_basis_members_are_invisible():
    basis = undetectable_basis()
    assert [b.s for b in basis] == [(1, 1, 0, 0), (0, 0, 1, 1), (-1, 1, -1, 1)]
    for b in basis:
        assert detect_component(b) == 0.0


def test_detect_component_examples():
    assert detect_component(SlipVector((0, 0, 0, 0))) == 0.0
    assert detect_component(SlipVector((1, 0, 0, 0))) == 1.0
    assert detect_component(SlipVector((-1, 1, -1, 1))) == 0.0


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_combinations_of_basis_are_invisible(k):
    b = undetectable_basis()
    s = k[0] * b[0] + k[1] * b[1] + k[2] * b[2]
    assert detect_component(s) == pytest.approx(0.0, abs=1e-12)


def test_basis_spans_the_kernel():
    row = np.array([1.0, -1.0, -1.0, 1.0])
    b = np.array([v.as_array() for v in undetectable_basis()])
    assert np.linalg.matrix_rank(b) == 3
    assert np.allclose(b @ row, 0.0)


@given(st.integers(0, 3), st.floats(0.001, 10.0))
def test_single_wheel_slip_is_visible(i, sigma):
    s = [0.0] * 4
    s[i] = sigma
    assert abs(detect_component(SlipVector(tuple(s)))) == pytest.approx(sigma)


def test_slip_vector_validation():
    with pytest.raises(ValueError):
        SlipVector((1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        SlipVector((1.0, 2.0, 3.0, math.nan))
