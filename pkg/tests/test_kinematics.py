import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artrac.errors import DegenerateDenominator, SingularSystem
from artrac.kinematics import (
    A40X,
    AxleScrew,
    JointConfig,
    VehicleGeometry,
    bogie_rear_screw,
    hauler_joint,
    p_fn,
    q_fn,
    solve_chain_numeric,
    solve_two_body,
    solve_two_body_expanded,
    wheel_velocity,
)

DEG = math.pi / 180
gammas = st.floats(-45 * DEG, 45 * DEG)
alphas = st.floats(-10 * DEG, 10 * DEG)
rates = st.floats(-0.5, 0.5)
speeds = st.floats(0.0, 10.0)


def chain_oracle(v12, a12, a34, gamma, gdot, geom=A40X):
    front, rear = solve_chain_numeric(v12, [a12, a34], [hauler_joint(gamma, gdot, geom)])
    return rear.v, front.omega, rear.omega


def test_geometry_defaults():
    assert (A40X.l1, A40X.l2, 2 * A40X.c) == (1.278, 3.265, 2.636)
    assert A40X.i == 3.09 * 6
    assert A40X.i == pytest.approx(18.54, abs=1e-12)


@pytest.mark.parametrize("field", ["l1", "l2", "c", "r"])
def test_geometry_rejects_nonpositive(field):
    with pytest.raises(ValueError):
        VehicleGeometry(**{field: 0.0})


def test_p_q_hand_values():
    s = math.sqrt(0.5)
    den = 1.278 * s + 3.265
    assert p_fn(0, 0, math.pi / 4) == pytest.approx(s / den, abs=1e-15)
    assert p_fn(0, 0, math.pi / 4) == pytest.approx(0.16962, abs=5e-6)
    assert q_fn(0, 0, math.pi / 4) == pytest.approx((3.265 * s + 1.278) / den, abs=1e-15)
    assert q_fn(0, 0, math.pi / 4) == pytest.approx(0.86039, abs=5e-6)
    assert p_fn(0, 0, 0) == 0.0
    assert q_fn(0, 0, 0) == 1.0


@given(gammas)
def test_p_odd_q_even(g):
    assert p_fn(0, 0, -g) == pytest.approx(-p_fn(0, 0, g), abs=1e-15)
    assert q_fn(0, 0, -g) == pytest.approx(q_fn(0, 0, g), abs=1e-15)


@given(st.floats(-1.5, 1.5), st.floats(0.5, 5.0))
def test_wheel_loader_ratio_is_one(g, length):
    loader = VehicleGeometry(l1=length, l2=length)
    assert q_fn(0, 0, g, loader) == pytest.approx(1.0, abs=1e-12)
    v34, _, _ = solve_two_body(2.0, 0, 0, g, 0.0, loader)
    assert v34 == pytest.approx(2.0, abs=1e-12)


def test_solve_two_body_examples():
    assert solve_two_body(2, 0, 0, 0, 0) == (2.0, 0.0, 0.0)
    v34, om1, om2 = solve_two_body(2, 0, 0, math.pi / 4, 0)
    # the listed values are truncated to five decimals
    assert (v34, om1, om2) == pytest.approx((1.72078, 0.33924, 0.33924), abs=1e-5)
    assert v34 == pytest.approx(2 * q_fn(0, 0, math.pi / 4), abs=1e-15)
    assert om1 == om2 == pytest.approx(2 * p_fn(0, 0, math.pi / 4), abs=1e-15)


def test_degenerate_denominator():
    folded = VehicleGeometry(l1=1.0, l2=1.0)
    with pytest.raises(DegenerateDenominator):
        p_fn(0, 0, math.pi, folded)
    with pytest.raises(DegenerateDenominator):
        solve_two_body(1.0, 0, 0, math.pi, 0, folded)
    assert isinstance(DegenerateDenominator("x"), ZeroDivisionError)


@given(speeds, alphas, alphas, gammas, rates)
def test_closed_forms_agree_with_chain_solver(v12, a12, a34, g, gd):
    tidy = solve_two_body(v12, a12, a34, g, gd)
    expanded = solve_two_body_expanded(v12, a12, a34, g, gd)
    oracle = chain_oracle(v12, a12, a34, g, gd)
    for a, b, c in zip(tidy, expanded, oracle):
        assert a == pytest.approx(c, abs=1e-9)
        assert b == pytest.approx(c, abs=1e-9)


@given(speeds, alphas, alphas, gammas, rates)
def test_yaw_rates_differ_by_steering_rate(v12, a12, a34, g, gd):
    _, om1, om2 = solve_two_body(v12, a12, a34, g, gd)
    assert om1 - om2 == pytest.approx(gd, abs=1e-9)


@given(speeds, alphas, alphas, gammas, rates)
def test_hinge_point_velocity_matches_from_both_bodies(v12, a12, a34, g, gd):
    # independent check in world coordinates: tractor frame at heading 0,
    # trailer frame at heading -gamma, both must move the hinge identically
    v34, om1, om2 = solve_two_body(v12, a12, a34, g, gd)
    l1, l2 = A40X.l1, A40X.l2
    vt = np.array([v12 * math.cos(a12), v12 * math.sin(a12)]) + om1 * np.array([0.0, -l1])
    th = -g
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    vr = rot @ (np.array([v34 * math.cos(a34), v34 * math.sin(a34)]) + om2 * np.array([0.0, l2]))
    assert vt == pytest.approx(vr, abs=1e-9)


def test_chain_straight_and_collinear():
    front, rear = solve_chain_numeric(1.0, [0.0, 0.0], [JointConfig(0.0, 0.0, 1.0, 1.0)])
    assert (rear.v, rear.omega) == pytest.approx((1.0, 0.0), abs=1e-15)
    joints = [JointConfig(0.0, 0.0, 1.0, 2.0), JointConfig(0.0, None, 0.5, 1.5)]
    screws = solve_chain_numeric(3.0, [0.0] * 3, joints)
    assert [s.v for s in screws] == pytest.approx([3.0] * 3, abs=1e-12)


def _frame_velocity(screw, offset):
    """Velocity of the point ``(offset, 0)`` of an axle frame, in that frame."""
    return np.array([screw.v * math.cos(screw.alpha), screw.v * math.sin(screw.alpha) + screw.omega * offset])


def _rot(th):
    return np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])


@given(speeds, gammas, rates, gammas, st.lists(alphas, min_size=3, max_size=3))
def test_chain_every_hinge_moves_consistently(v1, g1, gd, g2, al):
    joints = [JointConfig(g1, gd, 1.2, 2.0), JointConfig(g2, None, 1.5, 2.5)]
    screws = solve_chain_numeric(v1, al, joints)
    assert screws[0].omega - screws[1].omega == pytest.approx(gd, abs=1e-9)
    for k, j in enumerate(joints):
        ahead = _frame_velocity(screws[k], -j.a)
        behind = _frame_velocity(screws[k + 1], j.b)
        assert _rot(-j.gamma) @ behind == pytest.approx(ahead, abs=1e-9)


def test_chain_validation():
    j = JointConfig(0.1, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        solve_chain_numeric(1.0, [0.0], [j])
    with pytest.raises(ValueError):
        solve_chain_numeric(1.0, [0.0, 0.0], [JointConfig(0.1, None, 1.0, 1.0)])
    with pytest.raises(ValueError):
        solve_chain_numeric(1.0, [0.0] * 3, [j, JointConfig(0.0, 0.1, 1.0, 1.0)])


def test_chain_singular():
    # slip angle of 90 deg on the rear axle leaves its speed undetermined
    with pytest.raises(SingularSystem):
        solve_chain_numeric(1.0, [0.0, math.pi / 2], [JointConfig(0.0, 0.0, 1.0, 1.0)])


def test_wheel_velocity_examples():
    assert wheel_velocity(AxleScrew(2.0, 0.0), 1.318, "right") == (2.0, 0.0)
    assert wheel_velocity(AxleScrew(0.0, 1.0), 1.318, "right") == pytest.approx((1.318, 0.0))
    speed, ang = wheel_velocity(AxleScrew(2.0, 0.3392), 1.318, "right")
    assert speed == pytest.approx(2.4471, abs=5e-5)
    assert ang == 0.0
    with pytest.raises(ValueError):
        wheel_velocity(AxleScrew(1.0, 0.0), 1.0, "middle")


@given(speeds, st.floats(-1, 1), alphas, st.floats(0.5, 2.0))
def test_wheel_velocity_vector_oracle(v, om, a, c):
    # v [cos a, sin a] + Omega x r with r = (0, -c) for the right wheel
    for side, y in (("right", -c), ("left", c)):
        vec = np.array([v * math.cos(a) - om * y, v * math.sin(a)])
        speed, ang = wheel_velocity(AxleScrew(v, om, a), c, side)
        assert speed == pytest.approx(float(np.hypot(*vec)), abs=1e-12)
        assert speed * math.cos(ang) == pytest.approx(vec[0], abs=1e-12)


@given(speeds, st.floats(-1, 1), st.floats(0.5, 2.0))
def test_left_right_average_is_midpoint_speed(v, om, c):
    left, _ = wheel_velocity(AxleScrew(v, om), c, "left")
    right, _ = wheel_velocity(AxleScrew(v, om), c, "right")
    # with the turn small enough that neither wheel reverses
    if abs(om) * c <= v:
        assert (left + right) / 2 == pytest.approx(v, abs=1e-12)


def test_bogie_rear_axle_is_rigidly_behind():
    rear = bogie_rear_screw(AxleScrew(2.0, 0.5, 0.0), 1.7)
    assert rear.omega == 0.5
    assert rear.v * math.cos(rear.alpha) == pytest.approx(2.0)
    assert rear.v * math.sin(rear.alpha) == pytest.approx(-0.85)
