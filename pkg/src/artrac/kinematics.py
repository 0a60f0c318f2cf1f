"""Planar kinematics of articulated vehicles.

Conventions used throughout the package:

* Each axle carries a local frame with ``x`` pointing forward along the body.
* A positive steering angle ``gamma`` is a left turn; angular rates are
  positive counter-clockwise, so a steady left turn has ``Omega > 0``.
* A positive slip angle ``alpha`` rotates the axle velocity to the left of
  the body axis.  Lateral drift out of a left turn is therefore negative.
* Wheel 1/3/5 is on the left, wheel 2/4/6 on the right.

The hauler is the two-body special case: axle 12 on the tractor at ``l1``
ahead of the hinge, axle 34 on the trailer at ``l2`` behind it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import DegenerateDenominator, SingularSystem

DENOMINATOR_EPS = 1e-12
COND_LIMIT = 1e12


@dataclass(frozen=True)
class VehicleGeometry:
    """Hauler dimensions.  Defaults are the A40-class hauler.

    ``r`` is not published for this vehicle; 0.955 m makes the hub-side RPM
    conversion of the wheel-tach bounds come out at the reported values.
    ``bogie_spacing`` is the distance from axle 34 back to axle 56.
    """

    l1: float = 1.278
    l2: float = 3.265
    c: float = 1.318
    r: float = 0.955
    i_diff: float = 3.09
    i_hub: float = 6.0
    bogie_spacing: float = 1.7

    def __post_init__(self) -> None:
        for name in ("l1", "l2", "c", "r", "i_diff", "i_hub"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.bogie_spacing < 0:
            raise ValueError("bogie_spacing must be non-negative")

    @property
    def i(self) -> float:
        return self.i_diff * self.i_hub

    @property
    def track(self) -> float:
        return 2.0 * self.c


A40X = VehicleGeometry()


@dataclass(frozen=True)
class AxleScrew:
    """Planar velocity of an axle midpoint: speed, yaw rate and slip angle."""

    v: float
    omega: float
    alpha: float = 0.0


@dataclass(frozen=True)
class JointConfig:
    """One steering joint between axle ``k`` and axle ``k + 1``.

    ``a`` is the distance from axle ``k`` back to the joint, ``b`` from axle
    ``k + 1`` forward to it.  Only the leading joint of a chain is actively
    steered; trailing joints are passive and must leave ``gamma_dot`` unset.
    """

    gamma: float
    gamma_dot: float | None
    a: float
    b: float


def _denominator(alpha34: float, gamma: float, geom: VehicleGeometry) -> float:
    den = geom.l1 * math.cos(alpha34 - gamma) + geom.l2 * math.cos(alpha34)
    if abs(den) < DENOMINATOR_EPS:
        raise DegenerateDenominator(
            f"kinematic denominator {den:.3e} at alpha34={alpha34}, gamma={gamma}"
        )
    return den


def p_fn(alpha12: float, alpha34: float, gamma: float, geom: VehicleGeometry = A40X) -> float:
    """Inverse steady-state turning radius of the tractor, 1/m."""
    den = _denominator(alpha34, gamma, geom)
    return math.sin(gamma + alpha12 - alpha34) / den


def q_fn(alpha12: float, alpha34: float, gamma: float, geom: VehicleGeometry = A40X) -> float:
    """Trailer-to-tractor ratio of steady-state turning radii."""
    den = _denominator(alpha34, gamma, geom)
    return (geom.l2 * math.cos(alpha12 + gamma) + geom.l1 * math.cos(alpha12)) / den


def solve_two_body(
    v12: float,
    alpha12: float,
    alpha34: float,
    gamma: float,
    gamma_dot: float,
    geom: VehicleGeometry = A40X,
) -> tuple[float, float, float]:
    """Trailer speed and both yaw rates of the hauler, ``(v34, Omega1, Omega2)``.

    The steering-rate terms are written as the steady-state functions
    evaluated at a fictitious side-slip angle, e.g. ``gamma_dot * l1`` acts
    like a tractor speed with a -pi/2 slip angle.
    """
    half_pi = math.pi / 2
    p0 = p_fn(alpha12, alpha34, gamma, geom)
    v34 = q_fn(alpha12, alpha34, gamma, geom) * v12 + q_fn(
        -half_pi, alpha34, gamma, geom
    ) * gamma_dot * geom.l1
    omega1 = p0 * v12 + p_fn(-gamma + half_pi, alpha34, gamma, geom) * gamma_dot * geom.l2
    omega2 = p0 * v12 + p_fn(-half_pi, alpha34, gamma, geom) * gamma_dot * geom.l1
    return v34, omega1, omega2


def solve_two_body_expanded(
    v12: float,
    alpha12: float,
    alpha34: float,
    gamma: float,
    gamma_dot: float,
    geom: VehicleGeometry = A40X,
) -> tuple[float, float, float]:
    """Same as :func:`solve_two_body`, written out without ``p``/``q``."""
    l1, l2 = geom.l1, geom.l2
    den = _denominator(alpha34, gamma, geom)
    v34 = (
        (l2 * math.cos(gamma + alpha12) + l1 * math.cos(alpha12)) * v12
        + l1 * l2 * math.sin(gamma) * gamma_dot
    ) / den
    turn = math.sin(gamma + alpha12 - alpha34) * v12
    omega1 = (turn + l2 * math.cos(alpha34) * gamma_dot) / den
    omega2 = (turn - l1 * math.cos(gamma - alpha34) * gamma_dot) / den
    return v34, omega1, omega2


def _m_a(alpha: float, a: float) -> np.ndarray:
    return np.array([[math.cos(alpha), 0.0], [math.sin(alpha), -a]])


def _m_b(alpha: float, b: float) -> np.ndarray:
    return np.array([[math.cos(alpha), 0.0], [math.sin(alpha), b]])


def _rot(gamma: float) -> np.ndarray:
    c, s = math.cos(gamma), math.sin(gamma)
    return np.array([[c, -s], [s, c]])


def _solve2(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if not np.isfinite(a).all() or np.linalg.cond(a) > COND_LIMIT:
        raise SingularSystem(f"joint system is singular:\n{a}")
    return np.linalg.solve(a, rhs)


def solve_chain_numeric(
    v1: float, alphas: Sequence[float], joints: Sequence[JointConfig]
) -> list[AxleScrew]:
    """Solve the screw-transfer recursion joint by joint with 2x2 solves.

    The joint-point velocity seen from axle ``k + 1`` is the joint-point
    velocity seen from axle ``k`` rotated by ``gamma_k``::

        M_B(k+1) @ Psi(k+1) = R(gamma_k) @ M_A(k) @ Psi(k)

    At the steered joint the unknowns are ``(v_{k+1}, Omega_k)`` with
    ``Omega_{k+1} = Omega_k - gamma_dot_k``.  Behind it every joint is
    passive, so ``Psi(k)`` is fully known and the unknowns are
    ``Psi(k+1)``; the passive joint rate follows as a result.
    """
    if len(alphas) != len(joints) + 1:
        raise ValueError("need exactly one slip angle per axle")
    if not joints:
        raise ValueError("need at least one joint")
    lead = joints[0]
    if lead.gamma_dot is None:
        raise ValueError("the leading joint must carry a steering rate")
    if any(j.gamma_dot is not None for j in joints[1:]):
        raise ValueError("only the leading joint may be actively steered")

    ra = _rot(lead.gamma) @ _m_a(alphas[0], lead.a)
    mb = _m_b(alphas[1], lead.b)
    # unknown vector (v2, Omega1)
    lhs = np.column_stack([mb[:, 0], mb[:, 1] - ra[:, 1]])
    rhs = ra[:, 0] * v1 + mb[:, 1] * lead.gamma_dot
    v2, omega1 = _solve2(lhs, rhs)
    screws = [
        AxleScrew(float(v1), float(omega1), alphas[0]),
        AxleScrew(float(v2), float(omega1 - lead.gamma_dot), alphas[1]),
    ]
    for k, joint in enumerate(joints[1:], start=1):
        prev = screws[-1]
        rhs = _rot(joint.gamma) @ _m_a(alphas[k], joint.a) @ np.array([prev.v, prev.omega])
        v_next, omega_next = _solve2(_m_b(alphas[k + 1], joint.b), rhs)
        screws.append(AxleScrew(float(v_next), float(omega_next), alphas[k + 1]))
    return screws


def hauler_joint(gamma: float, gamma_dot: float, geom: VehicleGeometry = A40X) -> JointConfig:
    return JointConfig(gamma=gamma, gamma_dot=gamma_dot, a=geom.l1, b=geom.l2)


def wheel_velocity(
    screw: AxleScrew, c: float, side: Literal["left", "right"]
) -> tuple[float, float]:
    """Speed and direction of one wheel from its axle screw.

    The right wheel sits at ``(0, -c)`` in the axle frame, so rotation adds
    ``c * Omega`` to its forward component; the left wheel loses it.
    """
    if side == "right":
        sign = 1.0
    elif side == "left":
        sign = -1.0
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    vx = screw.v * math.cos(screw.alpha) + sign * c * screw.omega
    vy = screw.v * math.sin(screw.alpha)
    return math.hypot(vx, vy), math.atan2(vy, vx)


def bogie_rear_screw(bogie_front: AxleScrew, spacing: float) -> AxleScrew:
    """Axle 56 sits rigidly ``spacing`` behind axle 34 on the trailer."""
    vx = bogie_front.v * math.cos(bogie_front.alpha)
    vy = bogie_front.v * math.sin(bogie_front.alpha) - spacing * bogie_front.omega
    return AxleScrew(math.hypot(vx, vy), bogie_front.omega, math.atan2(vy, vx))
