"""Wheel slip quantities and which slip combinations the detectors can see."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedSlip


@dataclass(frozen=True)
class WheelSlipState:
    """Angular speed ``omega`` (rad/s), ground speed ``v`` (m/s), slip angle and radius."""

    omega: float
    v: float
    alpha: float = 0.0
    r: float = 1.0

    def __post_init__(self) -> None:
        if self.omega < 0 or self.v < 0:
            raise ValueError("omega and v must be non-negative; reversing is not modelled")
        if not self.r > 0:
            raise ValueError("r must be positive")

    @property
    def circumference_speed(self) -> float:
        return self.omega * self.r

    @property
    def heading_speed(self) -> float:
        """Ground speed projected on the wheel heading."""
        return self.v * math.cos(self.alpha)


def lambda_l(state: WheelSlipState) -> float:
    """Normalized slip in [0, 1]; the larger of the two speeds sets the scale."""
    wr, vc = state.circumference_speed, state.heading_speed
    if wr == 0.0 and vc == 0.0:
        raise UndefinedSlip("wheel and ground are both at rest")
    if wr >= vc:
        return (wr - vc) / wr
    return (vc - wr) / vc


def s_l(state: WheelSlipState) -> float:
    """Signed slip speed, m/s; positive while driving, negative while braking."""
    return state.circumference_speed - state.heading_speed


@dataclass(frozen=True)
class SlipVector:
    """Slip speeds of wheels 1..4 (tractor axle, then front bogie axle)."""

    s: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        s = tuple(float(v) for v in self.s)
        if len(s) != 4:
            raise ValueError("a slip vector has four entries")
        if not all(math.isfinite(v) for v in s):
            raise ValueError("slip entries must be finite")
        object.__setattr__(self, "s", s)

    def __add__(self, other: "SlipVector") -> "SlipVector":
        return SlipVector(tuple(a + b for a, b in zip(self.s, other.s)))

    def __mul__(self, k: float) -> "SlipVector":
        return SlipVector(tuple(k * a for a in self.s))

    __rmul__ = __mul__

    def as_array(self) -> np.ndarray:
        return np.array(self.s)


DETECTION_ROW = (1.0, -1.0, -1.0, 1.0)


def detect_component(s: SlipVector) -> float:
    """The only slip combination the wheel-tach residual responds to."""
    s1, s2, s3, s4 = s.s
    return s1 - s2 - s3 + s4


def undetectable_basis() -> tuple[SlipVector, SlipVector, SlipVector]:
    """Basis of the slip combinations invisible to :func:`detect_component`.

    Equal slip on both wheels of one axle, or a left/right pattern repeated
    on both axles, looks exactly like ordinary rolling.
    """
    return (
        SlipVector((1.0, 1.0, 0.0, 0.0)),
        SlipVector((0.0, 0.0, 1.0, 1.0)),
        SlipVector((-1.0, 1.0, -1.0, 1.0)),
    )
