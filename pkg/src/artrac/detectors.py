"""Slip-detection residuals, bound checks and the differential-lock controller.

Each residual is zero for a slip-free vehicle with the unmeasured slip
angles at their nominal value of zero, and moves when a wheel slips.  The
residual functions accept either a single :class:`~artrac.sim.SensorFrame`
or a whole :class:`~artrac.sim.SensorTrace` and broadcast accordingly.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Sequence

import numpy as np

from . import _backend
from .errors import DegenerateDenominator, MissingSensor, OutOfCalibratedRange
from .kinematics import A40X, DENOMINATOR_EPS, VehicleGeometry


def _steady_ratio(gamma, geom: VehicleGeometry):
    """``q(0, 0, gamma)`` and ``q(-pi/2, 0, gamma)`` without evaluating cos(pi/2)."""
    gamma = np.asarray(gamma, dtype=float)
    den = geom.l1 * np.cos(gamma) + geom.l2
    if np.any(np.abs(den) < DENOMINATOR_EPS):
        raise DegenerateDenominator("steering angle folds the vehicle back")
    return (geom.l2 * np.cos(gamma) + geom.l1) / den, geom.l2 * np.sin(gamma) / den


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def g_basic(frame, geom: VehicleGeometry = A40X):
    """Trailer mean-wheel speed minus its kinematic prediction from the tractor."""
    q_steady, q_rate = _steady_ratio(frame.gamma, geom)
    k = geom.r / geom.i
    g = (np.asarray(frame.omega_bg_in) * k - q_steady * np.asarray(frame.omega_dbx_out) * k
         - q_rate * geom.l1 * np.asarray(frame.gamma_dot))
    return _scalar(g)


def _ground(frame):
    if frame.v_ground is None:
        raise MissingSensor("v_ground")
    return np.asarray(frame.v_ground)


def g_ground_front(frame, geom: VehicleGeometry = A40X):
    """Front mean-wheel circumference speed minus measured ground speed."""
    return _scalar(np.asarray(frame.omega_dbx_out) * geom.r / geom.i - _ground(frame))


def g_ground_bogie(frame, geom: VehicleGeometry = A40X):
    """Bogie mean-wheel speed minus the trailer speed predicted from ground speed."""
    v_ground = _ground(frame)
    q_steady, q_rate = _steady_ratio(frame.gamma, geom)
    g = (np.asarray(frame.omega_bg_in) * geom.r / geom.i - q_steady * v_ground
         - q_rate * np.asarray(frame.gamma_dot) * geom.l1)
    return _scalar(g)


def g_wheel_tach(frame, geom: VehicleGeometry = A40X):
    """Cross-axle wheel-speed combination; independent of the slip angles.

    Equals ``s1 - s2 - s3 + s4``: the turning contributions of the two axles
    differ only by the steering rate, which is added back.
    """
    if frame.omega_wheel is None:
        raise MissingSensor("omega_wheel")
    w = np.asarray(frame.omega_wheel, dtype=float)
    g = (w[..., 0] - w[..., 1] - w[..., 2] + w[..., 3]) * geom.r + 2.0 * geom.c * np.asarray(
        frame.gamma_dot
    )
    return _scalar(g)


@dataclass(frozen=True)
class DetectorSpec:
    name: str
    residual: Callable
    sensor_set: str
    filtered: bool


DETECTORS = {
    "basic": DetectorSpec("basic", g_basic, "basic", False),
    "ground": DetectorSpec("ground", g_ground_front, "ground_speed", False),
    "ground_bogie": DetectorSpec("ground_bogie", g_ground_bogie, "ground_speed", False),
    "wheeltach": DetectorSpec("wheeltach", g_wheel_tach, "wheel_tach", True),
}


def detector(name: str) -> DetectorSpec:
    try:
        return DETECTORS[name]
    except KeyError:
        raise ValueError(f"unknown detector {name!r}; choose from {sorted(DETECTORS)}") from None


# -- filtering -------------------------------------------------------------

MA_WINDOW = 5


def filter_ma5(series) -> np.ndarray:
    """Causal mean of the last five residuals (fewer during warm-up)."""
    return _backend.moving_average(series, MA_WINDOW)


class MovingAverage:
    """Streaming form of :func:`filter_ma5`; bit-identical to the batch kernel."""

    def __init__(self, window: int = MA_WINDOW):
        self._buf: deque[float] = deque(maxlen=window)

    def __call__(self, value: float) -> float:
        self._buf.append(float(value))
        acc = 0.0
        for v in self._buf:
            acc += v
        return acc / len(self._buf)


# -- bounds ----------------------------------------------------------------

CALIBRATED_RANGE = (-math.radians(45.0), math.radians(45.0))


@dataclass(frozen=True)
class BoundProfile:
    """Steering-dependent tolerance band ``l(gamma) <= g <= u(gamma)``.

    Quadratic profiles store ``(c0, c1, c2)`` per side.  Piecewise-linear
    profiles store sorted breakpoints and hold the end values outside them.
    """

    kind: Literal["quadratic", "piecewise_linear"]
    upper: tuple
    lower: tuple
    gamma_range: tuple[float, float] = CALIBRATED_RANGE
    detector: str = "basic"
    filtered: bool = False
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "quadratic":
            if len(self.upper) != 3 or len(self.lower) != 3:
                raise ValueError("quadratic profiles need three coefficients per side")
            object.__setattr__(self, "upper", tuple(float(c) for c in self.upper))
            object.__setattr__(self, "lower", tuple(float(c) for c in self.lower))
        elif self.kind == "piecewise_linear":
            for side in ("upper", "lower"):
                gam, val = (np.asarray(a, dtype=float) for a in getattr(self, side))
                if gam.shape != val.shape or gam.ndim != 1 or gam.size == 0:
                    raise ValueError("breakpoints need matching 1-D gamma and value arrays")
                if np.any(np.diff(gam) < 0):
                    raise ValueError("breakpoints must be sorted by gamma")
                object.__setattr__(self, side, (tuple(gam.tolist()), tuple(val.tolist())))
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        lo, hi = self.gamma_range
        object.__setattr__(self, "gamma_range", (float(lo), float(hi)))

    @classmethod
    def quadratic(cls, upper, lower, **kw) -> "BoundProfile":
        return cls("quadratic", tuple(upper), tuple(lower), **kw)

    @classmethod
    def piecewise_linear(cls, upper_pts, lower_pts, **kw) -> "BoundProfile":
        return cls("piecewise_linear", tuple(upper_pts), tuple(lower_pts), **kw)

    def _eval(self, side, gamma):
        gamma = np.asarray(gamma, dtype=float)
        if self.kind == "quadratic":
            c0, c1, c2 = side
            out = c0 + c1 * gamma + c2 * gamma * gamma
        else:
            out = np.interp(gamma, side[0], side[1])
        return _scalar(out)

    def u(self, gamma):
        return self._eval(self.upper, gamma)

    def l(self, gamma):  # noqa: E743
        return self._eval(self.lower, gamma)

    def clamp(self, gamma):
        lo, hi = self.gamma_range
        return _scalar(np.clip(gamma, lo, hi))

    def contains(self, g, gamma) -> np.ndarray:
        """Vectorized closed-interval test after clamping ``gamma`` to the range."""
        gc = np.clip(np.asarray(gamma, dtype=float), *self.gamma_range)
        g = np.asarray(g, dtype=float)
        return (self._eval(self.lower, gc) <= g) & (g <= self._eval(self.upper, gc))


def bound_check(g: float, gamma: float, bounds: BoundProfile) -> Literal["inside", "outside"]:
    """Closed-interval test of a residual against its band.

    Steering angles outside the calibrated range are clamped to it and an
    :class:`OutOfCalibratedRange` warning is issued.
    """
    lo, hi = bounds.gamma_range
    if not lo <= gamma <= hi:
        warnings.warn(OutOfCalibratedRange(f"gamma={gamma:.4f} outside [{lo:.4f}, {hi:.4f}]"),
                      stacklevel=2)
        gamma = min(max(gamma, lo), hi)
    return "inside" if bounds.l(gamma) <= g <= bounds.u(gamma) else "outside"


# -- controller ------------------------------------------------------------


def rpm_to_rad(rpm: float) -> float:
    return rpm * 2.0 * math.pi / 60.0


def rad_to_rpm(omega: float) -> float:
    return omega * 60.0 / (2.0 * math.pi)


Mode = Literal["monitoring", "braking_to_sync", "locked"]
DEFAULT_LOCKS = ("longitudinal", "front")


@dataclass(frozen=True)
class ControllerState:
    mode: Mode = "monitoring"
    time_locked: float = 0.0
    dist_locked: float = 0.0
    delta_t: float = 5.0
    delta_d: float = 10.0
    omega_safe: float = rpm_to_rad(50.0)

    @property
    def may_unlock(self) -> bool:
        return self.time_locked >= self.delta_t and self.dist_locked >= self.delta_d


@dataclass(frozen=True)
class LockCommand:
    action: Literal["none", "brake", "engage", "disengage"] = "none"
    target: tuple[str, ...] = ()


NO_ACTION = LockCommand()


def _inside(g_values, gamma, bounds) -> bool:
    if isinstance(bounds, BoundProfile):
        return bound_check(g_values, gamma, bounds) == "inside"
    if len(g_values) != len(bounds):
        raise ValueError("one bound profile per residual")
    return all(bound_check(g, gamma, b) == "inside" for g, b in zip(g_values, bounds))


def controller_step(
    state: ControllerState,
    frame,
    g_values,
    bounds: BoundProfile | Sequence[BoundProfile],
    clutch_delta_omega: float,
    dt: float,
    distance_increment: float,
    locks: tuple[str, ...] = DEFAULT_LOCKS,
) -> tuple[ControllerState, LockCommand]:
    """One tick of the on/off lock controller.

    Residuals leaving their band trigger locking.  The dog clutches are only
    engaged when the speed difference across them is within ``omega_safe``;
    otherwise the faster shaft is braked first.  Once locked, the locks stay
    engaged until both the time and distance quotas are used up and every
    residual is back inside its band.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    synced = abs(clutch_delta_omega) <= state.omega_safe
    if state.mode == "monitoring":
        if _inside(g_values, frame.gamma, bounds):
            return state, NO_ACTION
        if synced:
            return replace(state, mode="locked", time_locked=0.0, dist_locked=0.0), LockCommand("engage", locks)
        return replace(state, mode="braking_to_sync"), LockCommand("brake", locks)
    if state.mode == "braking_to_sync":
        if synced:
            return replace(state, mode="locked", time_locked=0.0, dist_locked=0.0), LockCommand("engage", locks)
        return state, NO_ACTION
    if state.mode == "locked":
        state = replace(state, time_locked=state.time_locked + dt,
                        dist_locked=state.dist_locked + abs(distance_increment))
        if state.may_unlock and _inside(g_values, frame.gamma, bounds):
            return replace(state, mode="monitoring"), LockCommand("disengage", locks)
        return state, NO_ACTION
    raise ValueError(f"unknown controller mode {state.mode!r}")


def clutch_delta_omega(frame, locks: Sequence[str], geom: VehicleGeometry = A40X):
    """Largest measurable speed difference across the dog clutches to engage, rad/s.

    The longitudinal clutch sits between the dropbox input and output shafts,
    both of which carry tachometers.  A transversal clutch couples one half
    shaft to the differential case, which turns at the mean of the two half
    shafts, so it sees half the hub-side wheel speed difference.  That is
    only observable with wheel tachometers; without them it is not measured.
    """
    out = np.zeros(np.shape(frame.omega_dbx_out))
    if "longitudinal" in locks:
        out = np.maximum(out, np.abs(np.asarray(frame.omega_dbx_in) - np.asarray(frame.omega_dbx_out)))
    if frame.omega_wheel is not None:
        w = np.asarray(frame.omega_wheel, dtype=float)
        for name, (i, j) in (("front", (0, 1)), ("bogie_front", (2, 3)), ("bogie_rear", (4, 5))):
            if name in locks:
                out = np.maximum(out, 0.5 * geom.i_hub * np.abs(w[..., i] - w[..., j]))
    return _scalar(out)
