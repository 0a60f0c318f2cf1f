"""Running the lock controller over a simulated or recorded sensor stream.

In closed loop the controller's lock state feeds back into the sensor
readings: engaged transversal locks force both wheels of an axle to a
common speed.  Braking to sync is an ideal rate limiter on the measured
clutch speed difference; it is not fed back into the wheel speeds.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .detectors import (
    DEFAULT_LOCKS,
    NO_ACTION,
    BoundProfile,
    ControllerState,
    MovingAverage,
    clutch_delta_omega,
    controller_step,
    detector,
    rpm_to_rad,
)
from .errors import DetectorMismatch, OutOfCalibratedRange
from .kinematics import A40X, VehicleGeometry
from .sim import TRANSVERSAL_LOCKS, SensorModel, SensorTrace

FILTER_WARMUP = 4  # samples before a five-sample mean is full; no decisions before then


@dataclass(frozen=True)
class ControllerConfig:
    detector: str = "basic"
    delta_t: float = 5.0
    delta_d: float = 10.0
    omega_safe: float = rpm_to_rad(50.0)
    brake_rate: float = rpm_to_rad(30.0)
    locks: tuple[str, ...] = DEFAULT_LOCKS
    filtered: bool | None = None

    def __post_init__(self) -> None:
        detector(self.detector)
        object.__setattr__(self, "locks", tuple(self.locks))
        if self.delta_t < 0 or self.delta_d < 0:
            raise ValueError("unlock quotas must be non-negative")
        if not self.omega_safe > 0 or not self.brake_rate > 0:
            raise ValueError("omega_safe and brake_rate must be positive")

    @property
    def use_filter(self) -> bool:
        return detector(self.detector).filtered if self.filtered is None else self.filtered

    def initial_state(self) -> ControllerState:
        return ControllerState(delta_t=self.delta_t, delta_d=self.delta_d, omega_safe=self.omega_safe)


@dataclass(frozen=True)
class LockEvent:
    t: float
    mode: str
    action: str
    g: float
    l: float  # noqa: E741
    u: float
    delta_omega: float
    time_locked: float
    dist_locked: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


@dataclass
class ClosedLoopResult:
    config: ControllerConfig
    t: np.ndarray
    g: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    delta_omega: np.ndarray
    locked: np.ndarray
    events: list[LockEvent] = field(default_factory=list)
    out_of_range: int = 0  # samples whose steering was clamped to the calibrated range

    @property
    def engagements(self) -> int:
        return sum(e.action == "engage" for e in self.events)

    def first_action(self, t_from: float = 0.0, actions=("brake", "engage")) -> LockEvent | None:
        for e in self.events:
            if e.t >= t_from - 1e-12 and e.action in actions:
                return e
        return None

    def latency_samples(self, t_onset: float, dt: float) -> int | None:
        """Samples from slip onset to the first lock decision (brake or engage)."""
        e = self.first_action(t_onset)
        return None if e is None else round((e.t - t_onset) / dt)

    def safety_violations(self) -> list[LockEvent]:
        return [e for e in self.events
                if e.action == "engage" and abs(e.delta_omega) > self.config.omega_safe]

    def gating_violations(self) -> list[LockEvent]:
        c = self.config
        return [e for e in self.events if e.action == "disengage"
                and (e.time_locked < c.delta_t - 1e-9 or e.dist_locked < c.delta_d - 1e-9)]


def _check_profile(profile: BoundProfile, ctrl: ControllerConfig) -> None:
    if profile.detector != ctrl.detector:
        raise DetectorMismatch(
            f"profile was tuned for {profile.detector!r}, controller runs {ctrl.detector!r}"
        )


def _run(n: int, dt: float, frame_at: Callable, profile: BoundProfile, ctrl: ControllerConfig,
         geom: VehicleGeometry) -> ClosedLoopResult:
    spec = detector(ctrl.detector)
    residual = spec.residual
    smooth = MovingAverage() if ctrl.use_filter else None
    state = ctrl.initial_state()
    out = {k: np.empty(n) for k in ("g", "lower", "upper", "dw")}
    locked = np.zeros(n, dtype=bool)
    t_arr = np.empty(n)
    events: list[LockEvent] = []
    brake_time = 0.0
    lo_range, hi_range = profile.gamma_range
    clamped = 0
    with warnings.catch_warnings():
        # out-of-range steering is counted on the result rather than warned per sample
        warnings.simplefilter("ignore", OutOfCalibratedRange)
        for k in range(n):
            frame = frame_at(k, state.mode == "locked")
            g = residual(frame, geom)
            clamped += not lo_range <= frame.gamma <= hi_range
            if smooth is not None:
                g = smooth(g)
            dw = float(clutch_delta_omega(frame, ctrl.locks, geom))
            if state.mode == "braking_to_sync":
                brake_time += dt
                dw = max(0.0, dw - ctrl.brake_rate * brake_time)
            state_prev = state
            gc = profile.clamp(frame.gamma)
            if smooth is not None and k < FILTER_WARMUP:
                # no decisions until the moving average is full
                cmd = NO_ACTION
            else:
                state, cmd = controller_step(state, frame, g, profile, dw, dt,
                                             frame.omega_dbx_out * geom.r / geom.i * dt, ctrl.locks)
            if cmd.action == "brake":
                brake_time = 0.0
            lo, up = profile.l(gc), profile.u(gc)
            t_arr[k] = frame.t
            out["g"][k], out["lower"][k], out["upper"][k], out["dw"][k] = g, lo, up, dw
            locked[k] = state_prev.mode == "locked"
            if cmd.action != "none":
                events.append(LockEvent(
                    t=frame.t, mode=state.mode, action=cmd.action, g=float(g), l=float(lo), u=float(up),
                    delta_omega=dw, time_locked=state.time_locked, dist_locked=state.dist_locked,
                ))
    return ClosedLoopResult(ctrl, t_arr, out["g"], out["lower"], out["upper"], out["dw"], locked, events,
                            int(clamped))


def run_closed_loop(model: SensorModel, profile: BoundProfile, ctrl: ControllerConfig) -> ClosedLoopResult:
    """Controller in the loop with a simulated vehicle.

    While locked, frames are re-emitted with the configured transversal
    locks applied, reusing the run's pre-drawn noise.
    """
    _check_profile(profile, ctrl)
    open_trace = model.trace()
    transversal = tuple(n for n in ctrl.locks if n in TRANSVERSAL_LOCKS)

    def frame_at(k: int, is_locked: bool):
        if is_locked and transversal:
            return model.frame(k, locks=transversal)
        return open_trace.frame(k)

    return _run(len(open_trace), model.config.dt, frame_at, profile, ctrl, model.config.geometry)


def run_stream(trace: SensorTrace, profile: BoundProfile, ctrl: ControllerConfig,
               geom: VehicleGeometry = A40X) -> ClosedLoopResult:
    """Controller over a recorded stream; lock state cannot feed back."""
    _check_profile(profile, ctrl)
    if len(trace) == 0:
        return _run(0, 1.0, None, profile, ctrl, geom)
    dt = float(trace.t[1] - trace.t[0]) if len(trace) > 1 else 0.01
    return _run(len(trace), dt, lambda k, _locked: trace.frame(k), profile, ctrl, geom)
