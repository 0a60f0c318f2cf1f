"""Synthetic ground truth and sensor emulation for the articulated hauler.

The truth generator drives the kinematic model along a steering trace
derived from a road description.  Slip angles come from a simple
load- and lateral-acceleration-dependent model, slip is injected per wheel
as events, and the sensor model turns the truth into what the on-board
network would report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterator, Literal, Sequence

import numpy as np

from . import _backend
from .errors import DegenerateDenominator, InfeasibleRoad
from .kinematics import (
    A40X,
    DENOMINATOR_EPS,
    AxleScrew,
    VehicleGeometry,
    bogie_rear_screw,
    wheel_velocity,
)

GEAR_SPEEDS = {"F1": 2.0, "F2": 2.5, "F3": 3.0}
LOAD_MASSES = {"zero": 0.0, "half": 19_500.0, "full": 39_000.0}
MAX_LOAD = 39_000.0
SENSOR_SETS = ("basic", "ground_speed", "wheel_tach")
TRANSVERSAL_LOCKS = {"front": (0, 1), "bogie_front": (2, 3), "bogie_rear": (4, 5)}
LOCK_NAMES = ("longitudinal", *TRANSVERSAL_LOCKS)
WHEEL_SIDES = ("left", "right") * 3


# -- road ------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    kind: Literal["straight", "arc"]
    length: float
    steering_target: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("straight", "arc"):
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not self.length > 0:
            raise ValueError("segment length must be positive")
        if self.kind == "straight" and self.steering_target != 0.0:
            raise ValueError("straight segments have zero steering")


@dataclass(frozen=True)
class RoadProfile:
    """A road as steering targets per segment.

    The steering ramps from the previous target to the segment's target at
    ``ramp_rate`` at the start of every segment, then holds.
    """

    segments: tuple[Segment, ...]
    max_steering: float = math.radians(45.0)
    ramp_rate: float = 0.25

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.ramp_rate > 0:
            raise ValueError("ramp_rate must be positive")
        for seg in self.segments:
            if abs(seg.steering_target) > self.max_steering + 1e-12:
                raise ValueError(
                    f"steering target {seg.steering_target} exceeds {self.max_steering}"
                )

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)


def _arc(degrees: float, length: float) -> Segment:
    return Segment("arc", length, math.radians(degrees))


def default_road() -> RoadProfile:
    """Curvy test road: alternating left/right arcs up to 45 deg, short straights."""
    s = lambda length: Segment("straight", length)  # noqa: E731
    return RoadProfile((
        s(20.0), _arc(45, 40.0), s(20.0), _arc(-30, 30.0), _arc(30, 40.0), s(20.0),
        _arc(-45, 40.0), s(20.0), _arc(20, 25.0), s(20.0), _arc(-20, 25.0), s(20.0),
    ))


@dataclass(frozen=True)
class SteeringTrace:
    t: np.ndarray
    gamma: np.ndarray
    gamma_dot: np.ndarray

    def __len__(self) -> int:
        return self.t.shape[0]


def road_to_steering(profile: RoadProfile, v12: float, dt: float = 0.01) -> SteeringTrace:
    """Sample the steering command for driving the road at constant ``v12``.

    Segment and ramp durations are snapped to whole steps, so every kink of
    the piecewise-linear steering lies on a sample.  ``gamma_dot[k]`` is the
    slope on ``(t[k-1], t[k]]`` (zero at ``k = 0``), which makes it the exact
    derivative of the sampled trace and what a first difference recovers.
    """
    if not profile.segments:
        raise InfeasibleRoad("road has no segments")
    if not v12 > 0 or not dt > 0:
        raise ValueError("v12 and dt must be positive")
    pieces = []
    current = 0.0
    step = profile.ramp_rate * dt
    for idx, seg in enumerate(profile.segments):
        n_seg = max(1, round(seg.length / (v12 * dt)))
        delta = seg.steering_target - current
        n_ramp = math.ceil(abs(delta) / step - 1e-9) if delta else 0
        if n_ramp > n_seg:
            raise InfeasibleRoad(
                f"segment {idx} ({seg.length} m) is shorter than its ramp "
                f"({abs(delta) / profile.ramp_rate * v12:.2f} m at {v12} m/s)"
            )
        piece = np.full(n_seg, seg.steering_target)
        if n_ramp:
            piece[:n_ramp] = current + delta * np.arange(1, n_ramp + 1) / n_ramp
        pieces.append(piece)
        current = seg.steering_target
    gamma = np.concatenate([[0.0], *pieces])
    gamma_dot = np.concatenate([[0.0], np.diff(gamma) / dt])
    t = np.arange(gamma.shape[0]) * dt
    return SteeringTrace(t, gamma, gamma_dot)


# -- scenario configuration ------------------------------------------------


@dataclass(frozen=True)
class SlipEvent:
    """Extra longitudinal slip ``magnitude`` (m/s) on one wheel over a window."""

    wheel: int
    t_start: float
    t_end: float
    magnitude: float

    def __post_init__(self) -> None:
        if not 1 <= self.wheel <= 6:
            raise ValueError("wheel must be in 1..6")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if not math.isfinite(self.magnitude):
            raise ValueError("magnitude must be finite")

    def active(self, t):
        return (t >= self.t_start) & (t < self.t_end)


@dataclass(frozen=True)
class NoiseConfig:
    """Standard deviations of the additive Gaussian sensor noise.

    ``tach`` is relative to the reading; the others are absolute.
    """

    tach: float = 0.005
    ground_speed: float = 0.02
    steering: float = math.radians(0.01)

    @classmethod
    def off(cls) -> "NoiseConfig":
        return cls(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ScenarioConfig:
    gear: Literal["F1", "F2", "F3"] = "F1"
    load: Literal["zero", "half", "full"] = "zero"
    slip_events: tuple[SlipEvent, ...] = ()
    sensor_set: Literal["basic", "ground_speed", "wheel_tach"] = "basic"
    dt: float = 0.01
    seed: int = 0
    geometry: VehicleGeometry = A40X
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    k_alpha: float = 0.004
    slip_angles: bool = True
    gps_period: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "slip_events", tuple(self.slip_events))
        if self.gear not in GEAR_SPEEDS:
            raise ValueError(f"unknown gear {self.gear!r}")
        if self.load not in LOAD_MASSES:
            raise ValueError(f"unknown load {self.load!r}")
        if self.sensor_set not in SENSOR_SETS:
            raise ValueError(f"unknown sensor set {self.sensor_set!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def v12(self) -> float:
        return GEAR_SPEEDS[self.gear]

    @property
    def load_fraction(self) -> float:
        return LOAD_MASSES[self.load] / MAX_LOAD

    @property
    def alpha_gain(self) -> float:
        """``k_alpha * (1 + load_fraction)`` in s, or 0 with slip angles off."""
        return self.k_alpha * (1.0 + self.load_fraction) if self.slip_angles else 0.0


# -- truth -----------------------------------------------------------------


@dataclass(frozen=True)
class TruthFrame:
    t: float
    x: float
    y: float
    theta: float
    gamma: float
    gamma_dot: float
    v12: float
    v34: float
    omega1: float
    omega2: float
    alpha12: float
    alpha34: float
    wheel_speed: tuple[float, ...]
    wheel_slip: tuple[float, ...]
    wheel_omega: tuple[float, ...]


def slip_angles(gamma, gamma_dot, v12, gain, geom: VehicleGeometry = A40X):
    """Synthetic mean-wheel slip angles from the slip-free yaw rates.

    Lateral drift grows with lateral acceleration ``Omega * v``; the
    negative sign points the drift out of the turn.
    """
    l1, l2 = geom.l1, geom.l2
    den0 = l2 + l1 * np.cos(gamma)
    om1 = (np.sin(gamma) * v12 + l2 * gamma_dot) / den0
    v34 = ((l2 * np.cos(gamma) + l1) * v12 + l1 * l2 * np.sin(gamma) * gamma_dot) / den0
    return -gain * om1 * v12, -gain * (om1 - gamma_dot) * v34


def _event_slip(events: Sequence[SlipEvent], t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    s = np.zeros(t.shape + (6,))
    for ev in events:
        s[..., ev.wheel - 1] += np.where(ev.active(t), ev.magnitude, 0.0)
    return s


def _wheel_components(v12, v34, omega1, omega2, alpha12, alpha34, geom):
    """Longitudinal and lateral velocity of every wheel in its axle frame."""
    v12, v34 = np.asarray(v12, float), np.asarray(v34, float)
    fx = v12 * np.cos(alpha12)
    fy = v12 * np.sin(alpha12)
    bx = v34 * np.cos(alpha34)
    by = v34 * np.sin(alpha34)
    ry = by - geom.bogie_spacing * omega2
    c = geom.c
    vx = np.stack([fx - c * omega1, fx + c * omega1, bx - c * omega2, bx + c * omega2,
                   bx - c * omega2, bx + c * omega2], axis=-1)
    vy = np.stack([fy, fy, by, by, ry, ry], axis=-1)
    return vx, vy


def axle_screws(frame: TruthFrame, geom: VehicleGeometry = A40X) -> tuple[AxleScrew, AxleScrew, AxleScrew]:
    front = AxleScrew(frame.v12, frame.omega1, frame.alpha12)
    bogie = AxleScrew(frame.v34, frame.omega2, frame.alpha34)
    return front, bogie, bogie_rear_screw(bogie, geom.bogie_spacing)


def wheel_speeds(truth: TruthFrame, events: Sequence[SlipEvent], geom: VehicleGeometry = A40X) -> tuple[float, ...]:
    """Wheel angular speeds, rad/s: ``(v_i cos(alpha_i) + s_i) / r``.

    ``s_i`` is the summed magnitude of the events active at ``truth.t``.
    """
    s = _event_slip(events, truth.t)
    front, bogie, rear = axle_screws(truth, geom)
    out = []
    for i, (screw, side) in enumerate(zip((front, front, bogie, bogie, rear, rear), WHEEL_SIDES)):
        speed, alpha = wheel_velocity(screw, geom.c, side)
        out.append((speed * math.cos(alpha) + s[i]) / geom.r)
    return tuple(out)


def _truth_frame(t, x, y, theta, gamma, gamma_dot, v12, v34, om1, om2, a12, a34, events, geom):
    vx, vy = _wheel_components(v12, v34, om1, om2, a12, a34, geom)
    s = _event_slip(events, t)
    return TruthFrame(
        t=float(t), x=float(x), y=float(y), theta=float(theta), gamma=float(gamma),
        gamma_dot=float(gamma_dot), v12=float(v12), v34=float(v34), omega1=float(om1),
        omega2=float(om2), alpha12=float(a12), alpha34=float(a34),
        wheel_speed=tuple(float(v) for v in np.hypot(vx, vy)),
        wheel_slip=tuple(float(v) for v in s),
        wheel_omega=tuple(float(v) for v in (vx + s) / geom.r),
    )


def initial_truth(config: ScenarioConfig, gamma0: float = 0.0, pose=(0.0, 0.0, 0.0)) -> TruthFrame:
    """Truth at ``t = 0`` with the steering held at ``gamma0``."""
    return _solve_frame(0.0, *pose, gamma0, 0.0, config)


def _solve_frame(t, x, y, theta, gamma, gamma_dot, config: ScenarioConfig) -> TruthFrame:
    geom = config.geometry
    v12 = config.v12
    a12, a34 = slip_angles(gamma, gamma_dot, v12, config.alpha_gain, geom)
    v34, om1, om2, den = _backend.two_body(v12, a12, a34, gamma, gamma_dot, geom.l1, geom.l2)
    if abs(float(den)) < DENOMINATOR_EPS:
        raise DegenerateDenominator(f"kinematic denominator vanished at t={t}")
    return _truth_frame(t, x, y, theta, gamma, gamma_dot, v12, v34, om1, om2, a12, a34,
                        config.slip_events, geom)


def step_truth(state: TruthFrame, gamma_cmd: float, dt: float, config: ScenarioConfig) -> TruthFrame:
    """Advance the truth one step.

    The pose moves by explicit Euler with the current state's speed, heading
    and yaw rate.  The steering jumps to ``gamma_cmd`` with the matching
    constant rate over the step, and the kinematics are re-solved there.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    heading = state.theta + state.alpha12
    x = state.x + dt * state.v12 * math.cos(heading)
    y = state.y + dt * state.v12 * math.sin(heading)
    theta = state.theta + dt * state.omega1
    gamma_dot = (gamma_cmd - state.gamma) / dt
    return _solve_frame(state.t + dt, x, y, theta, gamma_cmd, gamma_dot, config)


@dataclass(frozen=True)
class TruthTrace:
    """Column-oriented truth for a whole run; iterates as :class:`TruthFrame`."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    gamma: np.ndarray
    gamma_dot: np.ndarray
    v12: np.ndarray
    v34: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    alpha12: np.ndarray
    alpha34: np.ndarray
    wheel_speed: np.ndarray  # (n, 6)
    wheel_slip: np.ndarray  # (n, 6)
    wheel_omega: np.ndarray  # (n, 6)

    def __len__(self) -> int:
        return self.t.shape[0]

    def frame(self, k: int) -> TruthFrame:
        kw = {}
        for f in fields(self):
            col = getattr(self, f.name)
            kw[f.name] = tuple(float(v) for v in col[k]) if col.ndim == 2 else float(col[k])
        return TruthFrame(**kw)

    def __iter__(self) -> Iterator[TruthFrame]:
        return (self.frame(k) for k in range(len(self)))


def integrate_truth(steering: SteeringTrace, config: ScenarioConfig) -> TruthTrace:
    """Batch equivalent of repeated :func:`step_truth` over a steering trace."""
    geom = config.geometry
    v12 = config.v12
    gdot, a12, a34, v34, om1, om2, x, y, theta, min_den = _backend.integrate_truth(
        steering.gamma, config.dt, v12, geom.l1, geom.l2, config.alpha_gain
    )
    if min_den < DENOMINATOR_EPS:
        raise DegenerateDenominator("kinematic denominator vanished along the trace")
    t = np.arange(len(steering)) * config.dt
    v12a = np.full_like(t, v12)
    vx, vy = _wheel_components(v12a, v34, om1, om2, a12, a34, geom)
    s = _event_slip(config.slip_events, t)
    return TruthTrace(
        t=t, x=x, y=y, theta=theta, gamma=np.asarray(steering.gamma, float), gamma_dot=gdot,
        v12=v12a, v34=v34, omega1=om1, omega2=om2, alpha12=a12, alpha34=a34,
        wheel_speed=np.hypot(vx, vy), wheel_slip=s, wheel_omega=(vx + s) / geom.r,
    )


# -- sensors ---------------------------------------------------------------


@dataclass(frozen=True)
class SensorFrame:
    t: float
    gamma: float
    gamma_dot: float
    omega_dbx_in: float
    omega_dbx_out: float
    omega_bg_in: float
    omega_bg_out: float
    v_ground: float | None = None
    omega_wheel: tuple[float, ...] | None = None


@dataclass(frozen=True)
class SensorTrace:
    sensor_set: str
    t: np.ndarray
    gamma: np.ndarray
    gamma_dot: np.ndarray
    omega_dbx_in: np.ndarray
    omega_dbx_out: np.ndarray
    omega_bg_in: np.ndarray
    omega_bg_out: np.ndarray
    v_ground: np.ndarray | None = None
    omega_wheel: np.ndarray | None = None  # (n, 6)

    def __len__(self) -> int:
        return self.t.shape[0]

    def frame(self, k: int) -> SensorFrame:
        return SensorFrame(
            t=float(self.t[k]), gamma=float(self.gamma[k]), gamma_dot=float(self.gamma_dot[k]),
            omega_dbx_in=float(self.omega_dbx_in[k]), omega_dbx_out=float(self.omega_dbx_out[k]),
            omega_bg_in=float(self.omega_bg_in[k]), omega_bg_out=float(self.omega_bg_out[k]),
            v_ground=None if self.v_ground is None else float(self.v_ground[k]),
            omega_wheel=None if self.omega_wheel is None
            else tuple(float(v) for v in self.omega_wheel[k]),
        )

    def __iter__(self) -> Iterator[SensorFrame]:
        return (self.frame(k) for k in range(len(self)))


def apply_locks(wheel_omegas, locks) -> np.ndarray:
    """Engaged transversal locks force both wheels of an axle to the slower speed."""
    w = np.array(wheel_omegas, dtype=float, copy=True)
    for name in locks:
        if name in TRANSVERSAL_LOCKS:
            i, j = TRANSVERSAL_LOCKS[name]
            low = np.minimum(w[..., i], w[..., j])
            w[..., i] = low
            w[..., j] = low
    return w


@dataclass(frozen=True)
class SensorNoise:
    """Pre-drawn unit-variance noise for every channel of a run."""

    steering: np.ndarray
    tach: np.ndarray  # (n, 4): dbx_in, dbx_out, bg_in, bg_out
    wheel: np.ndarray  # (n, 6)
    ground: np.ndarray

    @classmethod
    def draw(cls, n: int, seed: int) -> "SensorNoise":
        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal(n), rng.standard_normal((n, 4)),
                   rng.standard_normal((n, 6)), rng.standard_normal(n))


class SensorModel:
    """Turns truth plus wheel speeds into sensor readings.

    Noise is drawn once per run from the scenario seed, so emitting a frame
    again for a different lock state reuses the same noise sample.
    """

    def __init__(self, config: ScenarioConfig, truth: TruthTrace):
        self.config = config
        self.truth = truth
        n = len(truth)
        self.noise = SensorNoise.draw(n, config.seed)
        nz = config.noise
        self.gamma = truth.gamma + nz.steering * self.noise.steering
        self.gamma_dot = np.concatenate([[0.0], np.diff(self.gamma) / config.dt])
        period = max(1, round(config.gps_period / config.dt))
        sample_idx = (np.arange(n) // period) * period
        self.v_ground = truth.v12[sample_idx] + nz.ground_speed * self.noise.ground[sample_idx]

    def _tachs(self, omegas, rows):
        geom = self.config.geometry
        i = geom.i
        dbx_out = i * (omegas[..., 0] + omegas[..., 1]) / 2
        bg_in = i * (omegas[..., 2] + omegas[..., 3]) / 2
        bg_out = i * (omegas[..., 4] + omegas[..., 5]) / 2
        dbx_in = (dbx_out + (bg_in + bg_out) / 2) / 2
        rel = 1.0 + self.config.noise.tach * self.noise.tach[rows]
        tach = np.stack([dbx_in, dbx_out, bg_in, bg_out], axis=-1) * rel
        wheel = omegas * (1.0 + self.config.noise.tach * self.noise.wheel[rows])
        return tach, wheel

    def trace(self, wheel_omegas=None, locks: Sequence[str] = ()) -> SensorTrace:
        """Sensor readings for the whole run under a fixed lock state."""
        omegas = apply_locks(self.truth.wheel_omega if wheel_omegas is None else wheel_omegas, locks)
        rows = np.arange(len(self.truth))
        tach, wheel = self._tachs(omegas, rows)
        sset = self.config.sensor_set
        return SensorTrace(
            sensor_set=sset, t=self.truth.t, gamma=self.gamma, gamma_dot=self.gamma_dot,
            omega_dbx_in=tach[:, 0], omega_dbx_out=tach[:, 1], omega_bg_in=tach[:, 2],
            omega_bg_out=tach[:, 3],
            v_ground=self.v_ground if sset == "ground_speed" else None,
            omega_wheel=wheel if sset == "wheel_tach" else None,
        )

    def frame(self, k: int, wheel_omegas=None, locks: Sequence[str] = ()) -> SensorFrame:
        """Sensor readings at sample ``k`` under the given lock state."""
        w = self.truth.wheel_omega[k] if wheel_omegas is None else wheel_omegas
        omegas = apply_locks(np.asarray(w, dtype=float), locks)
        tach, wheel = self._tachs(omegas, k)
        sset = self.config.sensor_set
        return SensorFrame(
            t=float(self.truth.t[k]), gamma=float(self.gamma[k]), gamma_dot=float(self.gamma_dot[k]),
            omega_dbx_in=float(tach[0]), omega_dbx_out=float(tach[1]),
            omega_bg_in=float(tach[2]), omega_bg_out=float(tach[3]),
            v_ground=float(self.v_ground[k]) if sset == "ground_speed" else None,
            omega_wheel=tuple(float(v) for v in wheel) if sset == "wheel_tach" else None,
        )


def emulate_sensors(truth: TruthTrace, wheel_omegas, config: ScenarioConfig,
                    lock_state: Sequence[str] = ()) -> SensorTrace:
    """Sensor readings for a truth trace; see :class:`SensorModel`."""
    return SensorModel(config, truth).trace(wheel_omegas, lock_state)


@dataclass(frozen=True)
class ScenarioRun:
    config: ScenarioConfig
    steering: SteeringTrace
    truth: TruthTrace
    sensors: SensorTrace
    model: SensorModel


def run_scenario(config: ScenarioConfig, profile: RoadProfile | None = None) -> ScenarioRun:
    """Simulate one open-loop run; deterministic given ``config.seed``."""
    profile = default_road() if profile is None else profile
    steering = road_to_steering(profile, config.v12, config.dt)
    truth = integrate_truth(steering, config)
    model = SensorModel(config, truth)
    return ScenarioRun(config, steering, truth, model.trace(), model)


def grid_configs(base: ScenarioConfig, gears=tuple(GEAR_SPEEDS), loads=tuple(LOAD_MASSES),
                 seed: int | None = None) -> list[ScenarioConfig]:
    """One config per (gear, load) cell; cell seeds are derived from ``seed``."""
    root = base.seed if seed is None else seed
    out = []
    for gi, gear in enumerate(gears):
        for li, load in enumerate(loads):
            cell_seed = int(np.random.SeedSequence([root, gi, li]).generate_state(1)[0])
            out.append(replace(base, gear=gear, load=load, seed=cell_seed))
    return out
