"""Config files, data streams and bound profiles on disk.

Every file written here starts with a ``# manifest {...}`` comment line
holding a JSON description of the run, so any output can be traced back to
its command, config and seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from ._backend import BACKEND
from .closedloop import ControllerConfig
from .detectors import BoundProfile, rpm_to_rad
from .errors import ConfigError
from .kinematics import VehicleGeometry
from .sim import (
    GEAR_SPEEDS,
    LOAD_MASSES,
    NoiseConfig,
    RoadProfile,
    ScenarioConfig,
    Segment,
    SensorTrace,
    SlipEvent,
    TruthTrace,
)

VERSION = "0.1.0"
MANIFEST_PREFIX = "# manifest "
DATA_DIR = Path(__file__).parent / "data"  # example configs and the default road


# -- manifests -------------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    config: str | None
    seed: int | None
    outputs: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "outputs": list(self.outputs),
            "versions": {"artrac": VERSION, "numpy": np.__version__, "backend": BACKEND},
        }
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        if epoch:
            d["source_date_epoch"] = int(epoch)
        d.update(self.extra)
        return d

    def header(self) -> str:
        return MANIFEST_PREFIX + json.dumps(self.to_dict(), sort_keys=True)


def read_manifest(path: Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if not first.startswith(MANIFEST_PREFIX):
        raise ConfigError(f"{path} has no manifest line")
    return json.loads(first[len(MANIFEST_PREFIX):])


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, manifest: RunManifest, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    buf.write(manifest.header() + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_csv(path: Path) -> tuple[dict, list[str], list[list[str]]]:
    manifest = read_manifest(path)
    with open(path, encoding="utf-8", newline="") as fh:
        fh.readline()
        r = csv.reader(fh)
        header = next(r)
        rows = list(r)
    return manifest, header, rows


def write_ndjson(path: Path, manifest: RunManifest, records: Iterable[str]) -> None:
    lines = [manifest.header(), *records]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- TOML configs ----------------------------------------------------------


def load_toml(path: Path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _take(section: dict, allowed: set[str], where: str) -> dict:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{where}]: {', '.join(sorted(unknown))}")
    return section


def parse_road(data: dict) -> RoadProfile:
    _take(data, {"ramp_rate", "max_steering_deg", "segments"}, "road")
    segs = []
    for i, s in enumerate(data.get("segments", [])):
        _take(s, {"kind", "length", "steering_deg"}, f"segments.{i}")
        try:
            segs.append(Segment(s["kind"], float(s["length"]), math.radians(float(s.get("steering_deg", 0.0)))))
        except KeyError as exc:
            raise ConfigError(f"segment {i} is missing {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"segment {i}: {exc}") from None
    if not segs:
        raise ConfigError("road has no segments")
    kw = {}
    if "ramp_rate" in data:
        kw["ramp_rate"] = float(data["ramp_rate"])
    if "max_steering_deg" in data:
        kw["max_steering"] = math.radians(float(data["max_steering_deg"]))
    try:
        return RoadProfile(tuple(segs), **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_road(path: Path) -> RoadProfile:
    return parse_road(load_toml(path))


def road_to_dict(road: RoadProfile) -> dict:
    return {
        "ramp_rate": road.ramp_rate,
        "max_steering_deg": math.degrees(road.max_steering),
        "segments": [{"kind": s.kind, "length": s.length, "steering_deg": math.degrees(s.steering_target)}
                     for s in road.segments],
    }


SCENARIO_KEYS = {"gear", "load", "sensor_set", "dt", "seed", "k_alpha", "slip_angles", "gps_period"}


def parse_scenario(data: dict, seed: int | None = None) -> ScenarioConfig:
    """Scenario from the ``[scenario]``, ``[geometry]``, ``[noise]`` and ``[[slip_events]]`` tables."""
    sc = dict(_take(data.get("scenario", {}), SCENARIO_KEYS, "scenario"))
    try:
        geom = VehicleGeometry(**_take(data.get("geometry", {}), {f.name for f in fields(VehicleGeometry)},
                                       "geometry"))
        nz = dict(_take(data.get("noise", {}), {"tach", "ground_speed", "steering_deg"}, "noise"))
        noise = NoiseConfig()
        if "steering_deg" in nz:
            nz["steering"] = math.radians(nz.pop("steering_deg"))
        noise = replace(noise, **nz)
        events = tuple(
            SlipEvent(**_take(e, {"wheel", "t_start", "t_end", "magnitude"}, "slip_events"))
            for e in data.get("slip_events", [])
        )
        if seed is not None:
            sc["seed"] = seed
        return ScenarioConfig(geometry=geom, noise=noise, slip_events=events, **sc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "scenario": {"gear": cfg.gear, "load": cfg.load, "sensor_set": cfg.sensor_set, "dt": cfg.dt,
                     "seed": cfg.seed, "k_alpha": cfg.k_alpha, "slip_angles": cfg.slip_angles,
                     "gps_period": cfg.gps_period},
        "geometry": asdict(cfg.geometry),
        "noise": {"tach": cfg.noise.tach, "ground_speed": cfg.noise.ground_speed,
                  "steering_deg": math.degrees(cfg.noise.steering)},
        "slip_events": [asdict(e) for e in cfg.slip_events],
    }


def parse_grid(data: dict) -> tuple[tuple[str, ...], tuple[str, ...]]:
    g = _take(data.get("grid", {}), {"gears", "loads"}, "grid")
    gears = tuple(g.get("gears", GEAR_SPEEDS))
    loads = tuple(g.get("loads", LOAD_MASSES))
    for x in gears:
        if x not in GEAR_SPEEDS:
            raise ConfigError(f"unknown gear {x!r}")
    for x in loads:
        if x not in LOAD_MASSES:
            raise ConfigError(f"unknown load {x!r}")
    return gears, loads


CONTROLLER_KEYS = {"detector", "delta_t", "delta_d", "omega_safe_rpm", "brake_rate_rpm_s", "locks", "filter"}


def parse_filter(v) -> bool | None:
    if v is None or isinstance(v, bool):
        return v
    if v in ("on", "off"):
        return v == "on"
    raise ConfigError(f"filter must be 'on' or 'off', got {v!r}")


def parse_controller(data: dict) -> ControllerConfig:
    c = dict(_take(data.get("controller", {}), CONTROLLER_KEYS, "controller"))
    kw: dict[str, Any] = {}
    for key in ("detector", "delta_t", "delta_d"):
        if key in c:
            kw[key] = c[key]
    if "omega_safe_rpm" in c:
        kw["omega_safe"] = rpm_to_rad(float(c["omega_safe_rpm"]))
    if "brake_rate_rpm_s" in c:
        kw["brake_rate"] = rpm_to_rad(float(c["brake_rate_rpm_s"]))
    if "locks" in c:
        kw["locks"] = tuple(c["locks"])
    kw["filtered"] = parse_filter(c.get("filter"))
    try:
        return ControllerConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class TuningOptions:
    method: str = "quadratic"
    guard_fraction: float | None = None  # None: the detector's default
    bin_width: float = math.radians(2.5)
    with_intercept: bool | None = None


def parse_tuning(data: dict) -> TuningOptions:
    t = dict(_take(data.get("tuning", {}), {"method", "guard_fraction", "bin_width_deg", "with_intercept"},
                   "tuning"))
    if "bin_width_deg" in t:
        t["bin_width"] = math.radians(t.pop("bin_width_deg"))
    if t.get("method", "quadratic") not in ("quadratic", "envelope", "hull"):
        raise ConfigError(f"unknown tuning method {t['method']!r}")
    return TuningOptions(**t)


# -- streams ---------------------------------------------------------------

TRUTH_COLUMNS = ("t", "x", "y", "theta", "gamma", "gamma_dot", "v12", "v34", "omega1", "omega2",
                 "alpha12", "alpha34")
SENSOR_COLUMNS = ("t", "gamma", "gamma_dot", "omega_dbx_in", "omega_dbx_out", "omega_bg_in", "omega_bg_out")


def write_truth(path: Path, truth: TruthTrace, manifest: RunManifest) -> None:
    cols = [getattr(truth, c) for c in TRUTH_COLUMNS]
    header = list(TRUTH_COLUMNS)
    for name in ("wheel_omega", "wheel_slip"):
        arr = getattr(truth, name)
        cols += [arr[:, i] for i in range(6)]
        header += [f"{name}_{i + 1}" for i in range(6)]
    write_csv(path, manifest, header, zip(*cols))


def write_sensors(path: Path, trace: SensorTrace, manifest: RunManifest) -> None:
    cols = [getattr(trace, c) for c in SENSOR_COLUMNS]
    header = list(SENSOR_COLUMNS)
    if trace.v_ground is not None:
        cols.append(trace.v_ground)
        header.append("v_ground")
    if trace.omega_wheel is not None:
        cols += [trace.omega_wheel[:, i] for i in range(6)]
        header += [f"omega_wheel_{i + 1}" for i in range(6)]
    write_csv(path, manifest, header, zip(*cols))


def read_sensors(path: Path) -> tuple[SensorTrace, dict]:
    manifest, header, rows = read_csv(path)
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    col = {h: data[:, i] for i, h in enumerate(header)}
    missing = [c for c in SENSOR_COLUMNS if c not in col]
    if missing:
        raise ConfigError(f"{path} lacks columns {missing}")
    wheel_cols = [f"omega_wheel_{i + 1}" for i in range(6)]
    wheels = np.column_stack([col[c] for c in wheel_cols]) if all(c in col for c in wheel_cols) else None
    trace = SensorTrace(
        sensor_set=manifest.get("sensor_set", "basic"),
        **{c: col[c] for c in SENSOR_COLUMNS},
        v_ground=col.get("v_ground"),
        omega_wheel=wheels,
    )
    return trace, manifest


# -- profiles --------------------------------------------------------------


def profile_to_dict(profile: BoundProfile) -> dict:
    d: dict[str, Any] = {
        "detector": profile.detector,
        "kind": profile.kind,
        "filtered": profile.filtered,
        "gamma_range": list(profile.gamma_range),
    }
    for side in ("upper", "lower"):
        val = getattr(profile, side)
        if profile.kind == "quadratic":
            d[side] = {"coefficients": list(val)}
        else:
            d[side] = {"gamma": list(val[0]), "value": list(val[1])}
    d["provenance"] = _toml_safe(profile.provenance)
    return d


def _toml_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _toml_safe(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, (list, tuple)):
        return [_toml_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def write_profile(path: Path, profile: BoundProfile, manifest: RunManifest) -> None:
    body = tomli_w.dumps(profile_to_dict(profile))
    Path(path).write_text(manifest.header() + "\n" + body, encoding="utf-8")


def profile_from_dict(d: dict) -> BoundProfile:
    try:
        kind = d["kind"]
        kw = dict(gamma_range=tuple(d["gamma_range"]), detector=d["detector"],
                  filtered=bool(d.get("filtered", False)), provenance=d.get("provenance", {}))
        if kind == "quadratic":
            return BoundProfile.quadratic(d["upper"]["coefficients"], d["lower"]["coefficients"], **kw)
        return BoundProfile.piecewise_linear((d["upper"]["gamma"], d["upper"]["value"]),
                                             (d["lower"]["gamma"], d["lower"]["value"]), **kw)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed profile: {exc!r}") from None


def load_profile(path: Path) -> BoundProfile:
    return profile_from_dict(load_toml(path))


__all__ = [
    "DATA_DIR", "MANIFEST_PREFIX", "RunManifest", "TuningOptions", "VERSION", "load_profile", "load_road", "load_toml",
    "parse_controller", "parse_grid", "parse_road", "parse_scenario", "parse_tuning", "profile_from_dict",
    "parse_filter", "profile_to_dict", "read_csv", "read_manifest", "read_sensors", "road_to_dict",
    "scenario_to_dict", "write_csv", "write_ndjson", "write_profile", "write_sensors", "write_truth",
]
