"""Command-line front end: ``artrac simulate | tune | detect | validate``.

Exit status is 0 on success, 1 when a check on the results fails and 2 for
usage, configuration or file errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import fileio
from .closedloop import ControllerConfig, run_stream
from .detectors import detector as detector_spec
from .errors import ArtracError, ConfigError, DetectorMismatch, MissingSensor
from .fileio import RunManifest
from .kinematics import VehicleGeometry
from .sim import ScenarioConfig, default_road, grid_configs, run_scenario
from .tuning import (
    PointCloud,
    collect,
    convex_hull,
    default_guard_fraction,
    envelope,
    envelope_curves,
    rpm,
    tune_profile,
)
from .validation import report_rows, table1_experiment, trend_checks

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DETECTOR_CHOICES = ("basic", "ground", "wheeltach", "ground_bogie")


def _load_config(path: str | None) -> dict:
    return {} if path is None else fileio.load_toml(Path(path))


def _road(args, data: dict):
    if args.road is not None:
        return fileio.load_road(Path(args.road))
    if "road" in data:
        return fileio.parse_road(data["road"])
    return default_road()


def _filter_flag(value: str | None) -> bool | None:
    return None if value is None else value == "on"


# -- simulate --------------------------------------------------------------


def cmd_simulate(args) -> int:
    data = _load_config(args.config)
    cfg = fileio.parse_scenario(data, seed=args.seed)
    road = _road(args, data)
    run = run_scenario(cfg, road)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = ["truth.csv", "sensors.csv"]
    manifest = RunManifest("simulate", args.config, cfg.seed, names, extra={
        "road": args.road, "sensor_set": cfg.sensor_set, "dt": cfg.dt,
        "scenario": fileio.scenario_to_dict(cfg), "geometry": asdict(cfg.geometry),
        "slip_events": [asdict(e) for e in cfg.slip_events],
    })
    fileio.write_truth(out / names[0], run.truth, manifest)
    fileio.write_sensors(out / names[1], run.sensors, manifest)
    t = run.truth.t
    print(f"duration {t[-1]:.2f} s, samples {len(t)}, "
          f"max|gamma| {math.degrees(np.max(np.abs(run.truth.gamma))):.2f} deg")
    print(f"wrote {out / names[0]} and {out / names[1]}")
    return EXIT_OK


# -- tune ------------------------------------------------------------------


def _grid(data: dict, seed: int | None) -> tuple[list[ScenarioConfig], int]:
    """Grid cells and the root seed their cell seeds derive from."""
    base = fileio.parse_scenario(data, seed=seed)
    if base.slip_events:
        raise ConfigError("calibration grids must not contain slip events")
    gears, loads = fileio.parse_grid(data)
    return grid_configs(base, gears, loads), base.seed


def _curve_rows(profile, cloud: PointCloud, bin_width: float):
    (eux, euy), (elx, ely) = envelope_curves(cloud, bin_width)
    hull = convex_hull(cloud)
    (hux, huy), (hlx, hly) = hull.upper_curve(), hull.lower_curve()
    lo, hi = profile.gamma_range
    gg = np.linspace(lo, hi, int(round((hi - lo) / math.radians(0.5))) + 1)
    return zip(gg, profile.l(gg), profile.u(gg), np.interp(gg, elx, ely), np.interp(gg, eux, euy),
               np.interp(gg, hlx, hly), np.interp(gg, hux, huy))


def cmd_tune(args) -> int:
    data = _load_config(args.config)
    ctrl_section = data.get("controller", {})
    det = args.detector or ctrl_section.get("detector", "basic")
    detector_spec(det)
    opts = fileio.parse_tuning(data)
    filtered = _filter_flag(args.filter)
    if filtered is None:
        filtered = fileio.parse_filter(ctrl_section.get("filter"))
    grid, seed = _grid(data, args.seed)
    road = _road(args, data)
    cloud = collect(grid, det, road, filtered=filtered)
    guard_fraction = default_guard_fraction(det) if opts.guard_fraction is None else opts.guard_fraction
    profile = tune_profile(cloud, opts.method, guard_fraction=guard_fraction,
                           bin_width=opts.bin_width, with_intercept=opts.with_intercept,
                           provenance={"config": args.config, "root_seed": seed})
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stem = out.with_suffix("")
    paths = {k: Path(f"{stem}.{k}.csv") for k in ("cloud", "envelope", "hull", "bounds")}
    manifest = RunManifest("tune", args.config, seed, [out.name] + [p.name for p in paths.values()],
                           extra={"detector": det, "filtered": cloud.filtered, "method": opts.method})
    fileio.write_profile(out, profile, manifest)
    fileio.write_csv(paths["cloud"], manifest, ["gamma", "g", "gear", "load"],
                     zip(cloud.gamma, cloud.g, cloud.gear, cloud.load))
    env = envelope(cloud, opts.bin_width)
    fileio.write_csv(paths["envelope"], manifest, ["gamma_center", "min_g", "max_g", "count"],
                     zip(env.centers, env.min_g, env.max_g, env.count))
    fileio.write_csv(paths["hull"], manifest, ["gamma", "g"], convex_hull(cloud).vertices)
    fileio.write_csv(paths["bounds"], manifest,
                     ["gamma", "profile_l", "profile_u", "envelope_l", "envelope_u", "hull_l", "hull_u"],
                     _curve_rows(profile, cloud, opts.bin_width))
    geom = grid[0].geometry
    print(f"detector {det} ({'filtered' if cloud.filtered else 'unfiltered'}), "
          f"{len(cloud)} points from {len(grid)} runs, method {opts.method}")
    for deg in (0.0, 20.0, 45.0):
        gam = math.radians(deg)
        u, lo = profile.u(gam), profile.l(gam)
        print(f"  gamma {deg:5.1f} deg: l={lo:+.4f} u={u:+.4f} m/s "
              f"({rpm(lo, geom):+.1f} / {rpm(u, geom):+.1f} RPM)")
    print(f"wrote {out}")
    return EXIT_OK


# -- detect ----------------------------------------------------------------


def cmd_detect(args) -> int:
    data = _load_config(args.config)
    profile = fileio.load_profile(Path(args.profile))
    trace, stream_manifest = fileio.read_sensors(Path(args.stream))
    ctrl = fileio.parse_controller(data)
    det = args.detector or data.get("controller", {}).get("detector") or profile.detector
    if det != profile.detector:
        raise DetectorMismatch(f"profile {args.profile} was tuned for {profile.detector!r}, not {det!r}")
    needed = detector_spec(det).sensor_set
    if trace.sensor_set != needed:
        raise DetectorMismatch(f"detector {det!r} needs the {needed!r} sensor set, "
                               f"stream {args.stream} carries {trace.sensor_set!r}")
    filtered = _filter_flag(args.filter)
    if filtered is None:
        filtered = ctrl.filtered if ctrl.filtered is not None else profile.filtered
    ctrl = replace(ctrl, detector=det, filtered=filtered)
    geom = VehicleGeometry(**stream_manifest.get("geometry", {}))
    result = run_stream(trace, profile, ctrl, geom)
    out = Path(args.out) if args.out else Path(args.stream).with_suffix(".events.ndjson")
    manifest = RunManifest("detect", args.config, stream_manifest.get("seed"), [out.name], extra={
        "stream": args.stream, "profile": args.profile, "detector": det, "filtered": filtered,
    })
    fileio.write_ndjson(out, manifest, (e.to_json() for e in result.events))
    print(f"engagements {result.engagements}")
    onsets = sorted(e["t_start"] for e in stream_manifest.get("slip_events", []))
    if onsets:
        dt = stream_manifest.get("dt", 0.01)
        lat = result.latency_samples(onsets[0], dt)
        if lat is None:
            print("first-detection latency: no detection after slip onset")
        else:
            print(f"first-detection latency: {lat} samples ({lat * dt * 1000:.0f} ms)")
    else:
        print("first-detection latency: no slip onset recorded in stream")
    print(f"wrote {out}")
    if result.safety_violations() or result.gating_violations():
        print("FAIL controller safety or unlock gating violated", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- validate --------------------------------------------------------------


def cmd_validate(args) -> int:
    data = _load_config(args.config)
    grid, seed = _grid(data, args.seed)
    road = _road(args, data)
    reports = table1_experiment(grid, road)
    header, rows = report_rows(reports)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fileio.write_csv(out, RunManifest("validate", args.config, seed, [out.name]), header, rows)
    print(" ".join(f"{h:>18}" for h in header))
    for row in rows:
        print(" ".join(f"{v:>18}" if isinstance(v, str) else f"{v:18.4f}" for v in row))
    ok = True
    for tr in trend_checks(reports):
        print(f"{'PASS' if tr.passed else 'FAIL'} {tr.name}: {tr.detail}")
        ok &= tr.passed
    print(f"wrote {out}")
    return EXIT_OK if ok else EXIT_FAIL


# -- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artrac", description="Traction-control toolkit for articulated haulers.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate one scenario and write truth and sensor streams")
    s.add_argument("--config", help="scenario TOML")
    s.add_argument("--road", help="road TOML (default: built-in test road)")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("tune", help="tune a bound profile from slip-free calibration runs")
    t.add_argument("--detector", choices=DETECTOR_CHOICES)
    t.add_argument("--config", help="grid TOML")
    t.add_argument("--road")
    t.add_argument("--out", required=True, help="profile TOML to write")
    t.add_argument("--seed", type=int)
    t.add_argument("--filter", choices=("on", "off"))
    t.set_defaults(func=cmd_tune)

    d = sub.add_parser("detect", help="run the lock controller over a recorded sensor stream")
    d.add_argument("stream", help="sensor CSV written by 'simulate'")
    d.add_argument("--profile", required=True)
    d.add_argument("--config", help="controller TOML")
    d.add_argument("--detector", choices=DETECTOR_CHOICES)
    d.add_argument("--filter", choices=("on", "off"))
    d.add_argument("--out", help="event log (default: next to the stream)")
    d.set_defaults(func=cmd_detect)

    v = sub.add_parser("validate", help="compare trailer-speed estimators against truth")
    v.add_argument("--config", help="grid TOML")
    v.add_argument("--road")
    v.add_argument("--out", required=True, help="report CSV")
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DetectorMismatch, MissingSensor, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArtracError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
