"""Shared scenario builders for the tests."""

import math
from dataclasses import replace
from functools import lru_cache

from artrac.detectors import detector
from artrac.sim import RoadProfile, ScenarioConfig, Segment, SlipEvent, grid_configs, run_scenario
from artrac.tuning import collect, default_guard_fraction, tune_profile

CAL_SEED = 1
HELD_OUT_SEED = 20261014
DETECTORS = ("basic", "ground", "ground_bogie", "wheeltach")
# the wheel whose slip each detector's residual responds to
SLIP_WHEEL = {"basic": 3, "ground": 1, "ground_bogie": 3, "wheeltach": 1}


def calibration_grid(seed=CAL_SEED):
    return grid_configs(ScenarioConfig(seed=seed))


@lru_cache(maxsize=None)
def tuned(det, method="quadratic", seed=CAL_SEED):
    cloud = collect(calibration_grid(seed), det)
    return cloud, tune_profile(cloud, method, guard_fraction=default_guard_fraction(det))


def tuned_profiles():
    return {d: tuned(d)[1] for d in DETECTORS}


def hold_road(gamma_deg, lead=10.0, hold=60.0):
    """Short straight, then a long arc (or straight) held at ``gamma_deg``."""
    if gamma_deg:
        second = Segment("arc", hold, math.radians(gamma_deg))
    else:
        second = Segment("straight", hold)
    return RoadProfile((Segment("straight", lead), second))


def slip_run(det, cfg, gamma_deg, magnitude=0.5, duration=3.0, wheel=None):
    """Run with one wheel slipping once the steering has settled at ``gamma_deg``."""
    onset = round((10.0 + 40.0) / cfg.v12, 2)
    ev = SlipEvent(wheel or SLIP_WHEEL[det], onset, onset + duration, magnitude)
    cfg = replace(cfg, sensor_set=detector(det).sensor_set, slip_events=(ev,))
    return run_scenario(cfg, hold_road(gamma_deg)), onset
