import json
import numpy as np
import pytest

from artrac.closedloop import FILTER_WARMUP, ControllerConfig, LockEvent, run_closed_loop, run_stream
from artrac.detectors import BoundProfile, clutch_delta_omega, g_basic
from artrac.errors import DetectorMismatch
from artrac.sim import ScenarioConfig, run_scenario

from .helpers import hold_road, slip_run


def test_config_validation():
    with pytest.raises(ValueError):
        ControllerConfig(detector="sonar")
    with pytest.raises(ValueError):
        ControllerConfig(delta_t=-1)
    with pytest.raises(ValueError):
        ControllerConfig(omega_safe=0.0)
    assert ControllerConfig("wheeltach").use_filter
    assert not ControllerConfig("wheeltach", filtered=False).use_filter


def test_profile_must_match_detector(calibration):
    run = run_scenario(ScenarioConfig())
    with pytest.raises(DetectorMismatch):
        run_closed_loop(run.model, calibration["ground"], ControllerConfig("basic"))


@pytest.mark.parametrize("det", ["basic", "ground", "ground_bogie", "wheeltach"])
def test_quiet_drive_never_locks(calibration, det):
    from artrac.detectors import detector

    cfg = ScenarioConfig(gear="F2", load="half", seed=77, sensor_set=detector(det).sensor_set)
    res = run_closed_loop(run_scenario(cfg).model, calibration[det], ControllerConfig(det))
    assert res.engagements == 0
    assert not res.locked.any()
    assert res.out_of_range == 0


@pytest.mark.parametrize("det", ["basic", "ground", "ground_bogie", "wheeltach"])
def test_slip_is_caught_and_released(calibration, det):
    cfg = ScenarioConfig(gear="F1", load="full", seed=5)
    run, onset = slip_run(det, cfg, 0.0)
    ctrl = ControllerConfig(det)
    res = run_closed_loop(run.model, calibration[det], ctrl)
    lat = res.latency_samples(onset, cfg.dt)
    assert lat is not None and lat <= 10 + (4 if ctrl.use_filter else 0)
    assert not res.safety_violations() and not res.gating_violations()
    actions = [e.action for e in res.events]
    assert actions[0] in ("brake", "engage")
    assert "disengage" in actions
    first_off = next(e for e in res.events if e.action == "disengage")
    assert first_off.time_locked >= 5.0 and first_off.dist_locked >= 10.0


def test_large_clutch_difference_brakes_first(calibration):
    cfg = ScenarioConfig(gear="F1", seed=3)
    run, onset = slip_run("ground", cfg, 0.0, magnitude=3.0, duration=6.0)
    ctrl = ControllerConfig("ground")
    res = run_closed_loop(run.model, calibration["ground"], ctrl)
    first = res.first_action(onset)
    assert first.action == "brake" and first.delta_omega > ctrl.omega_safe
    engage = next(e for e in res.events if e.action == "engage")
    assert engage.delta_omega <= ctrl.omega_safe
    # while braking the measured difference is pulled down at the brake rate
    k0 = int(round(first.t / cfg.dt))
    k1 = int(round(engage.t / cfg.dt))
    raw = np.array([clutch_delta_omega(run.model.frame(k), ctrl.locks) for k in range(k0 + 1, k1 + 1)])
    expect = np.maximum(0.0, raw - ctrl.brake_rate * cfg.dt * np.arange(1, k1 - k0 + 1))
    assert res.delta_omega[k0 + 1:k1 + 1] == pytest.approx(expect, abs=1e-12)
    assert np.all(expect[:-1] > ctrl.omega_safe)


def test_front_lock_shifts_the_residual_in_a_turn(calibration):
    # a locked axle reports its slower wheel, so mid-turn the front mean
    # drops and the residual rises; release then waits for the band
    cfg = ScenarioConfig(gear="F1", load="full", seed=5)
    run, onset = slip_run("basic", cfg, 20.0)
    res = run_closed_loop(run.model, calibration["basic"], ControllerConfig("basic"))
    k = int(round((onset + 6.0) / cfg.dt))
    assert res.locked[k]
    opened, locked = run.model.frame(k), run.model.frame(k, locks=("front",))
    assert res.g[k] == pytest.approx(g_basic(locked), abs=1e-12)
    assert g_basic(locked) - g_basic(opened) > 0.1
    assert [e.action for e in res.events] == ["engage"]
    only_long = run_closed_loop(run.model, calibration["basic"], ControllerConfig("basic", locks=("longitudinal",)))
    assert [e.action for e in only_long.events][:2] == ["engage", "disengage"]


def test_stream_matches_closed_loop_without_transversal_locks(calibration):
    cfg = ScenarioConfig(gear="F2", seed=8)
    run, _ = slip_run("basic", cfg, 20.0)
    ctrl = ControllerConfig("basic", locks=("longitudinal",))
    a = run_closed_loop(run.model, calibration["basic"], ctrl)
    b = run_stream(run.sensors, calibration["basic"], ctrl, cfg.geometry)
    assert a.events == b.events
    assert np.array_equal(a.g, b.g)


def test_locks_feed_back_into_wheel_readings(calibration):
    cfg = ScenarioConfig(gear="F1", seed=4)
    run, onset = slip_run("wheeltach", cfg, 20.0, duration=20.0)
    res = run_closed_loop(run.model, calibration["wheeltach"], ControllerConfig("wheeltach"))
    k = int(np.nonzero(res.locked)[0][5])
    opened = run.model.frame(k)
    locked = run.model.frame(k, locks=("front",))
    w = run.truth.wheel_omega[k]
    assert w[0] > w[1]
    assert locked.omega_wheel[0] < opened.omega_wheel[0]
    assert locked.omega_dbx_out < opened.omega_dbx_out
    # what the controller computed is the locked-mode clutch difference
    assert res.delta_omega[k] == pytest.approx(clutch_delta_omega(locked, ("longitudinal", "front")), abs=1e-12)


def test_out_of_range_steering_is_counted():
    prof = BoundProfile.quadratic((1.0, 0, 0), (-1.0, 0, 0), gamma_range=(-0.1, 0.1))
    run = run_scenario(ScenarioConfig(), hold_road(20.0, hold=5.0))
    res = run_closed_loop(run.model, prof, ControllerConfig("basic"))
    assert res.out_of_range == int(np.sum(np.abs(run.sensors.gamma) > 0.1))
    assert res.engagements == 0


def test_event_json_round_trip():
    e = LockEvent(1.0, "locked", "engage", 0.3, -0.1, 0.2, 0.5, 0.0, 0.0)
    assert json.loads(e.to_json()) == {"t": 1.0, "mode": "locked", "action": "engage", "g": 0.3, "l": -0.1,
                                       "u": 0.2, "delta_omega": 0.5, "time_locked": 0.0, "dist_locked": 0.0}


# residual response to 0.5 m/s of slip on the detector's slip wheel
RESPONSE = {"basic": 0.25, "ground": 0.25, "ground_bogie": 0.25, "wheeltach": 0.5}


def test_detection_margin_covers_the_band(calibration):
    # the injected slip must clear the tuned band for detection to be possible
    gg = np.radians([0.0, 20.0, 40.0])
    for det, prof in calibration.items():
        assert np.all(prof.u(gg) < RESPONSE[det]), det


def test_no_decisions_during_filter_warmup():
    prof = BoundProfile.quadratic((0.01, 0, 0), (-0.01, 0, 0), detector="wheeltach")
    cfg = ScenarioConfig(sensor_set="wheel_tach", seed=1)
    run = run_scenario(cfg, hold_road(0.0, hold=5.0))
    res = run_closed_loop(run.model, prof, ControllerConfig("wheeltach"))
    assert res.events and res.events[0].t >= FILTER_WARMUP * cfg.dt - 1e-9
    unfiltered = run_closed_loop(run.model, prof, ControllerConfig("wheeltach", filtered=False))
    assert unfiltered.events[0].t < FILTER_WARMUP * cfg.dt
