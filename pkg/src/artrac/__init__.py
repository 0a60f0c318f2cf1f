"""Kinematic simulation and slip detection for articulated haulers."""

from ._backend import BACKEND
from .closedloop import ClosedLoopResult, ControllerConfig, run_closed_loop, run_stream
from .detectors import (
    BoundProfile,
    ControllerState,
    LockCommand,
    bound_check,
    controller_step,
    filter_ma5,
    g_basic,
    g_ground_bogie,
    g_ground_front,
    g_wheel_tach,
)
from .fileio import VERSION as __version__
from .kinematics import (
    A40X,
    AxleScrew,
    JointConfig,
    VehicleGeometry,
    p_fn,
    q_fn,
    solve_chain_numeric,
    solve_two_body,
    wheel_velocity,
)
from .sim import RoadProfile, ScenarioConfig, Segment, SlipEvent, default_road, run_scenario
from .slip import SlipVector, WheelSlipState, detect_component, lambda_l, s_l, undetectable_basis
from .tuning import PointCloud, collect, convex_hull, envelope, fit_quadratic, rpm, tune_profile
from .validation import ModelVariant, d1, d_inf, table1_experiment

__all__ = [
    "A40X", "AxleScrew", "BACKEND", "BoundProfile", "ClosedLoopResult", "ControllerConfig",
    "ControllerState", "JointConfig", "LockCommand", "ModelVariant", "PointCloud", "RoadProfile",
    "ScenarioConfig", "Segment", "SlipEvent", "SlipVector", "VehicleGeometry", "WheelSlipState",
    "bound_check", "collect", "controller_step", "convex_hull", "d1", "d_inf", "default_road",
    "detect_component", "envelope", "filter_ma5", "fit_quadratic", "g_basic", "g_ground_bogie",
    "g_ground_front", "g_wheel_tach", "lambda_l", "p_fn", "q_fn", "rpm", "run_closed_loop",
    "run_scenario", "run_stream", "s_l", "solve_chain_numeric", "solve_two_body", "table1_experiment",
    "tune_profile", "undetectable_basis", "wheel_velocity",
]
