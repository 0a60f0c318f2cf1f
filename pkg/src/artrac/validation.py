"""How well simplified kinematic models predict trailer speed.

Each :class:`ModelVariant` estimates ``v34`` from the tractor speed and the
steering with some inputs forced to zero.  The estimate is compared against
simulator truth over all samples with a meaningful steering angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .errors import EmptySeries, LengthMismatch
from .sim import RoadProfile, ScenarioConfig, TruthTrace, default_road, integrate_truth, road_to_steering

MIN_STEERING = math.radians(1.0)


def _pair(x, xhat) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    xhat = np.asarray(xhat, dtype=float).ravel()
    if x.shape != xhat.shape:
        raise LengthMismatch(f"lengths differ: {x.shape[0]} vs {xhat.shape[0]}")
    if x.shape[0] == 0:
        raise EmptySeries("need at least one sample")
    return x, xhat


def d1(x, xhat) -> float:
    """Mean absolute discrepancy."""
    x, xhat = _pair(x, xhat)
    return float(np.mean(np.abs(x - xhat)))


def d_inf(x, xhat) -> float:
    """Largest absolute discrepancy."""
    x, xhat = _pair(x, xhat)
    return float(np.max(np.abs(x - xhat)))


@dataclass(frozen=True)
class ModelVariant:
    use_gamma_dot: bool
    use_slip_angles: bool

    @property
    def name(self) -> str:
        gd = "gdot" if self.use_gamma_dot else "nogdot"
        al = "alpha" if self.use_slip_angles else "noalpha"
        return f"{gd}_{al}"


STEADY_STATE = ModelVariant(False, False)
TRANSIENT = ModelVariant(True, False)
FULL = ModelVariant(True, True)
VARIANTS = (STEADY_STATE, TRANSIENT, FULL)


@dataclass(frozen=True)
class ErrorReport:
    gear: str
    load: str
    variant: ModelVariant
    d1: float  # cm/s
    d_inf: float  # cm/s
    n_samples: int


def estimate_v34(truth: TruthTrace, variant: ModelVariant, l1: float, l2: float) -> np.ndarray:
    """Trailer speed from the closed-form model with the variant's inputs nulled."""
    zeros = np.zeros_like(truth.gamma)
    gdot = truth.gamma_dot if variant.use_gamma_dot else zeros
    a12 = truth.alpha12 if variant.use_slip_angles else zeros
    a34 = truth.alpha34 if variant.use_slip_angles else zeros
    v34, _, _, _ = _backend.two_body(truth.v12, a12, a34, truth.gamma, gdot, l1, l2)
    return v34


def evaluate(truth: TruthTrace, config: ScenarioConfig, variants=VARIANTS,
             min_steering: float = MIN_STEERING) -> list[ErrorReport]:
    geom = config.geometry
    keep = np.abs(truth.gamma) >= min_steering
    out = []
    for v in variants:
        est = estimate_v34(truth, v, geom.l1, geom.l2)
        x, xh = truth.v34[keep], est[keep]
        out.append(ErrorReport(config.gear, config.load, v, 100.0 * d1(x, xh),
                               100.0 * d_inf(x, xh), int(keep.sum())))
    return out


def table1_experiment(grid: Sequence[ScenarioConfig], road: RoadProfile | None = None,
                      variants: Sequence[ModelVariant] = VARIANTS) -> list[ErrorReport]:
    """Trailer-speed errors per grid cell and variant, in cm/s.

    Only the truth matters here, so sensors and slip events are not simulated.
    """
    road = default_road() if road is None else road
    reports: list[ErrorReport] = []
    for cfg in grid:
        if not cfg.slip_angles:
            raise ValueError("the comparison needs truth with slip angles on")
        truth = integrate_truth(road_to_steering(road, cfg.v12, cfg.dt), cfg)
        reports.extend(evaluate(truth, cfg, variants))
    return reports


@dataclass(frozen=True)
class TrendResult:
    name: str
    passed: bool
    detail: str


GEAR_ORDER = ("F1", "F2", "F3")
LOAD_ORDER = ("zero", "half", "full")


def _index(reports):
    return {(r.gear, r.load, r.variant): r for r in reports}


def trend_checks(reports: Sequence[ErrorReport], ratio: float = 2.0) -> list[TrendResult]:
    """Qualitative orderings expected of the three variants."""
    idx = _index(reports)
    cells = sorted({(r.gear, r.load) for r in reports},
                   key=lambda c: (GEAR_ORDER.index(c[0]), LOAD_ORDER.index(c[1])))
    out = []
    worst = min(idx[c + (STEADY_STATE,)].d1 / max(idx[c + (TRANSIENT,)].d1, 1e-300) for c in cells)
    out.append(TrendResult("steering_rate_matters", worst >= ratio,
                           f"min steady/transient d1 ratio {worst:.2f} (need >= {ratio})"))
    bad = [c for c in cells if idx[c + (FULL,)].d1 > idx[c + (TRANSIENT,)].d1]
    out.append(TrendResult("slip_angles_help", not bad, f"{len(bad)} cells where alpha made it worse"))
    broken = []
    for v in VARIANTS:
        for load in LOAD_ORDER:
            seq = [idx[(g, load, v)].d1 for g in GEAR_ORDER if (g, load, v) in idx]
            if any(b < a for a, b in zip(seq, seq[1:])):
                broken.append(f"{v.name}/{load}")
    out.append(TrendResult("error_grows_with_gear", not broken,
                           "monotone in gear" if not broken else "not monotone: " + ", ".join(broken)))
    return out


def report_rows(reports: Sequence[ErrorReport], variants=VARIANTS) -> tuple[list[str], list[list]]:
    """Report layout: one row per (load, gear), then d1 and d_inf per variant."""
    idx = _index(reports)
    header = ["load", "gear"]
    for v in variants:
        header += [f"d1_{v.name}", f"dinf_{v.name}"]
    cells = sorted({(r.load, r.gear) for r in reports},
                   key=lambda c: (LOAD_ORDER.index(c[0]), GEAR_ORDER.index(c[1])))
    rows = []
    for load, gear in cells:
        row: list = [load, gear]
        for v in variants:
            r = idx[(gear, load, v)]
            row += [round(r.d1, 6), round(r.d_inf, 6)]
        rows.append(row)
    return header, rows
