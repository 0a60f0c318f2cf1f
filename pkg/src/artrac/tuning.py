"""Bound tuning from slip-free calibration data.

Calibration runs give a cloud of ``(gamma, g)`` pairs per detector.  The
band ``l(gamma) <= g <= u(gamma)`` is then drawn around the cloud in one of
three ways: a binned envelope, the convex hull, or a least-squares
quadratic pushed out until it clears every point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .detectors import BoundProfile, detector, filter_ma5
from .errors import EmptyRange, RankDeficient
from .kinematics import A40X, VehicleGeometry
from .sim import RoadProfile, ScenarioConfig, run_scenario

DEFAULT_BIN_WIDTH = math.radians(2.5)
Side = Literal["upper", "lower"]


def rpm(g, geom: VehicleGeometry = A40X):
    """Wheel-speed residual in m/s expressed as hub-side shaft speed, RPM."""
    out = geom.i_hub * np.asarray(g, dtype=float) * 60.0 / (2.0 * math.pi * geom.r)
    return float(out) if out.ndim == 0 else out


# -- point clouds ----------------------------------------------------------


@dataclass(frozen=True)
class PointCloud:
    gamma: np.ndarray
    g: np.ndarray
    gear: np.ndarray = None
    load: np.ndarray = None
    detector: str = ""
    filtered: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        gamma = np.asarray(self.gamma, dtype=float).ravel()
        g = np.asarray(self.g, dtype=float).ravel()
        if gamma.shape != g.shape:
            raise ValueError("gamma and g must have the same length")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "g", g)
        for name in ("gear", "load"):
            col = getattr(self, name)
            col = np.full(gamma.shape, "", dtype=object) if col is None else np.asarray(col, dtype=object)
            if col.shape != gamma.shape:
                raise ValueError(f"{name} labels must match the points")
            object.__setattr__(self, name, col)

    @classmethod
    def from_points(cls, points, **kw) -> "PointCloud":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls(pts[:, 0], pts[:, 1], **kw)

    def __len__(self) -> int:
        return self.gamma.shape[0]

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.gamma, self.g])

    def select(self, mask) -> "PointCloud":
        return replace(self, gamma=self.gamma[mask], g=self.g[mask], gear=self.gear[mask],
                       load=self.load[mask])

    def min_steering(self, threshold: float = math.radians(1.0)) -> "PointCloud":
        """Drop points with ``|gamma|`` below ``threshold``."""
        return self.select(np.abs(self.gamma) >= threshold)

    def merge(self, other: "PointCloud") -> "PointCloud":
        return replace(self, gamma=np.concatenate([self.gamma, other.gamma]),
                       g=np.concatenate([self.g, other.g]),
                       gear=np.concatenate([self.gear, other.gear]),
                       load=np.concatenate([self.load, other.load]))


def residual_series(run, detector_id: str, filtered: bool | None = None) -> np.ndarray:
    """Residual of a detector over a whole run, optionally moving-averaged."""
    spec = detector(detector_id)
    g = np.asarray(spec.residual(run.sensors, run.config.geometry), dtype=float)
    if spec.filtered if filtered is None else filtered:
        g = filter_ma5(g)
    return g


def collect(configs: Sequence[ScenarioConfig], detector_id: str, road: RoadProfile | None = None,
            filtered: bool | None = None) -> PointCloud:
    """One ``(gamma_meas, g)`` point per sample of every slip-free scenario.

    Each config's sensor set is switched to what the detector needs.
    """
    spec = detector(detector_id)
    use_filter = spec.filtered if filtered is None else filtered
    gam, gs, gears, loads = [], [], [], []
    for cfg in configs:
        if cfg.slip_events:
            raise ValueError("calibration scenarios must not contain slip events")
        run = run_scenario(replace(cfg, sensor_set=spec.sensor_set), road)
        g = residual_series(run, detector_id, use_filter)
        gam.append(run.sensors.gamma)
        gs.append(g)
        gears.append(np.full(g.shape, cfg.gear, dtype=object))
        loads.append(np.full(g.shape, cfg.load, dtype=object))
    if not configs:
        return PointCloud(np.empty(0), np.empty(0), detector=detector_id, filtered=use_filter)
    return PointCloud(np.concatenate(gam), np.concatenate(gs), np.concatenate(gears),
                      np.concatenate(loads), detector=detector_id, filtered=use_filter,
                      meta={"gears": sorted({c.gear for c in configs}),
                            "loads": sorted({c.load for c in configs}),
                            "seeds": [c.seed for c in configs]})


# -- piecewise-linear helpers ----------------------------------------------


def _pl_combine(xa, ya, xb, yb, op) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise min or max of two piecewise-linear curves, held flat outside.

    Breakpoints are the union of both inputs plus every crossing, so the
    result is exact rather than sampled.
    """
    xs = np.union1d(xa, xb)
    fa = np.interp(xs, xa, ya)
    fb = np.interp(xs, xb, yb)
    d = fa - fb
    cross = np.nonzero(d[:-1] * d[1:] < 0)[0]
    if cross.size:
        t = d[cross] / (d[cross] - d[cross + 1])
        xc = xs[cross] + t * (xs[cross + 1] - xs[cross])
        xs = np.union1d(xs, xc)
        fa = np.interp(xs, xa, ya)
        fb = np.interp(xs, xb, yb)
    return xs, op(fa, fb)


def pl_min(xa, ya, xb, yb):
    return _pl_combine(xa, ya, xb, yb, np.minimum)


def pl_max(xa, ya, xb, yb):
    return _pl_combine(xa, ya, xb, yb, np.maximum)


# -- envelope --------------------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    """Per-bin extrema; bin ``j`` covers ``[j*w, (j+1)*w)``."""

    bin_width: float
    index: np.ndarray
    min_g: np.ndarray
    max_g: np.ndarray
    count: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return (self.index + 0.5) * self.bin_width

    def __len__(self) -> int:
        return self.index.shape[0]

    def _dilated(self, values, op):
        # every bin centre next to a populated bin gets the extreme of its
        # populated neighbours, so interpolation never dips inside a bin
        pos = {int(j): float(v) for j, v in zip(self.index, values)}
        keys = sorted({j + d for j in pos for d in (-1, 0, 1)})
        out = [op([pos[m] for m in (k - 1, k, k + 1) if m in pos]) for k in keys]
        return (np.array(keys) + 0.5) * self.bin_width, np.array(out)

    def upper_curve(self) -> tuple[np.ndarray, np.ndarray]:
        return self._dilated(self.max_g, max)

    def lower_curve(self) -> tuple[np.ndarray, np.ndarray]:
        return self._dilated(self.min_g, min)


def envelope(cloud: PointCloud, bin_width: float = DEFAULT_BIN_WIDTH) -> Envelope:
    if len(cloud) == 0:
        raise EmptyRange("cannot build an envelope of an empty cloud")
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    idx = np.floor(cloud.gamma / bin_width).astype(np.int64)
    keys, inverse, count = np.unique(idx, return_inverse=True, return_counts=True)
    lo = np.full(keys.shape, np.inf)
    hi = np.full(keys.shape, -np.inf)
    np.minimum.at(lo, inverse, cloud.g)
    np.maximum.at(hi, inverse, cloud.g)
    return Envelope(bin_width, keys, lo, hi, count)


# -- convex hull -----------------------------------------------------------


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class Hull:
    """Convex hull, counter-clockwise from the lexicographically smallest point."""

    vertices: tuple[tuple[float, float], ...]
    lower_chain: tuple[tuple[float, float], ...]
    upper_chain: tuple[tuple[float, float], ...]

    def upper_curve(self) -> tuple[np.ndarray, np.ndarray]:
        return _chain_curve(self.upper_chain, max)

    def lower_curve(self) -> tuple[np.ndarray, np.ndarray]:
        return _chain_curve(self.lower_chain, min)

    def contains(self, point, tol: float = 1e-12) -> bool:
        v = self.vertices
        if len(v) < 3:
            return _on_degenerate(v, point, tol)
        return all(_cross(v[i], v[(i + 1) % len(v)], point) >= -tol for i in range(len(v)))


def _on_degenerate(v, p, tol) -> bool:
    if len(v) == 1:
        return math.dist(v[0], p) <= tol
    a, b = v
    if abs(_cross(a, b, p)) > tol * max(1.0, math.dist(a, b)):
        return False
    return (min(a[0], b[0]) - tol <= p[0] <= max(a[0], b[0]) + tol
            and min(a[1], b[1]) - tol <= p[1] <= max(a[1], b[1]) + tol)


def _chain_curve(chain, pick):
    by_x: dict[float, float] = {}
    for x, y in chain:
        by_x[x] = pick(by_x[x], y) if x in by_x else y
    xs = np.array(sorted(by_x))
    return xs, np.array([by_x[x] for x in xs])


def convex_hull(points) -> Hull:
    """Monotone-chain hull; collinear points on edges are dropped."""
    if isinstance(points, PointCloud):
        points = points.points
    pts = sorted({(float(x), float(y)) for x, y in np.asarray(points, dtype=float).reshape(-1, 2)})
    if not pts:
        raise EmptyRange("cannot build the hull of no points")
    if len(pts) == 1:
        return Hull(tuple(pts), tuple(pts), tuple(pts))
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    verts = lower[:-1] + upper[:-1]
    if len(verts) < 2:
        verts = [pts[0], pts[-1]]
    return Hull(tuple(verts), tuple(lower), tuple(reversed(upper)))


# -- quadratic fit ---------------------------------------------------------


@dataclass(frozen=True)
class QuadraticFit:
    """``raw`` is the least-squares fit, ``coefficients`` include the margin."""

    raw: tuple[float, float, float]
    margin: float
    coefficients: tuple[float, float, float]
    side: Side


def _poly(c, gamma):
    return c[0] + c[1] * gamma + c[2] * gamma * gamma


def fit_quadratic(cloud: PointCloud, side: Side, with_intercept: bool,
                  bin_width: float = DEFAULT_BIN_WIDTH) -> QuadraticFit:
    """Least squares to the per-bin extrema, then shifted to clear every point.

    The shift is the smallest constant that makes the curve dominate (upper)
    or be dominated by (lower) every raw point, evaluated exactly as a
    :class:`BoundProfile` evaluates it.
    """
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    env = envelope(cloud, bin_width)
    if len(env) < 3:
        raise RankDeficient(f"need at least 3 populated bins, got {len(env)}")
    x = env.centers
    y = env.max_g if side == "upper" else env.min_g
    cols = [x, x * x]
    if with_intercept:
        cols.insert(0, np.ones_like(x))
    a = np.column_stack(cols)
    sol, _, rank, _ = np.linalg.lstsq(a, y, rcond=None)
    if rank < a.shape[1]:
        raise RankDeficient("bin centres do not determine the polynomial")
    raw = tuple(float(v) for v in sol) if with_intercept else (0.0, float(sol[0]), float(sol[1]))
    sign = 1.0 if side == "upper" else -1.0
    margin = float(np.max(sign * (cloud.g - _poly(raw, cloud.gamma)))) * sign
    c0 = raw[0] + margin
    while True:
        deficit = float(np.max(sign * (cloud.g - _poly((c0, raw[1], raw[2]), cloud.gamma))))
        if deficit <= 0:
            break
        c0 = np.nextafter(c0 + sign * deficit, sign * np.inf)
    coeffs = (float(c0), raw[1], raw[2])
    return QuadraticFit(raw, float(c0 - raw[0]), coeffs, side)


# -- profiles --------------------------------------------------------------

Method = Literal["envelope", "hull", "quadratic"]
INTERCEPT_DEFAULT = {"basic": False, "ground": True, "ground_bogie": True, "wheeltach": True}


def calibrated_range(cloud: PointCloud) -> tuple[float, float]:
    lo = min(float(cloud.gamma.min()), -math.radians(45.0))
    hi = max(float(cloud.gamma.max()), math.radians(45.0))
    return lo, hi


def envelope_curves(cloud: PointCloud, bin_width: float = DEFAULT_BIN_WIDTH):
    """Envelope ``u`` and ``l`` clipped to the hull chains, so the hull always contains them."""
    env = envelope(cloud, bin_width)
    hull = convex_hull(cloud)
    upper = pl_min(*env.upper_curve(), *hull.upper_curve())
    lower = pl_max(*env.lower_curve(), *hull.lower_curve())
    return upper, lower


DEFAULT_GUARD_FRACTION = 0.25
# the wheel-tach band is set by sensor noise rather than model error, and
# noise tails on unseen runs reach further relative to the band
GUARD_FRACTIONS = {"basic": 0.25, "ground": 0.25, "ground_bogie": 0.25, "wheeltach": 0.75}


def default_guard_fraction(detector_id: str) -> float:
    return GUARD_FRACTIONS.get(detector_id, DEFAULT_GUARD_FRACTION)


def _tight_profile(cloud, method, bin_width, with_intercept, kw) -> BoundProfile:
    if method == "quadratic":
        up = fit_quadratic(cloud, "upper", with_intercept, bin_width)
        lo = fit_quadratic(cloud, "lower", with_intercept, bin_width)
        return BoundProfile.quadratic(up.coefficients, lo.coefficients, **kw)
    if method == "envelope":
        upper, lower = envelope_curves(cloud, bin_width)
    elif method == "hull":
        hull = convex_hull(cloud)
        upper, lower = hull.upper_curve(), hull.lower_curve()
    else:
        raise ValueError(f"unknown tuning method {method!r}")
    profile = BoundProfile.piecewise_linear(upper, lower, **kw)
    # interpolation can round a point lying exactly on a segment by one ulp
    gc = np.clip(cloud.gamma, *profile.gamma_range)
    du = float(np.max(cloud.g - profile.u(gc)))
    dl = float(np.max(profile.l(gc) - cloud.g))
    if du > 0 or dl > 0:
        profile = _widen(profile, np.nextafter(max(du, 0.0), 1.0), np.nextafter(max(dl, 0.0), 1.0))
    return profile


def _widen(profile: BoundProfile, up: float, down: float, **changes) -> BoundProfile:
    if profile.kind == "quadratic":
        u, l = profile.upper, profile.lower
        return replace(profile, upper=(u[0] + up, u[1], u[2]), lower=(l[0] - down, l[1], l[2]), **changes)
    (xu, yu), (xl, yl) = profile.upper, profile.lower
    return replace(profile, upper=(xu, tuple(np.add(yu, up).tolist())),
                   lower=(xl, tuple(np.subtract(yl, down).tolist())), **changes)


def half_width(profile: BoundProfile, n: int = 721) -> float:
    """Largest ``|u|`` or ``|l|`` over the calibrated range."""
    gg = np.linspace(*profile.gamma_range, n)
    return float(max(np.max(np.abs(profile.u(gg))), np.max(np.abs(profile.l(gg)))))


def tune_profile(cloud: PointCloud, method: Method = "quadratic", guard: float = 0.0,
                 guard_fraction: float = 0.0, bin_width: float = DEFAULT_BIN_WIDTH,
                 with_intercept: bool | None = None, provenance: dict | None = None) -> BoundProfile:
    """Turn a calibration cloud into a :class:`BoundProfile`.

    The tight band touches the calibration cloud.  Both sides are then
    widened by ``guard + guard_fraction * half_width(tight)`` m/s as
    headroom for driving the calibration did not see.
    """
    if len(cloud) == 0:
        raise EmptyRange("calibration cloud is empty")
    if guard < 0 or guard_fraction < 0:
        raise ValueError("guard terms must be non-negative")
    if with_intercept is None:
        with_intercept = INTERCEPT_DEFAULT.get(cloud.detector, True)
    kw = dict(gamma_range=calibrated_range(cloud), detector=cloud.detector, filtered=cloud.filtered)
    tight = _tight_profile(cloud, method, bin_width, with_intercept, kw)
    total = guard + guard_fraction * half_width(tight)
    prov = {"method": method, "guard": float(total), "bin_width": float(bin_width),
            "filtered": bool(cloud.filtered), "n_points": len(cloud), **cloud.meta,
            **(provenance or {})}
    if method == "quadratic":
        prov["with_intercept"] = bool(with_intercept)
    return _widen(tight, total, total, provenance=prov)


def closure_violations(cloud: PointCloud, profile: BoundProfile) -> int:
    """Number of calibration points outside the profile."""
    return int(np.count_nonzero(~profile.contains(cloud.g, cloud.gamma)))


def _breakpoints(profile: BoundProfile) -> np.ndarray:
    return np.union1d(profile.upper[0], profile.lower[0])


def contains_profile(outer: BoundProfile, inner: BoundProfile, gammas=None) -> bool:
    """Whether ``outer`` contains ``inner`` at every steering angle.

    Two piecewise-linear profiles are compared at the union of their
    breakpoints and the range ends, which decides containment exactly;
    sampling between breakpoints would only add interpolation rounding.
    Otherwise the check runs at ``gammas`` (default: a 0.05 deg grid).
    """
    lo, hi = inner.gamma_range
    if outer.kind == inner.kind == "piecewise_linear" and gammas is None:
        gammas = np.union1d(_breakpoints(outer), _breakpoints(inner))
        gammas = np.union1d(gammas[(gammas >= lo) & (gammas <= hi)], [lo, hi])
    elif gammas is None:
        gammas = np.linspace(lo, hi, int(round((hi - lo) / math.radians(0.05))) + 1)
    gammas = np.asarray(gammas, dtype=float)
    return bool(np.all(outer.u(gammas) >= inner.u(gammas)) and np.all(outer.l(gammas) <= inner.l(gammas)))


__all__ = [
    "DEFAULT_BIN_WIDTH", "DEFAULT_GUARD_FRACTION", "GUARD_FRACTIONS", "Envelope", "Hull", "PointCloud", "QuadraticFit",
    "calibrated_range", "closure_violations", "collect", "contains_profile", "convex_hull",
    "default_guard_fraction",
    "envelope", "envelope_curves", "fit_quadratic", "half_width", "pl_max", "pl_min",
    "residual_series", "rpm", "tune_profile",
]
