"""Kinematic state derivation from raw pose or rate logs.

Raw logs are resampled onto a uniform grid, smoothed, and differentiated
into the full state chain (speed, longitudinal acceleration, jerk, yaw
rate, heading). The default grid is a 3-second window at 10 Hz with
inclusive endpoints, i.e. 31 samples; sample 15 is the midpoint and
belongs to the first half wherever a clip is split in two.

Smoothing is least-squares polynomial (Savitzky-Golay) and is applied
before every differentiation stage. Edge samples are filled from the
polynomial fitted to the terminal window, which keeps the filter exact on
polynomials up to the fit order; differentiation uses second-order central
differences with second-order one-sided stencils at the ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import savgol_filter

from .errors import (
    EvenWindow,
    InsufficientSpan,
    NonMonotonicTime,
    WindowTooLarge,
)

GRID_TOLERANCE_S = 1e-9

# Midpoint sample of an odd-length grid belongs to the first half.
def half_split_index(n: int) -> int:
    """Last index (inclusive) of the first half of an n-sample clip."""
    return (n - 1) // 2


@dataclass(frozen=True)
class PoseSample:
    """One raw pose log row: time, planar position, heading in radians."""

    t: float
    x: float
    y: float
    heading: float

    def __post_init__(self) -> None:
        for name in ("t", "x", "y", "heading"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite {name} in pose sample")


@dataclass(frozen=True)
class SmoothingParams:
    """Savitzky-Golay window/order for one derivative stage."""

    window: int = 7
    polyorder: int = 2


@dataclass(frozen=True)
class SmoothingConfig:
    """Per-stage smoothing: positions/heading before the first derivative,
    speed before acceleration, acceleration before jerk."""

    position: SmoothingParams = field(default_factory=SmoothingParams)
    heading: SmoothingParams = field(default_factory=SmoothingParams)
    speed: SmoothingParams = field(default_factory=SmoothingParams)
    accel: SmoothingParams = field(default_factory=SmoothingParams)


class StateSequence:
    """Time-aligned kinematic channels for one clip on a uniform grid.

    Channels: t (s), v (m/s, >= 0), a (m/s^2, longitudinal), j (m/s^3),
    omega (rad/s, positive = left), theta (rad, unwrapped). Planar x, y
    (m) are optional and only needed by the coordinate text encoding.
    """

    __slots__ = ("t", "v", "a", "j", "omega", "theta", "x", "y")

    def __init__(self, t, v, a, j, omega, theta, x=None, y=None):
        self.t = np.asarray(t, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.a = np.asarray(a, dtype=float)
        self.j = np.asarray(j, dtype=float)
        self.omega = np.asarray(omega, dtype=float)
        self.theta = np.asarray(theta, dtype=float)
        self.x = None if x is None else np.asarray(x, dtype=float)
        self.y = None if y is None else np.asarray(y, dtype=float)
        self._validate()

    def _validate(self) -> None:
        n = self.t.size
        if n < 2:
            raise ValueError("state sequence needs at least 2 samples")
        channels = [self.v, self.a, self.j, self.omega, self.theta]
        channels += [c for c in (self.x, self.y) if c is not None]
        if any(c.size != n for c in channels):
            raise ValueError("all channels must have equal length")
        if any(not np.all(np.isfinite(c)) for c in [self.t] + channels):
            raise ValueError("NaN/Inf in state sequence")
        dts = np.diff(self.t)
        if np.any(dts <= 0):
            raise NonMonotonicTime("grid timestamps must strictly increase")
        if np.max(np.abs(dts - dts[0])) > GRID_TOLERANCE_S:
            raise ValueError("grid spacing must be constant within 1e-9 s")
        if np.any(self.v < 0):
            raise ValueError("speed channel must be non-negative")

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def has_position(self) -> bool:
        return self.x is not None and self.y is not None


@dataclass(frozen=True)
class KinematicSummary:
    """Clip-level aggregates of the state chain.

    ``max_lat_accel`` is the per-sample peak of v * |omega|;
    ``total_heading_change`` is the net unwrapped heading change by
    default (sum-of-absolute-increments available via ``summarize``).
    ``percentiles`` holds P25/P50/P75 of the braking-relevant channels
    (longitudinal acceleration and absolute jerk).
    """

    max_speed: float
    mean_speed: float
    min_accel: float
    max_accel: float
    mean_accel: float
    max_abs_jerk: float
    mean_abs_jerk: float
    max_abs_yaw_rate: float
    max_lat_accel: float
    total_heading_change: float
    percentiles: dict[str, dict[str, float]]

    def as_dict(self) -> dict:
        out = {
            "max_speed": self.max_speed,
            "mean_speed": self.mean_speed,
            "min_accel": self.min_accel,
            "max_accel": self.max_accel,
            "mean_accel": self.mean_accel,
            "max_abs_jerk": self.max_abs_jerk,
            "mean_abs_jerk": self.mean_abs_jerk,
            "max_abs_yaw_rate": self.max_abs_yaw_rate,
            "max_lat_accel": self.max_lat_accel,
            "total_heading_change": self.total_heading_change,
            "percentiles": {k: dict(v) for k, v in self.percentiles.items()},
        }
        return out


def _wrap_angle(values: np.ndarray) -> np.ndarray:
    """Wrap radians into (-pi, pi]."""
    return np.pi - np.mod(np.pi - values, 2.0 * np.pi)


def resample_uniform(
    samples: list[PoseSample], rate_hz: float, window_s: float
) -> list[PoseSample]:
    """Resample a pose log onto a uniform grid covering exactly ``window_s``.

    The grid starts at the first timestamp and has round(window_s * rate_hz)
    + 1 samples (inclusive endpoints). Positions interpolate linearly;
    heading interpolates along the shortest arc so a 3.1 -> -3.1 rad pair
    passes through +/-pi, not through zero.

    Raises:
        NonMonotonicTime: timestamps are not strictly increasing.
        InsufficientSpan: the log covers less than ``window_s``.
    """
    if rate_hz <= 0 or window_s <= 0:
        raise ValueError("rate_hz and window_s must be positive")
    if len(samples) < 2:
        raise InsufficientSpan("need at least 2 samples to resample")
    t = np.array([s.t for s in samples], dtype=float)
    if np.any(np.diff(t) <= 0):
        raise NonMonotonicTime("pose timestamps must strictly increase")
    span = float(t[-1] - t[0])
    if span < window_s - GRID_TOLERANCE_S:
        raise InsufficientSpan(
            f"log spans {span:.3f} s but window is {window_s:.3f} s"
        )
    n = int(round(window_s * rate_hz)) + 1
    grid = t[0] + np.arange(n) / rate_hz

    x = np.interp(grid, t, np.array([s.x for s in samples]))
    y = np.interp(grid, t, np.array([s.y for s in samples]))
    heading_u = np.unwrap(np.array([s.heading for s in samples]))
    heading = _wrap_angle(np.interp(grid, t, heading_u))
    return [
        PoseSample(float(grid[i]), float(x[i]), float(y[i]), float(heading[i]))
        for i in range(n)
    ]


def resample_rate_log(
    t: np.ndarray,
    v: np.ndarray,
    omega: np.ndarray,
    rate_hz: float,
    window_s: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Resample a (t, v, omega) log onto the uniform grid; linear interp."""
    t = np.asarray(t, dtype=float)
    if t.size < 2:
        raise InsufficientSpan("need at least 2 samples to resample")
    if np.any(np.diff(t) <= 0):
        raise NonMonotonicTime("timestamps must strictly increase")
    span = float(t[-1] - t[0])
    if span < window_s - GRID_TOLERANCE_S:
        raise InsufficientSpan(
            f"log spans {span:.3f} s but window is {window_s:.3f} s"
        )
    n = int(round(window_s * rate_hz)) + 1
    grid = t[0] + np.arange(n) / rate_hz
    return grid, np.interp(grid, t, v), np.interp(grid, t, omega)


def smooth_savgol(values, window: int, poly_order: int) -> np.ndarray:
    """Least-squares polynomial smoothing; same length as the input.

    Exact (to machine precision) on polynomials of degree <= poly_order,
    including the edge samples, which are filled from the polynomial
    fitted to the first/last window.
    """
    values = np.asarray(values, dtype=float)
    if window < 1 or window % 2 == 0:
        raise EvenWindow(f"window must be odd and positive, got {window}")
    if not 0 <= poly_order < window:
        raise ValueError("poly_order must satisfy 0 <= poly_order < window")
    if window > values.size:
        raise WindowTooLarge(
            f"window {window} exceeds signal length {values.size}"
        )
    if window == 1:
        return values.copy()
    return savgol_filter(values, window, poly_order, mode="interp")


def _gradient(values: np.ndarray, dt: float) -> np.ndarray:
    return np.gradient(values, dt, edge_order=2)


def derive_states(
    poses: list[PoseSample], smoothing: SmoothingConfig | None = None
) -> StateSequence:
    """Derive the full state chain from uniformly gridded poses.

    Speed comes from central differences of the smoothed positions,
    acceleration from the smoothed speed, jerk from the smoothed
    acceleration, and yaw rate from the smoothed unwrapped heading.
    """
    smoothing = smoothing or SmoothingConfig()
    t = np.array([p.t for p in poses], dtype=float)
    if t.size < 3:
        raise ValueError("need at least 3 samples to differentiate")
    dts = np.diff(t)
    if np.any(dts <= 0):
        raise NonMonotonicTime("grid timestamps must strictly increase")
    if np.max(np.abs(dts - dts[0])) > GRID_TOLERANCE_S:
        raise ValueError("derive_states requires a uniform grid")
    dt = float(dts[0])

    sp = smoothing.position
    x = smooth_savgol([p.x for p in poses], sp.window, sp.polyorder)
    y = smooth_savgol([p.y for p in poses], sp.window, sp.polyorder)
    sh = smoothing.heading
    theta = smooth_savgol(
        np.unwrap([p.heading for p in poses]), sh.window, sh.polyorder
    )

    v_raw = np.hypot(_gradient(x, dt), _gradient(y, dt))
    omega = _gradient(theta, dt)
    sv = smoothing.speed
    v = np.maximum(smooth_savgol(v_raw, sv.window, sv.polyorder), 0.0)
    a = _gradient(v, dt)
    sa = smoothing.accel
    a = smooth_savgol(a, sa.window, sa.polyorder)
    j = _gradient(a, dt)
    return StateSequence(t=t, v=v, a=a, j=j, omega=omega, theta=theta, x=x, y=y)


def derive_states_from_rates(
    t: np.ndarray,
    v: np.ndarray,
    omega: np.ndarray,
    smoothing: SmoothingConfig | None = None,
) -> StateSequence:
    """Build a StateSequence from direct (t, v, omega) channels.

    Acceleration and jerk are derived from the smoothed speed; heading is
    the running integral of the yaw rate and positions are integrated
    from speed and heading.
    """
    smoothing = smoothing or SmoothingConfig()
    t = np.asarray(t, dtype=float)
    if t.size < 3:
        raise ValueError("need at least 3 samples to differentiate")
    dts = np.diff(t)
    if np.any(dts <= 0):
        raise NonMonotonicTime("grid timestamps must strictly increase")
    if np.max(np.abs(dts - dts[0])) > GRID_TOLERANCE_S:
        raise ValueError("derive_states_from_rates requires a uniform grid")
    dt = float(dts[0])

    omega = np.asarray(omega, dtype=float)
    sv = smoothing.speed
    v_s = np.maximum(smooth_savgol(v, sv.window, sv.polyorder), 0.0)
    a = _gradient(v_s, dt)
    sa = smoothing.accel
    a = smooth_savgol(a, sa.window, sa.polyorder)
    j = _gradient(a, dt)

    theta = np.concatenate(
        [[0.0], np.cumsum((omega[1:] + omega[:-1]) * 0.5 * dt)]
    )
    vx = v_s * np.cos(theta)
    vy = v_s * np.sin(theta)
    x = np.concatenate([[0.0], np.cumsum((vx[1:] + vx[:-1]) * 0.5 * dt)])
    y = np.concatenate([[0.0], np.cumsum((vy[1:] + vy[:-1]) * 0.5 * dt)])
    return StateSequence(t=t, v=v_s, a=a, j=j, omega=omega, theta=theta, x=x, y=y)


def summarize(seq: StateSequence, heading_mode: str = "net") -> KinematicSummary:
    """Compute clip-level aggregates of a state sequence.

    heading_mode "net" measures |theta_end - theta_start| on the unwrapped
    heading; "sum" accumulates |d theta| so oscillation also counts.
    """
    if heading_mode not in ("net", "sum"):
        raise ValueError("heading_mode must be 'net' or 'sum'")
    theta_u = np.unwrap(seq.theta)
    if heading_mode == "net":
        heading_change = float(abs(theta_u[-1] - theta_u[0]))
    else:
        heading_change = float(np.sum(np.abs(np.diff(theta_u))))
    abs_jerk = np.abs(seq.j)
    lat = seq.v * np.abs(seq.omega)
    pct = {
        "accel": {
            "p25": float(np.percentile(seq.a, 25)),
            "p50": float(np.percentile(seq.a, 50)),
            "p75": float(np.percentile(seq.a, 75)),
        },
        "abs_jerk": {
            "p25": float(np.percentile(abs_jerk, 25)),
            "p50": float(np.percentile(abs_jerk, 50)),
            "p75": float(np.percentile(abs_jerk, 75)),
        },
    }
    return KinematicSummary(
        max_speed=float(np.max(seq.v)),
        mean_speed=float(np.mean(seq.v)),
        min_accel=float(np.min(seq.a)),
        max_accel=float(np.max(seq.a)),
        mean_accel=float(np.mean(seq.a)),
        max_abs_jerk=float(np.max(abs_jerk)),
        mean_abs_jerk=float(np.mean(abs_jerk)),
        max_abs_yaw_rate=float(np.max(np.abs(seq.omega))),
        max_lat_accel=float(np.max(lat)),
        total_heading_change=heading_change,
        percentiles=pct,
    )


def stratification_tags(seq, summary, thresholds) -> dict[str, bool]:
    """Binary curation tags: has_turn, has_braking, has_aggressive.

    Defined through the labeling rules so the tags can never drift from
    the labels: a clip has a turn iff its turn label is not straight, has
    braking iff braking intensity is not none, and is aggressive iff the
    smoothness label is aggressive or the extreme-maneuver answer is yes.
    """
    from . import oracle  # local import; oracle depends on this module

    turn = oracle.label_turn_direction(seq, summary, thresholds).answer
    braking = oracle.label_braking_intensity(seq, summary, thresholds).answer
    smooth = oracle.label_driving_smoothness(seq, summary, thresholds).answer
    extreme = oracle.label_extreme_maneuver(seq, summary, thresholds).answer
    return {
        "has_turn": turn != "straight",
        "has_braking": braking != "none",
        "has_aggressive": smooth == "aggressive" or extreme == "yes",
    }


def stratification_bin(tags: dict[str, bool]) -> int:
    """Map the three binary tags onto one of 8 kinematic bins (0..7)."""
    return (
        (1 if tags["has_turn"] else 0)
        | (2 if tags["has_braking"] else 0)
        | (4 if tags["has_aggressive"] else 0)
    )
