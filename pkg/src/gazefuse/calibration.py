"""Gaze calibration: polynomial position map, linear velocity map, display delay."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCalibrationError, DimensionError, InputError
from .traces import ChannelTrace, VelocityTrace

__all__ = [
    "DELAY_COEFFS",
    "CalibrationTargets",
    "PolyCalibration",
    "VelocityCalibration",
    "apply_calibration",
    "display_delay",
    "extract_saccade_displacements",
    "fit_poly",
    "fit_velocity_map",
    "load_calibration",
    "poly_features",
    "save_calibration",
]

# delay_ms = a*x + b*y + c for stimulus position (x, y)
DELAY_COEFFS = (21.4, 4.26, -2.35)


def poly_features(uv):
    """Full quadratic basis [1, u, v, uv, u^2, v^2] for each row of ``uv``."""
    uv = np.atleast_2d(np.asarray(uv, dtype=np.float64))
    u, v = uv[:, 0], uv[:, 1]
    return np.column_stack([np.ones_like(u), u, v, u * v, u * u, v * v])


@dataclass(frozen=True, eq=False)
class PolyCalibration:
    coef_x: np.ndarray
    coef_y: np.ndarray
    rms_residual: float = 0.0

    def __post_init__(self):
        for name in ("coef_x", "coef_y"):
            c = np.asarray(getattr(self, name), dtype=np.float64)
            if c.shape != (6,):
                raise DimensionError(f"{name} must have 6 coefficients, got {c.shape}")
            object.__setattr__(self, name, c)

    def __call__(self, uv):
        F = poly_features(uv)
        return np.column_stack([F @ self.coef_x, F @ self.coef_y])

    @classmethod
    def identity(cls):
        return cls(np.array([0, 1.0, 0, 0, 0, 0]), np.array([0, 0, 1.0, 0, 0, 0]))


@dataclass(frozen=True, eq=False)
class VelocityCalibration:
    """Linear map from raw displacements to degrees: ``deg = M @ raw``."""

    M: np.ndarray
    rms_residual: float = 0.0
    condition: float = field(default=float("nan"))

    def __post_init__(self):
        M = np.asarray(self.M, dtype=np.float64)
        if M.shape != (2, 2) or not np.all(np.isfinite(M)):
            raise DimensionError("velocity map must be a finite 2x2 matrix")
        object.__setattr__(self, "M", M)
        if np.isnan(self.condition):
            object.__setattr__(self, "condition", float(np.linalg.cond(M)))

    def __call__(self, d):
        return np.asarray(d, dtype=np.float64) @ self.M.T

    @classmethod
    def identity(cls):
        return cls(np.eye(2))


@dataclass(frozen=True, eq=False)
class CalibrationTargets:
    onsets: np.ndarray  # seconds
    positions: np.ndarray  # degrees, shape (m, 2)

    def __post_init__(self):
        onsets = np.asarray(self.onsets, dtype=np.float64)
        pos = np.asarray(self.positions, dtype=np.float64).reshape(-1, 2)
        if onsets.shape != (len(pos),):
            raise DimensionError("one onset per target position is required")
        if np.any(np.diff(onsets) <= 0):
            raise InputError("target onsets must be strictly increasing")
        object.__setattr__(self, "onsets", onsets)
        object.__setattr__(self, "positions", pos)

    def __len__(self):
        return len(self.onsets)


def fit_poly(raw, targets):
    """Least-squares quadratic map from raw (u, v) to target (x, y)."""
    raw = np.asarray(raw, dtype=np.float64).reshape(-1, 2)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1, 2)
    if len(raw) != len(targets):
        raise DimensionError(f"{len(raw)} raw samples for {len(targets)} targets")
    F = poly_features(raw)
    if len(raw) < 6 or np.linalg.matrix_rank(F) < 6:
        raise DegenerateCalibrationError("calibration points do not determine a quadratic map")
    coef, *_ = np.linalg.lstsq(F, targets, rcond=None)
    resid = F @ coef - targets
    rms = float(np.sqrt(np.mean(np.sum(resid**2, axis=1))))
    return PolyCalibration(coef[:, 0], coef[:, 1], rms)


def fit_velocity_map(raw_deltas, target_deltas):
    """Least-squares 2x2 map taking raw saccade displacements to target displacements."""
    R = np.asarray(raw_deltas, dtype=np.float64).reshape(-1, 2)
    T = np.asarray(target_deltas, dtype=np.float64).reshape(-1, 2)
    if len(R) != len(T):
        raise DimensionError(f"{len(R)} raw displacements for {len(T)} targets")
    if len(R) < 2 or np.linalg.matrix_rank(R) < 2:
        raise DegenerateCalibrationError("saccade displacements span fewer than 2 directions")
    Mt, *_ = np.linalg.lstsq(R, T, rcond=None)
    resid = R @ Mt - T
    rms = float(np.sqrt(np.mean(np.sum(resid**2, axis=1))))
    return VelocityCalibration(Mt.T, rms)


def display_delay(x, y, coeffs=DELAY_COEFFS):
    """Display latency in ms for a stimulus drawn at (x, y)."""
    a, b, c = coeffs
    return a * x + b * y + c


def extract_saccade_displacements(velocity: VelocityTrace, targets: CalibrationTargets,
                                  margin_ms=30.0, landing_fraction=0.2):
    """Raw displacement of each calibration saccade, paired with the target step.

    For each target transition the peak speed between its onset and the
    next onset marks the saccade; onset and landing are the nearest edges
    on either side whose speed drops below ``landing_fraction`` of the peak.
    The velocity is summed from ``margin_ms`` before onset to ``margin_ms``
    after landing.

    Returns (raw_deltas, target_deltas), each of shape (m - 1, 2).
    """
    v = velocity.v
    speed = np.hypot(v[:, 0], v[:, 1])
    dt = velocity.dt
    margin = int(round(margin_ms / 1000.0 / dt))
    # edge k is centred half a frame after sample k
    edge_t = velocity.t0 + dt * (np.arange(len(v)) + 0.5)
    ends = np.append(targets.onsets[1:], np.inf)

    raw, tgt = [], []
    for k in range(1, len(targets)):
        lo = int(np.searchsorted(edge_t, targets.onsets[k]))
        hi = int(np.searchsorted(edge_t, ends[k]))
        if hi - lo < 2:
            raise InputError(f"no velocity samples after calibration target {k}")
        peak = lo + int(np.argmax(speed[lo:hi]))
        cut = landing_fraction * speed[peak]
        onset = peak
        while onset > lo and speed[onset - 1] >= cut:
            onset -= 1
        landing = peak
        while landing + 1 < hi and speed[landing + 1] >= cut:
            landing += 1
        a = max(onset - margin, 0)
        b = min(landing + margin, len(v) - 1)
        raw.append(v[a : b + 1].sum(axis=0))
        tgt.append(targets.positions[k] - targets.positions[k - 1])
    return np.array(raw), np.array(tgt)


def apply_calibration(P: ChannelTrace, i: VelocityTrace, pc: PolyCalibration, vc: VelocityCalibration):
    """Map the position channel through ``pc`` and the velocity channel through ``vc``."""
    return P.with_xy(pc(P.xy)), i.with_v(vc(i.v))


def save_calibration(path, pc: PolyCalibration, vc: VelocityCalibration):
    """Write the calibration as JSON; ``None`` or ``"-"`` writes to stdout."""
    doc = {
        "poly": {"x": pc.coef_x.tolist(), "y": pc.coef_y.tolist()},
        "velocity": vc.M.tolist(),
        "residuals": {"poly_rms": pc.rms_residual, "velocity_rms": vc.rms_residual,
                      "velocity_condition": vc.condition},
    }
    if path is None or str(path) == "-":
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_calibration(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read calibration {path}: {exc}") from None
    except ValueError as exc:
        raise InputError(f"{path}: calibration is not valid JSON ({exc})") from None
    try:
        res = doc.get("residuals", {})
        pc = PolyCalibration(doc["poly"]["x"], doc["poly"]["y"], res.get("poly_rms", 0.0))
        vc = VelocityCalibration(doc["velocity"], res.get("velocity_rms", 0.0))
    except (KeyError, TypeError, AttributeError) as exc:
        raise InputError(f"{path}: malformed calibration file ({exc})") from None
    return pc, vc
