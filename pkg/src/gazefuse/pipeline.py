"""End-to-end processing of recorded traces: compensate, calibrate, weight, fuse."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .calibration import (
    CalibrationTargets,
    apply_calibration,
    extract_saccade_displacements,
    fit_poly,
    fit_velocity_map,
)
from .compensation import combine_glints, compensate
from .confidence import build_weight_schedule
from .config import RunConfig
from .errors import DimensionError, InputError, MissingCRError
from .fusion import FusionResult, fuse
from .io import RawTrace
from .metrics import fixation_window
from .traces import ChannelTrace, VelocityTrace

log = logging.getLogger(__name__)

__all__ = ["EyeChannels", "calibrate_eye", "cyclopean", "fuse_eye", "split_channels"]


@dataclass(frozen=True, eq=False)
class EyeChannels:
    """Compensated (P - CR) position and (iris - head) velocity of one eye, raw units."""

    position: ChannelTrace
    velocity: VelocityTrace


def _fill_gaps(values, valid, what):
    """Linear interpolation over invalid samples, per column."""
    if valid.all():
        return values
    if not valid.any():
        raise InputError(f"no valid {what} samples in trace")
    idx = np.arange(len(values))
    out = values.copy()
    for c in range(values.shape[1]):
        out[:, c] = np.interp(idx, idx[valid], values[valid, c])
    return out


def _cr_positions(raw: RawTrace):
    cr = raw.cr.copy()
    have = np.all(np.isfinite(cr), axis=1)
    for k in np.flatnonzero(~have):
        pts, valid = raw.glints[k]
        if valid.any():
            c = combine_glints(pts, valid)
            cr[k] = (c.x, c.y)
            have[k] = True
    if not have.any():
        raise MissingCRError("trace has no corneal reflection in any sample")
    return _fill_gaps(cr, have, "CR"), have


def split_channels(raw: RawTrace):
    """Build the compensated channels of one recorded eye.

    Missing pupil or CR samples get confidence 0 and are bridged linearly.
    Velocity rows describe the motion into their frame, so rows 1..n-1 give
    the n-1 edges. A missing iris velocity counts as no motion with zero
    matches; a missing match count means the velocity is fully trusted.
    """
    pupil_ok = np.all(np.isfinite(raw.pupil), axis=1)
    pupil = _fill_gaps(raw.pupil, pupil_ok, "pupil")
    cr, cr_ok = _cr_positions(raw)
    conf = np.where(pupil_ok & cr_ok, raw.pupil_conf, 0.0)

    iris = raw.iris_v[1:].copy()
    iris_ok = np.all(np.isfinite(iris), axis=1)
    iris[~iris_ok] = 0.0
    matches = raw.n_matches[1:]
    trusted = np.iinfo(np.int64).max // 2
    matches = np.where(np.isnan(matches), trusted, np.nan_to_num(matches)).astype(np.int64)
    matches[~iris_ok] = 0
    head = np.nan_to_num(raw.head_v[1:], nan=0.0)

    t0 = float(raw.t[0])
    P = ChannelTrace(pupil, raw.dt, t0, conf)
    CR = ChannelTrace(cr, raw.dt, t0)
    i = VelocityTrace(iris, raw.dt, t0, matches)
    Hv = VelocityTrace(head, raw.dt, t0)
    pos, vel = compensate(P, CR, i, Hv)
    return EyeChannels(pos, vel)


def fuse_eye(raw: RawTrace, cfg=RunConfig(), calibration=None) -> FusionResult:
    """Fused gaze for one eye; ``calibration`` is (PolyCalibration, VelocityCalibration) or None for raw units."""
    ch = split_channels(raw)
    P, i = ch.position, ch.velocity
    if calibration is not None:
        P, i = apply_calibration(P, i, *calibration)
    w = build_weight_schedule(P.confidence, i.n_matches, cfg=cfg.confidence)
    return fuse(P, i, w)


def cyclopean(left: FusionResult, right: FusionResult) -> FusionResult:
    """Midpoint of two eyes sampled on the same grid."""
    a, b = left.hybrid, right.hybrid
    if len(a) != len(b) or not np.isclose(a.dt, b.dt, rtol=1e-9, atol=0):
        raise DimensionError(f"eye traces differ in grid: {len(a)}@{a.dt} vs {len(b)}@{b.dt}")
    if abs(a.t0 - b.t0) > 0.5 * a.dt:
        raise DimensionError("eye traces start at different times")
    conf = np.minimum(a.confidence, b.confidence)
    xy = 0.5 * (a.xy + b.xy)
    variance = 0.25 * (left.variance + right.variance)
    return FusionResult(ChannelTrace(xy, a.dt, a.t0, conf), variance, conf)


def calibrate_eye(raw: RawTrace, onsets, positions, cfg=RunConfig()):
    """Fit the position polynomial and the velocity map from a calibration recording.

    The raw point for each target is the median P - CR over that target's
    least-dispersed fixation window; the velocity map pairs the raw iris
    displacement of each saccade with the target step.
    """
    targets = CalibrationTargets(onsets, positions)
    ch = split_channels(raw)
    ends = np.append(targets.onsets[1:], np.inf)
    raw_points = []
    for onset, end in zip(targets.onsets, ends):
        start, stop = fixation_window(ch.position, onset, cfg.calibration.fixation_span_ms,
                                      None if np.isinf(end) else end)
        seg = ch.position.xy[start:stop]
        keep = ch.position.confidence[start:stop] > 0
        raw_points.append(np.median(seg[keep] if keep.any() else seg, axis=0))
    pc = fit_poly(np.array(raw_points), targets.positions)
    raw_d, tgt_d = extract_saccade_displacements(
        ch.velocity, targets, cfg.calibration.margin_ms, cfg.calibration.landing_fraction
    )
    vc = fit_velocity_map(raw_d, tgt_d)
    log.info("calibration rms: position %.4g, velocity %.4g", pc.rms_residual, vc.rms_residual)
    return pc, vc
