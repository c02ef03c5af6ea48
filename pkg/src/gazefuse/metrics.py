"""Accuracy and precision measures for fixations and smooth pursuit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidWindowError
from .traces import ChannelTrace

__all__ = [
    "PrecisionReport",
    "PursuitSegment",
    "Ramp",
    "accuracy",
    "detrend_pursuit",
    "dispersion",
    "fixation_window",
    "precision_report",
    "s2s_rms",
    "std_precision",
]


@dataclass(frozen=True)
class PrecisionReport:
    s2s_rms: float
    std: float
    n_samples: int
    window: tuple
    accuracy: tuple = (float("nan"), float("nan"))
    n_excluded: int = 0


def _xy(trace):
    return trace.xy if isinstance(trace, ChannelTrace) else np.atleast_2d(np.asarray(trace, dtype=np.float64))


def _window(xy, window):
    """Half-open [start, stop) slice of the samples; whole trace if None."""
    start, stop = (0, len(xy)) if window is None else window
    if start < 0 or stop > len(xy) or stop - start < 2:
        raise InvalidWindowError(f"window {window} invalid for {len(xy)} samples")
    return xy[start:stop]


def s2s_rms(trace, window=None):
    """Root mean square of sample-to-sample displacement; divisor is the number of differences."""
    xy = _window(_xy(trace), window)
    d = np.diff(xy, axis=0)
    return float(np.sqrt(np.sum(d * d) / len(d)))


def std_precision(trace, window=None):
    """sqrt((var_x + var_y) / 2) with population variances."""
    xy = _window(_xy(trace), window)
    var = xy.var(axis=0)
    return float(np.sqrt(var.sum() / 2.0)) if xy.shape[1] == 2 else float(np.sqrt(var[0]))


def dispersion(xy):
    return float(np.sum(xy.max(axis=0) - xy.min(axis=0)))


def fixation_window(trace: ChannelTrace, target_onset, span_ms=450.0, search_end=None):
    """The ``span_ms`` window starting at or after ``target_onset`` with least dispersion.

    Dispersion is the summed per-axis extent (max - min). Windows must end
    by ``search_end`` (seconds, default: end of trace). Ties go to the
    earliest window.
    """
    xy = trace.xy
    length = int(round(span_ms / 1000.0 / trace.dt))
    length = max(length, 2)
    first = int(np.ceil((target_onset - trace.t0) / trace.dt - 1e-9))
    first = max(first, 0)
    stop = len(xy)
    if search_end is not None:
        stop = min(stop, int(np.floor((search_end - trace.t0) / trace.dt + 1e-9)))
    if stop - first < length:
        raise InvalidWindowError(
            f"need {length} samples after onset {target_onset:.3f}s, have {max(stop - first, 0)}"
        )
    views = sliding_window_view(xy[first:stop], length, axis=0)  # (m, axes, length)
    disp = np.sum(views.max(axis=2) - views.min(axis=2), axis=1)
    best = int(np.argmin(disp))
    return (first + best, first + best + length)


def accuracy(trace: ChannelTrace, window, target):
    """``target - mean(gaze)`` over the window, skipping zero-confidence samples.

    Returns (offset, n_excluded).
    """
    start, stop = window
    xy = trace.xy[start:stop]
    keep = trace.confidence[start:stop] > 0
    if not np.any(keep):
        raise InvalidWindowError(f"window {window} has no valid samples")
    offset = np.asarray(target, dtype=np.float64) - xy[keep].mean(axis=0)
    return offset, int(np.count_nonzero(~keep))


def precision_report(trace: ChannelTrace, window, target=None):
    acc, excluded = (np.array([np.nan, np.nan]), 0) if target is None else accuracy(trace, window, target)
    return PrecisionReport(
        s2s_rms=s2s_rms(trace, window),
        std=std_precision(trace, window),
        n_samples=window[1] - window[0],
        window=tuple(window),
        accuracy=(float(acc[0]), float(acc[1])),
        n_excluded=excluded,
    )


@dataclass(frozen=True)
class Ramp:
    """One constant-velocity stimulus leg: ``start_pos + velocity*(t - t_start)``."""

    t_start: float
    t_end: float
    start_pos: tuple
    velocity: tuple  # units per second

    def position(self, t):
        t = np.asarray(t, dtype=np.float64)[:, None]
        return np.asarray(self.start_pos, dtype=np.float64) + np.asarray(self.velocity, dtype=np.float64) * (t - self.t_start)


@dataclass(frozen=True, eq=False)
class PursuitSegment:
    start: int
    end: int  # inclusive
    start_point: tuple  # (time, gaze xy)
    end_point: tuple
    slope: np.ndarray  # trend velocity, units per second
    detrended: ChannelTrace


def _zscore(a):
    sd = a.std()
    return (a - a.mean()) / sd if sd > 0 else np.zeros_like(a)


def detrend_pursuit(trace: ChannelTrace, stimulus: Ramp, search_fraction=0.5):
    """Remove the pursuit trend from one stimulus leg.

    The starting point is the sample whose position and velocity errors
    against the stimulus are jointly smallest (each z-normalised over the
    leg, equal weights), searched within the first ``search_fraction`` of
    the leg. The ending point is the last sample before the stimulus
    changes direction. The line through the gaze at those two samples is
    subtracted from the segment between them.
    """
    t = trace.times
    idx = np.flatnonzero((t >= stimulus.t_start - 1e-12) & (t < stimulus.t_end - 1e-12))
    if idx.size < 4:
        raise InvalidWindowError("pursuit leg shorter than 4 samples")
    lo, end = int(idx[0]), int(idx[-1])
    xy = trace.xy[lo : end + 1]
    stim = stimulus.position(t[lo : end + 1])
    gaze_vel = np.gradient(xy, trace.dt, axis=0)
    pos_err = np.linalg.norm(xy - stim, axis=1)
    vel_err = np.linalg.norm(gaze_vel - np.asarray(stimulus.velocity, dtype=np.float64), axis=1)
    cost = _zscore(pos_err) + _zscore(vel_err)
    n_search = max(1, min(len(cost) - 3, int(np.ceil(search_fraction * len(cost)))))
    start = lo + int(np.argmin(cost[:n_search]))
    if end - start + 1 < 4:
        raise InvalidWindowError("detrended pursuit segment shorter than 4 samples")

    seg = trace.xy[start : end + 1]
    ts = t[start : end + 1]
    slope = (seg[-1] - seg[0]) / (ts[-1] - ts[0])
    line = seg[0] + slope * (ts - ts[0])[:, None]
    detrended = ChannelTrace(seg - line, trace.dt, ts[0], trace.confidence[start : end + 1])
    return PursuitSegment(
        start=start,
        end=end,
        start_point=(float(ts[0]), tuple(seg[0])),
        end_point=(float(ts[-1]), tuple(seg[-1])),
        slope=slope,
        detrended=detrended,
    )
