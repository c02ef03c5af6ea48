"""Blink classification and confidence weights for the two channels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .fusion import DEFAULT_FLOOR, WeightSchedule

__all__ = [
    "BlinkRecord",
    "ConfidenceConfig",
    "apply_linear_decay",
    "build_weight_schedule",
    "classify_blinks",
    "iris_weight",
    "overall_confidence",
]


@dataclass(frozen=True)
class ConfidenceConfig:
    min_matches: int = 50
    conf_threshold: float = 0.3
    beta_cap: float = 0.9
    decay_span: int = 2
    weight_floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        if self.min_matches < 1:
            raise ConfigError("min_matches must be >= 1")
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise ConfigError("conf_threshold must lie in [0, 1]")
        if not 0.0 < self.beta_cap <= 1.0:
            raise ConfigError("beta_cap must lie in (0, 1]")
        if self.decay_span < 0:
            raise ConfigError("decay_span must be >= 0")
        if not self.weight_floor > 0:
            raise ConfigError("weight floor must be positive")


@dataclass(frozen=True)
class BlinkRecord:
    start: int
    end: int  # inclusive
    kind: str  # "partial" | "complete"

    @property
    def interval(self):
        return (self.start, self.end)


def iris_weight(n_matches, cfg=ConfidenceConfig()):
    """Velocity weight from the feature-match count, ``min(cap, cap*n/min_matches)``.

    Accepts a scalar or an array of counts.
    """
    n = np.asarray(n_matches, dtype=np.float64)
    out = np.minimum(cfg.beta_cap, cfg.beta_cap * n / cfg.min_matches)
    return float(out) if out.ndim == 0 else out


def apply_linear_decay(raw_beta_i, cfg=ConfidenceConfig()):
    """Soften drops below the cap with linear ramps into the neighbouring edges.

    Each edge ``j`` with ``raw[j] < cap`` defines a ramp that rises from
    ``raw[j]`` to ``cap`` over ``decay_span`` edges on either side. The
    result is the pointwise minimum of the input and every ramp.
    """
    raw = np.asarray(raw_beta_i, dtype=np.float64)
    out = raw.copy()
    span = cfg.decay_span
    if span == 0 or raw.size < 2:
        return out
    cap = cfg.beta_cap
    for j in np.flatnonzero(raw < cap):
        low = raw[j]
        for d in range(1, span):
            ramp = low + (cap - low) * d / span
            if j - d >= 0 and ramp < out[j - d]:
                out[j - d] = ramp
            if j + d < raw.size and ramp < out[j + d]:
                out[j + d] = ramp
    return out


def _adjacent_edges(k, n):
    return [e for e in (k - 1, k) if 0 <= e < n - 1]


def classify_blinks(pupil_conf, n_matches, cfg=ConfidenceConfig()):
    """Find blink intervals from pupil confidence and iris match counts.

    A sample is blinking when its pupil confidence is below the threshold.
    It is a complete blink when an adjacent edge has no iris matches at all
    (the iris is hidden in that frame) and a partial blink otherwise.
    Maximal runs of one kind become one record.
    """
    conf = np.asarray(pupil_conf, dtype=np.float64)
    matches = np.asarray(n_matches)
    n = conf.size
    if matches.size != max(n - 1, 0):
        raise DimensionError(f"{matches.size} match counts for {n} samples")

    kinds = []
    for k in range(n):
        if not conf[k] < cfg.conf_threshold:
            kinds.append(None)
            continue
        edges = _adjacent_edges(k, n)
        complete = any(matches[e] == 0 for e in edges) if edges else True
        kinds.append("complete" if complete else "partial")

    records = []
    k = 0
    while k < n:
        kind = kinds[k]
        if kind is None:
            k += 1
            continue
        start = k
        while k + 1 < n and kinds[k + 1] == kind:
            k += 1
        records.append(BlinkRecord(start, k, kind))
        k += 1
    return records


def _edge_mean_per_sample(beta_i, n):
    total = np.zeros(n)
    count = np.zeros(n)
    total[:-1] += beta_i
    total[1:] += beta_i
    count[:-1] += 1
    count[1:] += 1
    return total / np.maximum(count, 1)


def overall_confidence(w: WeightSchedule):
    """``beta_p`` plus the mean weight of the adjacent edges, clamped to [0, 1]."""
    n = w.beta_p.size
    if n < 2:
        return np.clip(w.beta_p, 0.0, 1.0)
    return np.clip(w.beta_p + _edge_mean_per_sample(w.beta_i, n), 0.0, 1.0)


def build_weight_schedule(pupil_conf, n_matches, blinks=None, cfg=ConfidenceConfig()):
    """Weight schedule for one trace.

    Edge weights come from the match counts, softened by the linear decay.
    Position weights take the remainder so that each sample's weight and the
    mean of its adjacent edge weights sum to one. Inside complete blinks the
    interior edges get zero weight and the samples the floor weight; the
    reported confidence there is 0.
    """
    conf = np.asarray(pupil_conf, dtype=np.float64)
    matches = np.asarray(n_matches)
    n = conf.size
    if matches.size != n - 1:
        raise DimensionError(f"{matches.size} match counts for {n} samples")
    if blinks is None:
        blinks = classify_blinks(conf, matches, cfg)

    beta_i = apply_linear_decay(iris_weight(matches, cfg), cfg)
    complete = np.zeros(n, dtype=bool)
    for b in blinks:
        if b.kind == "complete":
            complete[b.start : b.end + 1] = True
            beta_i[b.start : b.end] = 0.0

    beta_p = 1.0 - _edge_mean_per_sample(beta_i, n)
    beta_p = np.maximum(beta_p, cfg.weight_floor)
    beta_p[complete] = cfg.weight_floor

    confidence = np.clip(beta_p + _edge_mean_per_sample(beta_i, n), 0.0, 1.0)
    confidence[complete] = 0.0
    return WeightSchedule(beta_p, beta_i, cfg.weight_floor, confidence)
