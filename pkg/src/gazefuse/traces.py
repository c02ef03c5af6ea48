"""Uniformly sampled 2D position and velocity traces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InputError


def _as_xy(values, name):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] not in (1, 2):
        raise DimensionError(f"{name} must have shape (n, 2) or (n,), got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ChannelTrace:
    """Absolute-position samples ``xy`` of shape (n, 2) taken every ``dt`` seconds.

    A 1D signal is stored as shape (n, 1). ``confidence`` defaults to ones.
    """

    xy: np.ndarray
    dt: float
    t0: float = 0.0
    confidence: np.ndarray | None = field(default=None)

    def __post_init__(self):
        xy = _as_xy(self.xy, "xy")
        if not self.dt > 0:
            raise InputError(f"dt must be positive, got {self.dt}")
        if self.confidence is None:
            conf = np.ones(len(xy))
        else:
            conf = np.asarray(self.confidence, dtype=np.float64)
            if conf.shape != (len(xy),):
                raise DimensionError(f"confidence has shape {conf.shape}, expected ({len(xy)},)")
            if np.any(conf < 0) or np.any(conf > 1):
                raise InputError("confidence values must lie in [0, 1]")
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "confidence", conf)

    def __len__(self):
        return len(self.xy)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self))

    def with_xy(self, xy):
        return ChannelTrace(xy, self.dt, self.t0, self.confidence)


@dataclass(frozen=True, eq=False)
class VelocityTrace:
    """Per-edge displacements in units/frame; edge k spans samples k and k+1.

    ``n_matches`` counts matched features per edge (defaults to a large
    number so that unannotated velocities are fully trusted).
    """

    v: np.ndarray
    dt: float
    t0: float = 0.0
    n_matches: np.ndarray | None = field(default=None)

    def __post_init__(self):
        v = _as_xy(self.v, "v")
        if not self.dt > 0:
            raise InputError(f"dt must be positive, got {self.dt}")
        if self.n_matches is None:
            matches = np.full(len(v), np.iinfo(np.int64).max // 2, dtype=np.int64)
        else:
            matches = np.asarray(self.n_matches)
            if matches.shape != (len(v),):
                raise DimensionError(f"n_matches has shape {matches.shape}, expected ({len(v)},)")
            if np.any(matches < 0):
                raise InputError("n_matches must be nonnegative")
            matches = matches.astype(np.int64)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "n_matches", matches)

    def __len__(self):
        return len(self.v)

    def with_v(self, v):
        return VelocityTrace(v, self.dt, self.t0, self.n_matches)

    def integrate(self, start=0.0):
        """Cumulative position, one sample longer than the edge list."""
        start = np.broadcast_to(np.asarray(start, dtype=np.float64), (self.v.shape[1],))
        out = np.empty((len(self.v) + 1, self.v.shape[1]))
        out[0] = start
        np.cumsum(self.v, axis=0, out=out[1:])
        out[1:] += start
        return out
