"""Head/camera motion compensation and corneal-reflection centre estimation."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionError, MissingCRError
from .traces import ChannelTrace, VelocityTrace

__all__ = ["CRCenter", "combine_glints", "compensate", "fit_circle"]


class CRCenter(NamedTuple):
    x: float
    y: float
    method: str  # "circle", "centroid" or "collinear" (centroid fallback)


def fit_circle(points):
    """Algebraic (Kasa) least-squares circle fit.

    Solves ``2*a*x + 2*b*y + c = x^2 + y^2`` for the centre (a, b); the
    radius is ``sqrt(c + a^2 + b^2)``. Coordinates are centred first to
    keep the normal equations well conditioned.

    Returns (a, b, r, rank).
    """
    pts = np.asarray(points, dtype=np.float64)
    origin = pts.mean(axis=0)
    q = pts - origin
    A = np.column_stack([2 * q[:, 0], 2 * q[:, 1], np.ones(len(q))])
    rhs = (q**2).sum(axis=1)
    sol, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
    a, b, c = sol
    r = np.sqrt(max(c + a * a + b * b, 0.0))
    return a + origin[0], b + origin[1], r, rank


def combine_glints(glints, valid=None):
    """CR centre for one frame.

    Three or more valid glints give the centre of the best-fit circle; one
    or two give their centroid, as do collinear glints.
    """
    pts = np.asarray(glints, dtype=np.float64).reshape(-1, 2)
    if valid is not None:
        pts = pts[np.asarray(valid, dtype=bool)]
    if len(pts) == 0:
        raise MissingCRError("no valid glints in frame")
    if len(pts) < 3:
        cx, cy = pts.mean(axis=0)
        return CRCenter(float(cx), float(cy), "centroid")
    cx, cy, _, rank = fit_circle(pts)
    if rank < 3:
        cx, cy = pts.mean(axis=0)
        return CRCenter(float(cx), float(cy), "collinear")
    return CRCenter(float(cx), float(cy), "circle")


def compensate(P: ChannelTrace, CR: ChannelTrace, i: VelocityTrace, Hv: VelocityTrace):
    """Subtract the compensatory motion from each channel.

    Returns ``(P - CR, i - Hv)``. The position confidence is the smaller of
    the paired confidences; the velocity keeps the iris match counts.
    """
    if len(P) != len(CR) or P.xy.shape != CR.xy.shape:
        raise DimensionError(f"pupil {P.xy.shape} and CR {CR.xy.shape} differ")
    if len(i) != len(Hv) or i.v.shape != Hv.v.shape:
        raise DimensionError(f"iris {i.v.shape} and head {Hv.v.shape} velocities differ")
    pos = ChannelTrace(P.xy - CR.xy, P.dt, P.t0, np.minimum(P.confidence, CR.confidence))
    vel = VelocityTrace(i.v - Hv.v, i.dt, i.t0, i.n_matches)
    return pos, vel
