"""Gradient-domain fusion of a position channel with a velocity channel.

The hybrid position is the posterior mean under a Gaussian likelihood on
the positions and a Gaussian prior on the first differences:

    (diag(beta_p) + D^T diag(beta_i) D) H = beta_p * P + D^T diag(beta_i) i

where ``D`` is the forward-difference operator and ``i`` holds the
observed per-edge velocities. The matrix is symmetric tridiagonal and is
solved in O(n) by an L D L^T factorization. Because only ``i`` enters the
right-hand side, any constant of integration of the velocity channel
drops out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DimensionError, InvalidLengthError, NumericalError, SingularSystemError, WeightFloorError
from .traces import ChannelTrace, VelocityTrace

__all__ = [
    "DEFAULT_FLOOR",
    "DifferenceOperator",
    "FusionResult",
    "FusionSystem",
    "WeightSchedule",
    "assemble_system",
    "build_difference_operator",
    "constant_weights",
    "fuse",
    "solve",
]

DEFAULT_FLOOR = 1e-8
RESIDUAL_RTOL = 1e-9


@dataclass(frozen=True)
class DifferenceOperator:
    """The (n-1) x n forward first-difference matrix, kept implicit."""

    n: int

    @property
    def shape(self):
        return (self.n - 1, self.n)

    def apply(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.n:
            raise DimensionError(f"expected {self.n} rows, got {v.shape[0]}")
        return v[1:] - v[:-1]

    def apply_transpose(self, w):
        w = np.asarray(w, dtype=np.float64)
        if w.shape[0] != self.n - 1:
            raise DimensionError(f"expected {self.n - 1} rows, got {w.shape[0]}")
        out = np.zeros((self.n,) + w.shape[1:])
        out[:-1] -= w
        out[1:] += w
        return out

    def toarray(self):
        m = np.zeros(self.shape)
        k = np.arange(self.n - 1)
        m[k, k] = -1.0
        m[k, k + 1] = 1.0
        return m


def build_difference_operator(n):
    if n < 2:
        raise InvalidLengthError(f"difference operator needs n >= 2, got {n}")
    return DifferenceOperator(int(n))


@dataclass(frozen=True, eq=False)
class WeightSchedule:
    """Per-sample position weights and per-edge velocity weights (1/variance)."""

    beta_p: np.ndarray
    beta_i: np.ndarray
    floor: float = DEFAULT_FLOOR
    confidence: np.ndarray | None = None

    def __post_init__(self):
        bp = np.asarray(self.beta_p, dtype=np.float64)
        bi = np.asarray(self.beta_i, dtype=np.float64)
        if bp.ndim != 1 or bi.ndim != 1:
            raise DimensionError("beta_p and beta_i must be 1D")
        if not self.floor > 0:
            raise WeightFloorError(f"weight floor must be positive, got {self.floor}")
        if np.any(bi < 0) or not np.all(np.isfinite(bi)):
            raise WeightFloorError("beta_i must be finite and nonnegative")
        object.__setattr__(self, "beta_p", bp)
        object.__setattr__(self, "beta_i", bi)
        if self.confidence is not None:
            object.__setattr__(self, "confidence", np.asarray(self.confidence, dtype=np.float64))


def constant_weights(n, beta_p, beta_i, floor=DEFAULT_FLOOR):
    """Schedule with the same weights at every sample and edge."""
    return WeightSchedule(np.full(n, float(beta_p)), np.full(n - 1, float(beta_i)), floor)


@dataclass(frozen=True, eq=False)
class FusionSystem:
    """Tridiagonal precision matrix and one right-hand side column per axis."""

    diag: np.ndarray
    offdiag: np.ndarray
    rhs: np.ndarray

    def __len__(self):
        return len(self.diag)

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        off = self.offdiag[:, None]
        y = self.diag[:, None] * x
        y[:-1] += off * x[1:]
        y[1:] += off * x[:-1]
        return y

    def toarray(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True, eq=False)
class FusionResult:
    hybrid: ChannelTrace
    variance: np.ndarray
    overall_confidence: np.ndarray | None = None


def assemble_system(P: ChannelTrace, i: VelocityTrace, w: WeightSchedule) -> FusionSystem:
    n = len(P)
    if n < 2:
        raise InvalidLengthError(f"fusion needs at least 2 samples, got {n}")
    if len(i) != n - 1:
        raise DimensionError(f"velocity has {len(i)} edges, expected {n - 1}")
    if len(w.beta_p) != n or len(w.beta_i) != n - 1:
        raise DimensionError(
            f"weights have {len(w.beta_p)}/{len(w.beta_i)} entries, expected {n}/{n - 1}"
        )
    if P.xy.shape[1] != i.v.shape[1]:
        raise DimensionError("position and velocity have different axis counts")
    below = np.flatnonzero(~(w.beta_p >= w.floor))
    if below.size:
        raise WeightFloorError(f"beta_p below floor {w.floor} at sample {below[0]}")

    bi = w.beta_i
    diag = w.beta_p.copy()
    diag[:-1] += bi
    diag[1:] += bi
    flux = bi[:, None] * i.v
    rhs = w.beta_p[:, None] * P.xy
    rhs[:-1] -= flux
    rhs[1:] += flux
    return FusionSystem(diag, -bi.copy(), rhs)


def solve(system: FusionSystem, t0=0.0, dt=1.0, confidence=None) -> FusionResult:
    """Solve the system; returns the hybrid trace and the diagonal of the covariance."""
    n = len(system)
    pivots = np.empty(n)
    lower = np.empty(n - 1)
    bad = kernels.ldl_factor(
        np.ascontiguousarray(system.diag), np.ascontiguousarray(system.offdiag), pivots, lower
    )
    if bad >= 0:
        raise SingularSystemError(bad)
    x = np.array(system.rhs, dtype=np.float64, order="C", copy=True)
    kernels.ldl_solve(pivots, lower, x)
    variance = np.empty(n)
    kernels.ldl_inverse_diagonal(pivots, lower, variance)

    scale = np.max(np.abs(system.rhs)) if system.rhs.size else 0.0
    resid = np.max(np.abs(system.matvec(x) - system.rhs)) if system.rhs.size else 0.0
    if not resid <= RESIDUAL_RTOL * scale:
        raise NumericalError(f"residual {resid:.3g} exceeds tolerance (rhs scale {scale:.3g})")

    hybrid = ChannelTrace(x, dt, t0, confidence)
    return FusionResult(hybrid, variance, confidence)


def fuse(P: ChannelTrace, i: VelocityTrace, w: WeightSchedule) -> FusionResult:
    """Hybrid position from an absolute-position and a velocity channel."""
    from .confidence import overall_confidence

    system = assemble_system(P, i, w)
    conf = w.confidence if w.confidence is not None else overall_confidence(w)
    return solve(system, t0=P.t0, dt=P.dt, confidence=conf)
