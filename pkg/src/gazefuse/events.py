"""Microsaccade detection on a fused velocity signal.

Pipeline: total-variation denoising of the per-frame velocity, a
two-component Gaussian mixture on the resulting speeds to place an
adaptive threshold, velocity-threshold identification (I-VT), and
counting of detections in a post-onset window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import ConfigError, DegenerateDistributionError, InputError

__all__ = [
    "EventConfig",
    "EventRecord",
    "GaussianMixture1D",
    "WindowCount",
    "adaptive_threshold",
    "count_in_windows",
    "detect_microsaccades",
    "fit_gmm_1d",
    "ivt_detect",
    "tv_denoise",
]


@dataclass(frozen=True)
class EventConfig:
    tv_lambda: float = 0.05
    window_ms: tuple = (100.0, 500.0)
    max_amplitude: float = 0.5  # degrees
    # flat noise, slow drift plateaus and movement
    gmm_components: int = 3
    gmm_restarts: int = 8
    seed: int = 0
    em_tol: float = 1e-8
    em_max_iter: int = 500

    def __post_init__(self):
        if not self.tv_lambda > 0:
            raise ConfigError("tv_lambda must be positive")
        lo, hi = self.window_ms
        if not lo < hi:
            raise ConfigError("window start must precede window end")
        if self.gmm_components < 2:
            raise ConfigError("gmm_components must be >= 2")
        if self.gmm_restarts < 1:
            raise ConfigError("gmm_restarts must be >= 1")
        object.__setattr__(self, "window_ms", (float(lo), float(hi)))


@dataclass(frozen=True)
class EventRecord:
    onset: int
    offset: int  # inclusive
    peak_velocity: float  # deg/s
    amplitude: float  # deg
    kind: str  # "microsaccade" | "saccade"


@dataclass(frozen=True)
class WindowCount:
    onset: float
    count: int
    extras: int


def tv_denoise(v, lam):
    """Exact minimiser of 0.5*||u - v||^2 + lam * TV(u)."""
    y = np.ascontiguousarray(v, dtype=np.float64)
    if y.ndim != 1:
        raise InputError("tv_denoise expects a 1D signal")
    if not lam > 0:
        raise InputError("lambda must be positive")
    out = np.empty_like(y)
    kernels.tv1d_denoise(y, float(lam), out)
    return out


@dataclass(frozen=True)
class GaussianMixture1D:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    log_likelihood: float
    n_iter: int


def _kmeanspp_1d(x, k, rng):
    centers = [x[rng.integers(len(x))]]
    for _ in range(1, k):
        d2 = np.min((x[:, None] - np.array(centers)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total <= 0:
            raise DegenerateDistributionError("speeds are constant")
        centers.append(x[rng.choice(len(x), p=d2 / total)])
    return np.sort(np.array(centers))


def _em(x, means, variances, weights, var_floor, tol, max_iter):
    prev = -np.inf
    ll = -np.inf
    it = 0
    for it in range(1, max_iter + 1):
        log_p = (
            np.log(weights)[None, :]
            - 0.5 * np.log(2 * np.pi * variances)[None, :]
            - 0.5 * (x[:, None] - means[None, :]) ** 2 / variances[None, :]
        )
        top = log_p.max(axis=1, keepdims=True)
        log_norm = top[:, 0] + np.log(np.exp(log_p - top).sum(axis=1))
        ll = float(log_norm.sum())
        resp = np.exp(log_p - log_norm[:, None])
        nk = resp.sum(axis=0) + 1e-300
        weights = np.maximum(nk / x.size, 1e-300)
        means = (resp * x[:, None]).sum(axis=0) / nk
        variances = (resp * (x[:, None] - means[None, :]) ** 2).sum(axis=0) / nk
        variances = np.maximum(variances, var_floor)
        if abs(ll - prev) < tol:
            break
        prev = ll
    return weights, means, variances, ll, it


def fit_gmm_1d(x, k=2, seed=0, n_init=1, tol=1e-8, max_iter=500):
    """EM for a k-component 1D Gaussian mixture.

    Each of the ``n_init`` starts is seeded by k-means++ from one RNG stream
    derived from ``seed``; the fit with the highest log-likelihood wins.
    Components are returned sorted by mean.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < k or np.ptp(x) == 0:
        raise DegenerateDistributionError("cannot fit a mixture to constant data")
    rng = np.random.default_rng(seed)
    var_floor = 1e-10 * x.var()
    best = None
    for _ in range(n_init):
        means = _kmeanspp_1d(x, k, rng)
        labels = np.argmin(np.abs(x[:, None] - means[None, :]), axis=1)
        weights = np.array([np.mean(labels == j) for j in range(k)])
        variances = np.array([x[labels == j].var() if np.any(labels == j) else x.var() for j in range(k)])
        variances = np.maximum(variances, var_floor)
        weights = np.maximum(weights, 1.0 / x.size)
        weights /= weights.sum()
        fit = _em(x, means, variances, weights, var_floor, tol, max_iter)
        if best is None or fit[3] > best[3]:
            best = fit
    weights, means, variances, ll, it = best
    order = np.argsort(means)
    return GaussianMixture1D(weights[order], means[order], variances[order], ll, it)


def _density_crossing(w1, m1, v1, w2, m2, v2):
    """Roots of w1*N(x; m1, v1) = w2*N(x; m2, v2) lying strictly between m1 and m2."""
    # log-density equality rearranged to a*x^2 + b*x + c = 0
    a = 1.0 / v2 - 1.0 / v1
    b = 2.0 * (m1 / v1 - m2 / v2)
    c = m2 * m2 / v2 - m1 * m1 / v1 + np.log(v2 / v1) - 2.0 * np.log(w2 / w1)
    if abs(a) < 1e-14 * max(1.0 / v1, 1.0 / v2):
        roots = [] if b == 0 else [-c / b]
    else:
        disc = b * b - 4 * a * c
        if disc < 0:
            roots = []
        else:
            s = np.sqrt(disc)
            roots = [(-b + s) / (2 * a), (-b - s) / (2 * a)]
    return sorted(r for r in roots if m1 < r < m2)


def adaptive_threshold(speeds, components=2, seed=0, n_init=1, tol=1e-8, max_iter=500):
    """Speed separating the fastest mixture component from the one below it.

    With two components these are the noise and movement populations. The
    threshold is where their weighted densities cross between the two
    means; without such a crossing it is the lower mean plus three
    standard deviations.
    """
    s = np.asarray(speeds, dtype=np.float64)
    if s.size < 50:
        raise InputError(f"adaptive threshold needs at least 50 samples, got {s.size}")
    if np.any(s < 0):
        raise InputError("speeds must be nonnegative")
    gmm = fit_gmm_1d(s, k=components, seed=seed, n_init=n_init, tol=tol, max_iter=max_iter)
    w, m, v = gmm.weights[-2:], gmm.means[-2:], gmm.variances[-2:]
    roots = _density_crossing(w[0], m[0], v[0], w[1], m[1], v[1])
    if roots:
        return float(roots[0])
    return float(m[0] + 3.0 * np.sqrt(v[0]))


def ivt_detect(velocity, threshold, dt, cfg=EventConfig()):
    """Label maximal runs with speed above ``threshold`` as events.

    ``velocity`` is per-sample velocity in deg/s, either 1D (signed) or
    (n, 2). The amplitude is the magnitude of the displacement integrated
    over the run.
    """
    if not threshold > 0:
        raise InputError("threshold must be positive")
    v = np.asarray(velocity, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    speed = np.linalg.norm(v, axis=1)
    above = speed > threshold
    edges = np.diff(np.concatenate([[0], above.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    events = []
    for a, b in zip(starts, stops):
        amp = float(np.linalg.norm(v[a:b].sum(axis=0) * dt))
        kind = "microsaccade" if amp < cfg.max_amplitude else "saccade"
        events.append(EventRecord(int(a), int(b - 1), float(speed[a:b].max()), amp, kind))
    return events


def count_in_windows(events, onsets, dt, t0=0.0, cfg=EventConfig()):
    """Per target onset: 1 if a microsaccade starts within the window after it.

    Events are located by their onset sample time ``t0 + onset*dt``. Only
    the first event in a window counts; the rest are reported as extras.
    """
    onsets = np.asarray(onsets, dtype=np.float64)
    if np.any(np.diff(onsets) < 0):
        raise InputError("onsets must be sorted")
    lo, hi = (w / 1000.0 for w in cfg.window_ms)
    times = np.array([t0 + e.onset * dt for e in events if e.kind == "microsaccade"])
    out = []
    for t in onsets:
        n = int(np.count_nonzero((times >= t + lo - 1e-12) & (times <= t + hi + 1e-12))) if times.size else 0
        out.append(WindowCount(float(t), min(n, 1), max(n - 1, 0)))
    return out


def detect_microsaccades(velocity_per_frame, dt, cfg=EventConfig()):
    """Full detection on a per-frame horizontal velocity signal (deg/frame).

    Returns (events, threshold_deg_per_s, denoised_deg_per_s).
    """
    v = np.asarray(velocity_per_frame, dtype=np.float64)
    denoised = tv_denoise(v, cfg.tv_lambda) / dt
    threshold = adaptive_threshold(
        np.abs(denoised),
        components=cfg.gmm_components,
        seed=cfg.seed,
        n_init=cfg.gmm_restarts,
        tol=cfg.em_tol,
        max_iter=cfg.em_max_iter,
    )
    events = ivt_detect(denoised, threshold, dt, cfg)
    return events, threshold, denoised
