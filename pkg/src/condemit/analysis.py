"""Trace normalization, effective decay rates and direction scans."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .correlations import (
    CorrelationTrace,
    conditioned_coherences,
    free_coherences,
    intensity_map,
    reference_coupling,
)
from .geometry import AtomEnsemble, dipole_factors

# below this an initial value is treated as no signal
NORM_FLOOR = 1e-12
DEAD_DIRECTION = 1e-10


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    residual: float
    status: str = "ok"    # "ok" or "failed:<reason>"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class RateScan:
    """Effective decay rates per direction; failed fits hold ``nan``."""

    angles: np.ndarray
    rates3: np.ndarray
    rates1: np.ndarray
    residuals3: np.ndarray
    residuals1: np.ndarray
    status3: tuple[str, ...]
    status1: tuple[str, ...]
    gamma_single: float
    gamma_sym: float
    gamma_anti: float


def normalize_by_initial(trace: CorrelationTrace) -> CorrelationTrace:
    v0 = trace.values[0] if len(trace.values) else 0.0
    if not v0 > NORM_FLOOR:
        return CorrelationTrace(trace.direction, trace.times, trace.values, "raw", normalizable=False)
    return CorrelationTrace(trace.direction, trace.times, trace.values / v0, "initial")


def normalize_rows(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Divide each row by its first entry; rows at or below the floor stay raw.

    Returns ``(normalized, normalizable_mask)``.
    """
    v = np.asarray(values, dtype=np.float64)
    v0 = v[:, 0]
    mask = v0 > NORM_FLOOR
    out = v.copy()
    out[mask] = v[mask] / v0[mask, None]
    return out, mask


def fit_window(window=(0.0, 0.5), n_samples: int = 51) -> np.ndarray:
    if n_samples < 3:
        raise ValueError("need at least 3 samples for a fit")
    lo, hi = window
    if not hi > lo:
        raise ValueError(f"empty fit window {window}")
    return np.linspace(lo, hi, n_samples)


def _window_samples(trace: CorrelationTrace, grid: np.ndarray):
    t, v = trace.times, trace.values
    sel = (t >= grid[0] - 1e-12) & (t <= grid[-1] + 1e-12)
    if sel.sum() == len(grid) and np.allclose(t[sel], grid, rtol=0, atol=1e-12):
        return v[sel]
    if t[0] > grid[0] + 1e-12 or t[-1] < grid[-1] - 1e-12:
        return None
    if np.any(v[(t >= grid[0] - 1e-12) & (t <= grid[-1] + 1e-12)] <= 0):
        return np.zeros(len(grid))
    # log-linear interpolation is exact for a single exponential
    return np.exp(np.interp(grid, t, np.log(np.where(v > 0, v, np.nan))))


def fit_decay_rate(trace: CorrelationTrace, window=(0.0, 0.5), n_samples: int = 51) -> DecayFit:
    """Least-squares line through ``log(values)`` on a uniform grid over ``window``.

    The rate is minus the slope; the intercept is free. Samples that are not
    on the grid are interpolated linearly in log space.
    """
    grid = fit_window(window, n_samples)
    y = _window_samples(trace, grid)
    if y is None:
        return DecayFit(np.nan, np.nan, np.nan, "failed:window_not_covered")
    slope, intercept, rms, ok = kernels.loglinear_fit(grid, y[None, :])
    if not ok[0] or not np.all(np.isfinite(y)):
        return DecayFit(np.nan, np.nan, np.nan, "failed:nonpositive")
    return DecayFit(float(-slope[0]), float(intercept[0]), float(rms[0]))


def _chunks(n: int, workers: int):
    workers = max(1, min(workers, n))
    edges = np.linspace(0, n, workers + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def parallel_rows(fn, n_rows: int, workers: int = 1) -> np.ndarray:
    """Evaluate ``fn(slice)`` on row blocks and stack the results in order."""
    blocks = _chunks(n_rows, workers)
    if len(blocks) <= 1:
        return fn(slice(0, n_rows))
    with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
        parts = list(pool.map(fn, blocks))
    return np.concatenate(parts, axis=0)


def live_angles(ensemble: AtomEnsemble, angles) -> np.ndarray:
    a = np.asarray(angles, dtype=np.float64)
    return a[dipole_factors(ensemble, a) ** 2 >= DEAD_DIRECTION]


def _fit_rows(grid, values, workers):
    def fn(sl):
        slope, _, rms, ok = kernels.loglinear_fit(grid, values[sl])
        return np.stack([-slope, rms, ok.astype(np.float64)], axis=1)
    out = parallel_rows(fn, len(values), workers)
    ok = out[:, 2] > 0
    status = tuple("ok" if k else "failed:nonpositive" for k in ok)
    return out[:, 0], out[:, 1], status


def scan_rates(ensemble: AtomEnsemble, couplings, phi1: float, phi2: float, angle_grid,
               window=(0.0, 0.5), n_samples: int = 51, workers: int = 1) -> RateScan:
    """Fit effective G3 and G1 decay rates for every live direction.

    ``window`` is in units of ``1/gamma``; rates are returned in units of
    ``gamma``. With fewer than three atoms G3 is unavailable and its rates
    are ``nan`` with status ``failed:requires_3_atoms``.
    """
    g = ensemble.gamma
    grid = fit_window(window, n_samples)
    times = grid / g
    angles = live_angles(ensemble, angle_grid)
    na = len(angles)

    coh1 = free_coherences(ensemble, couplings, times)
    g1_vals = parallel_rows(lambda sl: intensity_map(ensemble, coh1, angles[sl]), na, workers)
    r1, res1, st1 = _fit_rows(grid, g1_vals, workers)

    if ensemble.n_atoms == 3:
        coh3 = conditioned_coherences(ensemble, couplings, phi1, phi2, times)
        g3_vals = parallel_rows(lambda sl: intensity_map(ensemble, coh3, angles[sl]), na, workers)
        r3, res3, st3 = _fit_rows(grid, g3_vals, workers)
    else:
        r3 = np.full(na, np.nan)
        res3 = np.full(na, np.nan)
        st3 = ("failed:requires_3_atoms",) * na

    ref = reference_coupling(couplings)
    dg = ref.delta_gamma / g
    return RateScan(angles, r3, r1, res3, res1, st3, st1,
                    gamma_single=2.0, gamma_sym=2.0 * (1.0 + dg), gamma_anti=2.0 * (1.0 - dg))
