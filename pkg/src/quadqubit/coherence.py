"""Coherence decay of a qubit dephased by independent telegraph fluctuators."""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .telegraph import draw_switches, trajectory_rng

CHUNK = 128
"""Trajectories per RNG stream; fixed so results do not depend on thread count."""


@dataclass(frozen=True, eq=False)
class CoherenceTrace:
    times: np.ndarray
    values: np.ndarray
    n_trajectories: int = 0
    stderr: np.ndarray | None = None
    stderr_re: np.ndarray | None = None


class DecayMethod(str, enum.Enum):
    ANALYTIC_CROSSING = "analytic_crossing"
    MC_CROSSING = "mc_crossing"
    FORMULA = "formula"


@dataclass(frozen=True)
class DecayTime:
    p: float
    tau: float
    method: DecayMethod
    reached: bool = True


def default_time_grid(horizon: float, n: int = 400, log_start: float = 1e-3) -> np.ndarray:
    """Zero, then half log-spaced and half linear points up to ``horizon``.

    The log part resolves the parabolic onset, the linear part the tail.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    n_log = (n - 1) // 2
    n_lin = n - 1 - n_log
    t = np.concatenate((
        [0.0],
        np.geomspace(log_start * horizon, horizon, n_log),
        np.linspace(horizon / n_lin, horizon, n_lin),
    ))
    t = np.unique(t)
    t[-1] = horizon
    return t


def _single_factor(k: float, lam: float, t: np.ndarray) -> np.ndarray:
    """exp(-lam t) [cos(w t) + (lam / w) sin(w t)], w = sqrt(k^2 - lam^2).

    Written as cos(wt) + lam t sinc(wt) so the critical point k = lam is
    continuous; for k < lam the hyperbolic continuation is used.
    """
    lt = lam * t
    w2 = k * k - lam * lam
    if w2 >= 0:
        x = np.sqrt(w2) * t
        return np.exp(-lt) * (np.cos(x) + lt * np.sinc(x / np.pi))
    x = np.sqrt(-w2) * t
    out = np.empty_like(t)
    small = x < 1.0
    xs = x[small]
    shc = np.where(xs > 0, np.sinh(xs) / np.where(xs > 0, xs, 1.0), 1.0)
    out[small] = np.exp(-lt[small]) * (np.cosh(xs) + lt[small] * shc)
    xl = x[~small]
    grow = np.exp(xl - lt[~small])
    tail = np.exp(-2.0 * xl)
    out[~small] = 0.5 * grow * ((1.0 + tail) + lt[~small] * (1.0 - tail) / xl)
    return out


def analytic_single(k: float, lam: float, times) -> CoherenceTrace:
    if k < 0:
        raise ValueError("k must be non-negative")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    t = np.asarray(times, dtype=float)
    return CoherenceTrace(t, _single_factor(float(k), float(lam), t))


def analytic_many(couplings, times) -> CoherenceTrace:
    """Product over traps of the single-fluctuator factors.

    ``couplings`` is an iterable of ``(k_j, lambda_j)``. The sign of ``k_j`` is
    irrelevant to the ensemble average.
    """
    t = np.asarray(times, dtype=float)
    values = np.ones_like(t)
    for k, lam in couplings:
        values = values * _single_factor(abs(float(k)), float(lam), t)
    return CoherenceTrace(t, values)


def short_time(k_eff: float, times) -> CoherenceTrace:
    t = np.asarray(times, dtype=float)
    return CoherenceTrace(t, 1.0 - 0.5 * (k_eff * t) ** 2)


def _chunk_sums(args):
    grid, k, rates, seed, stream, chunk, n = args
    rng = trajectory_rng(seed, stream, chunk)
    rec_rates = np.tile(rates, n)
    times, offsets, signs = draw_switches(rng, rec_rates, grid[-1])
    return kernels.coherence_sums(grid, k, times, offsets, signs, n)


def mc_dephasing(k, rates, times, n_trajectories: int, seed, *, threads: int = 1, stream: int = 0) -> CoherenceTrace:
    """Monte Carlo average of exp(-i sum_j k_j int_0^t xi_j) over telegraph records.

    Trajectories are drawn in fixed chunks with counter-based seeds and reduced
    in chunk order, so the result is a pure function of the inputs and seed.
    """
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be >= 1")
    grid = np.asarray(times, dtype=float)
    if grid.size == 0 or grid[0] < 0 or np.any(np.diff(grid) < 0):
        raise ValueError("times must be non-negative and ascending")
    k = np.ascontiguousarray(k, dtype=float).reshape(-1)
    rates = np.broadcast_to(np.asarray(rates, dtype=float), k.shape).copy()
    n_chunks = -(-n_trajectories // CHUNK)
    jobs = [(grid, k, rates, seed, stream, c, min(CHUNK, n_trajectories - c * CHUNK)) for c in range(n_chunks)]
    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_chunk_sums, jobs))
    else:
        parts = [_chunk_sums(j) for j in jobs]
    sum_re = np.zeros_like(grid)
    sum_im = np.zeros_like(grid)
    sum_re2 = np.zeros_like(grid)
    for re, im, re2 in parts:
        sum_re += re
        sum_im += im
        sum_re2 += re2
    n = n_trajectories
    mean = (sum_re + 1j * sum_im) / n
    # |exp(-i phi)| = 1, so the complex variance is 1 - |mean|^2
    var_c = np.clip(1.0 - np.abs(mean) ** 2, 0.0, None)
    var_re = np.clip(sum_re2 / n - mean.real**2, 0.0, None)
    corr = n / (n - 1) if n > 1 else np.inf
    stderr = np.sqrt(var_c * corr / n)
    stderr_re = np.sqrt(var_re * corr / n)
    return CoherenceTrace(grid, mean, n, stderr, stderr_re)


def decay_time(trace: CoherenceTrace, p: float, method=DecayMethod.ANALYTIC_CROSSING) -> DecayTime:
    """First time |value| drops below ``p``, linearly interpolated between samples."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    method = DecayMethod(method)
    mag = np.abs(np.asarray(trace.values))
    below = np.nonzero(mag < p)[0]
    if below.size == 0:
        return DecayTime(p, np.inf, method, reached=False)
    i = below[0]
    if i == 0:
        raise ValueError("trace must start above p")
    t0, t1 = trace.times[i - 1], trace.times[i]
    m0, m1 = mag[i - 1], mag[i]
    tau = t0 + (m0 - p) * (t1 - t0) / (m0 - m1)
    return DecayTime(p, float(tau), method)


def formula_decay_time(k_eff: float, p: float) -> DecayTime:
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    tau = np.sqrt(2.0 * (1.0 - p)) / k_eff if k_eff > 0 else np.inf
    return DecayTime(p, float(tau), DecayMethod.FORMULA, reached=bool(np.isfinite(tau)))


def analytic_decay_time(couplings, p: float, n_points: int = 4001) -> DecayTime:
    """Crossing of the analytic trace on a dense grid around the parabolic estimate."""
    couplings = [(abs(float(k)), float(lam)) for k, lam in couplings]
    keff = float(np.sqrt(sum(k * k for k, _ in couplings)))
    if keff == 0:
        return DecayTime(p, np.inf, DecayMethod.ANALYTIC_CROSSING, reached=False)
    guess = np.sqrt(2.0 * (1.0 - p)) / keff
    span = 4.0 * guess
    for _ in range(30):
        t = np.linspace(0.0, span, n_points)
        found = decay_time(analytic_many(couplings, t), p, DecayMethod.ANALYTIC_CROSSING)
        if found.reached:
            return found
        span *= 4.0
    return found
