"""Inner loops: trajectory phase accumulation and piecewise-constant propagation.

Each kernel has a numba and a numpy implementation with identical signatures.
The public names dispatch on ``_accel.USE_NUMBA``; the ``*_numpy`` and
``*_numba`` variants stay importable for benchmarking and cross-checks.
"""
import numpy as np

from . import _accel
from ._accel import njit


def coherence_sums_numpy(grid, k, times, offsets, signs, n_traj):
    """Sum e^{-i phi(t)} over a batch of trajectories.

    ``offsets`` and ``signs`` index ``n_traj * k.size`` switching records laid
    out trajectory-major. Returns ``(sum_re, sum_im, sum_re2)`` on ``grid``.
    """
    n_t = grid.size
    n_traps = k.size
    sum_re = np.zeros(n_t)
    sum_im = np.zeros(n_t)
    sum_re2 = np.zeros(n_t)
    for b in range(n_traj):
        phi = np.zeros(n_t)
        for j in range(n_traps):
            r = b * n_traps + j
            sw = times[offsets[r]:offsets[r + 1]]
            edges = np.empty(sw.size + 1)
            edges[0] = 0.0
            edges[1:] = sw
            seg_sign = signs[r] * (1.0 - 2.0 * (np.arange(edges.size) % 2))
            cum = np.zeros(edges.size)
            cum[1:] = np.cumsum(seg_sign[:-1] * np.diff(edges))
            n = np.searchsorted(sw, grid, side="right")
            phi += k[j] * (cum[n] + seg_sign[n] * (grid - edges[n]))
        c = np.cos(phi)
        sum_re += c
        sum_im -= np.sin(phi)
        sum_re2 += c * c
    return sum_re, sum_im, sum_re2


@njit
def coherence_sums_numba(grid, k, times, offsets, signs, n_traj):
    n_t = grid.size
    n_traps = k.size
    sum_re = np.zeros(n_t)
    sum_im = np.zeros(n_t)
    sum_re2 = np.zeros(n_t)
    phi = np.empty(n_t)
    for b in range(n_traj):
        for i in range(n_t):
            phi[i] = 0.0
        for j in range(n_traps):
            r = b * n_traps + j
            start = offsets[r]
            stop = offsets[r + 1]
            p = start
            pos = 0.0
            acc = 0.0
            sgn = signs[r]
            kj = k[j]
            for i in range(n_t):
                t = grid[i]
                while p < stop and times[p] <= t:
                    acc += sgn * (times[p] - pos)
                    pos = times[p]
                    sgn = -sgn
                    p += 1
                phi[i] += kj * (acc + sgn * (t - pos))
        for i in range(n_t):
            c = np.cos(phi[i])
            sum_re[i] += c
            sum_im[i] -= np.sin(phi[i])
            sum_re2[i] += c * c
    return sum_re, sum_im, sum_re2


def propagate_segments_numpy(h, diags, dts):
    """Ordered product of exp(-i (h + diag(d_s)) dt_s) for real symmetric ``h``."""
    d = h.shape[0]
    if dts.size == 0:
        return np.eye(d, dtype=complex)
    mats = np.broadcast_to(h, (dts.size, d, d)).copy()
    idx = np.arange(d)
    mats[:, idx, idx] += diags
    w, v = np.linalg.eigh(mats)
    steps = (v * np.exp(-1j * w * dts[:, None])[:, None, :]) @ np.swapaxes(v, 1, 2)
    u = steps[0]
    for s in range(1, dts.size):
        u = steps[s] @ u
    return u


@njit
def propagate_segments_numba(h, diags, dts):
    d = h.shape[0]
    u = np.eye(d).astype(np.complex128)
    m = np.empty((d, d))
    for s in range(dts.size):
        for a in range(d):
            for b in range(d):
                m[a, b] = h[a, b]
            m[a, a] += diags[s, a]
        w, v = np.linalg.eigh(m)
        step = np.zeros((d, d), dtype=np.complex128)
        for c in range(d):
            ph = np.exp(-1j * w[c] * dts[s])
            for a in range(d):
                vac = v[a, c] * ph
                for b in range(d):
                    step[a, b] += vac * v[b, c]
        u = step @ u
    return u


if _accel.USE_NUMBA:
    coherence_sums = coherence_sums_numba
    propagate_segments = propagate_segments_numba
else:
    coherence_sums = coherence_sums_numpy
    propagate_segments = propagate_segments_numpy
