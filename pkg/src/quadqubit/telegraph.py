"""Symmetric random telegraph signals xi(t) = +-1 switching at Poisson rate lambda.

Switching events are drawn as a Poisson count followed by sorted uniform
times, which is the same law as i.i.d. exponential gaps and vectorises over
many traps at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def trajectory_rng(seed, *key) -> np.random.Generator:
    """Counter-based generator: the stream depends only on ``(seed, *key)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class TelegraphProcess:
    rate: float
    initial_sign: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if self.initial_sign not in (None, 1, -1):
            raise ValueError("initial_sign must be +1, -1 or None")


@dataclass(frozen=True, eq=False)
class SwitchingRecord:
    switch_times: np.ndarray
    initial_sign: int
    horizon: float

    def __post_init__(self):
        t = np.array(self.switch_times, dtype=float)
        if t.size and (np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] > self.horizon):
            raise ValueError("switch times must be strictly increasing within [0, horizon]")
        t.setflags(write=False)
        object.__setattr__(self, "switch_times", t)

    def __eq__(self, other):
        if not isinstance(other, SwitchingRecord):
            return NotImplemented
        return (self.initial_sign == other.initial_sign and self.horizon == other.horizon
                and np.array_equal(self.switch_times, other.switch_times))

    __hash__ = None

    def xi(self, t):
        t = np.asarray(t, dtype=float)
        n = np.searchsorted(self.switch_times, t, side="right")
        return self.initial_sign * (1 - 2 * (n % 2))


def draw_switches(rng: np.random.Generator, rates, horizon: float, initial_signs=None):
    """Switching records for many independent traps.

    Returns ``(times, offsets, signs)``: trap ``j`` switches at
    ``times[offsets[j]:offsets[j + 1]]`` (ascending) and starts at ``signs[j]``.
    """
    rates = np.asarray(rates, dtype=float)
    counts = rng.poisson(rates * horizon)
    offsets = np.zeros(rates.size + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    times = rng.random(offsets[-1]) * horizon
    owner = np.repeat(np.arange(rates.size), counts)
    times = times[np.lexsort((times, owner))]
    if initial_signs is None:
        signs = np.where(rng.random(rates.size) < 0.5, 1.0, -1.0)
    else:
        signs = np.broadcast_to(np.asarray(initial_signs, dtype=float), rates.shape).copy()
    return times, offsets, signs


def sample_record(process: TelegraphProcess, horizon: float) -> SwitchingRecord:
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    rng = np.random.default_rng(process.seed)
    times, _, signs = draw_switches(rng, [process.rate], horizon, process.initial_sign)
    return SwitchingRecord(times, int(signs[0]), float(horizon))


def integrate_xi(record: SwitchingRecord, t):
    """Exact integral of xi from 0 to ``t`` (scalar or array)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > record.horizon):
        raise ValueError("t outside [0, horizon]")
    sw = record.switch_times
    # signed segment lengths of the fully covered segments, then the partial one
    edges = np.concatenate(([0.0], sw))
    seg_sign = record.initial_sign * (1.0 - 2.0 * (np.arange(edges.size) % 2))
    cum = np.concatenate(([0.0], np.cumsum(seg_sign[:-1] * np.diff(edges))))
    n = np.searchsorted(sw, t_arr, side="right")
    out = cum[n] + seg_sign[n] * (t_arr - edges[n])
    return float(out) if out.ndim == 0 else out


def merged_segments(records, horizon: float):
    """Common refinement of the records' switching partitions.

    Returns a list of ``(t_start, t_end, signs)`` with one sign per record.
    """
    records = list(records)
    for r in records:
        if r.horizon != horizon:
            raise ValueError("all records must share the horizon")
    if records:
        cuts = np.concatenate([r.switch_times for r in records])
    else:
        cuts = np.empty(0)
    cuts = np.sort(cuts)
    edges = np.concatenate(([0.0], cuts, [float(horizon)]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    signs = np.array([r.xi(mids) for r in records]).reshape(len(records), -1).T
    return [(float(a), float(b), signs[i].astype(float)) for i, (a, b) in enumerate(zip(edges[:-1], edges[1:]))]


def segments_from_arrays(times, offsets, signs, horizon: float):
    """Vectorised merge of ``draw_switches`` output.

    Returns ``(durations, sign_matrix)`` with ``sign_matrix`` of shape
    ``(n_segments, n_traps)``.
    """
    n_traps = signs.size
    owner = np.repeat(np.arange(n_traps), np.diff(offsets))
    order = np.argsort(times, kind="stable")
    cut_t = times[order]
    cut_owner = owner[order]
    edges = np.concatenate(([0.0], cut_t, [float(horizon)]))
    flips = np.zeros((cut_t.size + 1, n_traps))
    flips[1 + np.arange(cut_t.size), cut_owner] = 1.0
    parity = np.cumsum(flips, axis=0) % 2
    sign_matrix = signs[None, :] * (1.0 - 2.0 * parity)
    return np.diff(edges), sign_matrix


def dump_records_csv(path, records_by_trajectory):
    """Debug dump ``trajectory,trap,switch_time_s``."""
    with open(path, "w", newline="") as fh:
        fh.write("trajectory,trap,switch_time_s\n")
        for traj, records in enumerate(records_by_trajectory):
            for trap, rec in enumerate(records):
                for t in rec.switch_times:
                    fh.write(f"{traj},{trap},{t!r}\n")
