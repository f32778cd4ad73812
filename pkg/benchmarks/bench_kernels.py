"""Time the numba and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call compiles (or loads the on-disk cache), so it is timed
separately and excluded from the steady-state numbers.
"""
import argparse
import time

import numpy as np

from quadqubit import _accel, kernels
from quadqubit.electrostatics import coupling_constants
from quadqubit.geometry import Encoding, fixed_count_ensemble, make_ideal_geometry
from quadqubit.telegraph import draw_switches


def _best(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def coherence_case(n_traj=128, n_times=400):
    ens = fixed_count_ensemble(100, 1e12, 2e8, seed=0)
    geom = make_ideal_geometry(Encoding.DIPOLE, 20e-9, 20e-9)
    k = coupling_constants(ens, geom)
    grid = np.linspace(0.0, 50e-9, n_times)
    rng = np.random.default_rng(1)
    times, offsets, signs = draw_switches(rng, np.tile(ens.rates, n_traj), grid[-1])
    return grid, k, times, offsets, signs, n_traj


def propagate_case(n_segments=200):
    rng = np.random.default_rng(2)
    a = rng.normal(size=(4, 4))
    return a + a.T, rng.normal(size=(n_segments, 4)), rng.uniform(0.0, 0.1, n_segments)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can be timed")
    cases = [
        ("coherence_sums (100 traps x 128 traj x 400 t)", coherence_case(),
         kernels.coherence_sums_numpy, kernels.coherence_sums_numba),
        ("propagate_segments (4x4, 200 segments)", propagate_case(),
         kernels.propagate_segments_numpy, kernels.propagate_segments_numba),
    ]
    print(f"{'kernel':48s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'first call [ms]':>16s} {'speedup':>8s}")
    for name, case, f_np, f_nb in cases:
        t_np = _best(f_np, case, args.repeat)
        t0 = time.perf_counter()
        f_nb(*case)
        first = time.perf_counter() - t0
        t_nb = _best(f_nb, case, args.repeat)
        print(f"{name:48s} {t_np * 1e3:11.2f} {t_nb * 1e3:11.2f} {first * 1e3:16.1f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
