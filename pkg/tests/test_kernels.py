import importlib.util
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.linalg import expm

from quadqubit import kernels
from quadqubit.telegraph import draw_switches


def _records(seed, n_traps, n_traj, horizon=20e-9):
    rng = np.random.default_rng(seed)
    rates = np.tile(rng.uniform(5e7, 5e8, n_traps), n_traj)
    return draw_switches(rng, rates, horizon)


@pytest.mark.parametrize("n_traps", [1, 3, 17])
def test_coherence_sums_backends_agree(n_traps):
    grid = np.linspace(0, 20e-9, 73)
    k = np.random.default_rng(n_traps).normal(0, 1e9, n_traps)
    times, offsets, signs = _records(n_traps, n_traps, 9)
    a = kernels.coherence_sums_numpy(grid, k, times, offsets, signs, 9)
    b = kernels.coherence_sums_numba(grid, k, times, offsets, signs, 9)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=0, atol=1e-10)


def test_coherence_sums_without_switches():
    grid = np.linspace(0, 1e-9, 5)
    k = np.array([1e9])
    times = np.empty(0)
    offsets = np.zeros(2, dtype=np.int64)
    signs = np.array([1.0])
    for fn in (kernels.coherence_sums_numpy, kernels.coherence_sums_numba):
        re, im, _ = fn(grid, k, times, offsets, signs, 1)
        np.testing.assert_allclose(re + 1j * im, np.exp(-1j * 1e9 * grid), atol=1e-14)


@pytest.mark.parametrize("d", [2, 4])
def test_propagators_agree_with_expm(d):
    rng = np.random.default_rng(d)
    a = rng.normal(size=(d, d))
    h = a + a.T
    diags = rng.normal(size=(6, d))
    dts = rng.uniform(0.01, 0.5, 6)
    ref = np.eye(d, dtype=complex)
    for s in range(6):
        ref = expm(-1j * (h + np.diag(diags[s])) * dts[s]) @ ref
    for fn in (kernels.propagate_segments_numpy, kernels.propagate_segments_numba):
        np.testing.assert_allclose(fn(h, diags, dts), ref, atol=1e-13)


def test_propagator_empty_is_identity():
    h = np.eye(4)
    for fn in (kernels.propagate_segments_numpy, kernels.propagate_segments_numba):
        np.testing.assert_array_equal(fn(h, np.zeros((0, 4)), np.zeros(0)), np.eye(4))


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", None)])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, QUADQUBIT_DISABLE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from quadqubit import kernels, _accel;"
         "print(_accel.backend_name(), kernels.coherence_sums.__name__)"],
        env=env, capture_output=True, text=True, check=True).stdout.split()
    if expected == "numpy":
        assert out == ["numpy", "coherence_sums_numpy"]
    else:
        assert out[0] == ("numba" if importlib.util.find_spec("numba") else "numpy")
