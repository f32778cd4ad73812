import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadqubit.coherence import (CoherenceTrace, DecayMethod, analytic_decay_time, analytic_many, analytic_single,
                                 decay_time, default_time_grid, formula_decay_time, mc_dephasing, short_time)
from quadqubit.electrostatics import coupling_constants
from quadqubit.geometry import fixed_count_ensemble


def _random_couplings(seed, geom, n=20, density=1e14, rate=2e8):
    ens = fixed_count_ensemble(n, density, rate, seed)
    return coupling_constants(ens, geom), ens.rates


def test_time_grid_shape():
    t = default_time_grid(1e-8)
    assert t[0] == 0.0 and t[-1] == 1e-8
    assert np.all(np.diff(t) > 0)
    assert 390 <= t.size <= 400
    assert t[1] == pytest.approx(1e-11, rel=1e-12)


def test_no_coupling_no_decay():
    t = np.linspace(0, 50e-9, 101)
    np.testing.assert_allclose(analytic_single(0.0, 2e8, t).values, 1.0, rtol=0, atol=1e-12)


def test_slow_noise_limit_is_cosine():
    t = np.array([5e-9])
    assert analytic_single(1e9, 1.0, t).values[0] == pytest.approx(np.cos(1e9 * 5e-9), abs=1e-6)


def test_closed_form_underdamped():
    k, lam = 1e9, 2e8
    t = np.linspace(0, 20e-9, 50)
    w = np.sqrt(k * k - lam * lam)
    expected = np.exp(-lam * t) * (np.cos(w * t) + lam / w * np.sin(w * t))
    np.testing.assert_allclose(analytic_single(k, lam, t).values, expected, rtol=1e-12, atol=1e-15)


def test_closed_form_overdamped_and_critical():
    t = np.linspace(0, 50e-9, 60)
    k, lam = 1e8, 5e8
    nu = np.sqrt(lam * lam - k * k)
    expected = np.exp(-lam * t) * (np.cosh(nu * t) + lam / nu * np.sinh(nu * t))
    np.testing.assert_allclose(analytic_single(k, lam, t).values, expected, rtol=1e-11)
    lam = 3e8
    np.testing.assert_allclose(analytic_single(lam, lam, t).values, np.exp(-lam * t) * (1 + lam * t), rtol=1e-12)
    # continuity across the critical point
    near = analytic_single(lam * (1 + 1e-9), lam, t).values
    np.testing.assert_allclose(near, np.exp(-lam * t) * (1 + lam * t), rtol=1e-7)


def test_overdamped_long_times_do_not_overflow():
    v = analytic_single(1e3, 1e9, np.array([0.0, 1e-3, 1.0])).values
    assert np.all(np.isfinite(v)) and v[0] == 1.0 and 0 < v[-1] < 1


def test_mc_matches_formula_at_5ns():
    k, lam = 4e8, 2e8
    t = np.array([0.0, 5e-9])
    mc = mc_dephasing([k], [lam], t, 100_000, seed=12)
    an = analytic_single(k, lam, t).values
    assert abs(mc.values[1] - an[1]) < 3 * mc.stderr[1]
    assert abs(mc.values[1].imag) < 3 * mc.stderr[1]


def test_mc_no_traps_is_coherent():
    t = np.linspace(0, 1e-9, 11)
    mc = mc_dephasing([], [], t, 10, seed=1)
    np.testing.assert_array_equal(mc.values, 1.0)


def test_mc_single_trap_all_times():
    t = np.linspace(0, 20e-9, 60)
    mc = mc_dephasing([1e9], [2e8], t, 10_000, seed=99)
    an = analytic_single(1e9, 2e8, t).values
    assert np.all(np.abs(mc.values - an) <= 3 * mc.stderr + 1e-12)


def test_mc_deterministic_and_thread_independent():
    t = np.linspace(0, 5e-9, 30)
    a = mc_dephasing([1e9, 5e8], [2e8, 2e8], t, 700, seed=4, threads=1)
    b = mc_dephasing([1e9, 5e8], [2e8, 2e8], t, 700, seed=4, threads=4)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.stderr, b.stderr)


def test_mc_rejects_bad_input():
    with pytest.raises(ValueError):
        mc_dephasing([1.0], [1.0], [0.0, 1.0], 0, seed=0)
    with pytest.raises(ValueError):
        mc_dephasing([1.0], [1.0], [1.0, 0.0], 5, seed=0)


def test_mc_ensemble_matches_product_law(quad):
    for seed in range(20):
        k, rates = _random_couplings(seed, quad, n=30, density=1e13)
        keff = np.sqrt(np.sum(k**2))
        t = np.linspace(0, 3 / keff, 40)
        mc = mc_dephasing(k, rates, t, 400, seed=seed)
        an = analytic_many(zip(k, rates), t).values
        assert np.mean(np.abs(mc.values - an) <= 3 * mc.stderr + 1e-12) >= 0.95


def test_many_equals_single_for_one_trap():
    t = np.linspace(0, 10e-9, 30)
    np.testing.assert_array_equal(analytic_many([(7e8, 2e8)], t).values, analytic_single(7e8, 2e8, t).values)


def test_two_identical_traps_square():
    t = np.linspace(0, 10e-9, 30)
    single = analytic_single(7e8, 2e8, t).values
    np.testing.assert_allclose(analytic_many([(7e8, 2e8)] * 2, t).values, single**2, rtol=1e-14, atol=1e-300)


def test_many_is_product_of_singles(dipole):
    k, rates = _random_couplings(3, dipole, n=15, density=1e12)
    t = np.linspace(0, 1e-9, 50)
    prod = np.prod([analytic_single(abs(kj), lj, t).values for kj, lj in zip(k, rates)], axis=0)
    np.testing.assert_allclose(analytic_many(zip(k, rates), t).values, prod, rtol=1e-13, atol=1e-300)


@settings(max_examples=200, deadline=None)
@given(k=st.floats(0, 1e10), lam=st.floats(1e3, 1e10), t=st.floats(0, 1e-6))
def test_single_factor_bounded(k, lam, t):
    v = analytic_single(k, lam, np.array([t])).values[0]
    assert -1 - 1e-12 <= v <= 1 + 1e-12


def test_short_time_examples():
    assert short_time(1e9, [0.0]).values[0] == 1.0
    tau = decay_time(short_time(1e9, np.linspace(0, 1e-9, 100_001)), 0.99)
    assert tau.tau == pytest.approx(np.sqrt(0.02) / 1e9, rel=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_short_time_matches_product(seed, dipole, quad):
    k, rates = _random_couplings(seed, quad if seed % 2 else dipole)
    keff = np.sqrt(np.sum(k**2))
    t = np.linspace(0, 0.1 / keff, 50)
    exact = analytic_many(zip(k, rates), t).values
    approx = short_time(keff, t).values
    assert np.max(np.abs(approx - exact) / exact) < 0.01


def test_short_time_independent_of_rates(quad):
    k, rates = _random_couplings(4, quad)
    keff = np.sqrt(np.sum(k**2))
    t = np.array([0.02 / keff])
    a = analytic_many(zip(k, rates), t).values[0]
    b = analytic_many(zip(k, 10 * rates), t).values[0]
    assert abs(a - b) / a < 1e-3


def test_adding_a_trap_never_raises_the_trace(dipole):
    k, rates = _random_couplings(5, dipole)
    keff = np.sqrt(np.sum(k**2))
    t = np.linspace(0, 0.05 / keff, 20)
    base = analytic_many(zip(k[:-1], rates[:-1]), t).values
    more = analytic_many(zip(k, rates), t).values
    assert np.all(more <= base + 1e-15)


def test_decay_time_not_reached():
    t = np.linspace(0, 1, 10)
    res = decay_time(CoherenceTrace(t, np.linspace(1, 0.5, 10)), 0.01)
    assert not res.reached and res.tau == np.inf


def test_decay_time_interpolates():
    t = np.array([0.0, 1.0, 2.0])
    res = decay_time(CoherenceTrace(t, np.array([1.0, 0.8, 0.4])), 0.6)
    assert res.tau == pytest.approx(1.5)
    assert res.method is DecayMethod.ANALYTIC_CROSSING


def test_decay_time_uses_magnitude():
    t = np.array([0.0, 1.0, 2.0])
    res = decay_time(CoherenceTrace(t, np.array([1.0, 0.9j, -0.5])), 0.7, DecayMethod.MC_CROSSING)
    assert 1.0 < res.tau < 2.0


@pytest.mark.parametrize("p", [0.97, 0.98, 0.99, 0.995])
def test_formula_matches_crossing_in_parabolic_regime(p, dipole):
    # lambda * tau << 1 here, so the cubic correction is negligible
    for seed in range(5):
        k, rates = _random_couplings(seed, dipole, density=1e15)
        keff = np.sqrt(np.sum(k**2))
        crossing = analytic_decay_time(zip(k, rates), p)
        assert crossing.tau == pytest.approx(formula_decay_time(keff, p).tau, rel=0.01)


def test_tau_ratio_tracks_coupling_ratio(dipole, quad):
    for seed in range(10):
        ens = fixed_count_ensemble(100, 1e13, 2e8, seed)
        k2 = coupling_constants(ens, dipole)
        k4 = coupling_constants(ens, quad)
        ratio_tau = analytic_decay_time(zip(k4, ens.rates), 0.99).tau / analytic_decay_time(zip(k2, ens.rates), 0.99).tau
        ratio_k = np.sqrt(np.sum(k2**2) / np.sum(k4**2))
        assert ratio_tau == pytest.approx(ratio_k, rel=0.02)
