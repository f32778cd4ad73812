import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadqubit.constants import PhysicalConstants
from quadqubit.electrostatics import (SingularCouplingError, coupling_constants, effective_coupling, k_eff,
                                      onsite_shift, scaling_exponent, state_shifts, trap_coupling,
                                      uniform_field_energies)
from quadqubit.geometry import Encoding, QubitGeometry, fixed_count_ensemble, make_ideal_geometry, perturb_geometry

NM = 1e-9
# q^2 / (4 pi eps0 * 11.7 * hbar) from CODATA 2018 literals, evaluated by hand
KAPPA_SI = 186982.1593997365


def test_kappa_matches_hand_constant():
    assert PhysicalConstants().kappa == pytest.approx(KAPPA_SI, rel=1e-8)


def test_onsite_shift_at_40nm():
    shift = onsite_shift([0, 0, 40 * NM], [0, 0, 0])
    assert shift == pytest.approx(4674553984993.412, rel=1e-8)


def test_onsite_shift_inverse_distance():
    a = onsite_shift([0, 0, 10 * NM], [0, 0, 0])
    b = onsite_shift([0, 0, 20 * NM], [0, 0, 0])
    assert a == pytest.approx(2 * b, rel=1e-14)


def test_screening_limit():
    shifts = [onsite_shift([0, 0, NM], [0, 0, 0], PhysicalConstants(relative_permittivity=e)) for e in (1e3, 1e6, 1e9)]
    assert shifts[0] > shifts[1] > shifts[2]
    assert shifts[2] < 1e-7 * onsite_shift([0, 0, NM], [0, 0, 0])


def test_coincident_trap_raises(dipole):
    with pytest.raises(SingularCouplingError):
        trap_coupling(dipole.dots[0], dipole)


def test_two_term_coupling():
    g = QubitGeometry(Encoding.DIPOLE, np.array([[-10, 0, 0], [10, 0, 0]]) * NM, 20 * NM)
    c = trap_coupling([30 * NM, 0, 0], g)
    # state 0 (left dot) is 40 nm away, state 1 is 20 nm away
    assert abs(c.k) == pytest.approx(KAPPA_SI * (1 / (20 * NM) - 1 / (40 * NM)), rel=1e-8)
    assert c.k == pytest.approx(c.per_dot_shifts[0] - c.per_dot_shifts[1])


def test_bisector_plane_null(dipole):
    for y, z in [(0, 0), (13 * NM, 5 * NM), (-40 * NM, 70 * NM)]:
        assert trap_coupling([0, y, z], dipole).k == 0.0


def test_normal_axis_null(quad):
    for z in (0.0, 5 * NM, 100 * NM, -60 * NM):
        assert abs(trap_coupling([0, 0, z], quad).k) <= 1e-12 * KAPPA_SI / (20 * NM)


@pytest.mark.parametrize("mirror", [np.array([-1, 1, 1]), np.array([1, -1, 1])])
def test_edge_bisector_reflection_negates_k(quad, mirror):
    rng = np.random.default_rng(1)
    for _ in range(20):
        p = np.concatenate([rng.uniform(-80, 80, 2) * NM, [0.0]])
        k = trap_coupling(p, quad).k
        k_ref = trap_coupling(p * mirror, quad).k
        assert k_ref == pytest.approx(-k, rel=1e-9, abs=1e-9 * KAPPA_SI / NM)


def test_state_shifts_matches_per_dot_sum(quad):
    ens = fixed_count_ensemble(10, 1e15, 2e8, seed=3)
    s = state_shifts(ens, quad)
    k = coupling_constants(ens, quad)
    np.testing.assert_allclose(s[:, 0] - s[:, 1], k, rtol=1e-12)
    assert s.shape == (10, 4)


def test_effective_coupling_examples():
    assert effective_coupling([5.0]).k_eff == 5.0
    assert effective_coupling([3.0, 4.0]).k_eff == 5.0
    empty = effective_coupling([])
    assert empty.k_eff == 0.0
    assert empty.tau_p(0.99) == np.inf


def test_tau_p_formula():
    s = effective_coupling([1e9])
    assert s.tau_p(0.99) == pytest.approx(np.sqrt(0.02) / 1e9, rel=1e-15)
    with pytest.raises(ValueError):
        s.tau_p(1.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e12, 1e12, allow_nan=False), min_size=1, max_size=30), st.randoms())
def test_k_eff_permutation_invariant_and_monotone(ks, rnd):
    base = effective_coupling(ks).k_eff
    shuffled = list(ks)
    rnd.shuffle(shuffled)
    assert effective_coupling(shuffled).k_eff == pytest.approx(base, rel=1e-12, abs=1e-300)
    assert effective_coupling(ks + [rnd.uniform(-1e12, 1e12)]).k_eff >= base * (1 - 1e-15)


def test_scaling_exponent_dipole(dipole):
    r = np.geomspace(10, 100, 12) * dipole.side_length
    assert scaling_exponent(dipole, [1, 0, 0], r) == pytest.approx(-2.0, abs=0.05)


def test_scaling_exponent_quadrupole(quad):
    r = np.geomspace(10, 100, 12) * quad.side_length
    assert scaling_exponent(quad, [np.cos(0.3), np.sin(0.3), 0], r) == pytest.approx(-3.0, abs=0.05)


def test_scaling_exponent_rejects_symmetry_axis(quad):
    with pytest.raises(ValueError):
        scaling_exponent(quad, [1, 0, 0], np.geomspace(10, 100, 6) * quad.side_length)


def test_scaling_exponent_needs_five_points(dipole):
    with pytest.raises(ValueError):
        scaling_exponent(dipole, [1, 0, 0], [1e-7, 2e-7, 3e-7, 4e-7])


def test_perturbed_quadrupole_exponent_between_laws(quad):
    g = perturb_geometry(quad, 0.1, seed=42)
    r = np.geomspace(10, 100, 12) * quad.side_length
    slope = scaling_exponent(g, [np.cos(0.3), np.sin(0.3), 0], r)
    assert -3.0 < slope < -2.0


def test_uniform_field_dipole_splitting(dipole):
    E = 1e5
    res = uniform_field_energies(dipole, [E, 0, 0])
    c = PhysicalConstants()
    assert abs(res.splitting) == pytest.approx(c.electron_charge * E * 20 * NM / c.hbar, rel=1e-12)


def test_uniform_field_zero_field(quad):
    res = uniform_field_energies(quad, [0, 0, 0])
    assert res.splitting == 0.0 and res.common_mode == 0.0


def test_uniform_field_quadrupole_exactly_decoupled(quad, rng):
    for E in rng.normal(scale=1e6, size=(100, 3)):
        res = uniform_field_energies(quad, E)
        assert res.splitting == 0.0
        assert res.common_mode != 0.0


def test_k_eff_ratio_typical_sparse_ensemble(dipole, quad):
    ratios = []
    for s in range(20):
        ens = fixed_count_ensemble(100, 1e12, 2e8, seed=s)
        ratios.append(k_eff(ens, dipole) / k_eff(ens, quad))
    # 100 traps at 1e8 cm^-2: the decoupling ratio sits near 20
    assert 5 < np.median(ratios) < 60
