import numpy as np
import pytest

from quadqubit.geometry import Encoding, make_ideal_geometry

NM = 1e-9


@pytest.fixture
def dipole():
    return make_ideal_geometry(Encoding.DIPOLE, 20 * NM, 20 * NM)


@pytest.fixture
def quad():
    return make_ideal_geometry(Encoding.QUADRUPOLE, 20 * NM, 20 * NM)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
