"""Point-charge couplings between charge traps and qubit dots.

Energies are angular frequencies (energy / hbar, rad/s) throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import SILICON, PhysicalConstants
from .geometry import QubitGeometry, TrapEnsemble, centroid


class SingularCouplingError(ValueError):
    """A trap sits on top of a dot."""


@dataclass(frozen=True)
class TrapCoupling:
    trap_index: int
    k: float
    per_dot_shifts: dict


@dataclass(frozen=True)
class CoherenceSummary:
    k_eff: float

    def tau_p(self, p):
        """Time for the parabolic coherence law to fall from 1 to ``p``."""
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0) | (p >= 1)):
            raise ValueError("p must lie in (0, 1)")
        with np.errstate(divide="ignore"):
            out = np.sqrt(2.0 * (1.0 - p)) / self.k_eff if self.k_eff > 0 else np.full(p.shape, np.inf)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class UniformFieldResult:
    common_mode: float
    splitting: float


def onsite_shifts(trap_positions, dots, constants: PhysicalConstants = SILICON) -> np.ndarray:
    """kappa / |trap - dot| for every trap/dot pair, shape ``(n_traps, n_dots)``."""
    trap_positions = np.reshape(np.asarray(trap_positions, dtype=float), (-1, 3))
    dots = np.reshape(np.asarray(dots, dtype=float), (-1, 3))
    r = np.linalg.norm(trap_positions[:, None, :] - dots[None, :, :], axis=-1)
    if np.any(r == 0):
        raise SingularCouplingError("trap position coincides with a dot")
    return constants.kappa / r


def onsite_shift(trap_position, dot, constants: PhysicalConstants = SILICON) -> float:
    return float(onsite_shifts(trap_position, dot, constants)[0, 0])


def state_shifts(traps, geom: QubitGeometry, constants: PhysicalConstants = SILICON, labels=None) -> np.ndarray:
    """Per-trap energy of each basis state when the trap sign is +1, shape ``(n_traps, n_states)``."""
    positions = traps.positions if isinstance(traps, TrapEnsemble) else traps
    return onsite_shifts(positions, geom.dots, constants) @ geom.occupancy_matrix(labels)


def coupling_constants(traps, geom: QubitGeometry, constants: PhysicalConstants = SILICON) -> np.ndarray:
    """Logical splitting k_j (state 0 minus state 1) for every trap."""
    s = state_shifts(traps, geom, constants, labels=("0", "1"))
    return s[:, 0] - s[:, 1]


def trap_coupling(trap_position, geom: QubitGeometry, constants: PhysicalConstants = SILICON,
                  trap_index: int = 0) -> TrapCoupling:
    shifts = onsite_shifts(trap_position, geom.dots, constants)[0]
    k = shifts[list(geom.occupancy["0"])].sum() - shifts[list(geom.occupancy["1"])].sum()
    return TrapCoupling(trap_index, float(k), {i: float(v) for i, v in enumerate(shifts)})


def trap_couplings(traps: TrapEnsemble, geom: QubitGeometry, constants: PhysicalConstants = SILICON) -> list:
    shifts = onsite_shifts(traps.positions, geom.dots, constants)
    occ0 = list(geom.occupancy["0"])
    occ1 = list(geom.occupancy["1"])
    return [
        TrapCoupling(j, float(row[occ0].sum() - row[occ1].sum()), {i: float(v) for i, v in enumerate(row)})
        for j, row in enumerate(shifts)
    ]


def effective_coupling(couplings) -> CoherenceSummary:
    """Root-sum-square of the couplings; accepts TrapCoupling objects or plain numbers."""
    ks = np.array([c.k if isinstance(c, TrapCoupling) else c for c in couplings], dtype=float)
    return CoherenceSummary(float(np.sqrt(np.sum(ks * ks))))


def k_eff(traps, geom: QubitGeometry, constants: PhysicalConstants = SILICON) -> float:
    k = coupling_constants(traps, geom, constants)
    return float(np.sqrt(np.sum(k * k)))


def scaling_exponent(geom: QubitGeometry, direction, distances, constants: PhysicalConstants = SILICON,
                     rtol: float = 1e-9) -> float:
    """Least-squares slope of log|k| against log r for one trap moved along ``direction``.

    ``direction`` is taken from the geometry centroid. Raises ``ValueError`` if the
    coupling vanishes anywhere along the ray (a symmetry axis).
    """
    distances = np.asarray(distances, dtype=float)
    if distances.size < 5:
        raise ValueError("need at least 5 distances for the fit")
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    positions = centroid(geom)[None, :] + distances[:, None] * u[None, :]
    k = coupling_constants(positions, geom, constants)
    scale = constants.kappa * geom.side_length / distances**2
    if np.any(np.abs(k) <= rtol * scale):
        raise ValueError("coupling vanishes along this direction; choose a non-symmetric direction")
    slope, _ = np.polyfit(np.log(distances), np.log(np.abs(k)), 1)
    return float(slope)


def uniform_field_energies(geom: QubitGeometry, field, constants: PhysicalConstants = SILICON) -> UniformFieldResult:
    """Logical-state energies in a uniform electric field (V/m).

    An electron at ``r`` picks up ``q E . r / hbar``. The splitting is formed
    from the summed occupied positions so that equal charge centroids cancel
    exactly rather than to rounding.
    """
    field = np.asarray(field, dtype=float)
    scale = constants.electron_charge / constants.hbar
    occ0 = geom.dots[list(geom.occupancy["0"])]
    occ1 = geom.dots[list(geom.occupancy["1"])]
    dipole = occ0.sum(axis=0) - occ1.sum(axis=0)
    splitting = scale * float(field @ dipole)
    common = scale * len(occ0) * float(field @ centroid(geom))
    return UniformFieldResult(common_mode=common, splitting=splitting)
