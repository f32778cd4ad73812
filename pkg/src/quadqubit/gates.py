"""Single-qubit gates on the 4-dot, 2-electron encoding.

Basis order is ``(|0>, |1>, |e0>, |e1>)``: the two diagonal (logical)
configurations followed by the two same-edge configurations. Model
Hamiltonians are dimensionless (units of the leakage energy delta); physical
propagation multiplies by delta in rad/s.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import SILICON, PhysicalConstants
from .telegraph import draw_switches, segments_from_arrays, trajectory_rng

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.diag([1.0, -1.0])


@dataclass(frozen=True)
class HubbardModel:
    omega: float
    delta: float = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.omega >= 0:
            raise ValueError("omega must be non-negative")


@dataclass(frozen=True, eq=False)
class EigenSystem:
    energies: np.ndarray
    vectors: np.ndarray
    degenerate: bool = False


class GateKind(str, enum.Enum):
    HALF_PI = "half_pi"
    NOT = "not"


@dataclass(frozen=True)
class GateDesign:
    n: int
    m: int
    j: int
    omega: float
    t_f: float
    gamma: float
    kind: GateKind = GateKind.HALF_PI
    max_transient_population: float = 0.0
    integrated_population: float = 0.0

    def model(self, delta: float = 1.0) -> HubbardModel:
        return HubbardModel(self.omega * delta, delta)

    def ideal_logical(self) -> np.ndarray:
        """Target 2x2 unitary: |0> -> |0> + e^{i gamma}|1>, |1> -> |0> - e^{i gamma}|1> (normalised).

        For the designs produced here ``e^{i gamma} = +-i``, so the target is the
        symmetric matrix ``(I + e^{i gamma} X) / sqrt 2``; the NOT gate is X.
        """
        if self.kind is GateKind.NOT:
            return SIGMA_X.astype(complex)
        phase = np.exp(1j * self.gamma)
        return (np.eye(2) + phase * SIGMA_X) / np.sqrt(2.0)

    def to_dict(self):
        return {
            "n": self.n, "m": self.m, "j": self.j, "omega": self.omega,
            "t_f": self.t_f, "gamma": self.gamma, "kind": self.kind.value,
            "max_transient_population": self.max_transient_population,
            "integrated_population": self.integrated_population,
        }


@dataclass(frozen=True)
class PhaseGatePulse:
    """Piecewise-constant bias V0 - V1 (volts) held for ``durations`` (seconds)."""

    levels: tuple
    durations: tuple

    def __post_init__(self):
        if len(self.levels) != len(self.durations):
            raise ValueError("levels and durations must have equal length")
        if any(d < 0 for d in self.durations):
            raise ValueError("durations must be non-negative")

    @property
    def duration(self) -> float:
        return float(sum(self.durations))


def phase_angle(pulse: PhaseGatePulse, constants: PhysicalConstants = SILICON, wrap: bool = False) -> float:
    area = float(np.dot(pulse.levels, pulse.durations))
    phi = 2.0 * constants.electron_charge * area / constants.hbar
    return phi % (2.0 * np.pi) if wrap else phi


def hamiltonian(model: HubbardModel) -> np.ndarray:
    """H0 + H_tunnel in units of delta (real symmetric 4x4)."""
    w = model.omega / model.delta
    h = np.diag([0.0, 0.0, 1.0, 1.0])
    h[:2, 2:] = w
    h[2:, :2] = w
    return h


def eigensystem(model: HubbardModel) -> EigenSystem:
    """Closed-form eigenpairs of :func:`hamiltonian`, columns normalised.

    Energies are ``0, 1, (1 + s) / 2, (1 - s) / 2`` with ``s = sqrt(1 + 16 w^2)``.
    At ``w = 0`` the pairs (E1, E4) and (E2, E3) coincide and ``degenerate`` is set.
    """
    w = model.omega / model.delta
    s = math.sqrt(1.0 + 16.0 * w * w)
    energies = np.array([0.0, 1.0, 0.5 * (1.0 + s), 0.5 * (1.0 - s)])
    # 4w / (s - 1) overflows as w -> 0; rescale psi4 by its inverse, 4w / (s + 1)
    a3 = 4.0 * w / (s + 1.0)
    vecs = np.array([
        [1.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, -1.0],
        [a3, a3, 1.0, 1.0],
        [1.0, 1.0, -a3, -a3],
    ]).T
    vecs /= np.linalg.norm(vecs, axis=0)
    return EigenSystem(energies, vecs, degenerate=(w == 0.0))


def design_gate(n: int, m: int, kind=GateKind.HALF_PI) -> GateDesign:
    """Tunnelling rate and duration giving a pi/2 (or NOT) rotation.

    Requires ``n`` even, ``n > m >= 1`` and ``gcd(n, m) = 1``. ``j`` is the
    least positive solution of ``j m = n / 2 (mod n)``.
    """
    n, m = int(n), int(m)
    if n % 2 or not n > m >= 1 or math.gcd(n, m) != 1:
        raise ValueError(f"invalid (n, m) = ({n}, {m}): need n even, n > m >= 1, gcd(n, m) = 1")
    kind = GateKind(kind)
    omega = math.sqrt((n / m) ** 2 - 1.0) / 4.0
    # m is odd, so m^-1 mod n exists
    j = (n // 2) * pow(m, -1, n) % n
    t_half = 2.0 * j * m * math.pi / n
    gamma = (math.pi * (n - m) / 2.0) % (2.0 * math.pi)
    t_f = t_half if kind is GateKind.HALF_PI else 2.0 * t_half
    frac = (n * n - m * m) / (n * n)
    return GateDesign(n, m, j, omega, t_f, gamma, kind, frac, math.pi * m * frac / 2.0)


def propagate_noiseless(model: HubbardModel, t: float) -> np.ndarray:
    """exp(-i H t) with ``t`` in units of 1/delta, from the closed-form eigensystem."""
    if t < 0:
        raise ValueError("t must be non-negative")
    es = eigensystem(model)
    v = es.vectors
    return (v * np.exp(-1j * es.energies * t)) @ v.T


def populations(model: HubbardModel, psi0, times) -> np.ndarray:
    """Basis populations ``|<b|psi(t)>|^2`` at each time, shape ``(len(times), 4)``."""
    es = eigensystem(model)
    v = es.vectors
    c = v.T @ np.asarray(psi0, dtype=complex)
    t = np.asarray(times, dtype=float)
    amps = (np.exp(-1j * np.outer(t, es.energies)) * c) @ v.T
    return np.abs(amps) ** 2


def max_leakage_population(design: GateDesign, psi0=None, n_points: int = 20001) -> float:
    """Peak population of ``{|e0>, |e1>}`` during ``[0, t_f]``.

    With ``psi0=None`` the initial state is (|0> + |1>)/sqrt 2, the logical state
    that couples most strongly to the leakage pair. From |0> or |1> the peak is
    half as large.
    """
    if psi0 is None:
        psi0 = np.array([1.0, 1.0, 0.0, 0.0]) / np.sqrt(2.0)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.size == 2:
        psi0 = np.concatenate((psi0, [0.0, 0.0]))
    t = np.linspace(0.0, design.t_f, n_points)
    pop = populations(design.model(), psi0, t)
    return float((pop[:, 2] + pop[:, 3]).max())


def logical_gate_error(u_logical: np.ndarray, target: np.ndarray) -> float:
    """1 - |tr(target^dag U)| / d, insensitive to global phase; leakage counts as error."""
    d = target.shape[0]
    return float(1.0 - abs(np.trace(target.conj().T @ u_logical)) / d)


CARDINAL_STATES = (
    np.array([1.0, 1.0]) / np.sqrt(2.0),
    np.array([1.0, -1.0]) / np.sqrt(2.0),
    np.array([1.0, 1.0j]) / np.sqrt(2.0),
    np.array([1.0, -1.0j]) / np.sqrt(2.0),
    np.array([1.0, 0.0]),
    np.array([0.0, 1.0]),
)
CARDINAL_LABELS = ("+x", "-x", "+y", "-y", "+z", "-z")


@dataclass(frozen=True, eq=False)
class QuadrupoleGate:
    """A designed gate run on the 4-dot qubit with leakage energy ``delta`` (rad/s)."""

    design: GateDesign
    delta: float

    @property
    def dim(self) -> int:
        return 4

    @property
    def duration(self) -> float:
        return self.design.t_f / self.delta

    def base_hamiltonian(self) -> np.ndarray:
        return self.delta * hamiltonian(self.design.model())

    def ideal(self) -> np.ndarray:
        return self.design.ideal_logical()

    def noise_diagonals(self, state_shifts: np.ndarray) -> np.ndarray:
        """Per-trap diagonal noise terms; ``state_shifts`` has one column per basis state."""
        return np.asarray(state_shifts, dtype=float).reshape(-1, 4)


@dataclass(frozen=True, eq=False)
class DipoleGate:
    """Reference 2-dot pi/2 gate: H = Omega_2 X + sum_j (k_j / 2) xi_j Z with Omega_2 = pi / (4 t_f)."""

    t_f: float

    @property
    def dim(self) -> int:
        return 2

    @property
    def duration(self) -> float:
        return self.t_f

    @property
    def omega(self) -> float:
        return np.pi / (4.0 * self.t_f)

    def base_hamiltonian(self) -> np.ndarray:
        return self.omega * SIGMA_X

    def ideal(self) -> np.ndarray:
        return np.cos(np.pi / 4) * np.eye(2) - 1j * np.sin(np.pi / 4) * SIGMA_X

    def noise_diagonals(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float).reshape(-1)
        return 0.5 * np.stack((k, -k), axis=1)


def propagate_noisy(gate, noise_diagonals, times, offsets, signs) -> np.ndarray:
    """Propagator over the gate duration for one set of switching records.

    ``noise_diagonals`` is ``(n_traps, dim)``: the diagonal energy each trap adds
    when its sign is +1.
    """
    dts, sign_matrix = segments_from_arrays(times, offsets, signs, gate.duration)
    diags = sign_matrix @ np.asarray(noise_diagonals, dtype=float).reshape(len(signs), gate.dim)
    return kernels.propagate_segments(gate.base_hamiltonian(), np.ascontiguousarray(diags), np.ascontiguousarray(dts))


@dataclass(frozen=True, eq=False)
class FidelityResult:
    fidelity: float
    per_state: dict
    n_traj: int
    samples: np.ndarray = field(repr=False, default=None)

    @property
    def error(self) -> float:
        return 1.0 - self.fidelity

    @property
    def stderr(self) -> float:
        s = self.samples
        if s is None or s.size < 2:
            return float("nan")
        return float(s.std(ddof=1) / np.sqrt(s.size))

    def to_dict(self):
        return {"fidelity": self.fidelity, "error": self.error, "stderr": self.stderr,
                "n_traj_per_state": self.n_traj, "per_state": self.per_state}


def average_fidelity(gate, noise_diagonals, rates, n_traj_per_state: int, seed, *, stream: int = 0) -> FidelityResult:
    """Mean state fidelity over the six cardinal logical inputs and noise records.

    The final state is projected onto the logical pair without renormalising,
    so leakage counts as error. Records are keyed by ``(seed, stream, state,
    trajectory)``; two gates called with the same keys see identical noise.
    """
    if n_traj_per_state < 1:
        raise ValueError("n_traj_per_state must be >= 1")
    rates = np.asarray(rates, dtype=float).reshape(-1)
    diag = np.asarray(noise_diagonals, dtype=float).reshape(rates.size, gate.dim)
    ideal = gate.ideal()
    noiseless = rates.size == 0 or not np.any(diag)
    samples = np.empty((len(CARDINAL_STATES), n_traj_per_state))
    for s, psi in enumerate(CARDINAL_STATES):
        target = ideal @ psi
        start = np.zeros(gate.dim, dtype=complex)
        start[:2] = psi
        for i in range(n_traj_per_state):
            if noiseless:
                if i == 0:
                    u = kernels.propagate_segments(gate.base_hamiltonian(), np.zeros((1, gate.dim)),
                                                   np.array([gate.duration]))
                    f0 = abs(np.vdot(target, (u @ start)[:2])) ** 2
                samples[s, i] = f0
                continue
            rng = trajectory_rng(seed, stream, s, i)
            times, offsets, signs = draw_switches(rng, rates, gate.duration)
            u = propagate_noisy(gate, diag, times, offsets, signs)
            samples[s, i] = abs(np.vdot(target, (u @ start)[:2])) ** 2
    per_state = {lab: float(samples[i].mean()) for i, lab in enumerate(CARDINAL_LABELS)}
    return FidelityResult(float(samples.mean()), per_state, n_traj_per_state, samples.reshape(-1))


def physical_gate_time(design: GateDesign, delta: float) -> float:
    """Gate duration in seconds for leakage energy ``delta`` in rad/s."""
    return design.t_f / delta

