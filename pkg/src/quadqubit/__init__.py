"""Dephasing of 2-dot and 4-dot charge qubits by charge-trap telegraph noise, and gates on the 4-dot encoding."""
__version__ = "0.1.0"

from .constants import PhysicalConstants, SILICON
from .geometry import (Encoding, QubitGeometry, TrapEnsemble, TrapRegion, centroid, fixed_count_ensemble,
                       make_ideal_geometry, perturb_geometry, sample_traps)
from .electrostatics import (coupling_constants, effective_coupling, k_eff, onsite_shift, scaling_exponent,
                             state_shifts, trap_coupling, trap_couplings, uniform_field_energies)
from .telegraph import TelegraphProcess, integrate_xi, merged_segments, sample_record
from .coherence import (analytic_many, analytic_single, decay_time, formula_decay_time, mc_dephasing,
                        short_time)
from .gates import (HubbardModel, average_fidelity, design_gate, eigensystem, hamiltonian, phase_angle,
                    propagate_noiseless, propagate_noisy)
