"""Selected projective quantum eigensolver with auxiliary-subspace energy corrections.

Statevector simulation of dUCC ansatz selection (SPQE), closed-form
auxiliary amplitudes and the scheme I / II energy corrections, with an exact
FCI oracle and CNOT / measurement-count estimators.
"""

from adspqe.asc import ASCEnergies, AuxiliarySolution, asc_energies, map_auxiliary
from adspqe.fci import fci_ground_energy
from adspqe.hamiltonian import MolecularHamiltonian, ReferenceData, hf_reference, parse_fcidump, read_fcidump
from adspqe.pauli import PauliString, QubitOperator, jordan_wigner
from adspqe.pool import OperatorPool, generate_pool
from adspqe.pqe import MicroIterConfig, micro_iterate, run_pqe
from adspqe.resources import ResourceEstimate, cnot_count, measurement_bounds
from adspqe.spqe import SPQEConfig, SPQEResult, run_spqe
from adspqe.state import AnsatzLayer, Excitation

__version__ = "0.1.0"

__all__ = [
    "ASCEnergies", "AnsatzLayer", "AuxiliarySolution", "Excitation", "MicroIterConfig",
    "MolecularHamiltonian", "OperatorPool", "PauliString", "QubitOperator", "ReferenceData",
    "ResourceEstimate", "SPQEConfig", "SPQEResult", "asc_energies", "cnot_count",
    "fci_ground_energy", "generate_pool", "hf_reference", "jordan_wigner", "map_auxiliary",
    "measurement_bounds", "micro_iterate", "parse_fcidump", "read_fcidump", "run_pqe", "run_spqe",
]
