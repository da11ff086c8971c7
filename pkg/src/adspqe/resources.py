"""Gate, parameter and measurement accounting for the principal ansatz.

CNOT convention: every exponential exp(theta kappa) is decomposed into the
Pauli rotations of the Jordan-Wigner image of ``kappa``; a rotation on a
string of weight w costs 2 (w - 1) CNOTs (CNOT staircase in and out). No
cancellation between neighbouring rotations and no single-qubit gates.
"""

from __future__ import annotations

import functools
from dataclasses import asdict, dataclass
from typing import Sequence

from adspqe.pauli import QubitOperator, fermion_term
from adspqe.state import AnsatzLayer, Excitation

CNOT_CONVENTION = "jw-staircase: 2*(weight-1) CNOTs per Pauli rotation, no cross-rotation cancellation"


@functools.lru_cache(maxsize=None)
def kappa_pauli_strings(exc: Excitation) -> QubitOperator:
    """Jordan-Wigner image of ``tau - tau^dagger`` (anti-Hermitian, imaginary coefficients)."""
    n = exc.max_index + 1
    if n == 0:
        return QubitOperator(0)
    tau = fermion_term(exc.ladder_sequence(), n)
    return (tau - tau.adjoint()).simplify()


def cnot_count(exc: Excitation | Sequence[Excitation]) -> int:
    """CNOTs for ``exp(theta kappa)``; a sequence gives the total over its entries."""
    if not isinstance(exc, Excitation):
        return sum(cnot_count(e) for e in exc)
    return sum(2 * (p.weight - 1) for p, _ in kappa_pauli_strings(exc) if p.weight > 0)


def ansatz_cnot_count(layers: Sequence[AnsatzLayer]) -> int:
    return cnot_count([layer.excitation for layer in layers])


@dataclass(frozen=True)
class ResourceEstimate:
    """Resource tallies for one SPQE / AD(SPQE)-ASC run.

    ``residual_evaluations`` counts residual vectors (one per micro-sweep);
    ``residual_element_evaluations`` counts individual elements
    (sweeps x active parameters). The measurement bounds use the former.
    """

    cnot_count: int
    parameter_count: int
    auxiliary_count: int
    residual_evaluations: int
    residual_element_evaluations: int
    epsilon: float
    sum_abs_h: float
    m_spqe_bound: float
    m_scheme2_bound: float
    m_total: float
    m_macro_estimate: float
    cnot_convention: str = CNOT_CONVENTION

    def to_dict(self) -> dict:
        return asdict(self)


def measurement_bounds(
    result,
    epsilon: float = 1e-3,
    sum_abs_h: float | None = None,
    n_res: int | None = None,
    H: QubitOperator | None = None,
) -> ResourceEstimate:
    """Measurement-count bounds for SPQE and the scheme-II correction.

    ``M_SPQE <= N_res * 3 N_P * (sum|h|)^2 / eps^2``,
    ``M_II <= N_A * (sum|h|)^2 / eps^2`` and ``M_total = M_SPQE + M_II``.
    The macro-iteration overhead ``(dt * omega)^-2`` is reported separately.

    ``sum_abs_h`` defaults to the l1 norm of ``H`` without its identity term;
    ``n_res`` defaults to the residual-vector tally stored on ``result``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if sum_abs_h is None:
        if H is None:
            raise ValueError("pass sum_abs_h or the qubit Hamiltonian H")
        sum_abs_h = H.l1_norm()
    if n_res is None:
        n_res = result.residual_vector_evaluations
    n_p, n_a = result.n_principal, result.n_auxiliary
    scale = sum_abs_h**2 / epsilon**2
    m_spqe = n_res * 3 * n_p * scale
    m_ii = n_a * scale
    cfg = result.config
    return ResourceEstimate(
        cnot_count=ansatz_cnot_count(result.principal),
        parameter_count=n_p,
        auxiliary_count=n_a,
        residual_evaluations=n_res,
        residual_element_evaluations=result.residual_element_evaluations,
        epsilon=epsilon,
        sum_abs_h=sum_abs_h,
        m_spqe_bound=m_spqe,
        m_scheme2_bound=m_ii,
        m_total=m_spqe + m_ii,
        m_macro_estimate=(cfg.dt * cfg.omega) ** -2,
    )
