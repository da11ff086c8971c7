"""Auxiliary amplitudes from the principal ansatz and non-iterative energy corrections.

With the principal ansatz U_P fixed, each auxiliary amplitude is

    theta_A = <Phi_A| U_P^dagger H U_P |Phi_0> / D_A,

and the energy is corrected as

    E(I)  = E_SPQE + sum_A theta_A^2 D_A
    E(II) = E_SPQE + 2 sum_A theta_A^2 D_A + 1/2 sum_A theta_A^2 <Phi_0|[[H, k_A], k_A]|Phi_0>.

Scheme II keeps only the diagonal (A, A) double-commutator terms of the bare
Hamiltonian. Neither correction applies any unitary beyond U_P.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from adspqe.errors import ConsistencyError
from adspqe.hamiltonian import ReferenceData, is_level_shifted, mp_denominator
from adspqe.pauli import QubitOperator, apply
from adspqe.pqe import reference_state, residual_direct, residuals, transformed_reference
from adspqe.spqe import SPQEResult
from adspqe.state import Excitation, StateVector, apply_kappa


class Provenance(str, Enum):
    REUSED = "reused-from-final-residuals"
    FRESH = "freshly-computed"


@dataclass
class AuxiliarySolution:
    """Mapped auxiliary amplitudes, one entry per auxiliary excitation."""

    thetas: dict[Excitation, float]
    denominators: dict[Excitation, float]
    provenance: dict[Excitation, Provenance]
    level_shifted: set[Excitation] = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.thetas)

    def __getitem__(self, exc: Excitation) -> float:
        return self.thetas[exc]

    @property
    def excitations(self) -> list[Excitation]:
        return list(self.thetas)

    def with_thetas(self, thetas: Mapping[Excitation, float]) -> AuxiliarySolution:
        """Copy with replaced amplitudes (used to probe the energy expressions)."""
        return AuxiliarySolution(
            {e: float(thetas[e]) for e in self.thetas},
            dict(self.denominators),
            dict(self.provenance),
            set(self.level_shifted),
        )


@dataclass(frozen=True)
class ASCEnergies:
    """Scheme energies and correction terms (hartree); unset fields are None."""

    e_spqe: float
    e_scheme1: float | None = None
    e_scheme2: float | None = None
    term1: float | None = None
    term2_scheme2: float | None = None

    def merged(self, other: ASCEnergies) -> ASCEnergies:
        pick = lambda a, b: a if a is not None else b  # noqa: E731
        return ASCEnergies(
            self.e_spqe,
            pick(self.e_scheme1, other.e_scheme1),
            pick(self.e_scheme2, other.e_scheme2),
            pick(self.term1, other.term1),
            pick(self.term2_scheme2, other.term2_scheme2),
        )


def map_auxiliary(
    spqe: SPQEResult,
    H: QubitOperator,
    ref: ReferenceData,
    recompute: bool = False,
) -> AuxiliarySolution:
    """Map the principal amplitudes onto the auxiliary set, ``theta_A = r_A / D_A``.

    By default the residuals stored from the last SPQE macro-iteration are
    reused; ``recompute=True`` evaluates them afresh at U_P.
    """
    aux = spqe.auxiliary
    if recompute:
        r = residuals(spqe.principal, aux, H, ref).as_dict()
        source = Provenance.FRESH
    else:
        stored = spqe.final_residuals.as_dict()
        missing = [e for e in aux if e not in stored]
        if missing:
            raise ConsistencyError(f"no stored residual for auxiliary excitation {missing[0]}")
        r = {e: stored[e] for e in aux}
        source = Provenance.REUSED
    thetas, denoms, shifted = {}, {}, set()
    for e in aux:
        d = mp_denominator(e, ref)
        denoms[e] = d
        thetas[e] = r[e] / d
        if is_level_shifted(d):
            shifted.add(e)
    return AuxiliarySolution(thetas, denoms, {e: source for e in aux}, shifted)


def double_commutator_expectation(exc: Excitation, H: QubitOperator, ref: ReferenceData) -> float:
    """``<Phi_0|[[H, k], k]|Phi_0> = <H k k - 2 k H k + k k H>`` for ``k = tau - tau^dagger``."""
    phi0 = reference_state(ref)
    return _double_commutator(lambda v: apply_kappa(exc, v), H, phi0)


def _double_commutator(kappa, H: QubitOperator, phi0: StateVector) -> float:
    k1 = kappa(phi0)
    kk = kappa(k1)
    hk = apply(H, k1)
    h0 = apply(H, phi0)
    val = np.vdot(phi0, apply(H, kk)) - 2 * np.vdot(phi0, kappa(hk)) + np.vdot(phi0, kappa(kappa(h0)))
    return float(val.real)


def energy_scheme1(spqe: SPQEResult, aux: AuxiliarySolution, ref: ReferenceData | None = None) -> ASCEnergies:
    """``E(I) = E_SPQE + sum_A theta_A^2 D_A``."""
    corr = _ordered_sum(aux, lambda e: aux.thetas[e] ** 2 * aux.denominators[e])
    return ASCEnergies(e_spqe=spqe.e_spqe, e_scheme1=spqe.e_spqe + corr)


def energy_scheme2(
    spqe: SPQEResult, aux: AuxiliarySolution, H: QubitOperator, ref: ReferenceData
) -> ASCEnergies:
    """``E(II) = E_SPQE + 2 sum theta^2 D + 1/2 sum theta^2 W_A``."""
    term1 = 2.0 * _ordered_sum(aux, lambda e: aux.thetas[e] ** 2 * aux.denominators[e])
    term2 = 0.5 * _ordered_sum(
        aux,
        lambda e: aux.thetas[e] ** 2 * double_commutator_expectation(e, H, ref) if aux.thetas[e] else 0.0,
    )
    return ASCEnergies(
        e_spqe=spqe.e_spqe,
        e_scheme2=spqe.e_spqe + term1 + term2,
        term1=term1,
        term2_scheme2=term2,
    )


def asc_energies(spqe: SPQEResult, aux: AuxiliarySolution, H: QubitOperator, ref: ReferenceData) -> ASCEnergies:
    return energy_scheme1(spqe, aux, ref).merged(energy_scheme2(spqe, aux, H, ref))


def _ordered_sum(aux: AuxiliarySolution, term) -> float:
    # fixed summation order (auxiliary list order) keeps results reproducible
    total = 0.0
    for e in aux.thetas:
        total += term(e)
    return total


def term1_statevector(
    spqe: SPQEResult, aux: AuxiliarySolution, H: QubitOperator, ref: ReferenceData
) -> dict[Excitation, float]:
    """``theta_A <Phi_0|[Hbar_P, k_A]|Phi_0>`` per auxiliary excitation, by statevector."""
    phi0 = reference_state(ref)
    g = transformed_reference(spqe.principal, H, ref)  # Hbar_P |Phi_0>
    out = {}
    for e, theta in aux.thetas.items():
        k0 = apply_kappa(e, phi0)
        val = np.vdot(g, k0) - np.vdot(phi0, apply_kappa(e, g))
        out[e] = float(theta * val.real)
    return out


def term2_full(aux: AuxiliarySolution, H: QubitOperator, ref: ReferenceData) -> float:
    """Diagnostic: ``1/2 sum_{A,B} theta_A theta_B <[[H, k_A], k_B]>`` with bare H.

    Uses ``K = sum_A theta_A k_A`` so the double sum is ``1/2 <[[H, K], K]>``.
    The difference to the scheme-II term measures the dropped off-diagonal part.
    """
    items: Sequence[tuple[Excitation, float]] = [(e, t) for e, t in aux.thetas.items() if t]

    def big_kappa(v: StateVector) -> StateVector:
        out = np.zeros_like(v)
        for e, t in items:
            out += t * apply_kappa(e, v)
        return out

    return 0.5 * _double_commutator(big_kappa, H, reference_state(ref))


def recompute_residual(spqe: SPQEResult, exc: Excitation, H: QubitOperator, ref: ReferenceData) -> float:
    """Residual of one auxiliary excitation at U_P through the PQE residual path."""
    return residual_direct(spqe.principal, exc, H, ref)
