"""Projective residuals and the PQE micro-iteration solver.

The residual of excitation mu for a disentangled ansatz U is

    r_mu = <Phi_mu| U^dagger H U |Phi_0>,  |Phi_mu> = tau_mu |Phi_0>,

and amplitudes are updated with the quasi-Newton step
``theta_mu += r_mu / D_mu`` using Moller-Plesset denominators.
"""

from __future__ import annotations

import csv
import functools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from adspqe.errors import ConsistencyError, NumericalIntegrityError
from adspqe.hamiltonian import ReferenceData, mp_denominator
from adspqe.pauli import QubitOperator, apply, expectation
from adspqe.state import (
    AnsatzLayer,
    Excitation,
    StateVector,
    apply_ansatz,
    apply_ansatz_adjoint,
    apply_exp_kappa,
    apply_tau,
    basis_state,
)

log = logging.getLogger(__name__)

# Imaginary parts of residual projections above this signal a bug.
IMAG_TOL = 1e-8


@functools.lru_cache(maxsize=65536)
def _excited_determinant(exc: Excitation, ref_det: int) -> tuple[int, int]:
    hit = apply_tau(exc, ref_det)
    if hit is None:
        raise ConsistencyError(f"{exc} does not connect to the reference determinant")
    return hit


def excited_determinant(exc: Excitation, ref: ReferenceData) -> tuple[int, int]:
    """``(det, sign)`` such that ``tau |Phi_0> = sign |det>``."""
    return _excited_determinant(exc, ref.determinant)


def reference_state(ref: ReferenceData) -> StateVector:
    return basis_state(ref.determinant, ref.n_qubits)


def transformed_reference(layers: Sequence[AnsatzLayer], H: QubitOperator, ref: ReferenceData) -> StateVector:
    """``U^dagger H U |Phi_0>`` for the ansatz built from ``layers``."""
    psi = apply_ansatz(layers, reference_state(ref))
    return apply_ansatz_adjoint(layers, apply(H, psi))


def energy(layers: Sequence[AnsatzLayer], H: QubitOperator, ref: ReferenceData) -> float:
    """Projective/variational energy ``<Phi_0|U^dagger H U|Phi_0>``."""
    return expectation(H, apply_ansatz(layers, reference_state(ref)))


@dataclass(frozen=True)
class ResidualVector:
    """Residuals r_mu for a set of excitations at one parameter snapshot."""

    excitations: tuple[Excitation, ...]
    values: np.ndarray
    thetas: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise NumericalIntegrityError("non-finite residual")

    def __getitem__(self, exc: Excitation) -> float:
        return float(self.values[self.excitations.index(exc)])

    def __len__(self) -> int:
        return len(self.excitations)

    def as_dict(self) -> dict[Excitation, float]:
        return dict(zip(self.excitations, self.values.tolist()))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def residuals_from_vector(
    w: StateVector, excitations: Sequence[Excitation], ref: ReferenceData
) -> np.ndarray:
    """Project ``w = U^dagger H U|Phi_0>`` onto ``<Phi_mu|`` for every excitation."""
    if not excitations:
        return np.zeros(0)
    dets, signs = zip(*(excited_determinant(e, ref) for e in excitations))
    proj = np.asarray(signs, dtype=float) * w[np.asarray(dets)]
    worst = np.max(np.abs(proj.imag))
    if worst > IMAG_TOL:
        raise NumericalIntegrityError(f"residual projection has imaginary part {worst:.3e}")
    return proj.real.copy()


def residuals(
    layers: Sequence[AnsatzLayer], excitations: Sequence[Excitation], H: QubitOperator, ref: ReferenceData
) -> ResidualVector:
    """Residuals for many excitations from one ``U^dagger H U`` application."""
    w = transformed_reference(layers, H, ref)
    values = residuals_from_vector(w, excitations, ref)
    return ResidualVector(tuple(excitations), values, tuple(layer.theta for layer in layers))


def residual_direct(
    layers: Sequence[AnsatzLayer], exc: Excitation, H: QubitOperator, ref: ReferenceData
) -> float:
    """``Re <Phi_mu|U^dagger H U|Phi_0>`` by explicit state preparation and projection."""
    w = transformed_reference(layers, H, ref)
    return float(residuals_from_vector(w, [exc], ref)[0])


def residual_diagonal_form(
    layers: Sequence[AnsatzLayer], exc: Excitation, H: QubitOperator, ref: ReferenceData
) -> float:
    """Residual from three diagonal expectation values of ``Hbar = U^dagger H U``.

    ``r_mu = <Omega|Hbar|Omega> - E_mu/2 - E_0/2`` with
    ``|Omega> = exp(pi/4 kappa_mu)|Phi_0>``.
    """
    phi0 = reference_state(ref)
    det, sign = excited_determinant(exc, ref)
    phi_mu = sign * basis_state(det, ref.n_qubits)
    omega = apply_exp_kappa(AnsatzLayer(exc, math.pi / 4), phi0)

    def hbar(v: StateVector) -> float:
        return expectation(H, apply_ansatz(layers, v), imag_tol=IMAG_TOL)

    return hbar(omega) - 0.5 * hbar(phi_mu) - 0.5 * hbar(phi0)


@dataclass(frozen=True)
class MicroIterConfig:
    """Settings for the PQE amplitude solver.

    ``damping`` scales the quasi-Newton step. If the max residual grows for
    ``divergence_window`` consecutive sweeps the damping is multiplied by
    ``divergence_factor`` (once per solve).
    """

    residual_tolerance: float = 1e-5
    max_iterations: int = 200
    damping: float = 1.0
    divergence_window: int = 5
    divergence_factor: float = 0.5

    def __post_init__(self) -> None:
        if self.residual_tolerance <= 0:
            raise ValueError("residual_tolerance must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class MicroIterRecord:
    sweep: int
    max_residual: float
    energy: float
    damping: float


@dataclass
class MicroIterResult:
    layers: list[AnsatzLayer]
    residuals: ResidualVector
    history: list[MicroIterRecord]
    iterations: int
    converged: bool
    residual_vector_evaluations: int
    residual_element_evaluations: int
    damping: float = field(default=1.0)

    @property
    def energy(self) -> float:
        return self.history[-1].energy


def micro_iterate(
    layers: Sequence[AnsatzLayer],
    active: Sequence[Excitation],
    H: QubitOperator,
    ref: ReferenceData,
    cfg: MicroIterConfig = MicroIterConfig(),
    denominators: Mapping[Excitation, float] | None = None,
) -> MicroIterResult:
    """Jacobi-style PQE solve of the active amplitudes.

    Every sweep evaluates the residual vector over ``active`` at the current
    amplitudes and, unless ``max|r| < residual_tolerance``, updates all active
    amplitudes simultaneously by ``damping * r / D``. Inactive layers keep
    their amplitudes. Non-convergence is reported, not raised.
    """
    layers = list(layers)
    position = {layer.excitation: k for k, layer in enumerate(layers)}
    active = list(active)
    missing = [e for e in active if e not in position]
    if missing:
        raise ConsistencyError(f"active excitation {missing[0]} is not an ansatz layer")
    excs = [layer.excitation for layer in layers]
    theta = np.array([layer.theta for layer in layers], dtype=float)
    act = np.array([position[e] for e in active], dtype=int)
    denoms = np.array(
        [denominators[e] if denominators and e in denominators else mp_denominator(e, ref) for e in active]
    )
    ref_det = ref.determinant

    damping = cfg.damping
    halved = False
    growth = 0
    prev = math.inf
    history: list[MicroIterRecord] = []
    n_vectors = n_elements = 0
    converged = False
    iterations = 0
    r = np.zeros(len(active))

    while True:
        current = [AnsatzLayer(e, t) for e, t in zip(excs, theta)]
        w = transformed_reference(current, H, ref)
        e_now = float(w[ref_det].real)
        r = residuals_from_vector(w, active, ref)
        n_vectors += 1
        n_elements += len(active)
        if np.any(np.isnan(r)):
            raise NumericalIntegrityError("NaN residual during micro-iterations")
        rmax = float(np.max(np.abs(r))) if len(r) else 0.0
        history.append(MicroIterRecord(iterations, rmax, e_now, damping))
        if rmax < cfg.residual_tolerance:
            converged = True
            break
        if iterations >= cfg.max_iterations:
            log.warning("micro-iterations stopped at %d sweeps, max|r| = %.3e", iterations, rmax)
            break
        growth = growth + 1 if rmax > prev else 0
        if growth >= cfg.divergence_window and not halved:
            damping *= cfg.divergence_factor
            halved = True
            growth = 0
            log.info("residual grew for %d sweeps; damping -> %.3f", cfg.divergence_window, damping)
        prev = rmax
        theta[act] += damping * r / denoms
        iterations += 1

    final_layers = [AnsatzLayer(e, float(t)) for e, t in zip(excs, theta)]
    return MicroIterResult(
        layers=final_layers,
        residuals=ResidualVector(tuple(active), r, tuple(theta.tolist())),
        history=history,
        iterations=iterations,
        converged=converged,
        residual_vector_evaluations=n_vectors,
        residual_element_evaluations=n_elements,
        damping=damping,
    )


def run_pqe(
    excitations: Sequence[Excitation],
    H: QubitOperator,
    ref: ReferenceData,
    cfg: MicroIterConfig = MicroIterConfig(),
) -> MicroIterResult:
    """Conventional PQE over a fixed operator list, starting from zero amplitudes."""
    layers = [AnsatzLayer(e, 0.0) for e in excitations]
    return micro_iterate(layers, list(excitations), H, ref, cfg)


def write_history_csv(history: Sequence[MicroIterRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sweep", "max_residual", "energy"])
        for rec in history:
            writer.writerow([rec.sweep, f"{rec.max_residual:.12e}", f"{rec.energy:.12f}"])
