"""Selected PQE: residual-state operator selection wrapped around PQE solves.

Each macro-iteration builds the residual state

    |r~> = (1 + i dt U^dagger H U) |Phi_0> = C_0 |Phi_0> + sum_mu C_mu |Phi_mu>,

excludes the operators with the smallest |C_mu| as long as their summed
``|C_mu|^2 / dt^2`` stays within ``omega^2``, appends the remaining new
operators to the ansatz and re-optimizes every amplitude with PQE
micro-iterations. The loop stops when a macro-iteration adds nothing.
Operators that are never selected form the auxiliary set.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from adspqe.errors import ConfigurationError
from adspqe.hamiltonian import MolecularHamiltonian, ReferenceData, hf_reference, mp_denominator
from adspqe.pauli import QubitOperator, jordan_wigner
from adspqe.pool import OperatorPool, complement, generate_pool
from adspqe.pqe import (
    MicroIterConfig,
    ResidualVector,
    energy,
    excited_determinant,
    micro_iterate,
    reference_state,
    residuals_from_vector,
    transformed_reference,
)
from adspqe.state import AnsatzLayer, Excitation, StateVector

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SPQEConfig:
    """SPQE settings.

    ``rank_cap`` bounds the excitations SPQE may select. ``aux_rank_cap``
    (default: ``rank_cap``) bounds the pool whose unselected remainder forms
    the auxiliary set, so an SD core can be combined with an SDTQ pool.
    """

    omega: float = 1e-2
    dt: float = 1e-3
    micro: MicroIterConfig = field(default_factory=MicroIterConfig)
    rank_cap: int = 4
    max_macro_iterations: int = 50
    aux_rank_cap: int | None = None

    def __post_init__(self) -> None:
        if self.omega <= 0:
            raise ConfigurationError("omega must be positive")
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        if self.aux_rank_cap is not None and self.aux_rank_cap < self.rank_cap:
            raise ConfigurationError("aux_rank_cap must not be below rank_cap")

    @property
    def pool_rank(self) -> int:
        return self.aux_rank_cap or self.rank_cap


@dataclass(frozen=True)
class MacroIterationRecord:
    iteration: int
    added: tuple[Excitation, ...]
    n_selected: int
    residual_norm: float
    energy: float
    micro_iterations: int
    micro_converged: bool


@dataclass
class SPQEResult:
    principal: list[AnsatzLayer]
    auxiliary: list[Excitation]
    e_spqe: float
    macro_history: list[MacroIterationRecord]
    final_residuals: ResidualVector
    pool: OperatorPool
    config: SPQEConfig
    hf_energy: float
    converged: bool
    micro_converged: bool
    residual_vector_evaluations: int = 0
    residual_element_evaluations: int = 0
    e_descending_order: float | None = None

    @property
    def n_principal(self) -> int:
        return len(self.principal)

    @property
    def n_auxiliary(self) -> int:
        return len(self.auxiliary)

    def to_manifest(self) -> dict:
        """JSON-ready run record."""
        cfg = asdict(self.config)
        return {
            "config": cfg,
            "e_hf": self.hf_energy,
            "e_spqe": self.e_spqe,
            "e_spqe_descending_theta_order": self.e_descending_order,
            "n_p": self.n_principal,
            "n_a": self.n_auxiliary,
            "converged": self.converged,
            "micro_converged": self.micro_converged,
            "residual_vector_evaluations": self.residual_vector_evaluations,
            "residual_element_evaluations": self.residual_element_evaluations,
            "principal": [{**l.excitation.to_dict(), "theta": l.theta} for l in self.principal],
            "macro_iterations": [
                {
                    "iteration": rec.iteration,
                    "added": [e.to_dict() for e in rec.added],
                    "n_selected": rec.n_selected,
                    "residual_norm": rec.residual_norm,
                    "energy": rec.energy,
                    "micro_iterations": rec.micro_iterations,
                    "micro_converged": rec.micro_converged,
                }
                for rec in self.macro_history
            ],
        }


def residual_state(
    layers: Sequence[AnsatzLayer], H: QubitOperator, ref: ReferenceData, dt: float
) -> StateVector:
    """``(1 + i dt U^dagger H U)|Phi_0>``, built exactly (no sampling)."""
    return reference_state(ref) + 1j * dt * transformed_reference(layers, H, ref)


def _coefficients(rstate: StateVector, excitations: Sequence[Excitation], ref: ReferenceData) -> np.ndarray:
    if not excitations:
        return np.zeros(0)
    dets, signs = zip(*(excited_determinant(e, ref) for e in excitations))
    return np.abs(np.asarray(signs) * rstate[np.asarray(dets)])


def residual_state_coefficients(
    layers: Sequence[AnsatzLayer],
    H: QubitOperator,
    dt: float,
    pool: OperatorPool | Sequence[Excitation],
    ref: ReferenceData,
) -> dict[Excitation, float]:
    """|C_mu| of the residual state for every pool excitation."""
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    excs = list(pool)
    values = _coefficients(residual_state(layers, H, ref, dt), excs, ref)
    return dict(zip(excs, values.tolist()))


def select_operators(
    coefficients: Mapping[Excitation, float], omega: float, dt: float
) -> tuple[list[Excitation], list[Excitation]]:
    """Split candidates into (selected, excluded).

    Candidates are visited in ascending ``|C|^2/dt^2``; the longest prefix
    whose running sum stays ``<= omega**2`` is excluded. The selected
    remainder is returned in descending magnitude. Ties keep mapping order.
    """
    if omega < 0 or dt <= 0:
        raise ConfigurationError("omega must be >= 0 and dt > 0")
    items = list(coefficients.items())
    weights = [(abs(c) / dt) ** 2 for _, c in items]
    order = sorted(range(len(items)), key=lambda k: (weights[k], k))
    budget = omega * omega
    total = 0.0
    cut = len(order)
    for pos, k in enumerate(order):
        if total + weights[k] > budget:
            cut = pos
            break
        total += weights[k]
    excluded = [items[k][0] for k in order[:cut]]
    kept = sorted(order[cut:], key=lambda k: (-weights[k], k))
    return [items[k][0] for k in kept], excluded


def run_spqe(
    h: MolecularHamiltonian,
    cfg: SPQEConfig = SPQEConfig(),
    H: QubitOperator | None = None,
    ref: ReferenceData | None = None,
) -> SPQEResult:
    """Run SPQE macro/micro-iterations and split the pool into principal/auxiliary sets."""
    ref = ref if ref is not None else hf_reference(h)
    H = H if H is not None else jordan_wigner(h)
    pool = generate_pool(ref, cfg.pool_rank)
    candidates = [e for e in pool if e.rank <= cfg.rank_cap]
    denominators = {e: mp_denominator(e, ref) for e in pool}

    layers: list[AnsatzLayer] = []
    present: set[Excitation] = set()
    history: list[MacroIterationRecord] = []
    n_vectors = n_elements = 0
    micro_ok = True
    converged = False
    w = None

    for k in range(cfg.max_macro_iterations):
        w = transformed_reference(layers, H, ref)
        rstate = reference_state(ref) + 1j * cfg.dt * w
        coeffs = dict(zip(candidates, _coefficients(rstate, candidates, ref).tolist()))
        selected, _ = select_operators(coeffs, cfg.omega, cfg.dt)
        new = [e for e in selected if e not in present]
        if not new:
            converged = True
            break
        layers = layers + [AnsatzLayer(e, 0.0) for e in new]
        present.update(new)
        micro = micro_iterate(
            layers, [l.excitation for l in layers], H, ref, cfg.micro, denominators
        )
        layers = micro.layers
        micro_ok = micro_ok and micro.converged
        n_vectors += micro.residual_vector_evaluations
        n_elements += micro.residual_element_evaluations
        norm = float(np.sqrt(sum(c * c for c in coeffs.values()))) / cfg.dt
        history.append(
            MacroIterationRecord(
                iteration=k,
                added=tuple(new),
                n_selected=len(selected),
                residual_norm=norm,
                energy=micro.energy,
                micro_iterations=micro.iterations,
                micro_converged=micro.converged,
            )
        )
        log.debug("macro %d: +%d ops, N_P=%d, E=%.10f", k, len(new), len(layers), micro.energy)
    else:
        log.warning("SPQE stopped at the macro-iteration cap (%d)", cfg.max_macro_iterations)
        w = transformed_reference(layers, H, ref)

    # the last residual state was built at the final U_P; its projections are
    # exactly the residuals of every pool operator
    final = ResidualVector(
        pool.entries,
        residuals_from_vector(w, pool.entries, ref),
        tuple(l.theta for l in layers),
    )
    principal_set = [l.excitation for l in layers]
    e_spqe = energy(layers, H, ref)
    by_magnitude = sorted(layers, key=lambda l: abs(l.theta))
    return SPQEResult(
        principal=layers,
        auxiliary=complement(pool, principal_set),
        e_spqe=e_spqe,
        macro_history=history,
        final_residuals=final,
        pool=pool,
        config=cfg,
        hf_energy=ref.hf_energy,
        converged=converged,
        micro_converged=micro_ok,
        residual_vector_evaluations=n_vectors,
        residual_element_evaluations=n_elements,
        e_descending_order=energy(by_magnitude, H, ref),
    )
