"""Determinant-basis statevectors and exact excitation-operator exponentials.

A statevector is a dense complex numpy array of length ``2**n_qubits`` whose
index is the occupation bitstring (qubit/spin orbital 0 is the least
significant bit). Ladder operators pick up the Jordan-Wigner parity
``(-1)**(number of occupied modes below p)``, so the sign conventions here
agree with :mod:`adspqe.pauli`.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

StateVector = np.ndarray


@dataclass(frozen=True, order=True)
class Excitation:
    """Particle-hole excitation ``tau = a+_a a+_b ... a_j a_i``.

    ``holes`` are (i, j, ...) and ``particles`` are (a, b, ...), both in
    ascending order. ``kappa = tau - tau^dagger`` is the anti-Hermitian
    generator used in the ansatz.
    """

    holes: tuple[int, ...]
    particles: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "holes", tuple(sorted(self.holes)))
        object.__setattr__(self, "particles", tuple(sorted(self.particles)))
        if len(self.holes) != len(self.particles):
            raise ValueError("holes and particles must have the same length")
        if len(set(self.holes)) != len(self.holes) or len(set(self.particles)) != len(self.particles):
            raise ValueError("repeated spin-orbital index in excitation")
        if set(self.holes) & set(self.particles):
            raise ValueError("holes and particles overlap")

    @property
    def rank(self) -> int:
        return len(self.holes)

    @property
    def conserves_sz(self) -> bool:
        alpha = lambda idx: sum(1 for p in idx if p % 2 == 0)  # noqa: E731
        return alpha(self.holes) == alpha(self.particles)

    @property
    def hole_mask(self) -> int:
        return sum(1 << i for i in self.holes)

    @property
    def particle_mask(self) -> int:
        return sum(1 << a for a in self.particles)

    @property
    def max_index(self) -> int:
        return max(self.holes + self.particles, default=-1)

    def ladder_sequence(self) -> list[tuple[int, bool]]:
        """tau as ``(mode, is_creation)`` pairs, written left to right."""
        return [(a, True) for a in self.particles] + [(i, False) for i in reversed(self.holes)]

    def to_dict(self) -> dict:
        return {"rank": self.rank, "holes": list(self.holes), "particles": list(self.particles)}

    @classmethod
    def from_dict(cls, d: dict) -> Excitation:
        return cls(tuple(d["holes"]), tuple(d["particles"]))

    def __str__(self) -> str:
        return f"{','.join(map(str, self.holes))}->{','.join(map(str, self.particles))}"


@dataclass(frozen=True)
class AnsatzLayer:
    """One factor ``exp(theta * kappa)`` of the disentangled ansatz."""

    excitation: Excitation
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.theta):
            raise ValueError(f"non-finite amplitude for {self.excitation}")


class _CallCounter:
    """Counts calls of :func:`apply_exp_kappa` (used to audit circuit usage)."""

    def __init__(self) -> None:
        self.count = 0

    def reset(self) -> None:
        self.count = 0


exp_kappa_calls = _CallCounter()


def basis_state(det: int, n_qubits: int) -> StateVector:
    v = np.zeros(1 << n_qubits, dtype=complex)
    v[det] = 1.0
    return v


def _parity_below(det: int, p: int) -> int:
    return bin(det & ((1 << p) - 1)).count("1") & 1


def apply_tau(exc: Excitation, det: int) -> tuple[int, int] | None:
    """Apply ``tau`` to one determinant.

    Returns ``(new_det, sign)`` or ``None`` when an annihilated mode is empty
    or a created mode is already occupied.
    """
    sign = 1
    for p, create in reversed(exc.ladder_sequence()):
        occupied = (det >> p) & 1
        if occupied == create:
            return None
        if _parity_below(det, p):
            sign = -sign
        det ^= 1 << p
    return det, sign


@functools.lru_cache(maxsize=8192)
def tau_connections(exc: Excitation, n_qubits: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All pairs with ``tau |src> = sign |dst>`` over the full register."""
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    hmask, pmask = exc.hole_mask, exc.particle_mask
    src = idx[((idx & hmask) == hmask) & ((idx & pmask) == 0)]
    sign = np.ones(src.shape, dtype=np.int64)
    state = src.copy()
    for p, _create in reversed(exc.ladder_sequence()):
        below = np.bitwise_count(state & ((1 << p) - 1)) & 1
        sign = np.where(below == 1, -sign, sign)
        state = state ^ (1 << p)
    for arr in (src, state, sign):
        arr.setflags(write=False)
    return src, state, sign.astype(float)


def apply_kappa(exc: Excitation, v: StateVector) -> StateVector:
    """Return ``(tau - tau^dagger) v``."""
    n_qubits = v.shape[0].bit_length() - 1
    src, dst, sign = tau_connections(exc, n_qubits)
    out = np.zeros_like(v)
    out[dst] += sign * v[src]
    out[src] -= sign * v[dst]
    return out


def apply_exp_kappa(layer: AnsatzLayer, v: StateVector) -> StateVector:
    """Return ``exp(theta kappa) v`` exactly.

    Uses ``exp(theta kappa) = 1 + sin(theta) kappa + (1 - cos(theta)) kappa^2``;
    on each coupled pair (src, dst) this is a plane rotation, and every other
    amplitude is left untouched.
    """
    exp_kappa_calls.count += 1
    n_qubits = v.shape[0].bit_length() - 1
    src, dst, sign = tau_connections(layer.excitation, n_qubits)
    c, s = np.cos(layer.theta), np.sin(layer.theta)
    out = v.copy()
    vs, vd = v[src], v[dst]
    out[dst] = c * vd + sign * s * vs
    out[src] = c * vs - sign * s * vd
    return out


def apply_ansatz(layers: Sequence[AnsatzLayer], v: StateVector) -> StateVector:
    """Apply the layers in list order (the first layer acts first on ``v``)."""
    for layer in layers:
        v = apply_exp_kappa(layer, v)
    return v


def apply_ansatz_adjoint(layers: Sequence[AnsatzLayer], v: StateVector) -> StateVector:
    """Apply the inverse of :func:`apply_ansatz`."""
    for layer in reversed(layers):
        v = apply_exp_kappa(AnsatzLayer(layer.excitation, -layer.theta), v)
    return v


def project(det: int, v: StateVector) -> complex:
    """Amplitude ``<det|v>``."""
    return complex(v[det])


def support_sectors(v: StateVector, tol: float = 1e-12) -> set[tuple[int, int]]:
    """Set of (n_alpha, n_beta) sectors with amplitude above ``tol``."""
    n_qubits = v.shape[0].bit_length() - 1
    idx = np.nonzero(np.abs(v) > tol)[0]
    alpha_mask = sum(1 << p for p in range(0, n_qubits, 2))
    beta_mask = sum(1 << p for p in range(1, n_qubits, 2))
    na = np.bitwise_count(idx & alpha_mask)
    nb = np.bitwise_count(idx & beta_mask)
    return set(zip(na.tolist(), nb.tolist()))


def layers_from(excitations: Iterable[Excitation], thetas: Iterable[float] | None = None) -> list[AnsatzLayer]:
    excitations = list(excitations)
    thetas = [0.0] * len(excitations) if thetas is None else list(thetas)
    return [AnsatzLayer(e, float(t)) for e, t in zip(excitations, thetas, strict=True)]
