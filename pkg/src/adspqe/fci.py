"""Exact ground-state energies in a fixed (N, Sz) sector.

The sector Hamiltonian is sliced out of the Jordan-Wigner operator's sparse
matrix, so the oracle shares its operator conventions with the simulator.
Small sectors are diagonalized densely; larger ones with Lanczos (ARPACK).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from adspqe.errors import ConfigurationError, ConvergenceError
from adspqe.hamiltonian import MolecularHamiltonian
from adspqe.pauli import QubitOperator, jordan_wigner

DENSE_LIMIT = 4096
MAX_SECTOR_DIM = 1 << 20
EIGEN_TOL = 1e-10
MAX_ITER = 500


@dataclass(frozen=True)
class SectorBasis:
    determinants: np.ndarray
    n_alpha: int
    n_beta: int
    index: dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", {int(d): k for k, d in enumerate(self.determinants)})

    def __len__(self) -> int:
        return len(self.determinants)


def sector_basis(n_qubits: int, n_alpha: int, n_beta: int) -> SectorBasis:
    """All determinants with the given alpha/beta counts (interleaved spin orbitals)."""
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    alpha_mask = sum(1 << p for p in range(0, n_qubits, 2))
    beta_mask = sum(1 << p for p in range(1, n_qubits, 2))
    keep = (np.bitwise_count(idx & alpha_mask) == n_alpha) & (np.bitwise_count(idx & beta_mask) == n_beta)
    return SectorBasis(idx[keep], n_alpha, n_beta)


def fci_ground_energy(
    h: MolecularHamiltonian,
    H: QubitOperator | None = None,
    method: str = "auto",
) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue in the (n_electrons, sz2) sector and its full-register eigenvector.

    ``method`` is ``"auto"``, ``"dense"`` or ``"lanczos"``.

    Raises:
        ConvergenceError: the iterative solver returned a poor eigenpair.
    """
    if (h.n_electrons + h.sz2) % 2:
        raise ConfigurationError("NELEC and MS2 have different parity")
    n_alpha = (h.n_electrons + h.sz2) // 2
    n_beta = (h.n_electrons - h.sz2) // 2
    H = H if H is not None else jordan_wigner(h)
    basis = sector_basis(h.n_qubits, n_alpha, n_beta)
    dim = len(basis)
    if dim == 0:
        raise ConfigurationError("empty (N, Sz) sector")
    if dim > MAX_SECTOR_DIM:
        raise ConfigurationError(f"sector dimension {dim} exceeds {MAX_SECTOR_DIM}")

    dets = basis.determinants
    block = H.to_sparse()[dets][:, dets].tocsr()
    if block.nnz == 0 or abs(block.imag).max() < 1e-14:
        block = block.real

    if method == "auto":
        method = "dense" if dim < DENSE_LIMIT else "lanczos"
    if method == "dense" or dim < 3:
        vals, vecs = scipy.linalg.eigh(block.toarray(), subset_by_index=[0, 0])
        e, sub = float(vals[0]), vecs[:, 0]
    elif method == "lanczos":
        v0 = np.zeros(dim)
        v0[int(np.argmin(block.diagonal()))] = 1.0
        v0 += 1e-3 * np.random.default_rng(0).standard_normal(dim)
        try:
            vals, vecs = scipy.sparse.linalg.eigsh(
                block, k=1, which="SA", tol=EIGEN_TOL, maxiter=MAX_ITER, v0=v0
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise ConvergenceError(f"Lanczos did not converge in {MAX_ITER} iterations") from exc
        e, sub = float(vals[0]), vecs[:, 0]
    else:
        raise ValueError(f"unknown method {method!r}")

    sub = sub / np.linalg.norm(sub)
    resid = float(np.linalg.norm(block @ sub - e * sub))
    if resid > 1e-8:
        raise ConvergenceError(f"eigenpair residual norm {resid:.3e} exceeds 1e-8")
    full = np.zeros(1 << h.n_qubits, dtype=complex)
    full[dets] = sub
    return e, full
