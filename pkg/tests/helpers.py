"""Shared test utilities: fixture loading and a dense fermionic oracle.

The oracle builds second-quantized operators directly from bit manipulation
on occupation-number bitstrings (qubit p = bit p, parity over lower modes)
and never imports the Jordan-Wigner code it is used to check.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from adspqe.hamiltonian import MolecularHamiltonian, ReferenceData, hf_reference, read_fcidump
from adspqe.pauli import QubitOperator, jordan_wigner

DATA = Path(__file__).parent / "data"


@dataclass(frozen=True)
class System:
    name: str
    h: MolecularHamiltonian
    ref: ReferenceData
    H: QubitOperator
    meta: dict


@functools.lru_cache(maxsize=None)
def load_system(name: str) -> System:
    h = read_fcidump(DATA / f"{name}.fcidump")
    meta = json.loads((DATA / f"{name}.json").read_text())
    return System(name, h, hf_reference(h), jordan_wigner(h), meta)


@functools.lru_cache(maxsize=None)
def annihilator(p: int, n: int) -> sp.csr_matrix:
    dim = 1 << n
    rows, cols, vals = [], [], []
    for det in range(dim):
        if det >> p & 1:
            sign = -1.0 if bin(det & ((1 << p) - 1)).count("1") % 2 else 1.0
            rows.append(det ^ (1 << p))
            cols.append(det)
            vals.append(sign)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def creator(p: int, n: int) -> sp.csr_matrix:
    return annihilator(p, n).T.tocsr()


def sparse_tau(holes, particles, n: int) -> sp.csr_matrix:
    """``a+_a a+_b ... a_j a_i`` with holes (i, j, ...) and particles (a, b, ...) ascending."""
    op = sp.identity(1 << n, format="csr")
    for a in sorted(particles):
        op = op @ creator(a, n)
    for i in sorted(holes, reverse=True):
        op = op @ annihilator(i, n)
    return op.tocsr()


def dense_tau(holes, particles, n: int) -> np.ndarray:
    return sparse_tau(holes, particles, n).toarray()


def dense_kappa(holes, particles, n: int) -> np.ndarray:
    t = dense_tau(holes, particles, n)
    return t - t.T


def fermion_hamiltonian(h: MolecularHamiltonian) -> sp.csr_matrix:
    """Full-register H from spatial integrals in chemists' notation."""
    n = h.n_qubits
    dim = 1 << n
    H = sp.identity(dim, format="csr") * h.core_energy
    norb = h.n_spatial
    for p in range(norb):
        for q in range(norb):
            if h.one_body[p, q] == 0:
                continue
            for s in (0, 1):
                H = H + h.one_body[p, q] * (creator(2 * p + s, n) @ annihilator(2 * q + s, n))
    for p in range(norb):
        for q in range(norb):
            for r in range(norb):
                for s in range(norb):
                    g = h.two_body[p, q, r, s]
                    if g == 0:
                        continue
                    for sig in (0, 1):
                        for tau in (0, 1):
                            pp, qq, rr, ss = 2 * p + sig, 2 * q + sig, 2 * r + tau, 2 * s + tau
                            if pp == rr or qq == ss:
                                continue
                            H = H + 0.5 * g * (
                                creator(pp, n) @ creator(rr, n) @ annihilator(ss, n) @ annihilator(qq, n)
                            )
    return H.tocsr()


@functools.lru_cache(maxsize=None)
def dense_hamiltonian(name: str) -> np.ndarray:
    return fermion_hamiltonian(load_system(name).h).toarray()


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion:>2}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
