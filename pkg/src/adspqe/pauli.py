"""Pauli-string algebra and the Jordan-Wigner mapping.

A Pauli string is stored as an (x-mask, z-mask) pair. Bit ``q`` of the
x-mask/z-mask carries the X/Z component on qubit ``q``; a qubit with both bits
set holds Y, using the convention ``Y = i X Z``. Qubit ``q`` is spin orbital
``q`` and is the ``q``-th least significant bit of a basis-state index.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np
import scipy.sparse

from adspqe.errors import NumericalIntegrityError

if TYPE_CHECKING:
    from adspqe.hamiltonian import MolecularHamiltonian

#: Coefficients below this magnitude are dropped on simplification.
PRUNE_TOL = 1e-12

_I_POW = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    x: int
    z: int
    n_qubits: int

    def __post_init__(self) -> None:
        limit = 1 << self.n_qubits
        if self.x >= limit or self.z >= limit or self.x < 0 or self.z < 0:
            raise ValueError("Pauli masks exceed the qubit register")

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Build from a word like ``"XIZY"``; the leftmost letter is the highest qubit."""
        n = len(label)
        x = z = 0
        for pos, letter in enumerate(label.upper()):
            q = n - 1 - pos
            if letter in "XY":
                x |= 1 << q
            if letter in "ZY":
                z |= 1 << q
            if letter not in "IXYZ":
                raise ValueError(f"invalid Pauli letter {letter!r}")
        return cls(x, z, n)

    @property
    def label(self) -> str:
        letters = []
        for q in reversed(range(self.n_qubits)):
            bx, bz = (self.x >> q) & 1, (self.z >> q) & 1
            letters.append("IZXY"[bx * 2 + bz])
        return "".join(letters)

    def multiply(self, other: PauliString) -> tuple[complex, PauliString]:
        """Return ``(phase, P)`` with ``self @ other == phase * P``."""
        x, z = self.x ^ other.x, self.z ^ other.z
        k = (
            _popcount(self.x & self.z)
            + _popcount(other.x & other.z)
            - _popcount(x & z)
            + 2 * _popcount(self.z & other.x)
        )
        return _I_POW[k % 4], PauliString(x, z, max(self.n_qubits, other.n_qubits))

    def __str__(self) -> str:
        return self.label


class QubitOperator:
    """Weighted sum of Pauli strings, ``sum_l c_l P_l``.

    Terms are keyed by ``(x_mask, z_mask)``. Instances are treated as
    immutable once built; arithmetic returns new operators.
    """

    __slots__ = ("n_qubits", "terms", "_sparse")

    def __init__(self, n_qubits: int, terms: Mapping[tuple[int, int], complex] | None = None):
        self.n_qubits = n_qubits
        self.terms: dict[tuple[int, int], complex] = dict(terms or {})
        self._sparse: scipy.sparse.csr_matrix | None = None

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> QubitOperator:
        return cls(n_qubits, {(0, 0): complex(coeff)})

    @classmethod
    def from_pauli(cls, pauli: PauliString, coeff: complex = 1.0) -> QubitOperator:
        return cls(pauli.n_qubits, {(pauli.x, pauli.z): complex(coeff)})

    @classmethod
    def from_labels(cls, items: Iterable[tuple[str, complex]]) -> QubitOperator:
        items = list(items)
        n = len(items[0][0])
        op = cls(n)
        for label, c in items:
            p = PauliString.from_label(label)
            key = (p.x, p.z)
            op.terms[key] = op.terms.get(key, 0) + complex(c)
        return op

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        for (x, z), c in self.terms.items():
            yield PauliString(x, z, self.n_qubits), c

    def __add__(self, other: QubitOperator) -> QubitOperator:
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0) + c
        return QubitOperator(max(self.n_qubits, other.n_qubits), out)

    def __sub__(self, other: QubitOperator) -> QubitOperator:
        return self + other * -1.0

    def __mul__(self, other: QubitOperator | complex | float) -> QubitOperator:
        if not isinstance(other, QubitOperator):
            return QubitOperator(self.n_qubits, {k: c * other for k, c in self.terms.items()})
        n = max(self.n_qubits, other.n_qubits)
        out: dict[tuple[int, int], complex] = {}
        for (x1, z1), c1 in self.terms.items():
            a1 = _popcount(x1 & z1)
            for (x2, z2), c2 in other.terms.items():
                x, z = x1 ^ x2, z1 ^ z2
                k = a1 + _popcount(x2 & z2) - _popcount(x & z) + 2 * _popcount(z1 & x2)
                out[(x, z)] = out.get((x, z), 0) + _I_POW[k % 4] * c1 * c2
        return QubitOperator(n, out)

    __rmul__ = __mul__

    def simplify(self, tol: float = PRUNE_TOL) -> QubitOperator:
        return QubitOperator(self.n_qubits, {k: c for k, c in self.terms.items() if abs(c) > tol})

    def adjoint(self) -> QubitOperator:
        return QubitOperator(self.n_qubits, {k: np.conj(c) for k, c in self.terms.items()})

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def l1_norm(self, include_identity: bool = False) -> float:
        """Sum of |c_l| over the strings (identity excluded unless asked)."""
        return float(
            sum(abs(c) for k, c in self.terms.items() if include_identity or k != (0, 0))
        )

    def allclose(self, other: QubitOperator, atol: float = 1e-10) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= atol for k in keys)

    def dump(self) -> str:
        """``coefficient pauli-word`` lines, sorted by word (debugging aid)."""
        rows = sorted((p.label, c) for p, c in self)
        return "\n".join(f"{c.real:+.12e}{c.imag:+.12e}j {label}" for label, c in rows)

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        """Sparse matrix of the operator in the computational basis (cached)."""
        if self._sparse is None:
            self._sparse = _build_sparse(self)
        return self._sparse


def _build_sparse(op: QubitOperator) -> scipy.sparse.csr_matrix:
    dim = 1 << op.n_qubits
    idx = np.arange(dim, dtype=np.int64)
    by_x: dict[int, list[tuple[int, complex]]] = {}
    for (x, z), c in op.terms.items():
        by_x.setdefault(x, []).append((z, c))
    rows, cols, vals = [], [], []
    for x, zs in by_x.items():
        diag = np.zeros(dim, dtype=complex)
        for z, c in zs:
            parity = (np.bitwise_count(idx & z) & 1).astype(np.int64)
            diag += c * _I_POW[_popcount(x & z) % 4] * (1 - 2 * parity)
        keep = np.abs(diag) > 0
        rows.append((idx ^ x)[keep])
        cols.append(idx[keep])
        vals.append(diag[keep])
    if not rows:
        return scipy.sparse.csr_matrix((dim, dim), dtype=complex)
    mat = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return mat.tocsr()


def apply(op: QubitOperator, v: np.ndarray) -> np.ndarray:
    """Return ``sum_l c_l P_l v`` as a new vector."""
    if v.shape != (1 << op.n_qubits,):
        raise ValueError(
            f"state of length {v.shape[0]} does not match a {op.n_qubits}-qubit operator"
        )
    return op.to_sparse() @ v


def expectation(op: QubitOperator, v: np.ndarray, imag_tol: float = 1e-10) -> float:
    """Real expectation value ``<v|op|v>``.

    Raises:
        NumericalIntegrityError: The imaginary part exceeds ``imag_tol``, which
            means ``op`` was not Hermitian.
    """
    val = np.vdot(v, apply(op, v))
    if abs(val.imag) > imag_tol:
        raise NumericalIntegrityError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


@functools.lru_cache(maxsize=None)
def ladder(p: int, dagger: bool, n_qubits: int) -> QubitOperator:
    """JW image of a_p (or a_p^dagger): 1/2 (X_p +/- i Y_p) Z_0 ... Z_{p-1}."""
    zchain = (1 << p) - 1
    bit = 1 << p
    # X_p Z_<p and Y_p Z_<p as (x, z) masks
    x_term = (bit, zchain)
    y_term = (bit, zchain | bit)
    sign = -1 if dagger else 1
    return QubitOperator(n_qubits, {x_term: 0.5, y_term: 0.5j * sign})


def fermion_term(ops: Iterable[tuple[int, bool]], n_qubits: int, coeff: complex = 1.0) -> QubitOperator:
    """JW image of a product of ladder operators, written left to right.

    ``ops`` is a sequence of ``(mode, is_creation)``.
    """
    out = QubitOperator.identity(n_qubits, coeff)
    for p, dagger in ops:
        out = out * ladder(p, dagger, n_qubits)
    return out


def jordan_wigner(h: MolecularHamiltonian, tol: float = PRUNE_TOL) -> QubitOperator:
    """Map the molecular Hamiltonian to a Hermitian qubit operator.

    ``H = E_core + sum h_pq a+_p a_q + 1/2 sum <pq|rs> a+_p a+_q a_s a_r``
    over spin orbitals.
    """
    n = h.n_qubits
    hs, g = h.spin_orbital_integrals()
    acc: dict[tuple[int, int], complex] = {(0, 0): complex(h.core_energy)}

    def add(op: QubitOperator, scale: float) -> None:
        for key, c in op.terms.items():
            acc[key] = acc.get(key, 0) + scale * c

    for p, q in zip(*np.nonzero(np.abs(hs) > tol)):
        add(ladder(int(p), True, n) * ladder(int(q), False, n), hs[p, q])

    # a+_p a+_q a_s a_r; pair products are cached per (p, q) and (s, r)
    creators: dict[tuple[int, int], QubitOperator] = {}
    annihilators: dict[tuple[int, int], QubitOperator] = {}
    for p, q, r, s in zip(*np.nonzero(np.abs(g) > tol)):
        p, q, r, s = int(p), int(q), int(r), int(s)
        if p == q or r == s:
            continue
        if (p, q) not in creators:
            creators[(p, q)] = ladder(p, True, n) * ladder(q, True, n)
        if (s, r) not in annihilators:
            annihilators[(s, r)] = ladder(s, False, n) * ladder(r, False, n)
        add(creators[(p, q)] * annihilators[(s, r)], 0.5 * g[p, q, r, s])

    op = QubitOperator(n, acc).simplify(tol)
    # real integrals give a Hermitian operator with real coefficients
    if not op.is_hermitian(1e-10):
        raise NumericalIntegrityError("Jordan-Wigner image is not Hermitian")
    return QubitOperator(n, {k: complex(c.real) for k, c in op.terms.items()})


def number_operator(n_qubits: int) -> QubitOperator:
    """Total particle number as a qubit operator."""
    out = QubitOperator(n_qubits)
    for p in range(n_qubits):
        out = out + fermion_term([(p, True), (p, False)], n_qubits)
    return out.simplify()


def sz_operator(n_qubits: int) -> QubitOperator:
    """S_z = 1/2 (N_alpha - N_beta) with interleaved spin orbitals."""
    out = QubitOperator(n_qubits)
    for p in range(n_qubits):
        sign = 0.5 if p % 2 == 0 else -0.5
        out = out + fermion_term([(p, True), (p, False)], n_qubits, sign)
    return out.simplify()
