"""Molecular integrals, Hartree-Fock reference data and MP denominators.

Integrals are read from FCIDUMP text (1-based indices in the file, 0-based
here). Spin orbitals are interleaved: spin orbital ``2p`` is spatial orbital
``p`` with alpha spin and ``2p + 1`` is the beta partner.
"""

from __future__ import annotations

import itertools
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, TextIO

import numpy as np

from adspqe.errors import ConfigurationError, ConsistencyError, FCIDumpError

if TYPE_CHECKING:
    from adspqe.state import Excitation

#: Smallest |D_mu| allowed before the denominator is level-shifted (hartree).
DENOMINATOR_FLOOR = 1e-6

# Records agreeing to this tolerance are treated as the same integral.
_DUPLICATE_TOL = 1e-10

_HEADER_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^=]*?)(?=,?\s*[A-Za-z_][A-Za-z0-9_]*\s*=|$)")


class DenominatorFloorWarning(RuntimeWarning):
    """Emitted when an MP denominator is clamped to the level-shift floor."""


@dataclass(frozen=True)
class MolecularHamiltonian:
    """Second-quantized electronic Hamiltonian over spatial orbitals.

    ``one_body[p, q]`` holds h_pq and ``two_body[p, q, r, s]`` holds (pq|rs) in
    chemists' notation. Both arrays are fully symmetry-expanded.
    """

    n_spatial: int
    n_electrons: int
    sz2: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    orbsym: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        n = self.n_spatial
        if self.one_body.shape != (n, n) or self.two_body.shape != (n, n, n, n):
            raise ConsistencyError("integral array shapes do not match n_spatial")
        if self.n_electrons > 2 * n or self.n_electrons < 0:
            raise ConfigurationError(
                f"{self.n_electrons} electrons do not fit in {2 * n} spin orbitals"
            )
        self.one_body.setflags(write=False)
        self.two_body.setflags(write=False)

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_spatial

    def spin_orbital_integrals(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (h, g) over spin orbitals, g[p,q,r,s] = <pq|rs> (physicists')."""
        n = self.n_qubits
        spatial = np.arange(n) // 2
        spin = np.arange(n) % 2
        same = spin[:, None] == spin[None, :]
        h = self.one_body[np.ix_(spatial, spatial)] * same
        # <pq|rs> = (pr|qs) delta(sp, sr) delta(sq, ss)
        chem = self.two_body[np.ix_(spatial, spatial, spatial, spatial)]
        g = chem.transpose(0, 2, 1, 3) * same[:, None, :, None] * same[None, :, None, :]
        return h, g


@dataclass(frozen=True)
class ReferenceData:
    """Aufbau Hartree-Fock determinant and its diagonal Fock energies."""

    occupied_spin_orbitals: tuple[int, ...]
    virtual_spin_orbitals: tuple[int, ...]
    fock_diagonal: np.ndarray
    hf_energy: float

    @property
    def n_qubits(self) -> int:
        return len(self.occupied_spin_orbitals) + len(self.virtual_spin_orbitals)

    @property
    def determinant(self) -> int:
        """HF occupation bitstring (qubit 0 is the least significant bit)."""
        return sum(1 << i for i in self.occupied_spin_orbitals)


def _parse_header(text: str, first_line: int) -> dict[str, str]:
    body = re.sub(r"^\s*&FCI", "", text, flags=re.IGNORECASE)
    body = re.sub(r"(&END|/)\s*$", "", body.strip(), flags=re.IGNORECASE)
    body = " ".join(body.split())
    fields: dict[str, str] = {}
    for match in _HEADER_KEY.finditer(body):
        fields[match.group(1).upper()] = match.group(2).strip().rstrip(",")
    for key in ("NORB", "NELEC"):
        if key not in fields:
            raise FCIDumpError(f"line {first_line}: header is missing {key}")
    return fields


def _header_int(fields: dict[str, str], key: str, line: int, default: int | None = None) -> int:
    if key not in fields:
        if default is None:
            raise FCIDumpError(f"line {line}: header is missing {key}")
        return default
    try:
        return int(fields[key])
    except ValueError:
        raise FCIDumpError(f"line {line}: {key}={fields[key]!r} is not an integer") from None


def parse_fcidump(stream: TextIO | str) -> MolecularHamiltonian:
    """Parse FCIDUMP text into a :class:`MolecularHamiltonian`.

    Args:
        stream: An open text stream or the file contents as a string.

    Raises:
        FCIDumpError: Malformed header or integral record (message names the line).
        IndexError: An orbital index lies outside ``[0, NORB]``.
        ConsistencyError: Two records for the same integral disagree.
    """
    text = stream if isinstance(stream, str) else stream.read()
    lines = text.splitlines()

    header_parts: list[str] = []
    body_start = None
    for lineno, line in enumerate(lines):
        header_parts.append(line)
        stripped = line.strip().upper()
        if stripped.endswith("&END") or stripped == "/" or stripped.endswith("/"):
            body_start = lineno + 1
            break
    if body_start is None or not header_parts[0].strip().upper().startswith("&FCI"):
        raise FCIDumpError("line 1: expected an '&FCI ... &END' namelist header")
    fields = _parse_header("\n".join(header_parts), 1)
    norb = _header_int(fields, "NORB", 1)
    nelec = _header_int(fields, "NELEC", 1)
    ms2 = _header_int(fields, "MS2", 1, default=0)
    orbsym: tuple[int, ...] = ()
    if "ORBSYM" in fields:
        orbsym = tuple(int(x) for x in re.split(r"[,\s]+", fields["ORBSYM"]) if x)

    h1 = np.zeros((norb, norb))
    h2 = np.zeros((norb, norb, norb, norb))
    seen1: dict[tuple[int, int], float] = {}
    seen2: dict[tuple[int, int, int, int], float] = {}
    core = 0.0
    core_seen = False

    for lineno in range(body_start, len(lines)):
        raw = lines[lineno].strip()
        if not raw:
            continue
        parts = raw.split()
        if len(parts) != 5:
            raise FCIDumpError(f"line {lineno + 1}: expected 'value i j k l', got {raw!r}")
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError:
            raise FCIDumpError(f"line {lineno + 1}: cannot parse record {raw!r}") from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise IndexError(f"line {lineno + 1}: orbital index {idx} outside [0, {norb}]")

        if i == j == k == l == 0:
            if core_seen and abs(core - value) > _DUPLICATE_TOL:
                raise ConsistencyError(f"line {lineno + 1}: conflicting core energy records")
            core, core_seen = value, True
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                # orbital-energy records (i 0 0 0) carry no integral information
                continue
            key1 = tuple(sorted((i - 1, j - 1)))
            _check_duplicate(seen1, key1, value, lineno)
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = value
        else:
            if 0 in (i, j, k, l):
                raise FCIDumpError(f"line {lineno + 1}: two-electron record with a zero index")
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            perms = _eightfold(p, q, r, s)
            _check_duplicate(seen2, min(perms), value, lineno)
            for perm in perms:
                h2[perm] = value

    return MolecularHamiltonian(
        n_spatial=norb,
        n_electrons=nelec,
        sz2=ms2,
        core_energy=core,
        one_body=h1,
        two_body=h2,
        orbsym=orbsym,
    )


def read_fcidump(path: str | Path) -> MolecularHamiltonian:
    with open(path) as fh:
        return parse_fcidump(fh)


def _eightfold(p: int, q: int, r: int, s: int) -> set[tuple[int, int, int, int]]:
    return {
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    }


def _check_duplicate(seen: dict, key: tuple, value: float, lineno: int) -> None:
    if key in seen and abs(seen[key] - value) > _DUPLICATE_TOL:
        raise ConsistencyError(
            f"line {lineno + 1}: integral {tuple(k + 1 for k in key)} given as "
            f"{seen[key]!r} and {value!r}"
        )
    seen[key] = value


def hf_reference(h: MolecularHamiltonian) -> ReferenceData:
    """Build the aufbau single-determinant reference.

    Alpha electrons fill spin orbitals 0, 2, 4, ... and beta electrons fill
    1, 3, 5, ...; the Fock diagonal and HF energy follow from the
    antisymmetrized spin-orbital integrals.
    """
    n_alpha2 = h.n_electrons + h.sz2
    n_beta2 = h.n_electrons - h.sz2
    if n_alpha2 % 2 or n_beta2 < 0 or n_alpha2 < 0:
        raise ConfigurationError(
            f"NELEC={h.n_electrons} is incompatible with MS2={h.sz2}"
        )
    n_alpha, n_beta = n_alpha2 // 2, n_beta2 // 2
    if max(n_alpha, n_beta) > h.n_spatial:
        raise ConfigurationError("more electrons of one spin than spatial orbitals")

    occ = sorted([2 * p for p in range(n_alpha)] + [2 * p + 1 for p in range(n_beta)])
    virt = [p for p in range(h.n_qubits) if p not in set(occ)]

    hs, g = h.spin_orbital_integrals()
    anti = g - g.transpose(0, 1, 3, 2)  # <pq||rs>
    occ_idx = np.array(occ, dtype=int)
    diag = np.einsum("pjpj->pj", anti)  # <pj||pj>
    fock = np.diag(hs) + diag[:, occ_idx].sum(axis=1) if occ else np.diag(hs).copy()

    e_one = float(np.sum(np.diag(hs)[occ_idx])) if occ else 0.0
    e_two = 0.5 * float(np.sum(diag[np.ix_(occ_idx, occ_idx)])) if occ else 0.0
    fock = np.asarray(fock, dtype=float)
    if not np.all(np.isfinite(fock)):
        raise ConsistencyError("non-finite Fock diagonal")
    fock.setflags(write=False)
    return ReferenceData(
        occupied_spin_orbitals=tuple(occ),
        virtual_spin_orbitals=tuple(virt),
        fock_diagonal=fock,
        hf_energy=h.core_energy + e_one + e_two,
    )


def mp_denominator(exc: Excitation, ref: ReferenceData, floor: float = DENOMINATOR_FLOOR) -> float:
    """Moller-Plesset denominator sum(eps_holes) - sum(eps_particles).

    A value with magnitude below ``floor`` is replaced by ``sign(D) * floor``
    (negative for an exact zero) and a :class:`DenominatorFloorWarning` is
    emitted.
    """
    occupied = set(ref.occupied_spin_orbitals)
    if not set(exc.holes) <= occupied or occupied & set(exc.particles):
        raise ConsistencyError(f"{exc} is not a particle-hole excitation of the reference")
    eps = ref.fock_diagonal
    d = float(sum(eps[i] for i in exc.holes) - sum(eps[a] for a in exc.particles))
    if abs(d) < floor:
        warnings.warn(
            f"MP denominator {d:.3e} for {exc} clamped to the level-shift floor",
            DenominatorFloorWarning,
            stacklevel=2,
        )
        return floor if d > 0 else -floor
    return d


def is_level_shifted(d: float, floor: float = DENOMINATOR_FLOOR) -> bool:
    """True when ``d`` is a denominator that was clamped to the floor."""
    return abs(d) <= floor


def occupation_counts(det: int, n_qubits: int) -> tuple[int, int]:
    """(n_alpha, n_beta) of a determinant bitstring."""
    alpha = sum((det >> p) & 1 for p in range(0, n_qubits, 2))
    beta = sum((det >> p) & 1 for p in range(1, n_qubits, 2))
    return alpha, beta


def write_fcidump(h: MolecularHamiltonian, tol: float = 1e-14) -> str:
    """Serialize ``h`` as FCIDUMP text (one record per 8-fold symmetry class)."""
    n = h.n_spatial
    orbsym = h.orbsym or (1,) * n
    out = [
        f" &FCI NORB={n},NELEC={h.n_electrons},MS2={h.sz2},",
        "  ORBSYM=" + ",".join(str(x) for x in orbsym) + ",",
        "  ISYM=1,",
        " &END",
    ]
    for p, q, r, s in itertools.product(range(n), repeat=4):
        key = (p, q, r, s)
        if key == min(_eightfold(p, q, r, s)) and abs(h.two_body[key]) > tol:
            out.append(f"{float(h.two_body[key])!r} {p + 1} {q + 1} {r + 1} {s + 1}")
    for p in range(n):
        for q in range(p + 1):
            if abs(h.one_body[p, q]) > tol:
                out.append(f"{float(h.one_body[p, q])!r} {p + 1} {q + 1} 0 0")
    out.append(f"{float(h.core_energy)!r} 0 0 0 0")
    return "\n".join(out) + "\n"
