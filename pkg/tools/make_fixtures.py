#!/usr/bin/env python3
"""Regenerate the FCIDUMP fixtures under tests/data/.

Requires pyscf (not a package dependency). Each fixture is a linear hydrogen
chain in STO-3G, written in the canonical RHF molecular-orbital basis, next to
a ``.json`` sidecar holding the pyscf RHF energy, orbital energies and FCI
energy. The sidecars are used by the tests as independent reference values.

    python tools/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from pyscf import ao2mo, fci, gto, scf
from pyscf.tools import fcidump

OUT = Path(__file__).resolve().parents[1] / "tests" / "data"

# (name, atoms, spacing in angstrom)
CHAINS = [
    ("h2_0.735", 2, 0.735),
    ("h4_0.750", 4, 0.75),
    ("h4_1.125", 4, 1.125),
    ("h4_1.500", 4, 1.5),
    ("h6_0.750", 6, 0.75),
    ("h6_1.125", 6, 1.125),
    ("h6_1.500", 6, 1.5),
]


def build(name: str, n_atoms: int, spacing: float) -> None:
    mol = gto.M(
        atom=[["H", (0.0, 0.0, i * spacing)] for i in range(n_atoms)],
        basis="sto-3g",
        unit="angstrom",
        verbose=0,
    )
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-13
    mf.conv_tol_grad = 1e-10
    mf.kernel()
    if not mf.converged:
        raise RuntimeError(f"RHF did not converge for {name}")
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), c.shape[1])
    path = OUT / f"{name}.fcidump"
    fcidump.from_integrals(
        str(path), h1, eri, c.shape[1], mol.nelectron, mol.energy_nuc(), ms=0, tol=1e-14
    )
    e_fci, _ = fci.FCI(mf).kernel()
    meta = {
        "molecule": f"H{n_atoms}",
        "basis": "sto-3g",
        "spacing_angstrom": spacing,
        "r_over_req": round(spacing / 0.75, 6),
        "rhf_energy": float(mf.e_tot),
        "mo_energies": [float(x) for x in mf.mo_energy],
        "fci_energy": float(e_fci),
        "nuclear_repulsion": float(mol.energy_nuc()),
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"{name}: E_RHF={mf.e_tot:.10f} E_FCI={e_fci:.10f}")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, n_atoms, spacing in CHAINS:
        build(name, n_atoms, spacing)


if __name__ == "__main__":
    np.set_printoptions(precision=12)
    main()
