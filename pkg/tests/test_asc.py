from dataclasses import replace
from types import SimpleNamespace

import numpy as np
import pytest

from adspqe.asc import (
    AuxiliarySolution,
    Provenance,
    asc_energies,
    double_commutator_expectation,
    energy_scheme1,
    energy_scheme2,
    map_auxiliary,
    recompute_residual,
    term1_statevector,
    term2_full,
)
from adspqe.fci import fci_ground_energy
from adspqe.pauli import QubitOperator, expectation
from adspqe.pool import generate_pool
from adspqe.spqe import SPQEConfig, run_spqe
from adspqe.state import AnsatzLayer, Excitation, apply_exp_kappa, basis_state, exp_kappa_calls

from helpers import dense_hamiltonian, dense_tau, load_system


@pytest.fixture(scope="module")
def h4_run():
    s = load_system("h4_0.750")
    res = run_spqe(s.h, SPQEConfig(omega=0.05), s.H, s.ref)
    return s, res, map_auxiliary(res, s.H, s.ref)


def test_identity_core_gives_first_order_amplitudes(h4):
    res = run_spqe(h4.h, SPQEConfig(omega=1e3), h4.H, h4.ref)
    aux = map_auxiliary(res, h4.H, h4.ref)
    H = dense_hamiltonian("h4_0.750")
    phi0 = basis_state(h4.ref.determinant, 8).real
    for exc in aux.excitations:
        coupling = phi0 @ dense_tau(exc.holes, exc.particles, 8).T @ H @ phi0
        assert aux[exc] == pytest.approx(coupling / aux.denominators[exc], abs=1e-12)


def test_zero_residual_maps_to_zero_amplitude(h4):
    diag = QubitOperator.from_labels([("IIIIIIIZ", 0.3), ("IIIIIIII", -1.0)])
    res = run_spqe(h4.h, SPQEConfig(omega=1e-2), diag, h4.ref)
    aux = map_auxiliary(res, diag, h4.ref)
    assert all(t == 0.0 for t in aux.thetas.values())


def test_reused_amplitudes_match_fresh_and_pqe_path(h4_run):
    s, res, aux = h4_run
    fresh = map_auxiliary(res, s.H, s.ref, recompute=True)
    assert set(aux.provenance.values()) == {Provenance.REUSED}
    assert set(fresh.provenance.values()) == {Provenance.FRESH}
    for exc in aux.excitations:
        assert abs(aux[exc] - fresh[exc]) < 1e-10
        direct = recompute_residual(res, exc, s.H, s.ref) / aux.denominators[exc]
        assert abs(aux[exc] - direct) < 1e-10


def test_term1_identity(h4_run):
    s, res, aux = h4_run
    values = term1_statevector(res, aux, s.H, s.ref)
    for exc in aux.excitations:
        assert abs(values[exc] - 2 * aux[exc] ** 2 * aux.denominators[exc]) < 1e-9


def determinant_energy(h, det):
    """Slater-Condon diagonal element from spatial chemists' integrals."""
    occ = [p for p in range(h.n_qubits) if det >> p & 1]
    e = h.core_energy + sum(h.one_body[p // 2, p // 2] for p in occ)
    for p in occ:
        for q in occ:
            e += 0.5 * h.two_body[p // 2, p // 2, q // 2, q // 2]
            if p % 2 == q % 2:
                e -= 0.5 * h.two_body[p // 2, q // 2, q // 2, p // 2]
    return e


def test_slater_condon_oracle_matches_dense_diagonal(h4):
    H = dense_hamiltonian("h4_0.750")
    for det in range(256):
        assert determinant_energy(h4.h, det) == pytest.approx(H[det, det].real, abs=1e-12)


def test_double_commutator_closed_form_and_finite_difference():
    s = load_system("h6_1.500")
    rng = np.random.default_rng(31)
    pool = generate_pool(s.ref, 4)
    phi0 = basis_state(s.ref.determinant, s.ref.n_qubits)
    e0 = determinant_energy(s.h, s.ref.determinant)
    step = 1e-3
    for k in rng.choice(len(pool), 50, replace=False):
        exc = pool.entries[k]
        w = double_commutator_expectation(exc, s.H, s.ref)
        excited = s.ref.determinant ^ exc.hole_mask ^ exc.particle_mask
        assert abs(w - 2 * (determinant_energy(s.h, excited) - e0)) < 1e-10

        def e(theta):
            return expectation(s.H, apply_exp_kappa(AnsatzLayer(exc, theta), phi0))

        fd = (e(step) - 2 * e(0.0) + e(-step)) / step**2
        # E(theta) = A + B cos(2 theta) + C sin(2 theta) exactly, so the central
        # difference carries a known truncation factor (1 - cos 2h) / (2 h^2)
        assert abs(fd - w * (1 - np.cos(2 * step)) / (2 * step**2)) < 5e-9


def test_double_commutator_with_identity_is_zero(h4):
    ident = QubitOperator.identity(8, 1.7)
    for exc in list(generate_pool(h4.ref, 2))[:8]:
        assert double_commutator_expectation(exc, ident, h4.ref) == 0.0


def test_empty_auxiliary_leaves_spqe_energy(h4):
    res = replace(run_spqe(h4.h, SPQEConfig(omega=1e-2), h4.H, h4.ref), auxiliary=[])
    en = asc_energies(res, map_auxiliary(res, h4.H, h4.ref), h4.H, h4.ref)
    assert en.e_scheme1 == en.e_scheme2 == en.e_spqe


def test_single_auxiliary_scheme1_correction():
    exc = Excitation((0, 1), (2, 3))
    aux = AuxiliarySolution({exc: 0.1}, {exc: -2.2}, {exc: Provenance.REUSED})
    out = energy_scheme1(SimpleNamespace(e_spqe=-1.0), aux)
    assert out.e_scheme1 - out.e_spqe == pytest.approx(-0.022, abs=1e-15)
    assert out.e_scheme1 == -1.0 + 0.1**2 * -2.2


def test_zero_amplitudes_give_no_correction(h4_run):
    s, res, aux = h4_run
    zero = aux.with_thetas(dict.fromkeys(aux.excitations, 0.0))
    en = asc_energies(res, zero, s.H, s.ref)
    assert en.e_scheme1 == en.e_scheme2 == en.e_spqe


def test_scheme_terms_are_consistent(h4_run):
    s, res, aux = h4_run
    en = asc_energies(res, aux, s.H, s.ref)
    first = sum(aux[e] ** 2 * aux.denominators[e] for e in aux.excitations)
    assert first <= 0
    assert en.e_scheme1 <= en.e_spqe
    assert en.term1 == pytest.approx(2 * first, abs=1e-15)
    assert en.e_scheme2 == pytest.approx(en.e_spqe + en.term1 + en.term2_scheme2, abs=1e-14)
    assert en.term2_scheme2 >= 0


def test_full_term2_reduces_to_diagonal_for_one_operator(h4_run):
    s, res, aux = h4_run
    exc = max(aux.excitations, key=lambda e: abs(aux[e]))
    single = aux.with_thetas({e: (aux[e] if e == exc else 0.0) for e in aux.excitations})
    diag = energy_scheme2(res, single, s.H, s.ref).term2_scheme2
    assert term2_full(single, s.H, s.ref) == pytest.approx(diag, abs=1e-12)


def test_corrections_apply_no_extra_exponentials(h4_run):
    s, res, aux = h4_run
    before = exp_kappa_calls.count
    energy_scheme1(res, aux, s.ref)
    energy_scheme2(res, aux, s.H, s.ref)
    assert exp_kappa_calls.count == before


def test_level_shifted_operators_are_flagged(h4_run):
    _, _, aux = h4_run
    assert aux.level_shifted == set()


def test_scheme1_beats_spqe_on_stretched_h6():
    s = load_system("h6_1.500")
    res = run_spqe(s.h, SPQEConfig(omega=1e-2), s.H, s.ref)
    en = asc_energies(res, map_auxiliary(res, s.H, s.ref), s.H, s.ref)
    e_fci, _ = fci_ground_energy(s.h, s.H)
    assert abs(en.e_scheme1 - e_fci) < abs(en.e_spqe - e_fci)
