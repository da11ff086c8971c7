import io
import itertools
import warnings

import numpy as np
import pytest

from adspqe.errors import ConsistencyError, FCIDumpError
from adspqe.hamiltonian import (
    DENOMINATOR_FLOOR,
    DenominatorFloorWarning,
    MolecularHamiltonian,
    hf_reference,
    is_level_shifted,
    mp_denominator,
    parse_fcidump,
    write_fcidump,
)
from adspqe.pauli import expectation
from adspqe.pool import generate_pool
from adspqe.state import Excitation, basis_state

from helpers import dense_hamiltonian, load_system

HEADER = " &FCI NORB=2,NELEC=2,MS2=0,\n  ORBSYM=1,1,\n  ISYM=1,\n &END\n"


def test_core_and_one_body_readback():
    h = parse_fcidump(HEADER + "0.7137 0 0 0 0\n-1.2528 1 1 0 0\n")
    assert h.core_energy == 0.7137
    assert h.one_body[0, 0] == -1.2528
    assert h.n_spatial == 2 and h.n_electrons == 2 and h.sz2 == 0


def test_two_body_eightfold_expansion():
    h = parse_fcidump(HEADER + "0.6757 1 1 1 1\n0.1809 1 2 1 2\n")
    assert h.two_body[0, 0, 0, 0] == 0.6757
    for perm in [(0, 1, 0, 1), (1, 0, 0, 1), (0, 1, 1, 0), (1, 0, 1, 0)]:
        assert h.two_body[perm] == 0.1809
    g = h.two_body
    assert np.array_equal(g, g.transpose(1, 0, 2, 3))
    assert np.array_equal(g, g.transpose(2, 3, 0, 1))


def test_stream_input_and_fortran_exponents():
    h = parse_fcidump(io.StringIO(HEADER + "1.5D-01 1 2 0 0\n"))
    assert h.one_body[0, 1] == h.one_body[1, 0] == 0.15


@pytest.mark.parametrize(
    "body, exc, fragment",
    [
        ("0.1 1 1 0\n", FCIDumpError, "line 5"),
        ("abc 1 1 0 0\n", FCIDumpError, "line 5"),
        ("0.1 3 1 0 0\n", IndexError, "line 5"),
        ("0.1 1 1 0 0\n0.2 1 1 0 0\n", ConsistencyError, "line 6"),
        ("0.1 1 2 1 2\n0.3 2 1 2 1\n", ConsistencyError, "line 6"),
    ],
)
def test_malformed_records_name_the_line(body, exc, fragment):
    with pytest.raises(exc, match=fragment):
        parse_fcidump(HEADER + body)


def test_missing_header_rejected():
    with pytest.raises(FCIDumpError):
        parse_fcidump("0.1 1 1 0 0\n")


def test_round_trip_through_writer(h4):
    again = parse_fcidump(write_fcidump(h4.h))
    assert np.array_equal(again.one_body, h4.h.one_body)
    assert np.array_equal(again.two_body, h4.h.two_body)
    assert again.core_energy == h4.h.core_energy


def test_integral_arrays_are_read_only(h2):
    with pytest.raises(ValueError):
        h2.h.one_body[0, 0] = 1.0


def test_one_electron_hf_energy_has_no_two_body_part():
    g = np.random.default_rng(3).random((2, 2, 2, 2))
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    h = MolecularHamiltonian(2, 1, 1, 0.25, np.diag([-0.7, 0.3]), g)
    assert hf_reference(h).hf_energy == pytest.approx(0.25 - 0.7, abs=1e-15)


@pytest.mark.parametrize("name", ["h2_0.735", "h4_0.750", "h4_1.500", "h6_1.500"])
def test_hf_energy_matches_independent_rhf(name):
    s = load_system(name)
    assert abs(s.ref.hf_energy - s.meta["rhf_energy"]) < 1e-8


@pytest.mark.parametrize("name", ["h2_0.735", "h4_0.750"])
def test_hf_energy_matches_dense_matrix_element(name):
    s = load_system(name)
    det = s.ref.determinant
    assert abs(dense_hamiltonian(name)[det, det] - s.ref.hf_energy) < 1e-8


@pytest.mark.parametrize("name", ["h2_0.735", "h4_0.750", "h6_1.500"])
def test_hf_energy_matches_jordan_wigner_expectation(name):
    s = load_system(name)
    e = expectation(s.H, basis_state(s.ref.determinant, s.ref.n_qubits))
    assert abs(e - s.ref.hf_energy) < 1e-10


@pytest.mark.parametrize("name", ["h4_0.750", "h4_1.500"])
def test_fock_diagonal_reproduces_canonical_orbital_energies(name):
    s = load_system(name)
    eps = np.asarray(s.meta["mo_energies"])
    assert np.allclose(s.ref.fock_diagonal[0::2], eps, atol=1e-8)
    assert np.allclose(s.ref.fock_diagonal[1::2], eps, atol=1e-8)


@pytest.mark.parametrize("name", ["h2_0.735", "h4_0.750", "h4_1.500"])
def test_brillouin_single_matrix_elements_vanish(name):
    s = load_system(name)
    H = dense_hamiltonian(name)
    det = s.ref.determinant
    for exc in generate_pool(s.ref, 1):
        target = det ^ exc.hole_mask ^ exc.particle_mask
        assert abs(H[target, det]) < 1e-8


def _ref_with(eps):
    from adspqe.hamiltonian import ReferenceData

    n = len(eps)
    return ReferenceData(tuple(range(n // 2)), tuple(range(n // 2, n)), np.asarray(eps, float), 0.0)


def test_denominator_single_and_double():
    ref = _ref_with([-0.5, -0.4, 0.6, 0.7])
    assert mp_denominator(Excitation((0,), (3,)), ref) == pytest.approx(-1.2, abs=1e-15)
    assert mp_denominator(Excitation((0, 1), (2, 3)), ref) == pytest.approx(-2.2, abs=1e-15)


def test_degenerate_denominator_clamped_with_flag():
    ref = _ref_with([0.3, -0.4, 0.3, 0.7])
    with pytest.warns(DenominatorFloorWarning):
        d = mp_denominator(Excitation((0,), (2,)), ref)
    assert d == -DENOMINATOR_FLOOR and is_level_shifted(d)


def test_denominator_rejects_non_particle_hole():
    ref = _ref_with([-0.5, -0.4, 0.6, 0.7])
    with pytest.raises(ConsistencyError):
        mp_denominator(Excitation((2,), (3,)), ref)


@pytest.mark.parametrize("name", ["h4_0.750", "h4_1.500", "h6_1.500"])
def test_denominators_negative_with_positive_gap(name):
    s = load_system(name)
    with warnings.catch_warnings():
        warnings.simplefilter("error", DenominatorFloorWarning)
        assert all(mp_denominator(e, s.ref) < 0 for e in generate_pool(s.ref, 4))


def test_interleaved_aufbau_occupation(h4):
    assert h4.ref.occupied_spin_orbitals == (0, 1, 2, 3)
    assert h4.ref.determinant == 0b1111
    assert list(itertools.chain(h4.ref.occupied_spin_orbitals, h4.ref.virtual_spin_orbitals)) == list(range(8))
