import warnings

import numpy as np
import pytest

from stabquench import oracle
from stabquench.errors import DegeneracyWarning, DomainError, ResourceError
from stabquench.metrics import se_report
from stabquench.validation import clifford_invariance, dephased_equivalence, quench_equivalence


def test_two_site_spectrum():
    w, _ = oracle.spectrum(2, 0.0)
    assert np.allclose(w, [-2, -2, 2, 2], atol=1e-14)


def test_large_field_ground_state():
    psi = oracle.ground_state(2, 1e6).amplitudes
    assert abs(psi[0]) == pytest.approx(1.0, abs=1e-10)


def test_size_errors():
    with pytest.raises(ResourceError):
        oracle.build_hamiltonian(13, 1.0)
    with pytest.raises(DomainError):
        oracle.build_hamiltonian(1, 1.0)


def test_hamiltonian_is_hermitian_and_parity_symmetric():
    h = oracle.build_hamiltonian(6, 0.7).matrix
    assert np.array_equal(h, h.T)
    parity = oracle.pauli_matrix("Z" * 6).real
    assert np.allclose(h @ parity, parity @ h)


def test_eigenstate_is_stationary():
    psi = oracle.ground_state(8, 0.6)
    for t in (0.5, 3.0):
        phi = oracle.evolve(psi, 0.6, t)
        assert abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_energy_conserved():
    H = oracle.build_hamiltonian(8, 1.3)
    psi = oracle.ground_state(8, 0.4)
    e0 = oracle.expectation(psi, H)
    for t in (0.3, 1.0, 5.0):
        assert oracle.expectation(oracle.evolve(psi, 1.3, t), H) == pytest.approx(e0, abs=1e-10)


def test_reduced_density_properties():
    psi = oracle.evolve(oracle.ground_state(10, 1e4), 0.5, 1.1)
    for L, start in ((3, 0), (4, 5)):
        rho = oracle.reduced_density(psi, L, start)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-11)
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-11
    full = np.outer(psi.amplitudes, psi.amplitudes.conj())
    assert np.allclose(oracle.reduced_density(full, 3, 2), oracle.reduced_density(psi, 3, 2), atol=1e-14)


def test_pauli_coefficients_match_traces(rng):
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    rho = np.outer(v, v.conj()) / np.vdot(v, v)
    c = oracle.pauli_coefficients(rho)
    for label in ("IXZ", "YYI", "ZXY", "III"):
        idx = tuple("IXYZ".index(ch) for ch in label)
        assert c[idx] == pytest.approx(np.trace(oracle.pauli_matrix(label) @ rho).real, abs=1e-14)


def test_brute_moments_against_pfaffian_path():
    res = quench_equivalence(N=12, L=4, times=(0.0, 0.5, 1.0, 2.0))
    assert res["max_dev_sum_sq"] < 1e-7 and res["max_dev_sum_quad"] < 1e-7
    assert res["max_dev_pauli"] < 1e-7 and res["max_dev_M2"] < 1e-6


def test_dephased_state_commutes_with_hamiltonian():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        rho = oracle.dephased_state(8, 1e4, 0.5)
    h = oracle.build_hamiltonian(8, 0.5).matrix
    assert np.max(np.abs(h @ rho - rho @ h)) < 1e-9
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)


def test_degeneracy_warning():
    with pytest.warns(DegeneracyWarning):
        oracle.dephased_state(6, 1e4, 0.5, reduced_to=2)


@pytest.mark.parametrize("lam0, lam1, L_max", [(0.5, 0.6, 4), (0.9, 1.0, 4), (1e4, 0.5, 2)])
def test_dephased_against_gaussian(lam0, lam1, L_max):
    # the exact diagonal ensemble keeps n_k and n_-k correlated, which the Gaussian
    # dephased state does not; quartic quantities differ at finite N (large quenches most)
    for L in range(1, L_max + 1):
        res = dephased_equivalence(N=10, L=L, lam0=lam0, lam1=lam1)
        assert res["max_dev_two_point"] < 1e-9
        assert res["dev_M2"] < 5e-2


def test_dephased_gap_is_finite_size_for_large_quench():
    res = dephased_equivalence(N=10, L=4, lam0=1e4, lam1=0.5)
    assert res["max_dev_two_point"] < 1e-9
    assert 5e-2 < res["dev_M2"] < 0.2


def test_clifford_invariance():
    res = clifford_invariance(N=8, L=4, trials=50)
    assert res["max_dev_M2"] < 1e-9
    assert res["M2"] > 0.1


def test_clifford_layer_is_unitary_and_maps_paulis(rng):
    u = oracle.random_clifford_layer(3, rng)
    assert np.allclose(u @ u.conj().T, np.eye(8), atol=1e-13)
    img = u @ oracle.pauli_matrix("XZI") @ u.conj().T
    coeff = oracle.pauli_coefficients(img / 8)
    assert np.count_nonzero(np.abs(coeff) > 1e-9) == 1
    assert np.max(np.abs(coeff)) == pytest.approx(1.0)


def test_magic_reference():
    psi = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
    r = se_report(oracle.brute_moments(np.outer(psi, psi)))
    assert r.M2 == pytest.approx(np.log2(4 / 3), abs=1e-14)
