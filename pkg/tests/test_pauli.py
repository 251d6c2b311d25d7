import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabquench import oracle
from stabquench.errors import DomainError, ResourceError
from stabquench.fermions import FiniteChain, MajoranaCorrelation, QuenchSpec, evolved_correlation, \
    ground_correlation, realspace_correlation
from stabquench.pauli import (PauliString, even_string_count, gaussian_purity_sum, iter_pauli_strings, jw_map,
                              majorana_mask, moment_sums, pauli_expectation, pfaffian)

from conftest import dense_majoranas


def random_antisymmetric(rng, n):
    a = rng.normal(size=(n, n))
    return a - a.T


def random_gaussian_gamma(rng, L, mixed=True):
    """O diag(nu J) O^T with |nu| <= 1."""
    nu = rng.uniform(-1, 1, L) if mixed else rng.choice([-1.0, 1.0], L)
    d = np.zeros((2 * L, 2 * L))
    for j, v in enumerate(nu):
        d[2 * j, 2 * j + 1], d[2 * j + 1, 2 * j] = v, -v
    q, _ = np.linalg.qr(rng.normal(size=(2 * L, 2 * L)))
    g = q @ d @ q.T
    return MajoranaCorrelation(L, 0.5 * (g - g.T))


class TestPauliString:
    def test_label_roundtrip(self):
        for label in ("I", "XYZ", "ZZIY", "IIII"):
            assert PauliString.from_label(label).label == label

    def test_bad_letter(self):
        with pytest.raises(DomainError):
            PauliString.from_label("XA")

    def test_enumeration_is_complete(self):
        labels = {P.label for P in iter_pauli_strings(3)}
        assert len(labels) == 64
        assert labels == {"".join(p) for p in itertools.product("IXYZ", repeat=3)}


class TestJordanWigner:
    def test_examples(self):
        z = jw_map(PauliString.from_label("IZ"))
        assert z.indices == (2, 3) and z.phase == -1j
        x = jw_map(PauliString.from_label("XI"))
        assert x.indices == (0,) and not x.is_even
        xx = jw_map(PauliString.from_label("XX"))
        assert xx.indices == (1, 2) and xx.phase == -1j

    @pytest.mark.parametrize("L", [1, 2, 3])
    def test_operator_identity(self, L):
        # the image equals the string as a dense operator on the block
        a = dense_majoranas(L)
        for P in iter_pauli_strings(L):
            mono = jw_map(P)
            m = mono.phase * np.eye(2 ** L)
            for i in mono.indices:
                m = m @ a[i]
            assert np.allclose(m, oracle.pauli_matrix(P.label), atol=1e-14)

    def test_bijection_onto_subsets(self):
        L = 4
        masks = {majorana_mask(P) for P in iter_pauli_strings(L)}
        assert masks == set(range(4 ** L))
        for P in iter_pauli_strings(L):
            mono = jw_map(P)
            assert majorana_mask(P) == sum(1 << i for i in mono.indices)

    @pytest.mark.parametrize("L", [1, 2, 5, 7])
    def test_even_count(self, L):
        n_even = sum(jw_map(P).is_even for P in iter_pauli_strings(L)) if L <= 5 else None
        assert even_string_count(L) == 2 ** (2 * L - 1)
        if n_even is not None:
            assert n_even == 2 ** (2 * L - 1)


class TestPfaffian:
    def test_examples(self):
        assert pfaffian([[0, 1], [-1, 0]]) == 1.0
        a = np.zeros((4, 4))
        a[0, 1], a[0, 2], a[0, 3], a[1, 2], a[1, 3], a[2, 3] = 1, 3, 5, 6, 4, 2
        assert pfaffian(a - a.T) == pytest.approx(20.0, abs=1e-12)
        assert pfaffian(np.zeros((0, 0))) == 1.0

    def test_errors(self):
        with pytest.raises(DomainError):
            pfaffian(np.zeros((3, 3)))
        with pytest.raises(DomainError):
            pfaffian(np.ones((2, 2)))
        with pytest.raises(DomainError):
            pfaffian(np.zeros((2, 3)))

    @settings(max_examples=60, deadline=None)
    @given(m=st.integers(1, 12), seed=st.integers(0, 2 ** 32 - 1))
    def test_square_is_determinant(self, m, seed):
        a = random_antisymmetric(np.random.default_rng(seed), 2 * m)
        pf, det = pfaffian(a), np.linalg.det(a)
        assert abs(pf * pf - det) <= 1e-8 * abs(det)

    def test_zero_pivot(self):
        a = np.zeros((4, 4))
        a[0, 3], a[1, 2] = 2.0, 5.0
        assert pfaffian(a - a.T) == pytest.approx(10.0, abs=1e-14)


class TestExpectation:
    def test_identity_and_polarized_z(self):
        G = ground_correlation(1e4, 3)
        assert pauli_expectation(PauliString(3), G) == 1.0
        for n in range(3):
            z = PauliString.from_label("I" * n + "Z" + "I" * (2 - n))
            assert abs(pauli_expectation(z, G) - 1) < 1e-4

    def test_xx_ground_state_against_oracle(self):
        psi = oracle.ground_state(12, 0.5)
        rho = oracle.reduced_density(psi, 2)
        exact = np.trace(rho @ oracle.pauli_matrix("XX")).real
        got = pauli_expectation(PauliString.from_label("XX"), ground_correlation(0.5, 2, FiniteChain(12)))
        assert got == pytest.approx(exact, abs=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(L=st.integers(1, 5), seed=st.integers(0, 2 ** 32 - 1))
    def test_bounded(self, L, seed):
        G = random_gaussian_gamma(np.random.default_rng(seed), L)
        for P in iter_pauli_strings(L):
            assert abs(pauli_expectation(P, G)) <= 1 + 1e-9

    def test_sampled_squares_match_oracle(self, rng):
        N, L = 10, 5
        psi = oracle.evolve(oracle.ground_state(N, 0.8), 1.4, 0.9)
        coeff = oracle.pauli_coefficients(oracle.reduced_density(psi, L))
        G = evolved_correlation(QuenchSpec(0.8, 1.4, FiniteChain(N)), L, 0.9)
        strings = list(iter_pauli_strings(L))
        pick = rng.choice(len(strings), 1000, replace=False)
        a = sum(pauli_expectation(strings[i], G) ** 2 for i in pick)
        b = sum(coeff[tuple("IXYZ".index(c) for c in strings[i].label)] ** 2 for i in pick)
        assert a == pytest.approx(b, abs=1e-8)


class TestMomentSums:
    def test_single_qubit_examples(self):
        up = MajoranaCorrelation(1, [[0.0, 1.0], [-1.0, 0.0]])
        m = moment_sums(up)
        assert (m.sum_sq, m.sum_quad) == (2.0, 2.0)

    def test_magic_state_through_oracle(self):
        # <X> = <Z> = 1/sqrt(2), <Y> = 0: not Gaussian, so only the dense path applies
        psi = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
        m = oracle.brute_moments(np.outer(psi, psi.conj()))
        assert m.sum_sq == pytest.approx(2.0, abs=1e-14)
        assert m.sum_quad == pytest.approx(1.5, abs=1e-14)

    def test_against_oracle(self):
        N, L, t = 12, 4, 0.5
        rho = oracle.reduced_density(oracle.evolve(oracle.ground_state(N, 1e4), 0.5, t), L)
        a = moment_sums(evolved_correlation(QuenchSpec(1e4, 0.5, FiniteChain(N)), L, t))
        b = oracle.brute_moments(rho)
        assert a.sum_sq == pytest.approx(b.sum_sq, abs=1e-7)
        assert a.sum_quad == pytest.approx(b.sum_quad, abs=1e-7)

    @pytest.mark.parametrize("L", [1, 3, 6])
    def test_matches_explicit_enumeration(self, rng, L):
        G = random_gaussian_gamma(rng, L)
        vals = np.array([pauli_expectation(P, G) for P in iter_pauli_strings(L)])
        m = moment_sums(G)
        assert m.sum_sq == pytest.approx(np.sum(vals ** 2), rel=1e-12)
        assert m.sum_quad == pytest.approx(np.sum(vals ** 4), rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(L=st.integers(1, 8), seed=st.integers(0, 2 ** 32 - 1))
    def test_bounds_and_purity_identity(self, L, seed):
        G = random_gaussian_gamma(np.random.default_rng(seed), L)
        m = moment_sums(G)
        assert 1 - 1e-12 <= m.sum_quad <= m.sum_sq + 1e-12
        assert m.sum_sq <= 2 ** L * (1 + 1e-12)
        assert m.sum_sq == pytest.approx(gaussian_purity_sum(G), rel=1e-10)

    def test_pure_state_saturates(self, rng):
        G = random_gaussian_gamma(rng, 5, mixed=False)
        assert moment_sums(G).sum_sq == pytest.approx(2 ** 5, rel=1e-12)

    def test_translation_invariance(self):
        N = 14
        ref = moment_sums(realspace_correlation(N, 1e4, 0.5, 1.2, start=0, L=5))
        for start in (2, 5, 9):
            m = moment_sums(realspace_correlation(N, 1e4, 0.5, 1.2, start=start, L=5))
            assert m.sum_sq == pytest.approx(ref.sum_sq, rel=1e-11)
            assert m.sum_quad == pytest.approx(ref.sum_quad, rel=1e-11)

    def test_chunking_and_threads_do_not_change_bits(self):
        import numba

        G = evolved_correlation(QuenchSpec(1e4, 0.5), 7, 1.3)
        ref = moment_sums(G)
        before = numba.get_num_threads()
        try:
            numba.set_num_threads(1)
            again = moment_sums(G)
        finally:
            numba.set_num_threads(before)
        assert (again.sum_sq, again.sum_quad) == (ref.sum_sq, ref.sum_quad)

    def test_resource_cap(self):
        G = ground_correlation(0.5, 6)
        with pytest.raises(ResourceError):
            moment_sums(G, max_block=5)

    def test_empty_block(self):
        m = moment_sums(MajoranaCorrelation(0, np.zeros((0, 0))))
        assert (m.sum_sq, m.sum_quad) == (1.0, 1.0)
