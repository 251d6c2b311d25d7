"""
Dense statevector reference for chains of up to 12 spins.

Site 0 is the most significant bit of the computational-basis index, so the
first L sites of a state reshape to the leading axis.  Bit value 0 is the
Z = +1 state.  The Hamiltonian commutes with the parity prod_n Z_n and is
diagonalised block by block; eigenpairs are cached per (N, lam).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegeneracyWarning, DomainError, ResourceError
from .pauli import MomentSums

MAX_SITES = 12
CLUSTER_TOL = 1e-9

_PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


@dataclass(frozen=True, eq=False)
class DenseState:
    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.amplitudes, dtype=complex)
        if psi.shape != (2 ** self.n_sites,):
            raise DomainError("amplitude vector has the wrong length")
        if abs(np.linalg.norm(psi) - 1) > 1e-12:
            raise DomainError("state is not normalised")
        object.__setattr__(self, "amplitudes", psi)


@dataclass(frozen=True, eq=False)
class DenseOperatorSpec:
    n_sites: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise DomainError("operator is not Hermitian")


def _check_sites(N):
    if int(N) != N or N < 2:
        raise DomainError(f"chain length must be an integer >= 2, got {N}")
    if N > MAX_SITES:
        raise ResourceError(f"dense oracle is capped at {MAX_SITES} sites, got {N}")


def _bits(N):
    idx = np.arange(2 ** N)
    return (idx[:, None] >> (N - 1 - np.arange(N))[None, :]) & 1


def build_hamiltonian(N: int, lam: float) -> DenseOperatorSpec:
    """H = -sum_n (X_n X_{n+1} + lam Z_n) with periodic boundary conditions."""
    _check_sites(N)
    dim = 2 ** N
    bits = _bits(N)
    h = np.zeros((dim, dim))
    h[np.diag_indices(dim)] = -lam * np.sum(1 - 2 * bits, axis=1)
    idx = np.arange(dim)
    bonds = [(n, (n + 1) % N) for n in range(N)] if N > 2 else [(0, 1), (1, 0)]
    for a, b in bonds:
        flip = (1 << (N - 1 - a)) | (1 << (N - 1 - b))
        h[idx, idx ^ flip] -= 1.0
    return DenseOperatorSpec(N, h)


@lru_cache(maxsize=8)
def _spectrum(N: int, lam: float):
    h = build_hamiltonian(N, lam).matrix
    parity = np.sum(_bits(N), axis=1) % 2
    energies, vectors = [], []
    for p in (0, 1):
        sector = np.flatnonzero(parity == p)
        w, v = np.linalg.eigh(h[np.ix_(sector, sector)])
        full = np.zeros((2 ** N, len(sector)))
        full[sector] = v
        energies.append(w)
        vectors.append(full)
    w = np.concatenate(energies)
    v = np.concatenate(vectors, axis=1)
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def spectrum(N: int, lam: float):
    """Eigenvalues (ascending) and eigenvectors of H(lam)."""
    _check_sites(N)
    return _spectrum(int(N), float(lam))


def ground_state(N: int, lam: float) -> DenseState:
    """Ground state of the even-parity sector (the global ground state for lam > 0, finite N)."""
    w, v = spectrum(N, lam)
    even = np.sum(_bits(N), axis=1) % 2 == 0
    cand = [i for i in range(len(w)) if np.all(v[~even, i] == 0)]
    psi = v[:, cand[0]].astype(complex)
    # deterministic global phase: largest component real positive
    j = np.argmax(np.abs(psi))
    psi *= np.exp(-1j * np.angle(psi[j]))
    return DenseState(N, psi)


def evolve(state: DenseState, lam1: float, t: float) -> DenseState:
    """exp(-i H(lam1) t) |state> via the cached eigendecomposition."""
    w, v = spectrum(state.n_sites, lam1)
    coeff = v.T @ state.amplitudes
    psi = v @ (np.exp(-1j * w * t) * coeff)
    return DenseState(state.n_sites, psi / np.linalg.norm(psi))


def expectation(state: DenseState, op: DenseOperatorSpec) -> float:
    psi = state.amplitudes
    return float(np.real(np.vdot(psi, op.matrix @ psi)))


def reduced_density(state, L: int, start: int = 0) -> np.ndarray:
    """Density matrix of sites ``start .. start + L - 1``.

    ``state`` is a :class:`DenseState` or a full density matrix.
    """
    if isinstance(state, DenseState):
        N = state.n_sites
        if L < 0 or start < 0 or start + L > N:
            raise DomainError("block outside the chain")
        psi = state.amplitudes.reshape(2 ** start, 2 ** L, 2 ** (N - start - L))
        return np.einsum("aib,ajb->ij", psi, psi.conj())
    rho = np.asarray(state)
    N = int(round(np.log2(rho.shape[0])))
    if L < 0 or start < 0 or start + L > N:
        raise DomainError("block outside the chain")
    shape = (2 ** start, 2 ** L, 2 ** (N - start - L))
    r = rho.reshape(shape + shape)
    return np.einsum("aibajb->ij", r)


def pauli_coefficients(rho: np.ndarray) -> np.ndarray:
    """All tr(P rho) for P in {I, X, Y, Z}^L, as an array of shape (4,) * L.

    Axis j indexes the Pauli on site j with the order I, X, Y, Z.
    """
    rho = np.asarray(rho, dtype=complex)
    L = int(round(np.log2(rho.shape[0])))
    # tr(P rho) = sum_{rc} P_cr rho_rc, one site at a time; after step j the
    # axes are (p_0..p_j, r_{j+1}.., c_{j+1}..), so site j+1's column is axis L
    t = rho.reshape((2,) * (2 * L))
    for j in range(L):
        t = np.tensordot(t, _PAULI, axes=([j, L], [2, 1]))
        t = np.moveaxis(t, -1, j)
    return np.real(t)


def brute_moments(rho: np.ndarray) -> MomentSums:
    """Sum of <P>^2 and <P>^4 over all 4^L Pauli strings, by dense traces."""
    c = pauli_coefficients(rho)
    L = int(round(np.log2(np.asarray(rho).shape[0])))
    return MomentSums(L, float(np.sum(c ** 2)), float(np.sum(c ** 4)))


def pauli_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string such as ``"XIZ"`` (site 0 first)."""
    m = np.ones((1, 1), dtype=complex)
    for ch in label:
        m = np.kron(m, _PAULI["IXYZ".index(ch)])
    return m


def dephased_state(N: int, lam: float, lam1: float, tol: float = CLUSTER_TOL,
                   reduced_to: int | None = None) -> np.ndarray:
    """sum_k Pi_k psi_0(lam) Pi_k over eigenspaces of H(lam1).

    Eigenvalues closer than ``tol`` are merged into one eigenspace.  With
    ``reduced_to=L`` only the L-site reduced density matrix is formed.
    """
    psi = ground_state(N, lam).amplitudes
    w, v = spectrum(N, lam1)
    coeff = v.T @ psi
    breaks = np.flatnonzero(np.diff(w) >= tol) + 1
    clusters = np.split(np.arange(len(w)), breaks)
    n_merged = sum(len(c) > 1 for c in clusters)
    if n_merged:
        warnings.warn(f"{n_merged} degenerate eigenspaces merged (tol {tol:g})", DegeneracyWarning, stacklevel=2)
    proj = np.stack([v[:, c] @ coeff[c] for c in clusters])
    if reduced_to is None:
        return proj.T @ proj.conj()
    L = reduced_to
    p = proj.reshape(len(clusters), 2 ** L, 2 ** (N - L))
    return np.einsum("cia,cja->ij", p, p.conj())


def random_clifford_layer(L: int, rng: np.random.Generator, depth: int = 4) -> np.ndarray:
    """Unitary of a random circuit of H, S and CNOT gates on L qubits."""
    had = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    phase = np.diag([1, 1j])
    u = np.eye(2 ** L, dtype=complex)
    for _ in range(depth):
        for q in range(L):
            g = [np.eye(2), had, phase, phase @ had, had @ phase][rng.integers(5)]
            u = _on_site(g, q, L) @ u
        if L > 1:
            a, b = rng.choice(L, size=2, replace=False)
            u = _cnot(a, b, L) @ u
    return u


def _on_site(g, q, L):
    return np.kron(np.kron(np.eye(2 ** q), g), np.eye(2 ** (L - q - 1)))


def _cnot(control, target, L):
    idx = np.arange(2 ** L)
    cbit = (idx >> (L - 1 - control)) & 1
    out = idx ^ (cbit << (L - 1 - target))
    m = np.zeros((2 ** L, 2 ** L))
    m[out, idx] = 1
    return m
