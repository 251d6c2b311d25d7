"""
Replica transfer matrices of uniform MPS and the linear-plus-exponential
scaling of Pauli moment sums.

For a uniform MPS with site tensors A[s] (shape (2, D, D)) the one-copy
transfer matrix dressed by a single-site operator O is

    E_O = sum_{s, s'} O[s, s'] conj(A[s]) (x) A[s'].

The replica state (psi (x) psi*)^(x)k has bare transfer matrix
(E_I (x) conj(E_I))^(x)k and, dressed with A = sum_P (P (x) P*)^(x)k,

    tau_A = sum_{P in I,X,Y,Z} (E_P (x) conj(E_P))^(x)k .

Strings of L dressed sites give sum_P <P>^(2k) over the L-site Pauli group.
Writing tau_A = sum_i lam_i |R_i><L_i| and c_i for the overlap of the i-th
term with the leading eigenspace of tau,

    sum_P <P>^(2k) = sum_i c_i lam_i^L = 2^(m L + q) (1 + eps),
    |eps| <= D_k^2 exp(-L / xi) F,

with 2^m = lam_1, 2^q = c_1, exp(-1/xi) = |lam_2 / lam_1| and
F = max_{i>=2} |c_i / c_1|.  Since 2^T2 and 2^T4 are the reciprocals of
these moment sums, T_{2k} = -(m L + q) - log2(1 + eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, Flag, ResourceError

MAX_TRANSFER_DIM = 4096
DEGENERACY_TOL = 1e-10
LOW_CONFIDENCE_BITS = 0.5

_PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


@dataclass(frozen=True, eq=False)
class UniformMPS:
    """Translation-invariant MPS; ``tensors[s]`` is the D x D matrix for state s."""

    tensors: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        a = np.asarray(self.tensors, dtype=complex)
        if a.ndim != 3 or a.shape[0] != 2 or a.shape[1] != a.shape[2]:
            raise DomainError("tensors must have shape (2, D, D)")
        object.__setattr__(self, "tensors", a)

    @property
    def bond_dim(self) -> int:
        return self.tensors.shape[1]

    def normalize(self) -> "UniformMPS":
        """Rescale so the leading transfer eigenvalue is 1."""
        rho = np.max(np.abs(np.linalg.eigvals(transfer(self, _PAULI[0]))))
        if rho == 0:
            raise DomainError("transfer matrix is nilpotent")
        return UniformMPS(self.tensors / np.sqrt(rho), normalized=True)


def product_mps(vector) -> UniformMPS:
    """D = 1 MPS of the product state with single-site amplitudes ``vector``."""
    v = np.asarray(vector, dtype=complex)
    return UniformMPS(v.reshape(2, 1, 1) / np.linalg.norm(v), normalized=True)


def random_mps(D: int, rng: np.random.Generator, real: bool = False) -> UniformMPS:
    a = rng.normal(size=(2, D, D))
    if not real:
        a = a + 1j * rng.normal(size=(2, D, D))
    return UniformMPS(a).normalize()


def ghz_mps(perturbation: float = 0.0, rng: np.random.Generator | None = None) -> UniformMPS:
    """GHZ state (|0...0> + |1...1>)/sqrt(2) as a D = 2 MPS, optionally perturbed."""
    a = np.zeros((2, 2, 2))
    a[0, 0, 0] = 1.0
    a[1, 1, 1] = 1.0
    if perturbation:
        rng = rng if rng is not None else np.random.default_rng(0)
        a = a + perturbation * rng.normal(size=a.shape)
    return UniformMPS(a).normalize()


def direct_sum(a: UniformMPS, b: UniformMPS) -> UniformMPS:
    """Block-diagonal MPS, the equal-weight cat of two injective MPS."""
    Da, Db = a.bond_dim, b.bond_dim
    t = np.zeros((2, Da + Db, Da + Db), dtype=complex)
    t[:, :Da, :Da] = a.tensors
    t[:, Da:, Da:] = b.tensors
    return UniformMPS(t).normalize()


def transfer(mps: UniformMPS, op) -> np.ndarray:
    """One-copy transfer matrix dressed by the single-site operator ``op``."""
    A = mps.tensors
    op = np.asarray(op)
    return sum(op[s, sp] * np.kron(A[s].conj(), A[sp]) for s in range(2) for sp in range(2))


def replica_transfer(mps: UniformMPS, k: int, dressed: bool) -> np.ndarray:
    """tau (dressed=False) or tau_A (dressed=True) of the k-fold replica state."""
    if k not in (1, 2):
        raise DomainError("replica index k must be 1 or 2")
    dim = mps.bond_dim ** (4 * k)
    if dim > MAX_TRANSFER_DIM:
        raise ResourceError(f"replica transfer matrix would be {dim} x {dim} (cap {MAX_TRANSFER_DIM})")
    paulis = _PAULI if dressed else _PAULI[:1]
    out = np.zeros((dim, dim), dtype=complex)
    for p in paulis:
        e = transfer(mps, p)
        pair = np.kron(e, e.conj())
        out += reduce(np.kron, [pair] * k)
    return out


def leading_projector(tau: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Spectral projector of tau onto its eigenvalues of largest modulus."""
    w, vl, vr = sla.eig(tau, left=True, right=True)
    top = np.max(np.abs(w))
    sel = np.abs(w) > top * (1 - tol)
    vl, vr = vl[:, sel], vr[:, sel]
    # biorthonormalise within the selected block
    return vr @ np.linalg.solve(vl.conj().T @ vr, vl.conj().T)


def string_expectation(mps: UniformMPS, k: int, L: int) -> float:
    """sum_P <P>^(2k) over L-site Paulis from powers of the transfer matrices."""
    tau = replica_transfer(mps, k, dressed=False)
    tau_a = replica_transfer(mps, k, dressed=True)
    proj = leading_projector(tau)
    val = np.trace(proj @ np.linalg.matrix_power(tau_a, L)) / np.trace(proj)
    return float(val.real)


def reduced_density(mps: UniformMPS, L: int) -> np.ndarray:
    """Dense L-site density matrix of the infinite chain (site 0 most significant)."""
    A = mps.tensors
    D = mps.bond_dim
    proj = leading_projector(transfer(mps, _PAULI[0])).reshape(D, D, D, D)
    T = np.broadcast_to(np.eye(D, dtype=complex), (1, D, D))
    for _ in range(L):
        T = np.einsum("sab,tbc->stac", T, A).reshape(-1, D, D)
    # rho[s', s] = sum Pi[bb, b, aa, a] conj(T[s, aa, bb]) T[s', a, b] / tr Pi
    rho = np.einsum("yxwv,swy,tvx->ts", proj, T.conj(), T)
    return rho / np.trace(rho)


def dense_string_expectation(mps: UniformMPS, k: int, L: int) -> float:
    """Same sum as :func:`string_expectation` from the dense reduced density matrix."""
    from .oracle import pauli_coefficients

    c = pauli_coefficients(reduced_density(mps, L))
    return float(np.sum(c ** (2 * k)))


@dataclass(frozen=True, eq=False)
class ReplicaScaling:
    """Scaling data of sum_P <P>^(2k) = 2^(m L + q) (1 + eps).

    ``dk2`` is D_k^2, the dimension of the transfer matrices.  ``leading``
    is the index of the first eigenvalue of tau_A with a nonzero overlap;
    it is 0 unless the overlap of the top eigenvector vanishes.  Constants of
    the time-dependent bound (eps_0, chi) need an evolved MPS and are not
    represented here.
    """

    k: int
    m: float
    q: float
    xi: float
    F: float
    dk2: int
    eigenvalues: np.ndarray
    coefficients: np.ndarray
    tau_eigenvalues: np.ndarray
    leading: int = 0
    degenerate: bool = False
    flags: list = field(default_factory=list)


def _spectral_groups(mat: np.ndarray, tol: float):
    """Eigenvalues of ``mat`` merged when equal within ``tol``, with their projectors.

    Groups are ordered by decreasing modulus.
    """
    w, vl, vr = sla.eig(mat, left=True, right=True)
    order = np.argsort(-np.abs(w), kind="stable")
    w, vl, vr = w[order], vl[:, order], vr[:, order]
    scale = max(np.max(np.abs(w)), 1.0)
    groups, used = [], np.zeros(len(w), dtype=bool)
    for i in range(len(w)):
        if used[i]:
            continue
        members = np.flatnonzero(~used & (np.abs(w - w[i]) <= tol * scale))
        used[members] = True
        a, b = vl[:, members], vr[:, members]
        groups.append((w[i], b @ np.linalg.solve(a.conj().T @ b, a.conj().T)))
    return groups


def scaling_params(tau: np.ndarray, tau_a: np.ndarray, k: int = 1, overlap_tol: float = 1e-12,
                   tol: float = DEGENERACY_TOL) -> ReplicaScaling:
    """Extract m, q, xi and F from the bare and dressed transfer matrices.

    Equal eigenvalues of tau_A are merged into one spectral term.  If the
    top term has no overlap with the leading eigenspace of tau, the next
    term takes its place.  ``degenerate`` is set when two distinct terms
    share the top modulus.
    """
    proj = leading_projector(tau)
    norm = np.trace(proj)
    groups = _spectral_groups(tau_a, tol)
    w = np.array([g[0] for g in groups])
    coeff = np.array([np.trace(proj @ g[1]) / norm for g in groups])
    live = np.flatnonzero(np.abs(coeff) > overlap_tol * max(np.max(np.abs(coeff)), 1.0))
    if len(live) == 0:
        raise DomainError("string expectation vanishes identically")
    i0 = int(live[0])
    lead, c_lead = w[i0], coeff[i0]
    top = abs(lead)
    flags = []
    same_circle = [i for i in range(len(w)) if i != i0 and abs(abs(w[i]) - top) <= tol * max(top, 1.0)]
    degenerate = any(abs(coeff[i]) > overlap_tol for i in same_circle) or len(groups) < tau_a.shape[0]
    if degenerate:
        flags.append(Flag.DEGENERATE)
    if any(abs(coeff[i]) > overlap_tol for i in same_circle):
        # distinct phases on the top circle: no single exponential describes the sum
        flags.append(Flag.LOW_CONFIDENCE)
    m = math.log2(top)
    q = math.log2(abs(c_lead))
    rest = [i for i in range(i0 + 1, len(w)) if i not in same_circle]
    if rest and abs(w[rest[0]]) > 0:
        xi = -1.0 / math.log(abs(w[rest[0]]) / top)
        F = float(np.max(np.abs(coeff[rest])) / abs(c_lead))
    else:
        xi = 0.0
        F = 0.0
    return ReplicaScaling(
        k=k, m=m, q=q, xi=xi, F=F, dk2=tau_a.shape[0], eigenvalues=w, coefficients=coeff,
        tau_eigenvalues=np.linalg.eigvals(tau), leading=i0, degenerate=degenerate, flags=flags,
    )


def mps_scaling(mps: UniformMPS, k: int) -> ReplicaScaling:
    return scaling_params(replica_transfer(mps, k, False), replica_transfer(mps, k, True), k=k)


def relative_error_bound(s: ReplicaScaling, L: int) -> float:
    """D_k^2 exp(-L/xi) F."""
    if s.xi == 0.0:
        return 0.0
    return s.dk2 * math.exp(-L / s.xi) * s.F


def predict_T(s: ReplicaScaling, L: int) -> dict:
    """Predicted T_{2k}(L) = -(m L + q) and the size of the neglected term in bits.

    ``error_bound`` is log2(1 + b) with b the relative error bound; the
    neglected term log2(1 + eps) lies in ``error_interval`` =
    [log2(1 - b), log2(1 + b)], whose lower end is -inf once b >= 1.
    """
    if L < 2:
        raise DomainError("prediction needs L >= 2")
    b = relative_error_bound(s, L)
    err = math.log2(1 + b)
    lower = math.log2(1 - b) if b < 1 else -math.inf
    flags = list(s.flags)
    if err > LOW_CONFIDENCE_BITS and Flag.LOW_CONFIDENCE not in flags:
        flags.append(Flag.LOW_CONFIDENCE)
    return {"value": -(s.m * L + s.q), "error_bound": err, "error_interval": (lower, err),
            "relative_bound": b, "flags": flags}


def scaling_report(mps: UniformMPS, k: int, L_values) -> dict:
    """Per-L comparison of the prediction with dense contraction, JSON-ready."""
    s = mps_scaling(mps, k)
    rows = []
    for L in L_values:
        dense = dense_string_expectation(mps, k, L)
        pred = 2.0 ** (s.m * L + s.q)
        rows.append({
            "L": int(L),
            "dense": dense,
            "predicted": pred,
            "relative_deviation": abs(dense - pred) / pred,
            "bound": relative_error_bound(s, L),
        })
    return {
        "k": k, "D": mps.bond_dim, "m": s.m, "q": s.q, "xi": s.xi, "F": s.F,
        "degenerate": s.degenerate, "flags": [str(f) for f in s.flags], "rows": rows,
    }


def tfim_energy_density(mps: UniformMPS, lam: float) -> float:
    """<-X_n X_{n+1} - lam Z_n> per site in the infinite chain."""
    proj = leading_projector(transfer(mps, _PAULI[0]))
    ex = transfer(mps, _PAULI[1])
    ez = transfer(mps, _PAULI[3])
    tr = np.trace(proj)
    e = -np.trace(proj @ ex @ ex) / tr - lam * np.trace(proj @ ez) / tr
    return float(e.real)


def variational_tfim_mps(lam: float, D: int = 2, seed: int = 0) -> UniformMPS:
    """Real uniform MPS minimising the TFIM energy density (symmetry broken for lam < 1)."""
    from scipy.optimize import minimize

    rng = np.random.default_rng(seed)
    x0 = rng.normal(size=2 * D * D)
    x0[: D * D] += np.eye(D).ravel()

    def energy(x):
        return tfim_energy_density(UniformMPS(x.reshape(2, D, D)).normalize(), lam)

    res = minimize(energy, x0, method="BFGS", options={"gtol": 1e-10, "maxiter": 2000})
    return UniformMPS(res.x.reshape(2, D, D)).normalize()


def z2_cat(mps: UniformMPS) -> UniformMPS:
    """Parity-symmetric cat of ``mps`` and its image under prod_n Z_n."""
    flipped = UniformMPS(mps.tensors * np.array([1, -1]).reshape(2, 1, 1))
    return direct_sum(mps, flipped)
