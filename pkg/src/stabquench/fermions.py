"""
Free-fermion solution of the periodic transverse-field Ising chain.

    H(lam) = -sum_n (X_n X_{n+1} + lam Z_n)

is mapped by Jordan-Wigner onto Majorana operators

    a_{2n}   = (prod_{j<n} Z_j) X_n
    a_{2n+1} = (prod_{j<n} Z_j) Y_n          (sites n = 0 .. N-1)

and the state of any contiguous block is encoded by the real antisymmetric
matrix ``gamma`` with <a_m a_n> = delta_mn + i gamma[m, n].

The chain is translation invariant, so ``gamma`` is block-Toeplitz with 2x2
cells.  Each cell is a Fourier integral over momenta of a 2x2 symbol; the
symbol of the ground state of H(lam) is

    u(k) = [[0, exp(2i theta_k)], [-exp(-2i theta_k), 0]],

with theta_k the Bogoliubov angle, and a quench to lam1 rotates it by
exp(h1(k) t) with h1(k) = eps_k(lam1) u1(k).  Finite chains sum over the
even-parity (antiperiodic) momenta, the thermodynamic limit integrates with
composite Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import DomainError, Flag, ResolutionError

ANTISYMMETRY_TOL = 1e-12
SPECTRAL_TOL = 1e-10
GL_PANEL_ORDER = 16


@dataclass(frozen=True)
class FiniteChain:
    """Periodic chain of ``n_sites`` spins (even-parity sector)."""

    n_sites: int

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2 or self.n_sites % 2:
            raise DomainError(f"chain length must be an even integer >= 2, got {self.n_sites}")


@dataclass(frozen=True)
class ThermodynamicLimit:
    """Infinite chain; momentum integrals use ``quadrature_points`` nodes.

    ``safety`` is the factor c in the resolution rule
    quadrature_points >= c * (1 + eps_max * t).
    """

    quadrature_points: int = 4096
    safety: float = 4.0

    def __post_init__(self):
        if self.quadrature_points < 64:
            raise DomainError("quadrature_points must be >= 64")
        if not self.safety > 0:
            raise DomainError("safety factor must be positive")


ChainSize = Union[FiniteChain, ThermodynamicLimit]


@dataclass(frozen=True)
class QuenchSpec:
    """Quench lambda0 -> lambda1 of the transverse field (J = 1, hbar = 1)."""

    lambda0: float
    lambda1: float
    size: ChainSize = field(default_factory=ThermodynamicLimit)

    def __post_init__(self):
        for name in ("lambda0", "lambda1"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and > 0, got {value}")

    @property
    def is_finite(self) -> bool:
        return isinstance(self.size, FiniteChain)


@dataclass(frozen=True)
class ModeData:
    """Per-momentum quench data together with the quadrature weights.

    Weights are normalised so that a translation-invariant two-point
    function is ``sum(weights * Re(symbol * exp(-1j * k * r)))``.
    """

    k: np.ndarray
    weights: np.ndarray
    epsilon0: np.ndarray
    epsilon1: np.ndarray
    theta0: np.ndarray
    theta1: np.ndarray

    @property
    def delta(self) -> np.ndarray:
        return self.theta0 - self.theta1


@dataclass(frozen=True, eq=False)
class MajoranaCorrelation:
    """Majorana correlation matrix of a contiguous block of ``block_len`` sites.

    ``time_tag`` is the evolution time, or ``Flag.DEPHASED`` for the
    infinite-time (dephased) state.
    """

    block_len: int
    gamma: np.ndarray
    time_tag: Union[float, Flag] = 0.0

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        if g.shape != (2 * self.block_len, 2 * self.block_len):
            raise DomainError(f"gamma must be {2 * self.block_len}x{2 * self.block_len}, got {g.shape}")
        asym = np.max(np.abs(g + g.T)) if g.size else 0.0
        if asym > ANTISYMMETRY_TOL:
            raise DomainError(f"gamma is not antisymmetric (max |G + G^T| = {asym:.3g})")
        if g.size:
            nu = np.linalg.eigvalsh(1j * g)
            if np.max(np.abs(nu)) > 1 + SPECTRAL_TOL:
                raise DomainError(f"spectrum of i*gamma exceeds [-1, 1] (max {np.max(np.abs(nu)):.12g})")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    def subblock(self, start: int, length: int) -> "MajoranaCorrelation":
        """Correlation matrix of sites ``start .. start + length - 1`` of this block."""
        if start < 0 or length < 0 or start + length > self.block_len:
            raise DomainError("sub-block outside the block")
        sl = slice(2 * start, 2 * (start + length))
        return MajoranaCorrelation(length, self.gamma[sl, sl], self.time_tag)

    def is_pure(self, tol: float = 1e-8) -> bool:
        nu = np.abs(np.linalg.eigvalsh(1j * self.gamma))
        return bool(np.all(np.abs(nu - 1) < tol))


def _check_k(k):
    k = np.asarray(k, dtype=float)
    if np.any(k < 0) or np.any(k > np.pi) or not np.all(np.isfinite(k)):
        raise DomainError("momentum must lie in [0, pi]")
    return k


def _check_lambda(lam):
    if not (np.isfinite(lam) and lam > 0):
        raise DomainError(f"coupling must be finite and > 0, got {lam}")


def dispersion(k, lam):
    """Single-mode energy eps_k(lam) = 2 sqrt(1 + lam^2 - 2 lam cos k)."""
    k = _check_k(k)
    _check_lambda(lam)
    # (lam - 1)^2 + 4 lam sin^2(k/2) avoids cancellation near the critical point
    return 2.0 * np.sqrt((lam - 1.0) ** 2 + 4.0 * lam * np.sin(k / 2) ** 2)


def bogoliubov_angle(k, lam):
    """Angle theta_k in [0, pi/2] with tan(2 theta_k) = sin k / (lam - cos k)."""
    k = _check_k(k)
    _check_lambda(lam)
    return 0.5 * np.arctan2(np.sin(k), lam - np.cos(k))


def quench_angle(k, lam0, lam1):
    """Difference angle Delta_k = theta_k(lam0) - theta_k(lam1)."""
    return bogoliubov_angle(k, lam0) - bogoliubov_angle(k, lam1)


def max_group_velocity(lam1):
    """Largest quasiparticle group velocity max_k d eps_k / dk = 2 min(lam1, 1)."""
    _check_lambda(lam1)
    return 2.0 * min(lam1, 1.0)


@lru_cache(maxsize=32)
def _gauss_legendre_panels(n_points: int):
    n_panels = max(1, -(-n_points // GL_PANEL_ORDER))
    x, w = np.polynomial.legendre.leggauss(GL_PANEL_ORDER)
    edges = np.linspace(0.0, np.pi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    k = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel() / np.pi
    return k, weights


def momenta(size: ChainSize):
    """Momenta in (0, pi) and weights for the Fourier sums of ``size``."""
    if isinstance(size, FiniteChain):
        n = size.n_sites
        k = (2 * np.arange(1, n // 2 + 1) - 1) * np.pi / n
        return k, np.full(k.shape, 2.0 / n)
    return _gauss_legendre_panels(size.quadrature_points)


def mode_data(spec: QuenchSpec) -> ModeData:
    k, w = momenta(spec.size)
    return ModeData(
        k=k,
        weights=w,
        epsilon0=dispersion(k, spec.lambda0),
        epsilon1=dispersion(k, spec.lambda1),
        theta0=bogoliubov_angle(k, spec.lambda0),
        theta1=bogoliubov_angle(k, spec.lambda1),
    )


def _unit_symbol(theta):
    u = np.zeros(theta.shape + (2, 2), dtype=complex)
    u[..., 0, 1] = np.exp(2j * theta)
    u[..., 1, 0] = -np.exp(-2j * theta)
    return u


def _check_resolution(spec: QuenchSpec, t: float):
    if spec.is_finite:
        return
    eps_max = 2.0 * (1.0 + spec.lambda1)
    need = spec.size.safety * (1.0 + eps_max * t)
    if spec.size.quadrature_points < need:
        raise ResolutionError(
            f"quadrature_points={spec.size.quadrature_points} cannot resolve t={t}; need >= {math.ceil(need)}"
        )


def _check_block(spec: QuenchSpec, L: int):
    if int(L) != L or L < 1:
        raise DomainError(f"block length must be a positive integer, got {L}")
    if spec.is_finite and L > spec.size.n_sites:
        raise DomainError("block longer than the chain")


def _assemble(symbol, modes: ModeData, L: int):
    """Block-Toeplitz gamma from a (K, 2, 2) symbol."""
    r = np.arange(-(L - 1), L)
    phase = np.exp(-1j * np.outer(r, modes.k))
    cells = np.einsum("k,rk,kab->rab", modes.weights, phase, symbol).real
    gamma = np.empty((2 * L, 2 * L))
    for m in range(L):
        for n in range(L):
            gamma[2 * m:2 * m + 2, 2 * n:2 * n + 2] = cells[n - m + L - 1]
    # cells(-r) = -cells(r)^T holds analytically; enforce it bitwise
    return 0.5 * (gamma - gamma.T)


def evolved_symbol(modes: ModeData, t: float):
    u0 = _unit_symbol(modes.theta0)
    u1 = _unit_symbol(modes.theta1)
    c = np.cos(modes.epsilon1 * t)[:, None, None]
    s = np.sin(modes.epsilon1 * t)[:, None, None]
    eye = np.eye(2)
    return (c * eye + s * u1) @ u0 @ (c * eye - s * u1)


def dephased_symbol(modes: ModeData):
    # time average of evolved_symbol: component of u0 along u1, i.e. cos(2 Delta_k) u1
    return np.cos(2 * modes.delta)[:, None, None] * _unit_symbol(modes.theta1)


def evolved_correlation(spec: QuenchSpec, L: int, t: float) -> MajoranaCorrelation:
    """Correlation matrix of an L-site block of exp(-i H(lambda1) t) |psi_0(lambda0)>."""
    _check_block(spec, L)
    if not (np.isfinite(t) and t >= 0):
        raise DomainError(f"time must be finite and >= 0, got {t}")
    _check_resolution(spec, t)
    modes = mode_data(spec)
    return MajoranaCorrelation(L, _assemble(evolved_symbol(modes, t), modes, L), float(t))


def gge_correlation(spec: QuenchSpec, L: int) -> MajoranaCorrelation:
    """Dephased state: post-quench modes occupied with n_k = sin^2(Delta_k)."""
    _check_block(spec, L)
    modes = mode_data(spec)
    return MajoranaCorrelation(L, _assemble(dephased_symbol(modes), modes, L), Flag.DEPHASED)


def ground_correlation(lam: float, L: int, size: ChainSize | None = None) -> MajoranaCorrelation:
    spec = QuenchSpec(lam, lam, size if size is not None else ThermodynamicLimit())
    return evolved_correlation(spec, L, 0.0)


def finite_chain_energy(N: int, lam: float) -> float:
    """Even-sector ground energy -sum_k eps_k / 2 over all N antiperiodic momenta."""
    k, _ = momenta(FiniteChain(N))
    return -float(np.sum(dispersion(k, lam)))


# Real-space route, used to cross-check the momentum sums.

def majorana_hamiltonian(N: int, lam: float) -> np.ndarray:
    """Real antisymmetric h with H = (i/4) a^T h a on the even-parity sector."""
    FiniteChain(N)
    h = np.zeros((2 * N, 2 * N))
    for n in range(N):
        h[2 * n, 2 * n + 1] = 2 * lam
        m = (n + 1) % N
        # antiperiodic closure for the even-parity sector
        sign = -1.0 if m == 0 else 1.0
        h[2 * n + 1, 2 * m] += 2 * sign
    return h - h.T


def realspace_correlation(N: int, lam0: float, lam1: float, t: float, start: int = 0,
                          L: int | None = None) -> MajoranaCorrelation:
    """Same state as :func:`evolved_correlation` from a 2N x 2N orthogonal evolution.

    ``start`` selects the first site of the block (no wrap-around).
    """
    L = N if L is None else L
    if start < 0 or start + L > N:
        raise DomainError("block outside the chain")
    h0 = majorana_hamiltonian(N, lam0)
    h1 = majorana_hamiltonian(N, lam1)
    w, v = np.linalg.eigh(1j * h0)
    gamma0 = (-1j * (v * np.sign(w)) @ v.conj().T).real
    w1, v1 = np.linalg.eigh(1j * h1)
    # exp(h1 t) = exp(-i (i h1) t)
    rot = ((v1 * np.exp(-1j * w1 * t)) @ v1.conj().T).real
    gamma = rot @ gamma0 @ rot.T
    sl = slice(2 * start, 2 * (start + L))
    g = gamma[sl, sl]
    return MajoranaCorrelation(L, 0.5 * (g - g.T), float(t))
