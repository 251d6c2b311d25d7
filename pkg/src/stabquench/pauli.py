"""
Pauli strings on a block, their Jordan-Wigner images and Wick evaluation.

A Pauli string on L sites is stored as two L-bit masks; bit j refers to
site j.  Under Jordan-Wigner every string is, up to a phase, a single
Majorana monomial, and the map is a bijection between the 4^L strings and
the 2^(2L) subsets of the 2L block Majoranas.  The expectation of an even
monomial a_{i1} ... a_{i2m} in a Gaussian state is Pf(i gamma_S) = i^m Pf(gamma_S);
odd monomials vanish by parity.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, ResourceError

MAX_BLOCK = 14
ASYMMETRY_TOL = 1e-10
IMAG_TOL = 1e-9


@dataclass(frozen=True)
class PauliString:
    """X on site j iff bit j of ``x_bits``, Z iff bit j of ``z_bits``, Y iff both."""

    n_sites: int
    x_bits: int = 0
    z_bits: int = 0

    def __post_init__(self):
        top = 1 << self.n_sites
        if not (0 <= self.x_bits < top and 0 <= self.z_bits < top):
            raise DomainError("bit masks exceed the number of sites")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        for j, ch in enumerate(label.upper()):
            if ch not in "IXYZ":
                raise DomainError(f"bad Pauli letter {ch!r}")
            if ch in "XY":
                x |= 1 << j
            if ch in "ZY":
                z |= 1 << j
        return cls(len(label), x, z)

    @property
    def label(self) -> str:
        return "".join("IXZY"[((self.x_bits >> j) & 1) | (((self.z_bits >> j) & 1) << 1)]
                       for j in range(self.n_sites))

    def letter(self, j: int) -> str:
        return self.label[j]


@dataclass(frozen=True)
class MajoranaMonomial:
    """phase * a_{indices[0]} a_{indices[1]} ... with 0-based increasing indices."""

    indices: tuple
    phase: complex

    @property
    def is_even(self) -> bool:
        return len(self.indices) % 2 == 0


@dataclass(frozen=True)
class MomentSums:
    """Sums of <P>^2 and <P>^4 over the full L-site Pauli group."""

    block_len: int
    sum_sq: float
    sum_quad: float


def _mul_majoranas(indices: list, new: Sequence[int]):
    """Append Majoranas to a normal-ordered product; return the reordering sign."""
    sign = 1
    for a in new:
        # move a left past every larger index, then cancel a*a = 1 if present
        pos = len(indices)
        while pos > 0 and indices[pos - 1] > a:
            pos -= 1
            sign = -sign
        if pos > 0 and indices[pos - 1] == a:
            indices.pop(pos - 1)
        else:
            indices.insert(pos, a)
    return sign


def jw_map(P: PauliString) -> MajoranaMonomial:
    """Majorana monomial equal to the Pauli string P (as an operator on the block).

    Uses Z_n = -i a_{2n} a_{2n+1}, X_n = S_n a_{2n}, Y_n = S_n a_{2n+1} with
    S_n = prod_{j<n} Z_j.  Odd monomials carry an untracked string outside
    the block and are only meaningful through their (vanishing) expectation.
    """
    indices: list = []
    phase = 1 + 0j
    for n in range(P.n_sites):
        letter = P.letter(n)
        if letter == "I":
            continue
        if letter == "Z":
            phase *= -1j
            phase *= _mul_majoranas(indices, [2 * n, 2 * n + 1])
            continue
        for j in range(n):
            phase *= -1j
            phase *= _mul_majoranas(indices, [2 * j, 2 * j + 1])
        phase *= _mul_majoranas(indices, [2 * n] if letter == "X" else [2 * n + 1])
    return MajoranaMonomial(tuple(indices), phase)


def majorana_mask(P: PauliString) -> int:
    """Bit mask over the 2L block Majoranas of ``jw_map(P)``."""
    mask = 0
    for n in range(P.n_sites):
        x = (P.x_bits >> n) & 1
        z = (P.z_bits >> n) & 1
        if x:
            # the string prod_{j<n} Z_j toggles every pair below site n
            mask ^= (1 << (2 * n)) - 1
            mask ^= 1 << (2 * n + z)
        elif z:
            mask ^= 3 << (2 * n)
    return mask


def _as_antisymmetric(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("Pfaffian needs a square matrix")
    if A.shape[0] % 2:
        raise DomainError("Pfaffian of an odd-dimensional matrix")
    if A.size and np.max(np.abs(A + A.T)) > ASYMMETRY_TOL:
        raise DomainError("matrix is not antisymmetric")
    return A


def pfaffian(A) -> float:
    """Pfaffian by Parlett-Reid elimination with partial pivoting."""
    A = _as_antisymmetric(A)
    return float(_kernels.pfaffian(np.ascontiguousarray(A)))


def pauli_expectation(P: PauliString, G) -> float:
    """<P> in the Gaussian state with correlation matrix G (a MajoranaCorrelation)."""
    if P.n_sites != G.block_len:
        raise DomainError("Pauli string and block have different lengths")
    mono = jw_map(P)
    if not mono.is_even:
        return 0.0
    idx = list(mono.indices)
    value = mono.phase * (1j ** (len(idx) // 2)) * pfaffian(G.gamma[np.ix_(idx, idx)])
    if abs(value.imag) > IMAG_TOL:
        raise ArithmeticError(f"expectation has imaginary part {value.imag:.3g}")
    return float(value.real)


def iter_pauli_strings(L: int) -> Iterator[PauliString]:
    for x in range(1 << L):
        for z in range(1 << L):
            yield PauliString(L, x, z)


def even_string_count(L: int) -> int:
    """Number of strings with a parity-even Majorana image, 2^(2L-1) for L >= 1."""
    return 1 << (2 * L - 1) if L else 1


def default_workers() -> int:
    env = os.environ.get("STABQUENCH_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


def moment_sums(G, max_block: int = MAX_BLOCK, chunks: int = 64) -> MomentSums:
    """Exact sum of <P>^2 and <P>^4 over all 4^L strings of the block.

    Only the 2^(2L-1) even Majorana subsets are visited; odd ones vanish.
    The subset range is cut into ``chunks`` contiguous pieces whose partial
    sums are combined in a fixed order, so the result does not depend on
    the number of threads.
    """
    L = G.block_len
    if L > max_block:
        raise ResourceError(f"block length {L} exceeds the cap {max_block}")
    if L == 0:
        return MomentSums(0, 1.0, 1.0)
    gamma = np.ascontiguousarray(G.gamma, dtype=float)
    n_even = even_string_count(L)
    chunks = max(1, min(chunks, n_even))
    sq, quad = _kernels.even_subset_moments(gamma, chunks)
    return MomentSums(L, float(_ordered_sum(sq)), float(_ordered_sum(quad)))


def _ordered_sum(parts: np.ndarray) -> float:
    total = 0.0
    for p in parts:
        total += p
    return total


def gaussian_purity_sum(G) -> float:
    """sum_P <P>^2 = prod_j (1 + nu_j^2) from the spectrum of i*gamma.

    Independent of the enumeration: sum over subsets of Pf(gamma_S)^2 =
    sum of principal minors = det(1 + gamma).
    """
    nu = np.linalg.eigvalsh(1j * np.asarray(G.gamma))
    return float(np.sqrt(np.prod(1 + nu ** 2)))
