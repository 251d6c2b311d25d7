"""Stabilizer-entropy observables from Pauli moment sums (all logs base 2)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DegenerateMomentsError
from .pauli import MomentSums

FLOOR_TOL = 1e-9


@dataclass(frozen=True)
class SEReport:
    """Purity, Renyi-2 entropy, stabilizer purity W and SE M2 of an L-site block.

    T2 = S2 - L and T4 = -log2 W - L are the linear-in-L pieces whose
    difference is M2.
    """

    L: int
    purity: float
    S2: float
    W: float
    M2: float
    T2: float
    T4: float

    def as_dict(self):
        return asdict(self)


def se_report(m: MomentSums) -> SEReport:
    if not m.sum_sq >= 1 - FLOOR_TOL or not m.sum_quad >= 1 - FLOOR_TOL:
        raise DegenerateMomentsError(
            f"moment sums below the identity floor: sum_sq={m.sum_sq}, sum_quad={m.sum_quad}")
    L = m.block_len
    purity = m.sum_sq / 2.0 ** L
    W = m.sum_quad / 2.0 ** L
    # T2 = -log2(sum_sq), T4 = -log2(sum_quad); M2 is their difference
    T2 = -math.log2(m.sum_sq)
    T4 = -math.log2(m.sum_quad)
    return SEReport(L=L, purity=purity, S2=T2 + L, W=W, M2=T4 - T2, T2=T2, T4=T4)


def stabilizer_entropy(G) -> SEReport:
    """Shortcut: moment sums of a correlation matrix, then :func:`se_report`."""
    from .pauli import moment_sums

    return se_report(moment_sums(G))
