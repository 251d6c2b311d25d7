"""Cross-checks of the free-fermion path against the dense statevector oracle."""

from __future__ import annotations

import warnings

import numpy as np

from . import oracle
from .errors import DegeneracyWarning
from .fermions import FiniteChain, QuenchSpec, evolved_correlation, gge_correlation
from .loschmidt import loschmidt_echo
from .metrics import se_report
from .pauli import iter_pauli_strings, jw_map, moment_sums, pauli_expectation

PAULI_TOL = 1e-7
M2_TOL = 1e-6
ECHO_TOL = 1e-9
DEPHASED_TWO_POINT_TOL = 1e-9


def _oracle_index(P):
    return tuple("IXYZ".index(c) for c in P.label)


def quench_equivalence(N: int = 12, L: int = 4, lam0: float = 1e4, lam1: float = 0.5,
                       times=(0.0, 0.5, 1.0, 2.0)) -> dict:
    """Largest deviations of <P>, moment sums and M2 between the two paths."""
    spec = QuenchSpec(lam0, lam1, FiniteChain(N))
    psi0 = oracle.ground_state(N, lam0)
    dev_p = dev_m2 = dev_sq = dev_quad = 0.0
    for t in times:
        G = evolved_correlation(spec, L, t)
        rho = oracle.reduced_density(oracle.evolve(psi0, lam1, t), L)
        coeff = oracle.pauli_coefficients(rho)
        for P in iter_pauli_strings(L):
            dev_p = max(dev_p, abs(pauli_expectation(P, G) - coeff[_oracle_index(P)]))
        m_f = moment_sums(G)
        m_o = oracle.brute_moments(rho)
        dev_sq = max(dev_sq, abs(m_f.sum_sq - m_o.sum_sq))
        dev_quad = max(dev_quad, abs(m_f.sum_quad - m_o.sum_quad))
        dev_m2 = max(dev_m2, abs(se_report(m_f).M2 - se_report(m_o).M2))
    return {"N": N, "L": L, "lambda0": lam0, "lambda1": lam1, "times": list(times),
            "max_dev_pauli": dev_p, "max_dev_M2": dev_m2, "max_dev_sum_sq": dev_sq,
            "max_dev_sum_quad": dev_quad,
            "pass": dev_p <= PAULI_TOL and dev_m2 <= M2_TOL}


def echo_equivalence(N: int = 10, lam0: float = 1e4, lam1: float = 0.5, times=None) -> dict:
    """Per-mode echo product against |<psi_0|psi_t>|^2 from dense evolution."""
    times = np.linspace(0.0, 10.0, 21) if times is None else np.asarray(times, dtype=float)
    psi0 = oracle.ground_state(N, lam0)
    exact = np.array([abs(np.vdot(psi0.amplitudes, oracle.evolve(psi0, lam1, t).amplitudes)) ** 2
                      for t in times])
    le = loschmidt_echo(QuenchSpec(lam0, lam1, FiniteChain(N)), times)
    dev = float(np.max(np.abs(le - exact)))
    return {"N": N, "lambda0": lam0, "lambda1": lam1, "max_dev_echo": dev, "pass": dev <= ECHO_TOL}


def dephased_equivalence(N: int = 10, L: int = 4, lam0: float = 1e4, lam1: float = 0.5) -> dict:
    """Exact dephasing against the Gaussian dephased state of the same chain.

    Two-point functions agree exactly.  M2 differs at finite N because the
    exact diagonal ensemble keeps the occupations of k and -k correlated.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        rho = oracle.dephased_state(N, lam0, lam1, reduced_to=L)
    G = gge_correlation(QuenchSpec(lam0, lam1, FiniteChain(N)), L)
    coeff = oracle.pauli_coefficients(rho)
    dev2 = 0.0
    for P in iter_pauli_strings(L):
        if len(jw_map(P).indices) == 2:
            dev2 = max(dev2, abs(pauli_expectation(P, G) - coeff[_oracle_index(P)]))
    m2_o = se_report(oracle.brute_moments(rho)).M2
    m2_f = se_report(moment_sums(G)).M2
    return {"N": N, "L": L, "lambda0": lam0, "lambda1": lam1, "max_dev_two_point": dev2,
            "M2_oracle": m2_o, "M2_gaussian": m2_f, "dev_M2": abs(m2_o - m2_f),
            "pass": dev2 <= DEPHASED_TWO_POINT_TOL}


def clifford_invariance(N: int = 8, L: int = 4, lam0: float = 1e4, lam1: float = 0.5, t: float = 1.0,
                        seed: int = 0, trials: int = 50) -> dict:
    """M2 of the oracle block state before and after random Clifford circuits."""
    rng = np.random.default_rng(seed)
    rho = oracle.reduced_density(oracle.evolve(oracle.ground_state(N, lam0), lam1, t), L)
    m2 = se_report(oracle.brute_moments(rho)).M2
    dev = 0.0
    for _ in range(trials):
        u = oracle.random_clifford_layer(L, rng)
        dev = max(dev, abs(se_report(oracle.brute_moments(u @ rho @ u.conj().T)).M2 - m2))
    return {"M2": m2, "max_dev_M2": dev, "pass": dev <= 1e-9}


def full_suite(quick: bool = False) -> dict:
    """All cross-checks; ``quick`` runs a reduced set at N = 8."""
    if quick:
        out = {"quench": quench_equivalence(N=8, L=3, times=(0.0, 1.0)),
               "echo": echo_equivalence(N=8)}
    else:
        out = {"quench": quench_equivalence(),
               "echo": echo_equivalence(),
               "dephased": dephased_equivalence(),
               "clifford": clifford_invariance()}
    out["pass"] = all(v["pass"] for v in out.values())
    return out
