import numpy as np
import pytest

from stabquench.oracle import pauli_matrix


def dense_majoranas(L):
    """a_{2n} = Z..Z X_n and a_{2n+1} = Z..Z Y_n on L sites, site 0 first."""
    ops = []
    for n in range(L):
        for letter in "XY":
            ops.append(pauli_matrix("Z" * n + letter + "I" * (L - n - 1)))
    return ops


def gamma_from_rho(rho):
    """Gamma[m, n] = Im tr(rho a_m a_n) from a dense block density matrix."""
    L = int(round(np.log2(rho.shape[0])))
    a = dense_majoranas(L)
    g = np.zeros((2 * L, 2 * L))
    for m in range(2 * L):
        for n in range(2 * L):
            if m != n:
                g[m, n] = np.trace(rho @ a[m] @ a[n]).imag
    return g


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


CRITERION_LINES = []


@pytest.fixture
def criterion_report():
    """Print one PASS/FAIL line per acceptance criterion and keep it for the summary."""
    def report(n, ok, detail):
        line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}; {detail}"
        CRITERION_LINES.append(line)
        print("\n" + line)
    return report


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
