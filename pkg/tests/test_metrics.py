import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabquench.errors import DegenerateMomentsError
from stabquench.fermions import MajoranaCorrelation, QuenchSpec, evolved_correlation, ground_correlation
from stabquench.metrics import se_report, stabilizer_entropy
from stabquench.pauli import MomentSums

from test_pauli import random_gaussian_gamma


def test_stabilizer_qubit():
    r = se_report(MomentSums(1, 2.0, 2.0))
    assert r.M2 == 0 and r.S2 == 0 and r.purity == 1 and r.W == 1


def test_magic_qubit():
    r = se_report(MomentSums(1, 2.0, 1.5))
    assert r.M2 == pytest.approx(math.log2(4 / 3), abs=1e-15)
    assert r.M2 == pytest.approx(0.41504, abs=1e-5)
    assert r.S2 == 0


def test_degenerate_sums():
    with pytest.raises(DegenerateMomentsError):
        se_report(MomentSums(2, 0.5, 0.5))


def test_identities():
    r = se_report(MomentSums(3, 5.5, 2.25))
    assert r.M2 == pytest.approx(r.T4 - r.T2, abs=1e-12)
    assert r.T2 == pytest.approx(r.S2 - 3, abs=1e-12)
    assert r.T4 == pytest.approx(-math.log2(r.W) - 3, abs=1e-12)
    assert r.as_dict()["L"] == 3


@settings(max_examples=30, deadline=None)
@given(L1=st.integers(1, 4), L2=st.integers(1, 4), seed=st.integers(0, 2 ** 32 - 1))
def test_additivity_on_block_diagonal(L1, L2, seed):
    rng = np.random.default_rng(seed)
    a, b = random_gaussian_gamma(rng, L1), random_gaussian_gamma(rng, L2)
    g = np.zeros((2 * (L1 + L2),) * 2)
    g[:2 * L1, :2 * L1] = a.gamma
    g[2 * L1:, 2 * L1:] = b.gamma
    joint = stabilizer_entropy(MajoranaCorrelation(L1 + L2, g))
    assert joint.M2 == pytest.approx(stabilizer_entropy(a).M2 + stabilizer_entropy(b).M2, abs=1e-9)
    assert joint.S2 == pytest.approx(stabilizer_entropy(a).S2 + stabilizer_entropy(b).S2, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(L=st.integers(1, 7), seed=st.integers(0, 2 ** 32 - 1))
def test_nonnegative(L, seed):
    r = stabilizer_entropy(random_gaussian_gamma(np.random.default_rng(seed), L))
    assert r.M2 >= -1e-9
    assert 0 < r.purity <= 1 + 1e-12 and 0 < r.W <= 1 + 1e-12


def test_faithfulness_polarized_state():
    # the lam = 1e4 ground state carries residual magic ~ 0.36 L / lam^2
    for lam in (1e4, 1e5):
        G = ground_correlation(lam, 12)
        for L in range(1, 13):
            m2 = stabilizer_entropy(G.subblock(0, L)).M2
            assert m2 < 1e-6
            assert 0.3 < m2 * lam ** 2 / L < 0.4


def test_no_quench_constant_in_time():
    spec = QuenchSpec(0.5, 0.5)
    ref = stabilizer_entropy(evolved_correlation(spec, 5, 0.0)).M2
    for t in (0.7, 3.0, 8.0):
        assert stabilizer_entropy(evolved_correlation(spec, 5, t)).M2 == pytest.approx(ref, abs=1e-9)
