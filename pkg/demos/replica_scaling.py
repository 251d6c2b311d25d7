"""Exponential scaling of Pauli moment sums for a uniform MPS.

For a translation-invariant MPS the moment sum over an L-site block is a
transfer-matrix contraction, 2^(m L + q) up to corrections that decay like
exp(-L / xi).  The printed bound controls the relative deviation.
"""

import numpy as np

from stabquench.replica import random_mps, scaling_report

mps = random_mps(2, np.random.default_rng(5))
for k in (1, 2):
    rep = scaling_report(mps, k, range(4, 11))
    print(f"k={k}: m={rep['m']:.4f} q={rep['q']:.4f} xi={rep['xi']:.3f}")
    for row in rep["rows"]:
        print(f"  L={row['L']:2d} dense={row['dense']:.6e} predicted={row['predicted']:.6e} "
              f"rel.dev={row['relative_deviation']:.1e} <= bound {row['bound']:.1e}")
