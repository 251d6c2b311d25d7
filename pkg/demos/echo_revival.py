"""Lieb-Robinson speed from Loschmidt echo revivals in a periodic chain.

Quasiparticle pairs emitted at t = 0 meet again after travelling N/2 sites
each, so the echo revives near T_rev = N / (2 v_LR).  The maximal group
velocity of the post-quench Hamiltonian is 2 min(lambda', 1).
"""

from stabquench import FiniteChain, QuenchSpec, extract_lr_speed
from stabquench.fermions import max_group_velocity

for lam0, lam1, N in [(1e4, 2.0, 100), (1e4, 0.5, 200), (0.4, 0.5, 200)]:
    r = extract_lr_speed(QuenchSpec(lam0, lam1, FiniteChain(N)))
    print(f"{lam0:g} -> {lam1:g}, N={N}: T_rev={r['T_rev']:.2f}  v_LR={r['v_LR']:.3f}  "
          f"expected {max_group_velocity(lam1):.3f}")
