"""Magic of a block after a quench from a stabilizer state.

The lambda = 1e4 ground state is (almost exactly) the all-up product state,
so its blocks carry no stabilizer entropy.  After quenching to lambda' the
block M2 grows, overshoots and settles on the value of the dephased
(time-averaged) Gaussian state, which never exceeds L/2 bits.
"""

import numpy as np

from stabquench import QuenchSpec, equilibration_time, time_scan

spec = QuenchSpec(1e4, 0.5)
t = np.round(np.arange(0, 8.0001, 0.05), 10)
scan = time_scan(spec, range(1, 7), t)

print(" L   M2(t=0)    M2(t=1)   M2(t=8)   dephased   tau")
for L in scan.L_grid:
    m2 = scan.series("M2", L)
    ref = scan.dephased("M2", L)
    tau = equilibration_time(t, m2, ref, 0.05)
    print(f"{L:2d}  {m2[0]:.1e}  {m2[20]:8.4f}  {m2[-1]:8.4f}  {ref:8.4f}  {tau}")
print("Equilibration time grows roughly linearly with L: information travels ballistically.")
