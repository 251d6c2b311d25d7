"""How far stabilizer entropy is nonlocal: second differences in L.

T2 and T4 are linear in L far from the edges of the light cone.  Their
second differences in L vanish beyond a length l_eps(t) that grows
linearly with time; the slope is the spreading velocity.
"""

import numpy as np

from stabquench import QuenchSpec, locality_profile, time_scan

t = np.round(np.arange(0, 1.5001, 0.25), 10)
scan = time_scan(QuenchSpec(1e4, 1.0), range(1, 11), t, dephased=False)
for kind in ("T2", "T4"):
    prof = locality_profile(scan, kind, epsilon=0.01)
    print(kind)
    for tj, row, l in zip(prof.t_grid, prof.second_diffs, prof.l_eps):
        print(f"  t={tj:4.2f}  l_eps={str(l):>10}  " + " ".join(f"{d:.0e}" for d in row))
print("At short times T4 correlations reach further than T2 ones.  Later the slowly decaying T4\n"
      "tail sits near eps, so l_eps for T4 jitters at these block sizes.")
