"""
Fourier modes into the circle
=============================

For maps R -> S^1 the equation is linear in the angle, and a sin(k s)
solves it exactly when delta2 k^2 + delta1 = 0.  The search below compares
that condition with k^2 = delta1/delta2.
"""

import numpy as np

from semibiharmonic import closed_form as cf
from semibiharmonic.geometry import Coupling

s = np.linspace(0.0, 2 * np.pi, 257)
for d1, d2 in ((-4.0, 1.0), (4.0, 1.0), (-9.0, 1.0), (2.0, -0.5)):
    c = Coupling(d1, d2)
    ms = cf.mode_condition_search(c, 10)
    print(f"(delta1, delta2) = ({d1:g}, {d2:g})")
    print(f"  modes with zero residual: {list(ms.modes)}  ({ms.condition})")
    print(f"  modes from k^2 = delta1/delta2: {list(ms.printed_condition_modes)}")
    for k in sorted(set(ms.modes) | set(ms.printed_condition_modes)):
        r = np.max(np.abs(cf.s1_mode_residual(1.0, k, c, s)))
        print(f"    k = {k}: max |residual| = {r:.3e}")
