"""
Conservation laws along solutions
=================================

Rotations of S^3 are isometries, so each of the six generators yields a
current that is constant along a solution.  On a perturbed curve they drift.
"""

import numpy as np

from semibiharmonic import closed_form as cf
from semibiharmonic.conservation import noether_current, rotation_generators
from semibiharmonic.geometry import Coupling, sphere_project

c = Coupling(0.3, 1.0)
sol = cf.s3_general(c, 0.7, 512).grid
s = (sol.s - sol.s0) / sol.length
bump = 0.05 * np.outer(np.sin(2 * np.pi * s), [0.0, 0.3, 1.0, 0.2])
bent = sol.with_points(sphere_project(sol.points + bump))

print("generator   spread of J on the solution   spread on the perturbed curve")
for i, X in enumerate(rotation_generators(4)):
    spreads = []
    for g in (sol, bent):
        J = noether_current(g, X, c).values[8:-8]
        spreads.append(np.ptp(J))
    print(f"{i:9d}   {spreads[0]:28.2e}   {spreads[1]:29.2e}")
