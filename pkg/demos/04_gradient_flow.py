"""
Descending the energy
=====================

Gradient descent of delta1 int |gamma'|^2 + delta2 int |tau|^2 over closed
curves.  On a flat target every closed curve shrinks to a point, the only
critical point there.  In S^3 the non-geodesic solutions are saddles.
"""

import numpy as np

from semibiharmonic import closed_form as cf
from semibiharmonic.curves import random_closed_curve, sup_norm, tension
from semibiharmonic.finite_difference import SPECTRAL
from semibiharmonic.geometry import Coupling, ModelSpace
from semibiharmonic.variational import flow_outcome, gradient_flow

c = Coupling(1.0, 1.0)
g0 = random_closed_curve(ModelSpace.flat(2), 16, np.random.default_rng(0))
r = gradient_flow(g0, c, tol=5e-7, trace_every=1000, accuracy=SPECTRAL)
print(f"flat target: {r.status} after {r.iterations} steps, monotone = {r.monotone}")
for it, e, res in r.trace:
    print(f"  iteration {it:5d}  energy {e:.3e}  residual {res:.3e}")
print(f"  terminal |tau| = {sup_norm(tension(r.grid, SPECTRAL), r.grid, SPECTRAL):.2e}")

# a closed member of the S^3 family: d1 = 2 d2 makes both rotations periodic
c = Coupling(0.3, 1.0)
d2_sq = 0.34
k_g = np.sqrt(1.0 - c.delta1 - 4 * d2_sq ** 2)
member = cf.s3_general(c, k_g, 32, length=2 * np.pi / np.sqrt(d2_sq), periodic=True).grid
start = flow_outcome(gradient_flow(member, c, tol=1e-6, accuracy=SPECTRAL), c, accuracy=SPECTRAL)
print(f"S^3 member as initial curve: {start.kind}, k_g = {start.k_g:.6f} (built with {k_g:.6f})")

# a small kick sends the descent away from the member
s = (member.s - member.s0) / member.length
pts = member.points + 1e-2 * np.outer(np.sin(2 * np.pi * s), [0.0, 0.3, 1.0, 0.2])
kicked = member.with_points(pts / np.linalg.norm(pts, axis=1, keepdims=True))
r = gradient_flow(kicked, c, max_iters=2000, tol=1e-6, accuracy=SPECTRAL)
out = flow_outcome(r, c, accuracy=SPECTRAL)
print(f"perturbed member after {r.iterations} steps: {out.kind}, residual {out.residual:.2e}, "
      f"k_g {out.k_g:.4f}, energy {r.energies[0]:.5f} -> {r.final_energy:.5f}")
