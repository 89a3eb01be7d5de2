"""
Radial solutions on flat domains
================================

delta2 Delta^2 f = delta1 Delta f for f(|x|) on an annulus in R^n.  Closed
forms exist for n = 3 (exponentials) and n = 4 (Bessel functions); any n can
be integrated numerically.
"""

import numpy as np

from semibiharmonic.bessel import bessel
from semibiharmonic.convergence import study
from semibiharmonic.flat import (
    RadialProfile,
    radial_closed_form_n3,
    radial_closed_form_n4,
    radial_residual,
    solve_radial_ode,
)
from semibiharmonic.geometry import Coupling

a, b = 0.5, 5.0

# closed forms, checked by grid refinement of the radial operator
cases = (
    (3, Coupling(1.0, 1.0), radial_closed_form_n3(Coupling(1.0, 1.0), 1.0, 0.0), (33, 65, 129)),
    (4, Coupling(-1.0, 1.0), radial_closed_form_n4(Coupling(-1.0, 1.0), 1.0, 0.5), (129, 257, 513)),
)
for n, c, f, ladder in cases:
    s = study(f"n = {n}", lambda m: RadialProfile.sample(f, n, a, b, m),
              lambda p: float(np.max(np.abs(radial_residual(p, c).values))), ladder, gain=2.5,
              scale=lambda p: max(1.0, float(np.max(np.abs(p.values)))))
    print(f"n = {n}: sup residual {np.array(s.sup_norms)}, orders {np.round(s.orders, 2)}, pass = {s.passed}")

# the integrator reproduces the n = 3 closed form from its Cauchy data at r = a
c = Coupling(1.0, 1.0)
exact = radial_closed_form_n3(c, 1.0, 0.0)
df0 = -np.exp(-a) / a - np.exp(-a) / a ** 2 + 1.0 / a ** 2
ode = solve_radial_ode(3, c, a, b, float(exact(a)), df0)
print(f"ODE vs closed form, n = 3: max error {np.max(np.abs(ode.values - exact(ode.r))):.2e}")

# the Bessel functions behind the n = 4 solution satisfy their Wronskian
x = np.linspace(0.1, 50.0, 4000)
w = bessel("J1", x) * bessel("Y0", x) - bessel("J0", x) * bessel("Y1", x)
print(f"Wronskian J1 Y0 - J0 Y1 vs 2/(pi x): max relative error {np.max(np.abs(w * np.pi * x / 2 - 1)):.2e}")
