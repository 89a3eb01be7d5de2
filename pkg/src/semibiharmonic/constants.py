"""Shared conventions and numerical thresholds.

Curvature convention
--------------------
R(X, Y)Z = [nabla_X, nabla_Y]Z - nabla_[X, Y] Z, so the sectional curvature of
the plane spanned by orthonormal X, Y is <R(X, Y)Y, X>.  On a space of constant
sectional curvature K this reads

    R(X, Y)Z = K (<Y, Z> X - <X, Z> Y).

Every module evaluates curvature through :func:`semibiharmonic.geometry.curvature_op`
so this is the only place the sign is fixed.

Laplacians follow Delta f = div grad f (negative semi-definite); on curves the
connection Laplacian is nabla_{gamma'} nabla_{gamma'}.
"""

#: sphere points must satisfy | |p| - 1 | below this after construction or projection
SPHERE_TOL = 1e-9

#: tangency tolerance on input vector fields; larger defects are re-projected
TANGENCY_TOL = 1e-6

#: nodes with geodesic curvature below this are classified as geodesic
KG_DEGENERACY = 1e-8

#: unit-speed tolerance below which a grid is used as is by ``frenet``
UNIT_SPEED_TOL = 1e-6

#: minimum observed convergence order for a refinement study to pass
MIN_ORDER = 2.0

#: default refinement ladder for curve studies
DEFAULT_LADDER = (128, 256, 512)

#: ladder for radial studies whose truncation error drops below round-off early
RADIAL_LADDER = (33, 65, 129)

#: default finite-difference accuracy
DEFAULT_ACCURACY = 4

#: number of chained first-derivative passes behind the deepest residual
RESIDUAL_PASSES = 4

CSV_FORMAT = "%.17g"
REPORT_SCHEMA_VERSION = 1
