"""Semi-biharmonic maps: critical points of delta1 int |d phi|^2 + delta2 int |tau(phi)|^2.

Curves and radial maps into flat spaces and round spheres, closed-form
families with a residual oracle that settles coefficient conventions, the
energy gradient and its descent flow, and checkers for the conservation
identities satisfied along solutions.
"""

from .bessel import bessel, j0, j1, y0, y1
from .closed_form import (
    FamilyDescriptor,
    SignResolution,
    build,
    flat_graph_curve,
    flat_line_solution,
    great_circle,
    mode_condition_search,
    plane_separable,
    s1_mode,
    s1_mode_residual,
    s3_family_a,
    s3_family_b,
    s3_general,
    sign_resolution,
    variant_coupling,
)
from .conservation import (
    KillingField,
    MapGrid2D,
    em_divergence,
    em_divergence_norm,
    em_tensor,
    em_tensor_algebraic,
    em_trace,
    em_trace_formula,
    em_vanishing_rewrite,
    killing_field,
    killing_residuals,
    noether_current,
    noether_divergence,
    rotation_generators,
    translation,
)
from .convergence import DiagnosticReport, RefinementStudy, observed_orders, roundoff_floor, study
from .curves import (
    CurveGrid,
    ScalarField,
    bochner_residual,
    conservation_identity,
    covariant_derivative,
    energy,
    frenet,
    frenet_residual,
    random_closed_curve,
    reparametrize_arclength,
    sample_curve,
    semibiharmonic_residual,
    sup_norm,
    tension,
)
from .errors import (
    AnsatzInapplicableError,
    ConstraintError,
    DegenerateCurveError,
    DimensionError,
    DomainError,
    FamilyInapplicableError,
    GridTooSmallError,
    RangeError,
    SemibiharmonicError,
    TangencyWarning,
)
from .finite_difference import SPECTRAL, derive, fd_weights
from .flat import (
    PlaneField,
    RadialProfile,
    fundamental_solution,
    plane_laplacian,
    plane_residual,
    radial_closed_form_n3,
    radial_closed_form_n4,
    radial_laplacian,
    radial_residual,
    solve_radial_ode,
)
from .geometry import Coupling, ModelSpace, curvature_op, inner, sphere_project, tangent_project
from .variational import (
    FlowOutcome,
    FlowResult,
    GradientCheck,
    StepPolicy,
    el_operator,
    extrinsic_sphere_residual,
    fd_gradient_check,
    flow_outcome,
    gradient_flow,
    jacobi_apply,
    jacobi_eigen_residual,
)

__version__ = "0.1.0"
