import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import extrinsic_sphere_residual_exact, torus_curve_derivatives
from semibiharmonic import closed_form as cf
from semibiharmonic.convergence import study
from semibiharmonic.curves import (
    CurveGrid,
    energy,
    random_closed_curve,
    residual_scale,
    semibiharmonic_residual,
    sup_norm,
    tension,
)
from semibiharmonic.errors import DomainError, SemibiharmonicError
from semibiharmonic.finite_difference import SPECTRAL
from semibiharmonic.geometry import Coupling, ModelSpace, inner
from semibiharmonic.variational import (
    FAMILY_MEMBER,
    NOT_CONVERGED,
    OTHER_CRITICAL,
    StepPolicy,
    el_operator,
    exp_map,
    extrinsic_sphere_residual,
    fd_gradient_check,
    flow_outcome,
    gradient_flow,
    jacobi_apply,
    jacobi_eigen_residual,
    random_tangent_field,
)

S2 = ModelSpace.sphere(2)


def s2_curve(seed, n=128):
    return random_closed_curve(S2, n, np.random.default_rng(seed))


def closed_s3_member(n):
    """Closed s3_general curve at delta1 = 0.3, delta2 = 1 with d1 = 2 d2."""
    d2_sq = 0.34
    k_g = np.sqrt(1.0 - 0.3 - 4 * d2_sq ** 2)
    return cf.s3_general(Coupling(0.3, 1.0), k_g, n, length=2 * np.pi / np.sqrt(d2_sq), periodic=True)


# ----------------------------------------------------------------------------
# Euler-Lagrange operator
# ----------------------------------------------------------------------------

def test_el_operator_is_twice_the_residual():
    g = s2_curve(0)
    c = Coupling(0.4, 1.7)
    np.testing.assert_array_equal(el_operator(g, c), 2 * semibiharmonic_residual(g, c))


def test_el_operator_vanishes_on_geodesic_and_constant_map():
    g = cf.great_circle(2, 256)
    assert sup_norm(el_operator(g, Coupling(1.0, 1.0)), g) < 1e-6
    const = CurveGrid(np.tile([0.0, 0.0, 1.0], (32, 1)), 0.2, True, S2)
    assert np.all(el_operator(const, Coupling(1.0, 1.0)) == 0.0)


@pytest.mark.parametrize("c,tol", [(Coupling(1.0, 1.0), 1e-6), (Coupling(1.0, 0.0), 1e-8),
                                   (Coupling(0.0, 1.0), 1e-6)])
def test_fd_gradient_check_examples(c, tol):
    g = s2_curve(5)
    assert fd_gradient_check(g, c, h=1e-5, accuracy=SPECTRAL).max_rel_error < tol


def test_fd_gradient_check_scales_like_h_squared():
    g = s2_curve(2)
    c = Coupling(1.0, 1.0)
    errs = [fd_gradient_check(g, c, h=h, accuracy=SPECTRAL).max_rel_error for h in (1e-3, 1e-4, 1e-5)]
    orders = np.log10(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders[0] >= 1.8
    assert orders[1] >= 1.8 or errs[2] < 1e-9


def test_fd_gradient_check_detects_wrong_sign():
    # flipping delta1 in the analytic gradient breaks agreement with the energy
    g = s2_curve(3)
    G_true = el_operator(g, Coupling(1.0, 1.0), SPECTRAL)
    G_bad = el_operator(g, Coupling(-1.0, 1.0), SPECTRAL)
    assert np.max(np.abs(G_true - G_bad)) > 1e-2
    assert fd_gradient_check(g, Coupling(1.0, 1.0), accuracy=SPECTRAL).max_rel_error < 1e-6


def test_fd_gradient_check_step_range():
    with pytest.raises(SemibiharmonicError):
        fd_gradient_check(s2_curve(0), Coupling(1.0, 1.0), h=1e-2)


def test_random_tangent_field_is_tangent_and_normalized():
    g = s2_curve(1)
    eta = random_tangent_field(g, np.random.default_rng(0))
    np.testing.assert_allclose(inner(eta, g.points), 0.0, atol=1e-14)
    assert np.sum(inner(eta, eta)) * g.ds == pytest.approx(1.0)


def test_exp_map_stays_on_sphere():
    g = s2_curve(1)
    eta = random_tangent_field(g, np.random.default_rng(1))
    moved = exp_map(g, eta, 0.3)
    np.testing.assert_allclose(np.linalg.norm(moved.points, axis=1), 1.0, atol=1e-14)


# ----------------------------------------------------------------------------
# gradient flow
# ----------------------------------------------------------------------------

def test_flow_from_great_circle_needs_no_iterations():
    r = gradient_flow(cf.great_circle(2, 32), Coupling(1.0, 1.0), tol=1e-6, accuracy=SPECTRAL)
    assert r.status == "converged" and r.iterations == 0


def test_flow_collapses_small_loop_to_constant_map():
    g0 = random_closed_curve(S2, 16, np.random.default_rng(3), amplitude=0.01, offset=1.0)
    r = gradient_flow(g0, Coupling(1.0, 1.0), max_iters=50000, tol=1e-6, accuracy=SPECTRAL)
    assert r.status == "converged"
    assert r.final_residual < 1e-6 and r.final_energy < 1e-10
    assert r.monotone


def test_flow_on_flat_target_reaches_harmonic_curve():
    g0 = random_closed_curve(ModelSpace.flat(2), 16, np.random.default_rng(7))
    r = gradient_flow(g0, Coupling(1.0, 1.0), max_iters=50000, tol=5e-7, accuracy=SPECTRAL)
    assert r.status == "converged" and r.monotone
    assert sup_norm(tension(r.grid, SPECTRAL), r.grid, SPECTRAL) < 1e-4


def test_flow_trace_and_energies_are_consistent():
    g0 = s2_curve(4, 16)
    r = gradient_flow(g0, Coupling(1.0, 1.0), max_iters=50, tol=1e-12, trace_every=10, accuracy=SPECTRAL)
    assert r.status == "max_iters" and r.iterations == 50
    assert [t[0] for t in r.trace] == [0, 10, 20, 30, 40, 50]
    assert len(r.energies) == 51
    assert r.trace[-1][1] == r.final_energy
    assert r.final_energy == pytest.approx(energy(r.grid, Coupling(1.0, 1.0), SPECTRAL))


def test_flow_detects_divergence_for_negative_delta2():
    g0 = s2_curve(4, 16)
    r = gradient_flow(g0, Coupling(0.0, -1.0), max_iters=5000, energy_floor=-1e3, accuracy=SPECTRAL)
    assert r.status == "diverged"
    assert r.final_energy < -1e3


def test_flow_reports_stagnation():
    policy = StepPolicy(initial_factor=1e3, max_backtracks=2, warm_start=False)
    r = gradient_flow(s2_curve(4, 16), Coupling(1.0, 1.0), policy=policy, accuracy=SPECTRAL)
    assert r.status == "stagnated" and r.iterations == 0


def test_flow_outcome_at_family_member():
    g = closed_s3_member(32).grid
    r = gradient_flow(g, Coupling(0.3, 1.0), tol=1e-6, accuracy=SPECTRAL)
    out = flow_outcome(r, Coupling(0.3, 1.0), accuracy=SPECTRAL)
    assert r.iterations == 0 and out.kind == FAMILY_MEMBER
    assert out.k_g == pytest.approx(np.sqrt(1.0 - 0.3 - 4 * 0.34 ** 2), rel=1e-6)


def test_flow_outcome_from_perturbed_solution():
    # the family member is a saddle of the energy: descent leaves it, and the outcome is classified
    c = Coupling(0.3, 1.0)
    g = closed_s3_member(32).grid
    s = (g.s - g.s0) / g.length
    pts = g.points + 1e-2 * np.outer(np.sin(2 * np.pi * s) + np.cos(4 * np.pi * s), [0.0, 0.3, 1.0, 0.2])
    g0 = g.with_points(pts / np.linalg.norm(pts, axis=1, keepdims=True))
    r = gradient_flow(g0, c, max_iters=2000, tol=1e-6, accuracy=SPECTRAL)
    out = flow_outcome(r, c, accuracy=SPECTRAL)
    assert r.monotone
    assert out.kind in (FAMILY_MEMBER, OTHER_CRITICAL, NOT_CONVERGED)
    assert (out.kind == NOT_CONVERGED) == (out.residual >= 1e-6)


def test_flow_outcome_geodesic_is_other_critical_point():
    r = gradient_flow(cf.great_circle(3, 32), Coupling(0.3, 1.0), tol=1e-6, accuracy=SPECTRAL)
    assert flow_outcome(r, Coupling(0.3, 1.0), accuracy=SPECTRAL).kind == OTHER_CRITICAL


# ----------------------------------------------------------------------------
# Jacobi operator
# ----------------------------------------------------------------------------

def test_jacobi_of_geodesic_tension():
    g = cf.great_circle(3, 128)
    assert np.max(np.abs(jacobi_apply(g, tension(g)))) < 1e-6


def test_jacobi_on_flat_target_is_second_derivative():
    g = cf.flat_graph_curve(np.sin, 0.0, 2.0, 65)
    V = np.column_stack([g.s ** 2, np.cos(g.s)])
    out = jacobi_apply(g, V)
    np.testing.assert_allclose(out[8:-8], np.column_stack([2 + 0 * g.s, -np.cos(g.s)])[8:-8], atol=1e-5)


def test_jacobi_eigen_residual_decays_on_solution():
    c = Coupling(0.3, 1.0)
    s = study("jacobi", lambda n: cf.s3_general(c, 0.7, n).grid,
              lambda g: sup_norm(jacobi_eigen_residual(g, c), g), (128, 256, 512),
              scale=lambda g: residual_scale(g, c))
    assert s.passed and s.estimated_order >= 2.0


def test_jacobi_eigen_residual_needs_delta2():
    with pytest.raises(SemibiharmonicError):
        jacobi_eigen_residual(cf.great_circle(3, 64), Coupling(1.0, 0.0))


# ----------------------------------------------------------------------------
# extrinsic form
# ----------------------------------------------------------------------------

def test_extrinsic_constant_map():
    const = CurveGrid(np.tile([0.0, 1.0, 0.0], (32, 1)), 0.2, True, S2)
    assert np.all(extrinsic_sphere_residual(const, Coupling(1.0, 2.0)) == 0.0)


def test_extrinsic_great_circle_decays():
    c = Coupling(0.5, 1.0)
    s = study("extrinsic", lambda n: cf.great_circle(3, n),
              lambda g: float(np.max(np.abs(extrinsic_sphere_residual(g, c)))), (32, 64, 128),
              scale=lambda g: residual_scale(g, c))
    assert s.passed


def test_extrinsic_agrees_with_intrinsic_on_random_curves():
    rng = np.random.default_rng(1)
    c = Coupling(0.7, 1.3)
    g = random_closed_curve(ModelSpace.sphere(3), 128, rng)
    ex = extrinsic_sphere_residual(g, c, SPECTRAL)
    ir = semibiharmonic_residual(g, c, SPECTRAL)
    assert np.max(np.abs(ex - ir)) < 1e-8 * np.max(np.abs(ir))


def test_extrinsic_matches_exact_oracle_on_solution():
    sol = cf.s3_general(Coupling(0.3, 1.0), 0.7, 512)
    derivs = [torus_curve_derivatives(sol.A, sol.d1, sol.B, sol.d2, sol.grid.s, k) for k in range(5)]
    exact = extrinsic_sphere_residual_exact(derivs, 0.3, 1.0)
    fd = extrinsic_sphere_residual(sol.grid, Coupling(0.3, 1.0))
    assert np.max(np.abs(exact)) < 1e-12
    assert np.max(np.abs(fd[8:-8] - exact[8:-8])) < 1e-5


def test_extrinsic_rejects_flat_target():
    with pytest.raises(DomainError):
        extrinsic_sphere_residual(cf.flat_graph_curve(np.sin, 0, 1, 33), Coupling(1.0, 1.0))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(-2, 2), st.floats(0.1, 2))
def test_el_operator_is_tangent_on_sphere(seed, d1, d2):
    # the normal part is pure discretization error: some random curves come close to a cusp,
    # so bound it by the change under refinement instead of a fixed grid size
    c = Coupling(d1, d2)
    g = random_closed_curve(S2, 128, np.random.default_rng(seed))
    fine = random_closed_curve(S2, 256, np.random.default_rng(seed))
    G = el_operator(g, c, SPECTRAL)
    disc = np.max(np.abs(G - el_operator(fine, c, SPECTRAL)[::2]))
    assert np.max(np.abs(inner(G, g.points))) <= 2.0 * disc + 1e-8 * max(1.0, np.max(np.abs(G)))
