import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import extrinsic_sphere_residual_exact, torus_curve_derivatives
from semibiharmonic import closed_form as cf
from semibiharmonic.convergence import study
from semibiharmonic.curves import (
    CurveGrid,
    ScalarField,
    bochner_residual,
    conservation_identity,
    covariant_chain,
    energy,
    frenet,
    frenet_residual,
    interior,
    random_closed_curve,
    reparametrize_arclength,
    residual_scale,
    sample_curve,
    semibiharmonic_residual,
    sup_norm,
    tension,
    velocity,
)
from semibiharmonic.errors import DimensionError, DomainError, SemibiharmonicError
from semibiharmonic.geometry import Coupling, ModelSpace, inner

LADDER = (128, 256, 512)


def exp_graph(n, x1=4.0):
    """The flat-target curve x -> (x, e^x) on [0, x1]."""
    return cf.flat_graph_curve(np.exp, 0.0, x1, n)


def s3_solution(n):
    return cf.s3_general(Coupling(0.3, 1.0), 0.7, n).grid


def perturbed(grid, amplitude=0.05):
    s = (grid.s - grid.s0) / grid.length
    bump = amplitude * np.outer(np.sin(2 * np.pi * s), [0.0, 0.3, 1.0, 0.2])
    pts = grid.points + bump
    return grid.with_points(pts / np.linalg.norm(pts, axis=1, keepdims=True))


def refinement(fn, builder, c, ladder=LADDER):
    return study("t", builder, lambda g: sup_norm(fn(g), g), ladder,
                 scale=lambda g: residual_scale(g, c))


# ----------------------------------------------------------------------------
# grids
# ----------------------------------------------------------------------------

def test_curve_grid_rejects_points_off_sphere():
    with pytest.raises(DomainError):
        CurveGrid(np.ones((10, 3)), 0.1, True, ModelSpace.sphere(2))


def test_curve_grid_rejects_wrong_ambient_dimension():
    with pytest.raises(DimensionError):
        CurveGrid(np.zeros((10, 3)), 0.1, True, ModelSpace.flat(2))


def test_curve_grid_rejects_non_finite():
    pts = np.zeros((10, 2))
    pts[3, 1] = np.nan
    with pytest.raises(DomainError):
        CurveGrid(pts, 0.1, False, ModelSpace.flat(2))


def test_curve_grid_points_are_read_only():
    g = cf.great_circle(2, 16)
    with pytest.raises(ValueError):
        g.points[0, 0] = 3.0


def test_periodic_length_and_subsample():
    g = cf.great_circle(3, 64)
    assert g.length == pytest.approx(2 * np.pi)
    h = g.subsample(4)
    assert h.n_nodes == 16 and h.ds == pytest.approx(4 * g.ds)
    with pytest.raises(SemibiharmonicError):
        g.subsample(3)


def test_random_closed_curve_lies_on_sphere():
    g = random_closed_curve(ModelSpace.sphere(2), 64, np.random.default_rng(0))
    np.testing.assert_allclose(np.linalg.norm(g.points, axis=1), 1.0, atol=1e-14)
    assert g.periodic


# ----------------------------------------------------------------------------
# tension
# ----------------------------------------------------------------------------

def test_tension_of_great_circle_vanishes():
    g = cf.great_circle(3, 512)
    assert sup_norm(tension(g), g) < 1e-6


def test_tension_of_parabola_is_constant():
    g = sample_curve(lambda s: np.column_stack([s, s ** 2]), ModelSpace.flat(2), 41, 1.0, False)
    np.testing.assert_allclose(tension(g), np.tile([0.0, 2.0], (41, 1)), atol=1e-9)


def test_tension_norm_of_family_a_is_kg():
    g = cf.s3_family_a(Coupling(0.0, 1.0), n_nodes=256)
    t = np.linalg.norm(tension(g), axis=1)
    np.testing.assert_allclose(t, 1.0, atol=1e-6)
    np.testing.assert_allclose(frenet(g).k_g.values, t, atol=1e-6)


def test_tension_is_normal_for_unit_speed_curves():
    g = s3_solution(512)
    assert np.max(np.abs(interior(inner(tension(g), velocity(g)), g))) < 1e-6


# ----------------------------------------------------------------------------
# residual
# ----------------------------------------------------------------------------

def test_geodesic_residual_vanishes_for_random_couplings():
    rng = np.random.default_rng(4)
    g = cf.great_circle(3, 512)
    for d1, d2 in rng.uniform(-3, 3, size=(50, 2)):
        assert sup_norm(semibiharmonic_residual(g, Coupling(d1, d2)), g) < 1e-6


def test_exponential_graph_residual_decays():
    c = Coupling(1.0, 1.0)
    s = refinement(lambda g: semibiharmonic_residual(g, c), exp_graph, c, (33, 65, 129))
    assert s.passed and not s.at_roundoff
    assert s.estimated_order >= 2.0


def test_s3_general_residual_decays():
    c = Coupling(0.3, 1.0)
    s = refinement(lambda g: semibiharmonic_residual(g, c), s3_solution, c)
    assert s.passed and s.estimated_order >= 2.0
    assert s.sup_norms[-1] < 1e-6


def test_residual_matches_exact_extrinsic_oracle_on_torus_curve():
    # the oracle evaluates the ambient sphere equation with exact derivatives
    sol = cf.s3_general(Coupling(0.3, 1.0), 0.7, 512)
    derivs = [torus_curve_derivatives(sol.A, sol.d1, sol.B, sol.d2, sol.grid.s, k) for k in range(5)]
    assert np.max(np.abs(extrinsic_sphere_residual_exact(derivs, 0.3, 1.0))) < 1e-12
    assert np.max(np.abs(extrinsic_sphere_residual_exact(derivs, -0.3, 1.0))) > 0.1


def test_residual_of_perturbed_solution_does_not_decay():
    c = Coupling(0.3, 1.0)
    s = refinement(lambda g: semibiharmonic_residual(g, c), lambda n: perturbed(s3_solution(n)), c)
    assert not s.passed
    assert min(s.sup_norms) > 1e-2


def test_residual_interior_trim_on_intervals():
    g = exp_graph(65)
    r = semibiharmonic_residual(g, Coupling(1.0, 1.0))
    assert len(interior(r, g)) == 65 - 16


# ----------------------------------------------------------------------------
# Frenet apparatus
# ----------------------------------------------------------------------------

def test_frenet_of_great_circle_is_degenerate():
    fr = frenet(cf.great_circle(3, 128))
    assert fr.all_degenerate
    assert np.max(fr.k_g.values) < 1e-8
    assert np.all(np.isnan(fr.N))


def test_frenet_of_family_a_biharmonic_circle():
    fr = frenet(cf.s3_family_a(Coupling(0.0, 1.0), n_nodes=256))
    np.testing.assert_allclose(fr.k_g.values, 1.0, atol=1e-6)
    np.testing.assert_allclose(fr.tau_g.values, 0.0, atol=1e-6)


def test_frenet_recovers_kg_of_s3_general():
    g = s3_solution(512)
    fr = frenet(g)
    assert np.max(np.abs(interior(fr.k_g.values, g) - 0.7)) < 1e-4


def test_frenet_frame_is_orthonormal_and_oriented():
    g = s3_solution(512)
    fr = frenet(g)
    sl = slice(8, -8)
    F = np.stack([fr.T[sl], fr.N[sl], fr.B[sl], g.points[sl]], axis=1)
    gram = np.einsum("nai,nbi->nab", F, F)
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(4), gram.shape), atol=1e-8)
    assert np.all(np.linalg.det(F[:, [3, 0, 1, 2]]) > 0)


def test_frenet_torsion_of_s3_general():
    sol = cf.s3_general(Coupling(0.3, 1.0), 0.7, 512)
    fr = frenet(sol.grid)
    tau = interior(fr.tau_g.values, sol.grid)
    np.testing.assert_allclose(tau ** 2, sol.torsion_sq, atol=1e-5)


def test_frenet_needs_three_dimensional_target():
    with pytest.raises(DimensionError):
        frenet(cf.great_circle(2, 64))


def _const(v, n=64, ds=0.1):
    return ScalarField(np.full(n, float(v)), ds, True)


def test_frenet_residual_of_geodesic():
    for comp in frenet_residual(_const(0.0), _const(0.3), 1.0, Coupling(0.4, 1.3)):
        assert np.all(comp.values == 0.0)


def test_frenet_residual_constant_solution_normal_component():
    c = Coupling(0.3, 2.0)
    K, k = 1.0, 0.5
    t = np.sqrt((c.delta2 * K - c.delta1) / c.delta2 - k ** 2)
    comps = frenet_residual(_const(k), _const(t), K, c)
    for comp in comps:
        np.testing.assert_allclose(comp.values, 0.0, atol=1e-14)


def test_frenet_residual_biharmonic_circle():
    comps = frenet_residual(_const(1.0), _const(0.0), 1.0, Coupling(0.0, 1.0))
    for comp in comps:
        assert np.all(comp.values == 0.0)


def test_frenet_residual_length_mismatch():
    with pytest.raises(DimensionError):
        frenet_residual(_const(1.0, 10), _const(0.0, 11), 1.0, Coupling(0.0, 1.0))


@settings(max_examples=50, deadline=None)
@given(st.floats(-2, 2), st.floats(0.2, 3), st.floats(0.05, 1.5), st.floats(-3, 1))
def test_frenet_residual_constraint_property(d1, d2, k, K):
    # constant k, tau solve the frame equations iff delta2 (k^2 + tau^2) = delta2 K - delta1
    c = Coupling(d1, d2)
    t_sq = K - d1 / d2 - k ** 2
    if t_sq < 0:
        return
    _, n_comp, b_comp = frenet_residual(_const(k), _const(np.sqrt(t_sq)), K, c)
    assert np.max(np.abs(n_comp.values)) < 1e-12 * max(1.0, abs(d1), abs(d2)) * 10
    assert np.all(b_comp.values == 0.0)


def test_frenet_residual_agrees_with_frame_components_of_residual():
    # deliberately perturbed curve so that both sides are O(1)
    base = cf.s3_general(Coupling(0.3, 1.0), 0.7, 2048).grid
    g = reparametrize_arclength(perturbed(base, 0.02))
    c = Coupling(0.3, 1.0)
    fr = frenet(g)
    res = semibiharmonic_residual(g, c)
    comps = frenet_residual(fr.k_g, fr.tau_g, 1.0, c)
    sl = slice(40, -40)
    for frame_vec, comp in zip((fr.T, fr.N, fr.B), comps):
        proj = inner(res, frame_vec)[sl]
        scale = np.max(np.abs(proj)) + 1e-3
        assert np.max(np.abs(proj - comp.values[sl])) < 2e-2 * scale


# ----------------------------------------------------------------------------
# conservation law and Bochner formula
# ----------------------------------------------------------------------------

def test_conservation_identity_vanishes_on_unit_speed_solution():
    g = s3_solution(512)
    assert sup_norm(conservation_identity(g, Coupling(0.3, 1.0)), g) < 1e-6


def test_conservation_identity_decays_on_non_unit_speed_flat_solution():
    c = Coupling(1.0, 1.0)
    s = refinement(lambda g: conservation_identity(g, c), exp_graph, c, (33, 65, 129))
    assert s.passed and not s.at_roundoff


def test_conservation_identity_negative_control():
    c = Coupling(1.0, 1.0)
    rng = np.random.default_rng(3)
    curve = random_closed_curve(ModelSpace.flat(2), 512, rng)
    builder = lambda n: curve.subsample(512 // n)
    s = refinement(lambda g: conservation_identity(g, c), builder, c)
    assert not s.passed
    assert min(s.sup_norms) > 1e-2


def test_bochner_geodesic():
    g = cf.great_circle(3, 128)
    assert sup_norm(bochner_residual(g, Coupling(0.5, 2.0)), g) < 1e-10


def test_bochner_decays_on_s3_general():
    c = Coupling(0.3, 1.0)
    s = refinement(lambda g: bochner_residual(g, c), s3_solution, c)
    assert s.passed and not s.at_roundoff


def test_bochner_negative_control():
    c = Coupling(0.3, 1.0)
    s = refinement(lambda g: bochner_residual(g, c), lambda n: perturbed(s3_solution(n)), c)
    assert not s.passed


def test_bochner_needs_delta2():
    with pytest.raises(SemibiharmonicError):
        bochner_residual(cf.great_circle(3, 64), Coupling(1.0, 0.0))


# ----------------------------------------------------------------------------
# energy
# ----------------------------------------------------------------------------

def test_energy_of_great_circle():
    assert energy(cf.great_circle(3, 256), Coupling(1.0, 1.0)) == pytest.approx(2 * np.pi, rel=1e-6)


def test_energy_of_constant_map():
    g = CurveGrid(np.tile([0.0, 0.0, 1.0], (32, 1)), 0.1, True, ModelSpace.sphere(2))
    assert energy(g, Coupling(2.0, 3.0)) == 0.0


def test_energy_of_family_a_biharmonic_circle():
    g = cf.s3_family_a(Coupling(0.0, 1.0), n_nodes=256)
    # k_g = 1 and the period is 2 pi / sqrt(2)
    assert energy(g, Coupling(0.0, 1.0)) == pytest.approx(2 * np.pi / np.sqrt(2), rel=1e-6)


# ----------------------------------------------------------------------------
# arc-length reparametrization
# ----------------------------------------------------------------------------

def test_reparametrize_unit_speed_is_identity():
    g = s3_solution(256)
    r = reparametrize_arclength(g)
    np.testing.assert_allclose(r.points, g.points, atol=1e-6)


def test_reparametrize_double_speed_circle():
    t_max = np.pi
    g = sample_curve(lambda t: np.column_stack([np.cos(2 * t), np.sin(2 * t), 0 * t, 0 * t]),
                     ModelSpace.sphere(3), 128, t_max, True)
    r = reparametrize_arclength(g)
    assert r.length == pytest.approx(2 * np.pi, rel=1e-8)
    np.testing.assert_allclose(np.linalg.norm(velocity(r), axis=1), 1.0, atol=1e-6)
    np.testing.assert_allclose(r.points, cf.great_circle(3, 128).points, atol=1e-8)


def test_reparametrize_parabola():
    g = sample_curve(lambda t: np.column_stack([t, t ** 2]), ModelSpace.flat(2), 201, 1.0, False)
    r = reparametrize_arclength(g)
    speed = interior(np.linalg.norm(velocity(r), axis=1), r)
    np.testing.assert_allclose(speed, 1.0, atol=1e-6)
    assert np.all(np.diff(r.points[:, 0]) > 0)
    exact = 0.5 * np.sqrt(5) + 0.25 * np.arcsinh(2)
    assert r.length == pytest.approx(exact, rel=1e-8)
    # same image: every node lies on y = x^2
    np.testing.assert_allclose(r.points[:, 1], r.points[:, 0] ** 2, atol=1e-8)


def test_reparametrize_rejects_stationary_curve():
    g = CurveGrid(np.zeros((16, 2)), 0.1, False, ModelSpace.flat(2))
    with pytest.raises(SemibiharmonicError):
        reparametrize_arclength(g)


def test_covariant_chain_depth():
    chain = covariant_chain(cf.great_circle(3, 64), 3)
    assert len(chain) == 3
