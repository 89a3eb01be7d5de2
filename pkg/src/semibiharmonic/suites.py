"""Verification suites run by ``semibiharmonic check`` and the acceptance tests.

A suite is a list of independent cells ``(key, function, kwargs)``.  Every
cell returns a partial :class:`DiagnosticReport`; :func:`run_suite` evaluates
the cells (optionally in worker processes) and merges them by sorted key, so
the merged report does not depend on scheduling.
"""

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import closed_form as cf
from .bessel import bessel, j0
from .constants import DEFAULT_LADDER, RADIAL_LADDER
from .conservation import (
    MapGrid2D,
    em_divergence_norm,
    noether_divergence,
    rotation_generators,
)
from .convergence import DiagnosticReport, study
from .curves import (
    bochner_residual,
    conservation_identity,
    frenet,
    interior,
    random_closed_curve,
    residual_scale,
    semibiharmonic_residual,
    sup_norm,
)
from .errors import SemibiharmonicError
from .finite_difference import SPECTRAL
from .flat import (
    RadialProfile,
    radial_closed_form_n3,
    radial_closed_form_n4,
    radial_residual,
    solve_radial_ode,
)
from .geometry import Coupling, ModelSpace, sphere_project
from .variational import fd_gradient_check, jacobi_eigen_residual

SUITES = ("identities", "gradients", "bessel")

#: (delta1, delta2, k_g) points of the general S^3 family with d2^2 > 0 after sign resolution
S3_POINTS = (
    (0.3, 1.0, 0.7),
    (-1.0, 1.0, 0.7),
    (-0.5, 1.0, 0.3),
    (-0.5, 2.0, 0.7),
    (0.3, 1.0, 0.3),
    (0.6, 1.0, 0.3),
    (0.6, 2.0, 0.7),
    (-1.0, 2.0, 1.2),
    (0.3, -1.0, 0.7),
    (-0.5, 0.5, 0.7),
)

GRADIENT_COUPLINGS = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (1.0, -1.0))
GRADIENT_STEPS = (1e-3, 1e-4, 1e-5)
GRADIENT_TOL = 1e-6
GRADIENT_NODES = 128
#: relative errors below this are treated as energy round-off when fitting the h^2 law
GRADIENT_NOISE = 1e-9
GRADIENT_MIN_ORDER = 1.8

J0_FIRST_ZERO = 2.404825557695773
KG_TOL = 1e-4
CONSTRAINT_TOL = 1e-3
HARMONIC_TOL = 1e-6
WRONSKIAN_TOL = 1e-8

RADIAL_N4_LADDER = (129, 257, 513)
RADIAL_INTERVAL = (0.5, 5.0)
TORUS_LADDER = (32, 64, 128)


def _merge(title, parts, meta):
    report = DiagnosticReport(title, meta=meta)
    for _, part in sorted(parts, key=lambda kv: kv[0]):
        report.studies.extend(part.studies)
        report.checks.extend(part.checks)
    return report


def _curve_study(name, builder, fn, c, ladder=DEFAULT_LADDER):
    return study(name, builder, lambda g: sup_norm(fn(g), g), ladder,
                 scale=lambda g: residual_scale(g, c))


# ----------------------------------------------------------------------------
# identities
# ----------------------------------------------------------------------------

def harmonic_great_circles(seed, count=50, n_nodes=512):
    """Great circles solve the equation for every coupling, including delta1 delta2 < 0."""
    rng = np.random.default_rng(seed)
    part = DiagnosticReport("harmonic")
    worst = 0.0
    for _ in range(count):
        d1, d2 = rng.uniform(-3.0, 3.0, size=2)
        c = Coupling(d1, d2)
        for dim in (2, 3):
            g = cf.great_circle(dim, n_nodes)
            worst = max(worst, sup_norm(semibiharmonic_residual(g, c), g))
    part.add_check("great circles: residual sup-norm", worst, worst < HARMONIC_TOL,
                   couplings=count, nodes=n_nodes, tol=HARMONIC_TOL)
    return part


def s3_general_cell(delta1, delta2, k_g, ladder=DEFAULT_LADDER):
    """Sign resolution, residual ladder, Frenet data and constraint for one S^3 point."""
    c = Coupling(delta1, delta2)
    tag = f"s3-general({delta1:g},{delta2:g},{k_g:g})"
    part = DiagnosticReport(tag)
    desc = cf.FamilyDescriptor(cf.S3_GENERAL, {"delta1": delta1, "delta2": delta2, "kg": k_g})
    res = cf.sign_resolution(desc, ladder)
    part.add_check(f"{tag}: sign resolution", res.variant, res.resolved, status=res.status)
    if not res.resolved:
        return part
    vc = cf.variant_coupling(c, res.variant)

    def builder(n):
        return cf.s3_general(vc, k_g, n).grid

    checks = {
        "residual": lambda g: semibiharmonic_residual(g, c),
        "jacobi eigen": lambda g: jacobi_eigen_residual(g, c),
        "conservation": lambda g: conservation_identity(g, c),
        "bochner": lambda g: bochner_residual(g, c),
    }
    for name, fn in checks.items():
        part.add_study(_curve_study(f"{tag}: {name}", builder, fn, c, ladder))
    part.add_study(study(f"{tag}: em divergence", builder, lambda g: em_divergence_norm(g, c),
                         ladder, scale=lambda g: residual_scale(g, c)))
    for idx, X in enumerate(rotation_generators(4)):
        part.add_study(_curve_study(f"{tag}: noether generator {idx}", builder,
                                    lambda g, X=X: noether_divergence(g, X, c).values, c, ladder))

    fr = frenet(builder(ladder[-1]))
    k = interior(fr.k_g.values, fr.grid)
    kg_err = float(np.max(np.abs(k - k_g)))
    part.add_check(f"{tag}: frenet k_g", kg_err, kg_err < KG_TOL, tol=KG_TOL)
    k_sq = np.median(k) ** 2
    t_sq = np.median(interior(fr.tau_g.values, fr.grid)) ** 2
    defect = float(abs(c.delta2 * (k_sq + t_sq) - (c.delta2 - c.delta1)))
    part.add_check(f"{tag}: constraint delta2 (k^2 + tau^2) = delta2 - delta1", defect,
                   defect < CONSTRAINT_TOL * max(1.0, abs(c.delta2)), tol=CONSTRAINT_TOL,
                   variant=res.variant)
    return part


def perturbed_s3(grid, amplitude=0.05):
    """Fixed smooth perturbation of a sphere curve, re-projected to the sphere."""
    s = (grid.s - grid.s0) / grid.length
    bump = amplitude * np.outer(np.sin(2 * np.pi * s), [0.0, 0.3, 1.0, 0.2])
    return grid.with_points(sphere_project(grid.points + bump))


def negative_controls(ladder=DEFAULT_LADDER):
    """Identities evaluated on a perturbed solution must not decay."""
    c = Coupling(0.3, 1.0)
    part = DiagnosticReport("negative controls")

    def builder(n):
        return perturbed_s3(cf.s3_general(c, 0.7, n).grid)

    fns = {
        "residual": lambda g: sup_norm(semibiharmonic_residual(g, c), g),
        "conservation": lambda g: sup_norm(conservation_identity(g, c), g),
        "bochner": lambda g: sup_norm(bochner_residual(g, c), g),
        "em divergence": lambda g: em_divergence_norm(g, c),
        "noether": lambda g: max(sup_norm(noether_divergence(g, X, c).values, g)
                                 for X in rotation_generators(4)),
    }
    for name, fn in fns.items():
        s = study(f"perturbed: {name}", builder, fn, ladder, scale=lambda g: residual_scale(g, c))
        part.add_check(f"negative control: {name} does not decay", s.sup_norms, not s.passed,
                       orders=s.orders)
    return part


def flat_line_cell():
    c = Coupling(1.0, 1.0)
    sol = cf.flat_line_solution(c, 1.0, 0.5, 0.25, 0.1)
    part = DiagnosticReport("flat line")
    part.add_study(_curve_study("flat line (1,1): residual",
                                lambda n: cf.flat_graph_curve(sol, 0.0, 1.0, n),
                                lambda g: semibiharmonic_residual(g, c), c))
    return part


def s1_mode_cell():
    part = DiagnosticReport("S1 modes")
    for d1, d2 in ((-4.0, 1.0), (-9.0, 1.0), (4.0, 1.0)):
        c = Coupling(d1, d2)
        ms = cf.mode_condition_search(c, 10)
        worst = 0.0
        s = np.linspace(0.0, 2 * np.pi, 257)
        for k in ms.modes:
            worst = max(worst, float(np.max(np.abs(cf.s1_mode_residual(1.0, k, c, s)))))
        part.add_check(f"S1 modes ({d1:g},{d2:g}): analytic residual of found modes", worst,
                       worst < cf.ZERO_TOL, modes=list(ms.modes), condition=ms.condition,
                       printed_condition_modes=list(ms.printed_condition_modes), conflict=ms.conflict)
    return part


def radial_cell():
    part = DiagnosticReport("radial")
    a, b = RADIAL_INTERVAL
    for name, c, f, ladder, n in (
        ("n=3 exponential", Coupling(1.0, 1.0), radial_closed_form_n3(Coupling(1.0, 1.0), 1.0, 0.0),
         RADIAL_LADDER, 3),
        ("n=4 bessel", Coupling(-1.0, 1.0), radial_closed_form_n4(Coupling(-1.0, 1.0), 1.0, 0.5),
         RADIAL_N4_LADDER, 4),
    ):
        def builder(m, f=f, n=n):
            return RadialProfile.sample(f, n, a, b, m)

        def scale(p, c=c):
            return max(abs(c.delta1), abs(c.delta2)) * max(1.0, float(np.max(np.abs(p.values))))

        part.add_study(study(f"radial {name}", builder,
                             lambda p, c=c: float(np.max(np.abs(radial_residual(p, c).values))),
                             ladder, scale=scale, gain=2.5))

    c = Coupling(1.0, 1.0)
    exact = radial_closed_form_n3(c, 1.0, 0.0)
    f0 = float(exact(a))
    df0 = float(-np.exp(-a) / a - np.exp(-a) / a ** 2 + 1.0 / a ** 2)
    ode = solve_radial_ode(3, c, a, b, f0, df0, nodes=257)
    err = float(np.max(np.abs(ode.values - exact(ode.r))))
    part.add_check("radial n=3: ODE integration vs closed form", err, err < 1e-8, tol=1e-8)
    return part


def torus_cell(ladder=TORUS_LADDER):
    """div T on the periodic solution cos(x + 2y) of delta2 Delta^2 f = delta1 Delta f, delta1 = -5."""
    c = Coupling(-5.0, 1.0)
    part = DiagnosticReport("torus")

    def builder(n):
        return MapGrid2D.sample(lambda X, Y: np.cos(X + 2 * Y)[..., None], ModelSpace.flat(1),
                                (0.0, 2 * np.pi), (0.0, 2 * np.pi), n, periodic=(True, True))

    part.add_study(study("torus cos(x+2y): em divergence", builder,
                         lambda g: em_divergence_norm(g, c), ladder, scale=5.0))
    return part


def identity_cells(seed):
    cells = [("harmonic", harmonic_great_circles, {"seed": seed}),
             ("negative", negative_controls, {}),
             ("flat-line", flat_line_cell, {}),
             ("s1-mode", s1_mode_cell, {}),
             ("radial", radial_cell, {}),
             ("torus", torus_cell, {})]
    for i, (d1, d2, kg) in enumerate(S3_POINTS):
        cells.append((f"s3-{i:02d}", s3_general_cell, {"delta1": d1, "delta2": d2, "k_g": kg}))
    return cells


# ----------------------------------------------------------------------------
# gradients
# ----------------------------------------------------------------------------

def gradient_cell(delta1, delta2, seed, curves=4, n_nodes=GRADIENT_NODES):
    """fd_gradient_check on random closed curves on S^2 for one coupling, plus its h^2 law."""
    c = Coupling(delta1, delta2)
    rng = np.random.default_rng(seed)
    part = DiagnosticReport(f"gradient ({delta1:g},{delta2:g})")
    sphere = ModelSpace.sphere(2)
    for i in range(curves):
        g = random_closed_curve(sphere, n_nodes, rng, amplitude=0.5, offset=2.0)
        errs = [fd_gradient_check(g, c, h=h, n_directions=20, seed=seed + i,
                                  accuracy=SPECTRAL).max_rel_error for h in GRADIENT_STEPS]
        orders = [np.log(errs[j] / errs[j + 1]) / np.log(GRADIENT_STEPS[j] / GRADIENT_STEPS[j + 1])
                  for j in range(len(errs) - 1)]
        scaling_ok = all(o >= GRADIENT_MIN_ORDER or errs[j + 1] < GRADIENT_NOISE
                         for j, o in enumerate(orders))
        part.add_check(f"gradient ({delta1:g},{delta2:g}) curve {i}: error at h = 1e-5",
                       errs[-1], errs[-1] < GRADIENT_TOL, tol=GRADIENT_TOL)
        part.add_check(f"gradient ({delta1:g},{delta2:g}) curve {i}: O(h^2) scaling",
                       orders, scaling_ok, errors=errs, steps=list(GRADIENT_STEPS))
    return part


def gradient_cells(seed, curves=4):
    return [(f"grad-{i}", gradient_cell,
             {"delta1": d1, "delta2": d2, "seed": seed + 1000 * i, "curves": curves})
            for i, (d1, d2) in enumerate(GRADIENT_COUPLINGS)]


# ----------------------------------------------------------------------------
# bessel
# ----------------------------------------------------------------------------

def bisect_root(f, a, b, tol=1e-15, max_iter=200):
    fa = f(a)
    if fa * f(b) > 0:
        raise SemibiharmonicError(f"no sign change on [{a}, {b}]")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0 or b - a < tol:
            return m
        if fa * fm < 0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def bessel_cell():
    part = DiagnosticReport("bessel")
    val = float(abs(j0(J0_FIRST_ZERO)))
    part.add_check("J0 at its first zero", val, val < 1e-9, x=J0_FIRST_ZERO)
    root = bisect_root(lambda x: float(j0(x)), 2.0, 3.0)
    part.add_check("bisection on J0 locates the first zero", abs(root - J0_FIRST_ZERO),
                   abs(root - J0_FIRST_ZERO) < 1e-9, root=root)
    x = np.linspace(0.1, 50.0, 4000)
    w = bessel("J1", x) * bessel("Y0", x) - bessel("J0", x) * bessel("Y1", x)
    rel = float(np.max(np.abs(w * np.pi * x / 2.0 - 1.0)))
    part.add_check("Wronskian J1 Y0 - J0 Y1 = 2/(pi x) on (0.1, 50)", rel, rel < WRONSKIAN_TOL,
                   tol=WRONSKIAN_TOL)
    return part


def bessel_cells(seed):
    return [("bessel", bessel_cell, {})]


# ----------------------------------------------------------------------------
# driver
# ----------------------------------------------------------------------------

def suite_cells(name, seed):
    if name == "identities":
        return identity_cells(seed)
    if name == "gradients":
        return gradient_cells(seed)
    if name == "bessel":
        return bessel_cells(seed)
    if name == "all":
        return [(f"{s}/{k}", f, kw) for s in SUITES for k, f, kw in suite_cells(s, seed)]
    raise SemibiharmonicError(f"unknown suite {name!r}; expected one of {SUITES + ('all',)}")


def _run_cell(cell):
    key, fn, kwargs = cell
    return key, fn(**kwargs)


def run_suite(name, seed=0, jobs=1):
    """Run every cell of suite ``name`` and merge the parts in key order."""
    cells = suite_cells(name, seed)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_cell, cells))
    else:
        parts = [_run_cell(c) for c in cells]
    return _merge(f"check: {name}", parts, {"suite": name, "seed": seed,
                                            "cells": sorted(k for k, _, _ in cells)})
