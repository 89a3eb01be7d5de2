"""Energy gradient, its finite-difference oracle, descent flow and related operators."""

from dataclasses import dataclass, field

import numpy as np

from .constants import DEFAULT_ACCURACY
from .curves import (
    CurveGrid,
    covariant_derivative,
    energy,
    frenet,
    interior,
    semibiharmonic_residual,
    sup_norm,
    tension,
)
from .errors import DomainError, SemibiharmonicError
from .finite_difference import derive
from .geometry import curvature_op, inner, sphere_project, tangent_project


def el_operator(grid, c, accuracy=DEFAULT_ACCURACY):
    """L^2 gradient of the energy: G = 2 (delta2 (nabla nabla tau - R(gamma', tau) gamma') - delta1 tau).

    Shares its kernel with :func:`semibiharmonic_residual`, of which it is twice.
    """
    return 2.0 * semibiharmonic_residual(grid, c, accuracy)


def _quadrature(density, grid):
    if grid.periodic:
        return float(np.sum(density) * grid.ds)
    return float(np.trapezoid(density, dx=grid.ds))


def exp_map(grid, eta, t):
    """Move every node by ``t * eta`` along the target's geodesics."""
    pts = grid.points
    if not grid.space.is_sphere:
        return grid.with_points(pts + t * eta)
    norm = np.linalg.norm(eta, axis=1, keepdims=True)
    theta = t * norm
    with np.errstate(invalid="ignore", divide="ignore"):
        direction = np.where(norm > 0, eta / np.where(norm > 0, norm, 1.0), 0.0)
    moved = np.cos(theta) * pts + np.sin(theta) * direction
    return grid.with_points(sphere_project(moved))


def random_tangent_field(grid, rng, modes=3):
    """Smooth random tangent field of unit L^2 norm along ``grid``.

    Low Fourier modes on periodic grids, low-degree Chebyshev-like cosines on intervals.
    """
    s = (grid.s - grid.s0) / (grid.length if grid.length > 0 else 1.0)
    d = grid.space.ambient_dim
    eta = rng.normal(size=(1, d)) * np.ones((grid.n_nodes, 1))
    for m in range(1, modes + 1):
        a, b = rng.normal(size=(2, d)) / m
        if grid.periodic:
            eta += np.outer(np.cos(2 * np.pi * m * s), a) + np.outer(np.sin(2 * np.pi * m * s), b)
        else:
            eta += np.outer(np.cos(np.pi * m * s), a)
    eta = tangent_project(grid.space, grid.points, eta)
    norm = np.sqrt(_quadrature(inner(eta, eta), grid))
    return eta / norm


@dataclass(frozen=True)
class GradientCheck:
    max_rel_error: float
    errors: tuple
    h: float


def fd_gradient_check(grid, c, h=1e-5, n_directions=20, seed=0, accuracy=DEFAULT_ACCURACY):
    """Compare <G, eta> with a central difference of the energy along ``n_directions`` directions.

    Each direction is a smooth random tangent field of unit L^2 norm, applied
    through the exponential map.  The relative error of one direction is
    |a - b| / max(|a|, |b|, 1e-2 |G| |eta|) with L^2 norms, so directions
    nearly orthogonal to G are not over-weighted.
    """
    if not 1e-7 <= h <= 1e-3:
        raise SemibiharmonicError(f"perturbation size must lie in [1e-7, 1e-3], got {h}")
    rng = np.random.default_rng(seed)
    G = el_operator(grid, c, accuracy)
    g_norm = np.sqrt(_quadrature(inner(G, G), grid))
    errors = []
    for _ in range(n_directions):
        eta = random_tangent_field(grid, rng)
        analytic = _quadrature(inner(G, eta), grid)
        e_plus = energy(exp_map(grid, eta, h), c, accuracy)
        e_minus = energy(exp_map(grid, eta, -h), c, accuracy)
        numeric = (e_plus - e_minus) / (2.0 * h)
        denom = max(abs(analytic), abs(numeric), 1e-2 * g_norm, 1e-300)
        errors.append(abs(analytic - numeric) / denom)
    return GradientCheck(float(max(errors)), tuple(errors), float(h))


@dataclass(frozen=True)
class StepPolicy:
    """Backtracking line search: start at ``initial_factor * ds^2``, multiply by ``shrink``
    until the Armijo condition with constant ``armijo`` holds, at most ``max_backtracks`` times.

    With ``warm_start`` the next trial step is ``growth`` times the last accepted one.
    """

    initial_factor: float = 1e-2
    shrink: float = 0.5
    armijo: float = 1e-4
    max_backtracks: int = 60
    warm_start: bool = True
    growth: float = 2.0


@dataclass
class FlowResult:
    """Terminal curve, per-iteration trace, and why the flow stopped.

    ``status`` is one of 'converged', 'max_iters', 'diverged', 'stagnated'.
    """

    grid: CurveGrid
    iterations: int
    status: str
    trace: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    @property
    def final_energy(self):
        return self.energies[-1]

    @property
    def final_residual(self):
        return self.residuals[-1]

    @property
    def monotone(self):
        e = np.asarray(self.energies)
        return bool(np.all(np.diff(e) < 0.0)) if e.size > 1 else True


def _project_gradient(grid, G):
    if grid.space.is_sphere:
        return G - inner(G, grid.points)[:, None] * grid.points
    return G


def _step(grid, direction, t):
    pts = grid.points - t * direction
    if grid.space.is_sphere:
        pts = sphere_project(pts)
    return grid.with_points(pts)


def gradient_flow(initial, c, policy=StepPolicy(), max_iters=20000, tol=1e-8,
                  energy_floor=-1e12, trace_every=1, accuracy=DEFAULT_ACCURACY):
    """Explicit steepest descent gamma <- project(gamma - step * P(G)) with backtracking.

    Stops when the residual sup-norm falls below ``tol`` ('converged'), after
    ``max_iters`` steps, when the energy drops below ``energy_floor``
    ('diverged', relevant for delta2 < 0), or when the line search fails
    ('stagnated').  ``trace`` holds (iteration, energy, residual) every
    ``trace_every`` iterations plus the last one.
    """
    grid = initial
    e = energy(grid, c, accuracy)
    G = el_operator(grid, c, accuracy)
    res = 0.5 * sup_norm(G, grid, accuracy)
    result = FlowResult(grid, 0, "max_iters", [(0, e, res)], [e], [res])
    step = policy.initial_factor * grid.ds ** 2
    status = "max_iters"
    it = 0
    while True:
        if res < tol:
            status = "converged"
            break
        if e < energy_floor:
            status = "diverged"
            break
        if it >= max_iters:
            break
        PG = _project_gradient(grid, G)
        slope = _quadrature(inner(PG, PG), grid)
        trial = step
        for _ in range(policy.max_backtracks):
            cand = _step(grid, PG, trial)
            e_new = energy(cand, c, accuracy)
            if e_new <= e - policy.armijo * trial * slope and e_new < e:
                break
            trial *= policy.shrink
        else:
            status = "stagnated"
            break
        grid, e = cand, e_new
        it += 1
        G = el_operator(grid, c, accuracy)
        res = 0.5 * sup_norm(G, grid, accuracy)
        result.energies.append(e)
        result.residuals.append(res)
        if it % trace_every == 0:
            result.trace.append((it, e, res))
        step = policy.growth * trial if policy.warm_start else policy.initial_factor * grid.ds ** 2
    if result.trace[-1][0] != it:
        result.trace.append((it, e, res))
    result.grid = grid
    result.iterations = it
    result.status = status
    return result


FAMILY_MEMBER = "family member"
OTHER_CRITICAL = "other critical point"
NOT_CONVERGED = "not converged"


@dataclass(frozen=True)
class FlowOutcome:
    """Classification of a terminal flow curve in a 3-dimensional target.

    ``kind`` is :data:`FAMILY_MEMBER` when the flow converged to a curve with
    constant k_g and tau_g on the constraint delta2 (k_g^2 + tau_g^2) = delta2 K - delta1,
    :data:`OTHER_CRITICAL` when it converged elsewhere (a geodesic, say), and
    :data:`NOT_CONVERGED` otherwise.
    """

    kind: str
    residual: float
    k_g: float
    tau_g: float
    spread: float
    constraint_defect: float


def flow_outcome(result, c, tol=1e-6, rel=0.02, accuracy=DEFAULT_ACCURACY):
    """Classify where :func:`gradient_flow` ended; deviations are relative, within ``rel``."""
    grid = result.grid
    fr = frenet(grid, accuracy)
    k = interior(fr.k_g.values, grid, accuracy)
    tau = interior(fr.tau_g.values, grid, accuracy)
    k_mean = float(np.mean(k))
    if fr.all_degenerate or not np.all(np.isfinite(tau)):
        tau_mean, spread, defect = 0.0, float(np.ptp(k)), float("inf")
    else:
        tau_mean = float(np.mean(tau))
        spread = float(max(np.ptp(k) / max(abs(k_mean), 1e-300),
                           np.ptp(tau) / max(abs(tau_mean), 1e-300) if abs(tau_mean) > 1e-8 else np.ptp(tau)))
        target = grid.space.curvature - c.ratio
        defect = float(abs(k_mean ** 2 + tau_mean ** 2 - target) / max(abs(target), 1e-300))
    res = float(result.final_residual)
    if res >= tol:
        kind = NOT_CONVERGED
    elif spread <= rel and defect <= rel:
        kind = FAMILY_MEMBER
    else:
        kind = OTHER_CRITICAL
    return FlowOutcome(kind, res, k_mean, tau_mean, spread, defect)


def jacobi_apply(grid, V, c=None, accuracy=DEFAULT_ACCURACY):
    """J(V) = nabla nabla V - R(gamma', V) gamma' along the curve.

    ``c`` is accepted for symmetry with the other operators and is not used.
    """
    vel = derive(grid.points, grid.ds, 1, accuracy, grid.periodic)
    dV = covariant_derivative(grid, V, accuracy, vel=vel)
    ddV = covariant_derivative(grid, dV, accuracy, vel=vel)
    return ddV - curvature_op(grid.space, vel, V, vel)


def jacobi_eigen_residual(grid, c, accuracy=DEFAULT_ACCURACY):
    """J(tau) - (delta1/delta2) tau, which vanishes on semi-biharmonic curves."""
    ratio = c.ratio
    tau = tension(grid, accuracy)
    return jacobi_apply(grid, tau, c, accuracy) - ratio * tau


def extrinsic_sphere_residual(grid, c, accuracy=DEFAULT_ACCURACY):
    """The semi-biharmonic equation written in ambient coordinates of S^m::

        delta2 (g'''' + (|g''|^2 + (|g'|^2)'' + 2<g', g'''> + 2|g'|^4) g + 2 (|g'|^2 g')')
          - delta1 (g'' + |g'|^2 g)

    with plain finite-difference derivatives of the coordinates.
    """
    if not grid.space.is_sphere:
        raise DomainError("the extrinsic form applies to sphere targets only")
    g = grid.points
    d = [derive(g, grid.ds, k, accuracy, grid.periodic) for k in (1, 2, 3, 4)]
    speed2 = inner(d[0], d[0])
    dd_speed2 = derive(speed2, grid.ds, 2, accuracy, grid.periodic)
    flux = derive(speed2[:, None] * d[0], grid.ds, 1, accuracy, grid.periodic)
    coef = inner(d[1], d[1]) + dd_speed2 + 2.0 * inner(d[0], d[2]) + 2.0 * speed2 ** 2
    bi = d[3] + coef[:, None] * g + 2.0 * flux
    return c.delta2 * bi - c.delta1 * (d[1] + speed2[:, None] * g)

