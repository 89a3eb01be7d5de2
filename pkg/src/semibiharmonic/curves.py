"""Sampled curves, their covariant-derivative chain, and the residual operators.

A curve is stored in ambient coordinates on a uniform parameter grid.  All
covariant derivatives along the curve are built by iterating the first-order
rule (ordinary derivative on flat targets, the extrinsic formula on the unit
sphere), so the chain

    V0 = gamma',  V1 = tau(gamma),  V2 = nabla tau,  V3 = nabla nabla tau

costs four finite-difference passes and every intermediate field is available.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import make_interp_spline

from .constants import (
    DEFAULT_ACCURACY,
    KG_DEGENERACY,
    RESIDUAL_PASSES,
    SPHERE_TOL,
    UNIT_SPEED_TOL,
)
from .errors import (
    DegenerateCurveError,
    DimensionError,
    DomainError,
    SemibiharmonicError,
)
from .finite_difference import boundary_trim, derive
from .geometry import (
    ABSTRACT,
    ModelSpace,
    curvature_op,
    inner,
    sphere_covariant_derivative,
    sphere_project,
)


@dataclass(frozen=True, eq=False)
class CurveGrid:
    """A curve sampled at ``s0 + i*ds`` in ambient coordinates of ``space``.

    For periodic grids the last node is *not* a repeat of the first one; the
    period is ``n_nodes * ds``.
    """

    points: np.ndarray
    ds: float
    periodic: bool
    space: ModelSpace
    s0: float = 0.0

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise DimensionError(f"points must be (n, d), got shape {pts.shape}")
        if self.space.kind == ABSTRACT:
            raise SemibiharmonicError("abstract spaces have no ambient coordinates for curves")
        if pts.shape[1] != self.space.ambient_dim:
            raise DimensionError(
                f"points have {pts.shape[1]} components, space needs {self.space.ambient_dim}"
            )
        if not np.all(np.isfinite(pts)):
            raise DomainError("curve contains non-finite coordinates")
        if not self.ds > 0:
            raise SemibiharmonicError(f"spacing must be positive, got {self.ds}")
        if self.space.is_sphere:
            dev = np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0))
            if dev > SPHERE_TOL:
                raise DomainError(f"curve leaves the unit sphere by {dev:.2e}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "ds", float(self.ds))
        object.__setattr__(self, "periodic", bool(self.periodic))

    @property
    def n_nodes(self):
        return self.points.shape[0]

    @property
    def s(self):
        return self.s0 + self.ds * np.arange(self.n_nodes)

    @property
    def length(self):
        """Parameter length of the domain (the period for periodic grids)."""
        n = self.n_nodes if self.periodic else self.n_nodes - 1
        return n * self.ds

    def with_points(self, points):
        return CurveGrid(points, self.ds, self.periodic, self.space, self.s0)

    def subsample(self, stride):
        """Every ``stride``-th node; a periodic grid must have a node count divisible by ``stride``."""
        if self.periodic and self.n_nodes % stride:
            raise SemibiharmonicError(f"{self.n_nodes} periodic nodes not divisible by {stride}")
        return CurveGrid(self.points[::stride], self.ds * stride, self.periodic, self.space, self.s0)


def sample_curve(func, space, n_nodes, length, periodic, s0=0.0):
    """Build a :class:`CurveGrid` by evaluating ``func`` on a uniform grid."""
    if periodic:
        s = s0 + length * np.arange(n_nodes) / n_nodes
        ds = length / n_nodes
    else:
        s = np.linspace(s0, s0 + length, n_nodes)
        ds = length / (n_nodes - 1)
    return CurveGrid(np.asarray(func(s), dtype=float).reshape(n_nodes, -1), ds, periodic, space, s0)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real values aligned with the nodes of a uniform grid."""

    values: np.ndarray
    ds: float
    periodic: bool

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self):
        return self.values.shape[0]

    def derivative(self, order=1, accuracy=DEFAULT_ACCURACY):
        return ScalarField(derive(self.values, self.ds, order, accuracy, self.periodic),
                           self.ds, self.periodic)

    @classmethod
    def on(cls, grid, values):
        return cls(values, grid.ds, grid.periodic)


def residual_trim(grid, accuracy=DEFAULT_ACCURACY):
    """Boundary nodes excluded from residual norms on interval grids."""
    return boundary_trim(grid.periodic, accuracy, RESIDUAL_PASSES)


def interior(values, grid, accuracy=DEFAULT_ACCURACY):
    t = residual_trim(grid, accuracy)
    return values[t:len(values) - t] if t else values


def sup_norm(values, grid, accuracy=DEFAULT_ACCURACY):
    """Sup over the trimmed window of the pointwise Euclidean norm."""
    v = np.asarray(getattr(values, "values", values), dtype=float)
    v = interior(v, grid, accuracy)
    if v.ndim > 1:
        v = np.linalg.norm(v, axis=-1)
    return float(np.max(np.abs(v)))


def residual_scale(grid, c):
    """Magnitude that round-off in a residual of ``grid`` is proportional to."""
    return max(abs(c.delta1), abs(c.delta2)) * max(1.0, float(np.max(np.abs(grid.points))))


def velocity(grid, accuracy=DEFAULT_ACCURACY):
    return derive(grid.points, grid.ds, 1, accuracy, grid.periodic)


def covariant_derivative(grid, X, accuracy=DEFAULT_ACCURACY, vel=None):
    """nabla_{gamma'} X along the curve for flat or spherical targets."""
    if grid.space.is_sphere:
        if vel is None:
            vel = velocity(grid, accuracy)
        return sphere_covariant_derivative(grid, X, accuracy, velocity=vel, check_tangent=False)
    return derive(X, grid.ds, 1, accuracy, grid.periodic)


def covariant_chain(grid, depth=4, accuracy=DEFAULT_ACCURACY):
    """[gamma', tau, nabla tau, nabla^2 tau][:depth] by iterated first-order passes."""
    v0 = velocity(grid, accuracy)
    chain = [v0]
    while len(chain) < depth:
        chain.append(covariant_derivative(grid, chain[-1], accuracy, vel=v0))
    return chain


def tension(grid, accuracy=DEFAULT_ACCURACY):
    """Tension field tau(gamma) = nabla_{gamma'} gamma' (gamma'' + |gamma'|^2 gamma on spheres)."""
    return covariant_chain(grid, 2, accuracy)[1]


def semibiharmonic_residual(grid, c, accuracy=DEFAULT_ACCURACY, chain=None):
    """delta2 nabla^3 gamma' - delta2 R(gamma', tau) gamma' - delta1 tau, pointwise.

    Vanishes exactly on semi-biharmonic curves.  ``delta2 = 0`` is accepted
    and gives the (negated) harmonic-map equation.
    """
    v0, v1, _, v3 = chain if chain is not None else covariant_chain(grid, 4, accuracy)
    return c.delta2 * v3 - c.delta2 * curvature_op(grid.space, v0, v1, v0) - c.delta1 * v1


def energy(grid, c, accuracy=DEFAULT_ACCURACY):
    """Discrete E = int delta1 |gamma'|^2 + delta2 |tau|^2 ds.

    Rectangle rule on periodic grids, trapezoid rule on intervals.
    """
    v0, v1 = covariant_chain(grid, 2, accuracy)
    density = c.delta1 * inner(v0, v0) + c.delta2 * inner(v1, v1)
    if grid.periodic:
        return float(np.sum(density) * grid.ds)
    return float(np.trapezoid(density, dx=grid.ds))


def conservation_identity(grid, c, accuracy=DEFAULT_ACCURACY):
    """(delta2 d^3/ds^3 - delta1 d/ds) |gamma'|^2/2 - delta2 d/ds (3/2)|tau|^2.

    Vanishes along solutions; meaningful as a check only where the residual is small.
    """
    v0, v1 = covariant_chain(grid, 2, accuracy)
    half_speed2 = 0.5 * inner(v0, v0)
    lhs = (c.delta2 * derive(half_speed2, grid.ds, 3, accuracy, grid.periodic)
           - c.delta1 * derive(half_speed2, grid.ds, 1, accuracy, grid.periodic))
    rhs = c.delta2 * derive(1.5 * inner(v1, v1), grid.ds, 1, accuracy, grid.periodic)
    return ScalarField.on(grid, lhs - rhs)


def bochner_residual(grid, c, accuracy=DEFAULT_ACCURACY):
    """Delta |tau|^2/2 - |nabla tau|^2 - <R(gamma', tau)gamma', tau> - (delta1/delta2)|tau|^2."""
    ratio = c.ratio
    v0, v1, v2 = covariant_chain(grid, 3, accuracy)
    lhs = derive(0.5 * inner(v1, v1), grid.ds, 2, accuracy, grid.periodic)
    curv = inner(curvature_op(grid.space, v0, v1, v0), v1)
    rhs = inner(v2, v2) + curv + ratio * inner(v1, v1)
    return ScalarField.on(grid, lhs - rhs)


@dataclass(frozen=True, eq=False)
class FrenetApparatus:
    """Geodesic curvature, torsion and frame of a unit-speed curve in a 3-manifold.

    Frame vectors and torsion are NaN at nodes classified as geodesic
    (``degenerate``) and wherever a stencil touches such a node.
    """

    k_g: ScalarField
    tau_g: ScalarField
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    degenerate: np.ndarray
    grid: CurveGrid = field(repr=False)

    @property
    def all_degenerate(self):
        return bool(np.all(self.degenerate))


def _orient_binormal(space, points, T, N):
    if space.is_sphere:
        # B_i = det[gamma, T, N, e_i], so det[gamma, T, N, B] = |B|^2 > 0
        ok = np.all(np.isfinite(N), axis=1)
        rows = np.stack([points[ok], T[ok], N[ok]], axis=1)
        B = np.full_like(T, np.nan)
        for i in range(4):
            e = np.zeros(4)
            e[i] = 1.0
            mats = np.concatenate([rows, np.broadcast_to(e, (len(rows), 1, 4))], axis=1)
            B[ok, i] = np.linalg.det(mats)
        return B
    return np.cross(T, N)


def frenet(grid, accuracy=DEFAULT_ACCURACY):
    """Frenet apparatus (k_g, tau_g, T, N, B) of a curve in S^3 or R^3.

    Curves that are not unit speed within ``UNIT_SPEED_TOL`` are
    reparametrized by arc length first.
    """
    if grid.space.ambient_dim - (1 if grid.space.is_sphere else 0) != 3:
        raise DimensionError("Frenet frames are defined here for 3-dimensional targets only")
    speed = np.linalg.norm(velocity(grid, accuracy), axis=1)
    if np.max(np.abs(interior(speed, grid, accuracy) - 1.0)) > UNIT_SPEED_TOL:
        grid = reparametrize_arclength(grid)
    v0, v1 = covariant_chain(grid, 2, accuracy)
    T = v0 / np.linalg.norm(v0, axis=1, keepdims=True)
    k = np.linalg.norm(v1, axis=1)
    degenerate = k < KG_DEGENERACY
    with np.errstate(invalid="ignore", divide="ignore"):
        N = np.where(degenerate[:, None], np.nan, v1 / k[:, None])
    B = _orient_binormal(grid.space, grid.points, T, N)
    if np.all(degenerate):
        tau = np.full(grid.n_nodes, np.nan)
    else:
        dN = covariant_derivative(grid, N, accuracy, vel=v0)
        tau = inner(dN, B)
    return FrenetApparatus(ScalarField.on(grid, k), ScalarField.on(grid, tau), T, N, B,
                           degenerate, grid)


def frenet_residual(k_g, tau_g, K, c, accuracy=DEFAULT_ACCURACY):
    """Frame components (T, N, B) of the semi-biharmonic equation for a unit-speed curve.

    Works for any constant curvature ``K`` since only the intrinsic data enter::

        T: -3 delta2 k k'
        N: delta2 (k'' - k^3 - k tau^2 + k K) - delta1 k
        B: delta2 (2 k' tau + k tau')
    """
    if len(k_g) != len(tau_g):
        raise DimensionError(f"k_g has {len(k_g)} nodes, tau_g has {len(tau_g)}")
    k = k_g.values
    t = tau_g.values
    dk = derive(k, k_g.ds, 1, accuracy, k_g.periodic)
    ddk = derive(k, k_g.ds, 2, accuracy, k_g.periodic)
    dt = derive(t, tau_g.ds, 1, accuracy, tau_g.periodic)
    d1, d2 = c.delta1, c.delta2
    comp_t = -3.0 * d2 * k * dk
    comp_n = d2 * (ddk - k ** 3 - k * t ** 2 + k * K) - d1 * k
    comp_b = d2 * (2.0 * dk * t + k * dt)
    return tuple(ScalarField(v, k_g.ds, k_g.periodic) for v in (comp_t, comp_n, comp_b))


class _Interpolant:
    """Smooth interpolant of curve samples: trigonometric if periodic, quintic spline otherwise."""

    def __init__(self, grid):
        self.periodic = grid.periodic
        self.period = grid.length
        self.s0 = grid.s0
        if grid.periodic:
            n = grid.n_nodes
            self.coef = np.fft.fft(grid.points, axis=0) / n
            self.k = np.fft.fftfreq(n, d=1.0 / n)
            self.omega = 2.0 * np.pi / self.period
        else:
            k = min(5, grid.n_nodes - 1)
            self.spline = make_interp_spline(grid.s, grid.points, k=k - (k % 2 == 0))

    def __call__(self, t, nu=0):
        t = np.asarray(t, dtype=float)
        if not self.periodic:
            return self.spline(t, nu)
        phase = np.exp(1j * self.omega * np.outer(t - self.s0, self.k))
        factor = (1j * self.omega * self.k) ** nu
        return np.real(phase @ (factor[:, None] * self.coef))


def reparametrize_arclength(grid, n_nodes=None, quad_points=8):
    """Resample a curve at uniform arc length (unit speed).

    The curve is interpolated (trigonometric interpolant on periodic grids,
    quintic spline on intervals), its arc length integrated by Gauss-Legendre
    quadrature per cell, and the inverse arc-length map solved by Newton's
    method.  Sphere curves are re-projected onto the sphere.
    """
    n_out = grid.n_nodes if n_nodes is None else int(n_nodes)
    interp = _Interpolant(grid)
    nodes = grid.s if not grid.periodic else np.append(grid.s, grid.s0 + grid.length)
    xg, wg = leggauss(quad_points)

    def arc(a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        t = mid[:, None] + half[:, None] * xg[None, :]
        sp = np.linalg.norm(interp(t.ravel(), 1), axis=1).reshape(t.shape)
        return half * (sp @ wg)

    speeds = np.linalg.norm(interp(nodes, 1), axis=1)
    if np.min(speeds) <= 1e-12:
        raise DegenerateCurveError("vanishing speed: arc length parametrization undefined")
    cum = np.concatenate([[0.0], np.cumsum(arc(nodes[:-1], nodes[1:]))])
    total = cum[-1]
    if grid.periodic:
        targets = total * np.arange(n_out) / n_out
        ds = total / n_out
    else:
        targets = np.linspace(0.0, total, n_out)
        ds = total / (n_out - 1)
    cell = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(nodes) - 2)
    t = nodes[cell] + (targets - cum[cell]) / (cum[cell + 1] - cum[cell]) * (nodes[cell + 1] - nodes[cell])
    for _ in range(12):
        err = cum[cell] + arc(nodes[cell], t) - targets
        t = t - err / np.linalg.norm(interp(t, 1), axis=1)
    pts = interp(t)
    if grid.space.is_sphere:
        pts = sphere_project(pts)
    return CurveGrid(pts, ds, grid.periodic, grid.space, 0.0)


def random_closed_curve(space, n_nodes, rng, modes=3, amplitude=0.5, offset=2.0):
    """Smooth random closed curve of parameter length 2 pi.

    A constant vector of norm ``offset`` plus ``modes`` Fourier modes with
    amplitudes decaying like ``amplitude / m``; projected radially onto the
    sphere for sphere targets (the offset keeps it away from the origin).
    """
    d = space.ambient_dim
    c0 = rng.normal(size=d)
    c0 = offset * c0 / np.linalg.norm(c0)
    A = rng.normal(size=(modes, d)) * amplitude
    B = rng.normal(size=(modes, d)) * amplitude

    def f(s):
        p = np.broadcast_to(c0, (len(s), d)).copy()
        for m in range(modes):
            p += (np.outer(np.cos((m + 1) * s), A[m]) + np.outer(np.sin((m + 1) * s), B[m])) / (m + 1)
        return sphere_project(p) if space.is_sphere else p

    return sample_curve(f, space, n_nodes, 2 * np.pi, True)
