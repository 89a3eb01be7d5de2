"""Energy-momentum tensor, Killing fields of round spheres, and Noether currents.

Domains are flat: 1-D curve grids (circle or interval) and 2-D rectangles or
tori sampled uniformly (:class:`MapGrid2D`).
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .constants import DEFAULT_ACCURACY, RESIDUAL_PASSES
from .curves import CurveGrid, ScalarField, covariant_chain, sup_norm
from .errors import DimensionError, DomainError, SemibiharmonicError
from .finite_difference import boundary_trim, derive
from .geometry import ModelSpace, curvature_op, inner, sphere_covariant_derivative


@dataclass(frozen=True, eq=False)
class MapGrid2D:
    """A map from a flat rectangle (or torus) into ``space``, values[i, j] = phi(x_i, y_j)."""

    points: np.ndarray
    hx: float
    hy: float
    periodic: tuple
    space: ModelSpace

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 2:
            pts = pts[..., None]
        if pts.ndim != 3 or pts.shape[2] != self.space.ambient_dim:
            raise DimensionError(f"points must be (nx, ny, {self.space.ambient_dim}), got {pts.shape}")
        if self.space.is_sphere and np.max(np.abs(np.linalg.norm(pts, axis=2) - 1.0)) > 1e-9:
            raise DomainError("map leaves the unit sphere")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))

    @classmethod
    def sample(cls, func, space, x_range, y_range, nx, ny=None, periodic=(False, False)):
        """Evaluate ``func(X, Y) -> (nx, ny, d)`` on a uniform grid; periodic axes omit the endpoint."""
        ny = nx if ny is None else ny
        axes = []
        for (a, b), n, per in zip((x_range, y_range), (nx, ny), periodic):
            axes.append(np.linspace(a, b, n, endpoint=not per))
        X, Y = np.meshgrid(*axes, indexing="ij")
        hx = axes[0][1] - axes[0][0]
        hy = axes[1][1] - axes[1][0]
        return cls(func(X, Y), hx, hy, periodic, space)

    @property
    def ds(self):
        return max(self.hx, self.hy)

    @property
    def spacings(self):
        return (self.hx, self.hy)


# ----------------------------------------------------------------------------
# pointwise algebra
# ----------------------------------------------------------------------------

def em_tensor_algebraic(dphi, tau, ntau, c):
    """T_ab from pointwise data in an orthonormal frame of the domain.

    Parameters
    ----------
    dphi, ntau : ndarray (..., n, m)
        dphi(e_a) and nabla_{e_a} tau for each of the ``n`` domain directions.
    tau : ndarray (..., m)
    """
    n = dphi.shape[-2]
    eye = np.eye(n)
    gram = np.einsum("...ai,...bi->...ab", dphi, dphi)
    mixed = np.einsum("...ai,...bi->...ab", dphi, ntau)
    energy_density = np.trace(gram, axis1=-2, axis2=-1)[..., None, None]
    contraction = np.trace(mixed, axis1=-2, axis2=-1)[..., None, None]
    tau2 = inner(tau, tau)[..., None, None]
    return (c.delta1 * (gram - 0.5 * energy_density * eye)
            + c.delta2 * (0.5 * tau2 * eye + contraction * eye - mixed - np.swapaxes(mixed, -1, -2)))


def em_trace_formula(dphi, tau, ntau, c):
    """delta1 (1 - n/2)|dphi|^2 + delta2 (n/2)|tau|^2 + delta2 (n - 2)<dphi, nabla tau>."""
    n = dphi.shape[-2]
    e = np.einsum("...ai,...ai->...", dphi, dphi)
    mixed = np.einsum("...ai,...ai->...", dphi, ntau)
    return c.delta1 * (1 - n / 2) * e + c.delta2 * (n / 2) * inner(tau, tau) + c.delta2 * (n - 2) * mixed


def em_vanishing_rewrite(dphi, tau, ntau, c):
    """delta1 <dphi X, dphi Y> - delta2 |tau|^2 h/(n - 2) - delta2 (<dphi X, nabla_Y tau> + <dphi Y, nabla_X tau>).

    Agrees with the energy-momentum tensor wherever its trace vanishes; in
    general T - rewrite = Tr T / (n - 2) h.  Undefined for n = 2.
    """
    n = dphi.shape[-2]
    if n == 2:
        raise DimensionError("the rewrite divides by n - 2 and needs a domain dimension other than 2")
    eye = np.eye(n)
    gram = np.einsum("...ai,...bi->...ab", dphi, dphi)
    mixed = np.einsum("...ai,...bi->...ab", dphi, ntau)
    tau2 = inner(tau, tau)[..., None, None]
    return c.delta1 * gram - c.delta2 * tau2 * eye / (n - 2) - c.delta2 * (mixed + np.swapaxes(mixed, -1, -2))


def synthesize_vanishing_em(n, m, c, rng):
    """Random (dphi, tau, ntau) with T = 0, found by solving the linear system for ntau.

    Requires m >= n so that dphi can have full rank.
    """
    if m < n:
        raise DimensionError(f"need target dimension m >= n, got m={m}, n={n}")
    dphi = rng.normal(size=(n, m))
    tau = rng.normal(size=m)
    base = em_tensor_algebraic(dphi, tau, np.zeros((n, m)), c)
    iu = np.triu_indices(n)
    cols = []
    for k in range(n * m):
        e = np.zeros(n * m)
        e[k] = 1.0
        lin = em_tensor_algebraic(dphi, tau, e.reshape(n, m), c) - base
        cols.append(lin[iu])
    mat = np.array(cols).T
    sol, *_ = np.linalg.lstsq(mat, -base[iu], rcond=None)
    return dphi, tau, sol.reshape(n, m)


# ----------------------------------------------------------------------------
# grids
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EMTensorField:
    """Per-node symmetric d x d matrices on a 1-D or 2-D domain grid."""

    values: np.ndarray
    grid: object

    @property
    def dim(self):
        return self.values.shape[-1]

    def trace(self):
        return np.trace(self.values, axis1=-2, axis2=-1)


def _curve_data(grid, accuracy):
    v0, v1, v2 = covariant_chain(grid, 3, accuracy)
    return v0[:, None, :], v1, v2[:, None, :]


def _axis_derive(values, grid, axis, order=1, accuracy=DEFAULT_ACCURACY):
    h = grid.spacings[axis]
    return derive(values, h, order, accuracy, grid.periodic[axis], axis=axis)


def _map2d_data(grid, accuracy):
    phi = grid.points
    d = [_axis_derive(phi, grid, a, 1, accuracy) for a in (0, 1)]
    lap = sum(_axis_derive(phi, grid, a, 2, accuracy) for a in (0, 1))
    tau = lap
    if grid.space.is_sphere:
        tau = lap + (inner(d[0], d[0]) + inner(d[1], d[1]))[..., None] * phi
    ntau = []
    for a in (0, 1):
        dt = _axis_derive(tau, grid, a, 1, accuracy)
        if grid.space.is_sphere:
            dt = dt + inner(d[a], tau)[..., None] * phi
        ntau.append(dt)
    return np.stack(d, axis=-2), tau, np.stack(ntau, axis=-2)


def _domain_data(grid, accuracy):
    if isinstance(grid, CurveGrid):
        return _curve_data(grid, accuracy)
    if isinstance(grid, MapGrid2D):
        return _map2d_data(grid, accuracy)
    raise SemibiharmonicError(f"unsupported domain grid {type(grid).__name__}")


def em_tensor(grid, c, accuracy=DEFAULT_ACCURACY):
    """Energy-momentum tensor of a curve or a 2-D map."""
    return EMTensorField(em_tensor_algebraic(*_domain_data(grid, accuracy), c), grid)


def em_trace(grid, c, accuracy=DEFAULT_ACCURACY):
    """Trace of the energy-momentum tensor from the closed formula (not from the matrix)."""
    return em_trace_formula(*_domain_data(grid, accuracy), c)


def em_divergence(field, grid=None, accuracy=DEFAULT_ACCURACY):
    """div T: (d/ds T) on curves, (d_x T_xb + d_y T_yb) on 2-D grids."""
    grid = field.grid if grid is None else grid
    T = field.values
    if isinstance(grid, CurveGrid):
        return derive(T[:, 0, :], grid.ds, 1, accuracy, grid.periodic)
    return sum(_axis_derive(T[..., a, :], grid, a, 1, accuracy) for a in (0, 1))


def em_divergence_norm(grid, c, accuracy=DEFAULT_ACCURACY):
    """Sup-norm of div T over the interior (boundary bands trimmed as for curve residuals)."""
    div = em_divergence(em_tensor(grid, c, accuracy), grid, accuracy)
    if isinstance(grid, CurveGrid):
        return sup_norm(div, grid, accuracy)
    t = [boundary_trim(p, accuracy, RESIDUAL_PASSES) for p in grid.periodic]
    core = div[t[0]:div.shape[0] - t[0], t[1]:div.shape[1] - t[1]]
    return float(np.max(np.linalg.norm(core, axis=-1)))


# ----------------------------------------------------------------------------
# Killing fields and Noether currents
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KillingField:
    """X(p) = A p + b with A antisymmetric; ``b`` (a translation) is allowed on flat targets only."""

    A: np.ndarray
    b: np.ndarray = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"generator must be square, got {A.shape}")
        if np.max(np.abs(A + A.T), initial=0.0) > 1e-14:
            raise SemibiharmonicError("generator is not antisymmetric")
        b = np.zeros(A.shape[0]) if self.b is None else np.asarray(self.b, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    def __call__(self, p):
        return np.asarray(p) @ self.A.T + self.b

    def covariant(self, p, V, space):
        """nabla_V X at p: A V, plus <V, A p> p on the sphere (the tangential part of A V)."""
        AV = np.asarray(V) @ self.A.T
        if space.is_sphere:
            return AV + inner(V, np.asarray(p) @ self.A.T)[..., None] * p
        return AV

    def __add__(self, other):
        return KillingField(self.A + other.A, self.b + other.b)

    def scaled(self, a):
        return KillingField(a * self.A, a * self.b)


def killing_field(A, b=None):
    return KillingField(A, b)


def rotation_generators(n):
    """Basis e_j e_i^T - e_i e_j^T (i < j) of so(n); the (i, j) generator maps e_i to e_j."""
    gens = []
    for i, j in combinations(range(n), 2):
        A = np.zeros((n, n))
        A[j, i] = 1.0
        A[i, j] = -1.0
        gens.append(KillingField(A))
    return gens


def translation(m, index=0):
    b = np.zeros(m)
    b[index] = 1.0
    return KillingField(np.zeros((m, m)), b)


def killing_residuals(grid, X, accuracy=DEFAULT_ACCURACY):
    """Killing and Hessian defects of X along a sphere curve.

    Returns ``(<nabla_T X, T>, nabla_T nabla_T X - nabla_{nabla_T T} X + R(X, T) T)``
    with the outer covariant derivatives taken by finite differences along
    the grid.
    """
    if not grid.space.is_sphere:
        raise DomainError("Killing checks are implemented on sphere targets")
    pts = grid.points
    vel = derive(pts, grid.ds, 1, accuracy, grid.periodic)
    Xp = X(pts)
    dX = sphere_covariant_derivative(grid, Xp, accuracy, velocity=vel, check_tangent=False)
    ddX = sphere_covariant_derivative(grid, dX, accuracy, velocity=vel, check_tangent=False)
    acc_vec = sphere_covariant_derivative(grid, vel, accuracy, velocity=vel, check_tangent=False)
    hess = ddX - X.covariant(pts, acc_vec, grid.space) + curvature_op(grid.space, Xp, vel, vel)
    return inner(dX, vel), hess


def noether_current(grid, X, c, accuracy=DEFAULT_ACCURACY):
    """J = delta1 <gamma', X> + delta2 <tau, nabla X> - delta2 <nabla tau, X> along the curve."""
    v0, v1, v2 = covariant_chain(grid, 3, accuracy)
    pts = grid.points
    Xp = X(pts)
    dX = X.covariant(pts, v0, grid.space)
    J = c.delta1 * inner(v0, Xp) + c.delta2 * inner(v1, dX) - c.delta2 * inner(v2, Xp)
    return ScalarField.on(grid, J)


def noether_divergence(grid, X, c, accuracy=DEFAULT_ACCURACY):
    return noether_current(grid, X, c, accuracy).derivative(1, accuracy)
