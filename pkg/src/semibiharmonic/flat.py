"""Semi-biharmonic scalar functions on flat domains.

Radial profiles f(r) in R^n with the radial Laplacian
d^2/dr^2 + ((n-1)/r) d/dr, the reduction of delta2 Delta^2 f = delta1 Delta f
to the second-order ODE Delta f - (delta1/delta2) f = r^(2-n), its closed forms
in dimensions 3 and 4, fundamental solutions, and 5-point machinery on
rectangles.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .bessel import bessel
from .constants import DEFAULT_ACCURACY
from .errors import (
    DimensionError,
    DomainError,
    FamilyInapplicableError,
    GridTooSmallError,
    RangeError,
    SemibiharmonicError,
)
from .finite_difference import derive

#: nodes dropped at each end after applying the radial Laplacian twice
RADIAL_TRIM = 4

#: largest exponent lambda * r allowed before exp overflows toward 1e304
MAX_EXPONENT = 700.0

#: local error control of the radial ODE integrator
ODE_RTOL = 1e-10
ODE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Samples of a radial function f(r) on a uniform grid in (0, inf), dimension ``n``."""

    r: np.ndarray
    values: np.ndarray
    n: int

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or v.shape != r.shape:
            raise DimensionError(f"r has shape {r.shape}, values {v.shape}")
        if r.size < 2:
            raise GridTooSmallError("a radial profile needs at least 2 samples")
        if r[0] <= 0.0:
            raise DomainError(f"r_min must be positive, got {r[0]}")
        if int(self.n) < 2:
            raise DimensionError(f"space dimension must be >= 2, got {self.n}")
        dr = np.diff(r)
        if np.max(np.abs(dr - dr[0])) > 1e-9 * abs(dr[0]):
            raise SemibiharmonicError("radial grid is not uniform")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def sample(cls, func, n, r_min, r_max, nodes):
        r = np.linspace(r_min, r_max, int(nodes))
        return cls(r, func(r), n)

    @property
    def dr(self):
        return float(self.r[1] - self.r[0])

    # mirror the CurveGrid attribute used by refinement studies
    ds = dr

    @property
    def r_min(self):
        return float(self.r[0])

    @property
    def r_max(self):
        return float(self.r[-1])

    @property
    def n_nodes(self):
        return self.r.size

    def with_values(self, values):
        return RadialProfile(self.r, values, self.n)

    def trimmed(self, k):
        return RadialProfile(self.r[k:len(self.r) - k], self.values[k:len(self.r) - k], self.n)


def radial_laplacian(p, accuracy=DEFAULT_ACCURACY):
    """f'' + ((n-1)/r) f' by finite differences (one-sided near the ends)."""
    if p.n_nodes < 9:
        raise GridTooSmallError(f"radial Laplacian needs at least 9 samples, got {p.n_nodes}")
    d1 = derive(p.values, p.dr, 1, accuracy)
    d2 = derive(p.values, p.dr, 2, accuracy)
    return p.with_values(d2 + (p.n - 1) / p.r * d1)


def radial_residual(p, c, accuracy=DEFAULT_ACCURACY):
    """delta2 Delta(Delta f) - delta1 Delta f on the interior, ``RADIAL_TRIM`` nodes dropped per end."""
    lap = radial_laplacian(p, accuracy)
    bilap = radial_laplacian(lap, accuracy)
    res = p.with_values(c.delta2 * bilap.values - c.delta1 * lap.values)
    return res.trimmed(RADIAL_TRIM)


def _lam(c):
    ratio = c.ratio
    if ratio <= 0.0:
        raise FamilyInapplicableError(
            f"delta1/delta2 = {ratio:g} <= 0: exponential closed form needs delta1*delta2 > 0")
    return np.sqrt(ratio)


def radial_closed_form_n3(c, c1=1.0, c2=0.0):
    """n = 3 solution c1 e^(-lr)/r + c2 e^(lr)/(l r) - (delta2/delta1)/r, l = sqrt(delta1/delta2)."""
    lam = _lam(c)

    def f(r):
        r = np.asarray(r, dtype=float)
        return (c1 * np.exp(-lam * r) / r + c2 * np.exp(lam * r) / (lam * r)
                - (c.delta2 / c.delta1) / r)

    return f


def radial_closed_form_n4(c, c1=1.0, c2=0.0):
    """n = 4 solution for delta1/delta2 < 0 with mu = sqrt(-delta1/delta2).

    c1 J1(mu r)/r + c2 Y1(mu r)/r + pi/(2 mu r) (J1 Y0 - J0 Y1)(mu r).
    The last term equals 1/(mu r)^2 by the Wronskian.
    """
    ratio = c.ratio
    if ratio >= 0.0:
        raise FamilyInapplicableError(
            f"delta1/delta2 = {ratio:g} >= 0: the Bessel closed form needs delta1*delta2 < 0")
    mu = np.sqrt(-ratio)

    def f(r):
        x = mu * np.asarray(r, dtype=float)
        J0, J1, Y0, Y1 = (bessel(k, x) for k in ("J0", "J1", "Y0", "Y1"))
        r = x / mu
        return (c1 * J1 + c2 * Y1) / r + np.pi / (2.0 * mu * r) * (J1 * Y0 - J0 * Y1)

    return f


def solve_radial_ode(n, c, r_min, r_max, f0, df0, nodes=257, source=1.0, rtol=ODE_RTOL,
                     atol=ODE_ATOL):
    """Integrate f'' + ((n-1)/r) f' - (delta1/delta2) f = source * r^(2-n) from ``r_min``.

    Adaptive explicit Runge-Kutta 4(5), by default with rtol 1e-10 and atol
    1e-12; the solution is reported on a uniform grid of ``nodes`` points.
    The samples are only known to about ``rtol * |f|``, a level that a
    fourth-order difference residual amplifies by h^-4 (see
    :func:`data_precision_scale`).  Any such f
    satisfies delta2 Delta^2 f = delta1 Delta f since r^(2-n) is harmonic
    for r > 0.

    Raises
    ------
    RangeError
        if the growing mode e^(sqrt(delta1/delta2) r) would overflow.
    """
    ratio = c.ratio
    if r_min <= 0.0 or r_max <= r_min:
        raise DomainError(f"need 0 < r_min < r_max, got [{r_min}, {r_max}]")
    if ratio > 0.0 and np.sqrt(ratio) * r_max > MAX_EXPONENT:
        raise RangeError(
            f"sqrt(delta1/delta2) * r_max = {np.sqrt(ratio) * r_max:.1f} > {MAX_EXPONENT:g}: "
            f"the growing mode overflows; use r_max < {MAX_EXPONENT / np.sqrt(ratio):.4g}")
    n = int(n)

    def rhs(r, y):
        return [y[1], source * r ** (2 - n) + ratio * y[0] - (n - 1) / r * y[1]]

    r = np.linspace(r_min, r_max, int(nodes))
    sol = solve_ivp(rhs, (r_min, r_max), [f0, df0], method="RK45", t_eval=r,
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise RangeError(f"radial ODE integration failed: {sol.message}")
    return RadialProfile(r, sol.y[0], n)


def data_precision_scale(rtol):
    """Factor that lifts a machine-epsilon round-off floor to data known to relative ``rtol``."""
    return max(1.0, float(rtol) / np.finfo(float).eps)


LAPLACE = "laplace"
BILAPLACE = "bilaplace"


def fundamental_solution(op, n):
    """Unnormalized radial fundamental solution of the Laplacian or bi-Laplacian in R^n.

    Laplace: r^(2-n) for n >= 3, log r for n = 2.
    Bilaplace: r^(4-n) for n >= 5, log r for n = 4, r for n = 3.
    """
    op = op.lower()
    n = int(n)
    if op == LAPLACE:
        if n >= 3:
            return lambda r: np.asarray(r, dtype=float) ** (2 - n)
        if n == 2:
            return lambda r: np.log(r)
    elif op == BILAPLACE:
        if n >= 5:
            return lambda r: np.asarray(r, dtype=float) ** (4 - n)
        if n == 4:
            return lambda r: np.log(r)
        if n == 3:
            return lambda r: np.asarray(r, dtype=float) * 1.0
    else:
        raise SemibiharmonicError(f"unknown operator {op!r}; expected 'laplace' or 'bilaplace'")
    raise DimensionError(f"no fundamental solution of {op} tabulated for n = {n}")


@dataclass(frozen=True, eq=False)
class PlaneField:
    """Scalar samples f[i, j] = f(x[i], y[j]) on a uniform rectangle."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (x.size, y.size):
            raise DimensionError(f"values have shape {v.shape}, grid is {(x.size, y.size)}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, func, x_range, y_range, nx, ny=None):
        ny = nx if ny is None else ny
        x = np.linspace(*x_range, int(nx))
        y = np.linspace(*y_range, int(ny))
        X, Y = np.meshgrid(x, y, indexing="ij")
        return cls(x, y, func(X, Y))

    @property
    def hx(self):
        return float(self.x[1] - self.x[0])

    @property
    def hy(self):
        return float(self.y[1] - self.y[0])

    @property
    def ds(self):
        return max(self.hx, self.hy)

    @property
    def shape(self):
        return self.values.shape

    def interior(self, k):
        return PlaneField(self.x[k:self.x.size - k], self.y[k:self.y.size - k],
                          self.values[k:self.x.size - k, k:self.y.size - k])


def plane_laplacian(field):
    """5-point Laplacian on the interior (one node dropped on every side)."""
    f = field.values
    if min(f.shape) < 3:
        raise GridTooSmallError(f"5-point Laplacian needs at least 3x3 samples, got {f.shape}")
    lap = ((f[2:, 1:-1] - 2.0 * f[1:-1, 1:-1] + f[:-2, 1:-1]) / field.hx ** 2
           + (f[1:-1, 2:] - 2.0 * f[1:-1, 1:-1] + f[1:-1, :-2]) / field.hy ** 2)
    return PlaneField(field.x[1:-1], field.y[1:-1], lap)


def plane_residual(field, c):
    """delta2 Delta^2 f - delta1 Delta f with the 5-point Laplacian applied twice."""
    if min(field.shape) < 9:
        raise GridTooSmallError(f"plane residual needs at least 9x9 samples, got {field.shape}")
    lap = plane_laplacian(field)
    bilap = plane_laplacian(lap)
    return PlaneField(bilap.x, bilap.y, c.delta2 * bilap.values - c.delta1 * lap.interior(1).values)


__all__ = [
    "RadialProfile", "radial_laplacian", "radial_residual", "radial_closed_form_n3",
    "radial_closed_form_n4", "solve_radial_ode", "fundamental_solution", "PlaneField",
    "plane_laplacian", "plane_residual", "data_precision_scale", "ODE_RTOL", "LAPLACE",
    "BILAPLACE", "RADIAL_TRIM",
]
