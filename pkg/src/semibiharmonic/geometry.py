"""Constant-curvature target spaces and their curvature operators.

See :mod:`semibiharmonic.constants` for the curvature sign convention.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .constants import SPHERE_TOL, TANGENCY_TOL
from .errors import (
    DegenerateCurveError,
    DimensionError,
    DomainError,
    GridTooSmallError,
    SemibiharmonicError,
    TangencyWarning,
)
from .finite_difference import derive

FLAT = "flat"
SPHERE = "sphere"
ABSTRACT = "abstract"


@dataclass(frozen=True)
class Coupling:
    """Weights (delta1, delta2) of the Dirichlet and bienergy terms."""

    delta1: float
    delta2: float

    def __post_init__(self):
        for name in ("delta1", "delta2"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise SemibiharmonicError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @property
    def ratio(self):
        """delta1 / delta2; requires a fourth-order term."""
        self.require_fourth_order()
        return self.delta1 / self.delta2

    def require_fourth_order(self):
        if self.delta2 == 0.0:
            raise SemibiharmonicError("delta2 = 0: the bienergy term is absent")

    def as_tuple(self):
        return (self.delta1, self.delta2)


@dataclass(frozen=True)
class ModelSpace:
    """Target geometry: flat R^m, unit sphere S^m in R^(m+1), or abstract curvature K.

    Use the constructors :meth:`flat`, :meth:`sphere` and :meth:`abstract`.
    Abstract spaces carry no embedding; their vectors are components in an
    orthonormal frame and only curvature and intrinsic Frenet computations
    apply to them.
    """

    kind: str
    dim: int
    K: float = 0.0

    @classmethod
    def flat(cls, dim):
        return cls(FLAT, int(dim), 0.0)

    @classmethod
    def sphere(cls, dim, radius=1.0):
        if radius != 1.0:
            raise DomainError(f"only the unit sphere is supported, got radius {radius}")
        return cls(SPHERE, int(dim), 1.0)

    @classmethod
    def abstract(cls, K, dim=3):
        return cls(ABSTRACT, int(dim), float(K))

    def __post_init__(self):
        if self.kind not in (FLAT, SPHERE, ABSTRACT):
            raise SemibiharmonicError(f"unknown space kind {self.kind!r}")
        if self.dim < 1:
            raise DimensionError(f"dimension must be >= 1, got {self.dim}")

    @property
    def curvature(self):
        return {FLAT: 0.0, SPHERE: 1.0}.get(self.kind, self.K)

    @property
    def ambient_dim(self):
        return self.dim + 1 if self.kind == SPHERE else self.dim

    @property
    def is_sphere(self):
        return self.kind == SPHERE

    @property
    def is_flat(self):
        return self.kind == FLAT

    def to_dict(self):
        d = {"kind": self.kind, "dim": self.dim}
        if self.kind == ABSTRACT:
            d["K"] = self.K
        return d

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == SPHERE:
            return cls.sphere(d["dim"])
        if d["kind"] == FLAT:
            return cls.flat(d["dim"])
        return cls.abstract(d["K"], d["dim"])


def inner(a, b):
    """Pointwise Euclidean inner product over the last axis."""
    return np.einsum("...i,...i->...", a, b)


def curvature_op(space, X, Y, Z):
    """R(X, Y)Z on a constant-curvature space, vectorised over leading axes."""
    X, Y, Z = (np.asarray(v, dtype=float) for v in (X, Y, Z))
    if not (X.shape[-1] == Y.shape[-1] == Z.shape[-1] == space.ambient_dim):
        raise DimensionError(
            f"vectors of length {X.shape[-1]}, {Y.shape[-1]}, {Z.shape[-1]} "
            f"in a space with ambient dimension {space.ambient_dim}"
        )
    K = space.curvature
    if K == 0.0:
        return np.zeros(np.broadcast_shapes(X.shape, Y.shape, Z.shape))
    return K * (inner(Y, Z)[..., None] * X - inner(X, Z)[..., None] * Y)


def _check_on_sphere(p, tol):
    dev = np.abs(np.linalg.norm(p, axis=-1) - 1.0)
    if np.any(dev > tol):
        raise DomainError(f"point off the unit sphere by {dev.max():.3e} (tolerance {tol:g})")


def tangent_project(space, p, v):
    """Orthogonal projection of ``v`` onto the tangent space at ``p``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if p.shape[-1] != v.shape[-1]:
        raise DimensionError("point and vector have different lengths")
    if not space.is_sphere:
        return v.copy()
    _check_on_sphere(p, SPHERE_TOL)
    return v - inner(v, p)[..., None] * p


def sphere_project(p):
    """Nearest point on the unit sphere."""
    p = np.asarray(p, dtype=float)
    return p / np.linalg.norm(p, axis=-1, keepdims=True)


def ensure_tangent(space, p, v, tol=TANGENCY_TOL):
    """Return ``v``, re-projected with a :class:`TangencyWarning` if its normal part exceeds ``tol``."""
    if not space.is_sphere:
        return v
    defect = np.max(np.abs(inner(v, p)), initial=0.0)
    if defect > tol:
        warnings.warn(
            f"vector field off the tangent space by {defect:.2e}; re-projected",
            TangencyWarning,
            stacklevel=3,
        )
        return v - inner(v, p)[..., None] * p
    return v


def sphere_covariant_derivative(gamma, X, accuracy=4, velocity=None, check_tangent=True):
    """Covariant derivative along a sphere curve: nabla_{gamma'} X = X' + <gamma', X> gamma.

    ``X'`` and (unless supplied) ``gamma'`` are finite-difference derivatives on
    the grid of ``gamma``.
    """
    pts = gamma.points
    if pts.shape[0] < 5:
        raise GridTooSmallError(f"need at least 5 nodes, got {pts.shape[0]}")
    X = np.asarray(X, dtype=float)
    if X.shape != pts.shape:
        raise DimensionError(f"field shape {X.shape} does not match curve {pts.shape}")
    if velocity is None:
        velocity = derive(pts, gamma.ds, 1, accuracy, gamma.periodic)
        if np.max(np.linalg.norm(velocity, axis=1)) < 1e-14:
            raise DegenerateCurveError("constant curve: the tangent direction is undefined")
    if check_tangent:
        X = ensure_tangent(gamma.space, pts, X)
    dX = derive(X, gamma.ds, 1, accuracy, gamma.periodic)
    return dX + inner(velocity, X)[:, None] * pts
