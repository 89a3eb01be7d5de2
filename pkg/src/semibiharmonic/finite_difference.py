"""Finite-difference engine on uniform 1-D grids.

Central stencils in the interior (wrap-around when periodic), off-centred
stencils of the same accuracy at interval boundaries, and a Fourier option for
periodic data.
"""

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import GridTooSmallError, SemibiharmonicError

SPECTRAL = "spectral"


@lru_cache(maxsize=None)
def fd_weights(offsets, order):
    """Exact weights of the finite-difference formula for ``order``-th derivative.

    Fornberg's recursion carried out in rational arithmetic, so that the
    weights of every stencil sum to exactly zero for ``order >= 1``.

    Parameters
    ----------
    offsets : tuple of int
        Node offsets (in units of the spacing) relative to the evaluation point.
    order : int

    Returns
    -------
    tuple of Fraction, one weight per offset
    """
    x = [Fraction(o) for o in offsets]
    n = len(x)
    if order >= n:
        raise GridTooSmallError(f"{n} nodes cannot resolve a derivative of order {order}")
    c = [[Fraction(0)] * (order + 1) for _ in range(n)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = x[0]
    for i in range(1, n):
        mn = min(i, order)
        c2 = Fraction(1)
        c5 = c4
        c4 = x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2
            for k in range(mn, 0, -1):
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3
            c[j][0] = c4 * c[j][0] / c3
        c1 = c2
    return tuple(row[order] for row in c)


def half_width(order, accuracy):
    """Half-width of the central stencil for the given derivative order and accuracy."""
    return (order + 1) // 2 - 1 + accuracy // 2


def stencil_size(order, accuracy, periodic=False):
    """Minimum number of nodes needed by :func:`derive`."""
    central = 2 * half_width(order, accuracy) + 1
    if periodic:
        return central
    return max(central, order + accuracy)


def _check(order, accuracy):
    if order not in (1, 2, 3, 4):
        raise SemibiharmonicError(f"derivative order must be 1..4, got {order}")
    if accuracy not in (2, 4, SPECTRAL):
        raise SemibiharmonicError(f"accuracy must be 2, 4 or 'spectral', got {accuracy!r}")


def derive(values, ds, order=1, accuracy=4, periodic=False, axis=0):
    """Derivative of uniformly sampled data along ``axis``.

    Parameters
    ----------
    values : array_like
        Samples; any trailing/leading axes are carried along.
    ds : float
        Grid spacing.
    order : int
        Derivative order, 1..4.
    accuracy : {2, 4, 'spectral'}
        Formal order of accuracy.  ``'spectral'`` requires ``periodic`` and
        differentiates the trigonometric interpolant (Nyquist mode dropped).
    periodic : bool
        Wrap-around stencils if true, off-centred boundary stencils otherwise.

    Returns
    -------
    ndarray with the shape of ``values``
    """
    _check(order, accuracy)
    f = np.asarray(values, dtype=float)
    if axis != 0:
        f = np.moveaxis(f, axis, 0)
    n = f.shape[0]
    if accuracy == SPECTRAL:
        if not periodic:
            raise SemibiharmonicError("spectral differentiation needs a periodic grid")
        out = _spectral(f, ds, order)
        return out if axis == 0 else np.moveaxis(out, 0, axis)

    need = stencil_size(order, accuracy, periodic)
    if n < need:
        raise GridTooSmallError(
            f"derivative of order {order} at accuracy {accuracy} needs {need} nodes, got {n}"
        )
    p = half_width(order, accuracy)
    offsets = tuple(range(-p, p + 1))
    weights = [float(w) for w in fd_weights(offsets, order)]
    out = np.zeros_like(f)
    if periodic:
        for j, w in zip(offsets, weights):
            if j != 0 and w != 0.0:
                out += w * (np.roll(f, -j, axis=0) - f)
    else:
        core = f[p:n - p]
        for j, w in zip(offsets, weights):
            if j != 0 and w != 0.0:
                out[p:n - p] += w * (f[p + j:n - p + j] - core)
        width = order + accuracy
        for i in list(range(min(p, n))) + list(range(max(n - p, p), n)):
            start = 0 if i < p else n - width
            offs = tuple(range(start - i, start - i + width))
            ws = fd_weights(offs, order)
            acc = np.zeros_like(f[i])
            for j, w in zip(offs, ws):
                if j != 0 and w != 0:
                    acc += float(w) * (f[i + j] - f[i])
            out[i] = acc
    out /= ds ** order
    return out if axis == 0 else np.moveaxis(out, 0, axis)


@lru_cache(maxsize=64)
def _spectral_multiplier(n, ds, order):
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=ds)
    if n % 2 == 0:
        k[-1] = 0.0
    return (1j * k) ** order


def _spectral(f, ds, order):
    n = f.shape[0]
    mult = _spectral_multiplier(n, float(ds), order).reshape((-1,) + (1,) * (f.ndim - 1))
    return np.fft.irfft(mult * np.fft.rfft(f, axis=0), n=n, axis=0)


def boundary_trim(periodic, accuracy=4, passes=1):
    """Nodes to drop at each interval end after ``passes`` chained first derivatives.

    One-sided boundary stencils leave an error profile that is not smooth from
    node to node; every further central pass widens the polluted band by one
    stencil half-width.
    """
    if periodic or accuracy == SPECTRAL:
        return 0
    return passes * half_width(1, accuracy)
