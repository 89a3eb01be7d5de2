"""Bessel functions J0, J1, Y0, Y1 of real argument.

Ascending power series (with the logarithmic series for Y) below
:data:`CROSSOVER`, Hankel's asymptotic expansion above it.
"""

import math

import numpy as np

from .errors import DomainError, SemibiharmonicError

#: switch from the power series to the asymptotic expansion at this argument
CROSSOVER = 13.0

EULER_GAMMA = 0.5772156649015329

_SERIES_TERMS = 80
_KINDS = ("J0", "J1", "Y0", "Y1")


def _series(x, kind):
    q = -0.25 * x * x
    half = 0.5 * x
    if kind in ("J0", "Y0"):
        term = 1.0
        j = 1.0
        y = 0.0
        harmonic = 0.0
        for k in range(1, _SERIES_TERMS):
            term *= q / (k * k)
            harmonic += 1.0 / k
            j += term
            y -= harmonic * term
            if abs(term) * max(harmonic, 1.0) < 1e-18 * max(abs(j), 1e-300):
                break
        if kind == "J0":
            return j
        return (2.0 / math.pi) * ((math.log(half) + EULER_GAMMA) * j + y)
    # order one: J1 = (x/2) sum q^k / (k!(k+1)!)
    term = 1.0
    j = 1.0
    # psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
    acc = 1.0 - 2.0 * EULER_GAMMA
    harmonic = 0.0
    for k in range(1, _SERIES_TERMS):
        term *= q / (k * (k + 1))
        harmonic += 1.0 / k
        j += term
        acc += (2.0 * harmonic + 1.0 / (k + 1) - 2.0 * EULER_GAMMA) * term
        if abs(term) * (harmonic + 1.0) < 1e-18 * max(abs(j), 1e-300):
            break
    j1 = half * j
    if kind == "J1":
        return j1
    return -2.0 / (math.pi * x) + (2.0 / math.pi) * math.log(half) * j1 - half * acc / math.pi


def _asymptotic(x, kind):
    nu = 0 if kind in ("J0", "Y0") else 1
    mu = 4.0 * nu * nu
    p = 0.0
    q = 0.0
    a = 1.0
    prev = math.inf
    for k in range(0, 60):
        if k > 0:
            a *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        size = abs(a)
        if size > prev or size < 1e-17:
            break
        prev = size
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sign * a
        else:
            q += sign * a
    chi = x - (0.5 * nu + 0.25) * math.pi
    amp = math.sqrt(2.0 / (math.pi * x))
    if kind[0] == "J":
        return amp * (p * math.cos(chi) - q * math.sin(chi))
    return amp * (p * math.sin(chi) + q * math.cos(chi))


def _scalar(kind, x):
    if kind[0] == "Y" and x <= 0.0:
        raise DomainError(f"{kind} needs x > 0, got {x}")
    if kind[0] == "J" and x < 0.0:
        raise DomainError(f"{kind} is evaluated here for x >= 0 only, got {x}")
    if x == 0.0:
        return 1.0 if kind == "J0" else 0.0
    if x < CROSSOVER:
        return _series(x, kind)
    return _asymptotic(x, kind)


def bessel(kind, x):
    """Bessel function ``kind`` in {'J0', 'J1', 'Y0', 'Y1'} at ``x``.

    Parameters
    ----------
    kind : str
    x : float or array_like
        ``x >= 0`` for J, ``x > 0`` for Y.

    Returns
    -------
    float or ndarray
    """
    if kind not in _KINDS:
        raise SemibiharmonicError(f"unknown Bessel kind {kind!r}; expected one of {_KINDS}")
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return _scalar(kind, float(arr))
    return np.array([_scalar(kind, float(v)) for v in arr.ravel()]).reshape(arr.shape)


def j0(x):
    return bessel("J0", x)


def j1(x):
    return bessel("J1", x)


def y0(x):
    return bessel("Y0", x)


def y1(x):
    return bessel("Y1", x)
