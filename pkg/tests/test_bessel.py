import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bessel_reference, j0_first_zero_bisection, j0_series
from semibiharmonic.bessel import CROSSOVER, bessel, j0, j1, y0, y1
from semibiharmonic.errors import DomainError, SemibiharmonicError

KINDS = ("J0", "J1", "Y0", "Y1")


def test_values_at_zero():
    assert j0(0.0) == 1.0
    assert j1(0.0) == 0.0


def test_first_zero_of_j0():
    x_star = float(j0_first_zero_bisection())
    assert x_star == pytest.approx(2.404825557695773, abs=1e-15)
    assert abs(j0(x_star)) < 1e-9


def test_series_oracle_agrees_with_mpmath():
    for x in (0.5, 3.0, 12.0):
        assert float(j0_series(x)) == pytest.approx(bessel_reference("J0", x)[0], abs=1e-15)


@pytest.mark.parametrize("kind", KINDS)
def test_relative_accuracy_on_log_grid(kind):
    x = np.geomspace(1e-3, 50, 300)
    ref = bessel_reference(kind, x)
    err = np.abs(bessel(kind, x) - ref)
    # relative error away from zeros, absolute 1e-10 where the function is small
    assert np.all(err <= 1e-10 * np.maximum(np.abs(ref), 1.0))


@pytest.mark.parametrize("kind", KINDS)
def test_branches_agree_across_crossover(kind):
    x = np.linspace(CROSSOVER - 1.0, CROSSOVER + 1.0, 41)
    np.testing.assert_allclose(bessel(kind, x), bessel_reference(kind, x), atol=1e-10)


def test_wronskian_identity():
    x = np.geomspace(0.1, 50, 4000)
    lhs = j1(x) * y0(x) - j0(x) * y1(x)
    np.testing.assert_allclose(lhs, 2 / (np.pi * x), rtol=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 50))
def test_derivative_relation_j0_prime_is_minus_j1(x):
    # fourth-order central difference; h balances truncation against the 1e-12 evaluation error
    h = 1e-2
    d = (j0(x - 2 * h) - 8 * j0(x - h) + 8 * j0(x + h) - j0(x + 2 * h)) / (12 * h)
    assert abs(d + j1(x)) < 1e-8


def test_domain_errors():
    with pytest.raises(DomainError):
        y0(0.0)
    with pytest.raises(DomainError):
        y1(-1.0)
    with pytest.raises(DomainError):
        j0(-1.0)
    with pytest.raises(SemibiharmonicError):
        bessel("K0", 1.0)


def test_array_shape_preserved():
    x = np.linspace(0.5, 3, 6).reshape(2, 3)
    assert bessel("J1", x).shape == (2, 3)
