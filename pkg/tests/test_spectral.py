import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokestrace.exceptions import DomainError
from stokestrace.harness import gen_unit_operator
from stokestrace.linalg import eigh, operator_norm
from stokestrace.spectral import (
    Interval,
    apply_function,
    band_digit,
    cumulative_projector,
    dyadic_band,
    dyadic_floor_form,
    dyadic_partial_sum,
    dyadic_partial_sum_values,
    interval_projector,
)


def test_cumulative_projector_examples():
    sd = eigh(np.diag([1.0, 2.0]))
    assert np.allclose(cumulative_projector(sd, 1.5), np.diag([1, 0]))
    assert np.allclose(cumulative_projector(sd, 2.0), np.eye(2))
    assert np.allclose(cumulative_projector(sd, 0.99), 0)
    assert np.allclose(interval_projector(sd, 1.0, 2.0), np.diag([0, 1]))


def test_apply_function_examples():
    h = gen_unit_operator(3, 6)
    sd = eigh(h)
    assert operator_norm(apply_function(sd, lambda t: t) - h) <= 1e-12
    assert np.allclose(apply_function(sd, lambda t: 1.0), np.eye(6))
    assert np.allclose(apply_function(eigh(np.diag([1.0, 2.0])), lambda t: t * t), np.diag([1, 4]))
    with pytest.raises(DomainError):
        apply_function(eigh(np.diag([0.0, 1.0])), lambda t: 1.0 / t if t else np.inf)


def test_interval_validation():
    with pytest.raises(DomainError):
        Interval(1.0, 1.0)
    assert Interval(0, 2).width == 2


def _digit_by_intervals(lam, k):
    # lam in (2^-k (2j - 1), 2^-k 2j] for some j >= 1, in exact rationals
    lam = Fraction(lam)
    j = math.ceil(lam * 2 ** (k - 1))  # the only candidate cell
    return j >= 1 and Fraction(2 * j - 1, 2 ** k) < lam <= Fraction(2 * j, 2 ** k)


@pytest.mark.parametrize("m", range(65))
def test_band_digit_on_grid(m):
    lam = m / 64
    for k in range(1, 9):
        assert bool(band_digit(lam, k)) == _digit_by_intervals(lam, k)


@settings(max_examples=200, deadline=None)
@given(lam=st.floats(0.0, 1.0), k=st.integers(1, 30))
def test_band_digit_property(lam, k):
    assert bool(band_digit(lam, k)) == _digit_by_intervals(lam, k)


def test_band_examples():
    sd = eigh(np.diag([0.25, 0.75]))
    assert np.allclose(dyadic_band(sd, 1).projection, np.diag([0, 1]))
    assert np.allclose(dyadic_band(sd, 2).projection, 0)
    assert np.allclose(dyadic_band(sd, 3).projection, np.eye(2))
    zero = eigh(np.zeros((3, 3)))
    ident = eigh(np.eye(3))
    for k in range(1, 12):
        assert dyadic_band(zero, k).rank == 0
        assert np.allclose(dyadic_band(ident, k).projection, np.eye(3))


def test_partial_sum_examples():
    sd = eigh(np.diag([0.25, 0.75]))
    assert operator_norm(np.diag([0.25, 0.75]) - dyadic_partial_sum(sd, 10)) <= 2.0 ** -10
    for K in (1, 5, 30):
        assert np.allclose(dyadic_partial_sum(eigh(np.eye(3)), K), (1 - 2.0 ** -K) * np.eye(3), atol=0)
        assert np.allclose(dyadic_partial_sum(eigh(np.zeros((2, 2))), K), 0)


def test_partial_sum_rejects_out_of_range():
    with pytest.raises(DomainError):
        dyadic_partial_sum(eigh(np.diag([-0.1, 0.5])), 5)
    with pytest.raises(DomainError):
        dyadic_band(eigh(np.diag([0.5, 1.1])), 1)
    with pytest.raises(DomainError):
        dyadic_partial_sum(eigh(np.diag([0.1, 0.5])), 0)


@settings(max_examples=200, deadline=None)
@given(lam=st.floats(0.0, 1.0), K=st.integers(1, 45))
def test_scalar_partial_sum_bounds(lam, K):
    s = float(dyadic_partial_sum_values(lam, K))
    assert 0.0 <= lam - s <= 2.0 ** -K or (lam == 0.0 and s == 0.0)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("K", [3, 8, 12, 25])
def test_floor_form_matches_partial_sum(seed, K):
    sd = eigh(gen_unit_operator(seed, 10, "dyadic-rational" if seed % 2 else "uniform"), interval=(0.0, 1.0))
    assert operator_norm(dyadic_partial_sum(sd, K) - dyadic_floor_form(sd, K)) <= 1e-12
