"""Tests for Lambert W and the Lambert-W transform pair."""

import numpy as np
import pytest
from scipy.special import lambertw

from qganfinance.data.lambert import (
    lambert_degaussianize,
    lambert_degaussianize_array,
    lambert_gaussianize_array,
    lambert_w,
    lambert_w_array,
)
from qganfinance.errors import NegativeArgument


def test_lambert_w_known_values() -> None:
    """W(0) = 0, W(e) = 1 and W(x e^x) = x."""
    assert lambert_w(0.0) == 0.0
    assert lambert_w(np.e) == pytest.approx(1.0, abs=1e-14)
    assert lambert_w(2.0 * np.exp(2.0)) == pytest.approx(2.0, rel=1e-14)


def test_lambert_w_matches_scipy_over_wide_range() -> None:
    """The Halley iteration agrees with scipy's principal branch."""
    x = np.concatenate([np.linspace(0.0, 10.0, 101), np.logspace(-12, 12, 49)])
    expected = np.real(lambertw(x))

    np.testing.assert_allclose(lambert_w_array(x), expected, rtol=1e-13, atol=1e-300)


def test_lambert_w_satisfies_defining_equation() -> None:
    """w e^w reproduces the argument."""
    x = np.logspace(-6, 6, 200)
    w = lambert_w_array(x)

    np.testing.assert_allclose(w * np.exp(w), x, rtol=1e-12)


def test_lambert_w_rejects_negative_and_nan() -> None:
    """Negative or NaN arguments raise NegativeArgument."""
    with pytest.raises(NegativeArgument):
        lambert_w(-0.1)
    with pytest.raises(NegativeArgument):
        lambert_w_array(np.array([1.0, np.nan]))


def test_transform_round_trip() -> None:
    """degaussianize(gaussianize(v)) = v over |v| <= 10."""
    v = np.linspace(-10.0, 10.0, 2001)
    for delta in (0.0, 0.1, 0.5, 1.0):
        back = lambert_degaussianize_array(lambert_gaussianize_array(v, delta), delta)
        np.testing.assert_allclose(back, v, rtol=1e-10, atol=1e-12)


def test_transform_is_odd_and_shrinks_tails() -> None:
    """The forward transform is odd and pulls large values toward zero."""
    v = np.array([0.5, 2.0, 8.0])
    w = lambert_gaussianize_array(v, 0.5)

    np.testing.assert_allclose(lambert_gaussianize_array(-v, 0.5), -w)
    assert np.all(np.abs(w) < np.abs(v))


def test_zero_delta_is_identity() -> None:
    """delta = 0 leaves values unchanged in both directions."""
    assert lambert_degaussianize(1.7, 0.0) == 1.7
    np.testing.assert_array_equal(lambert_gaussianize_array([1.0, -3.0], 0.0), [1.0, -3.0])


def test_negative_delta_rejected() -> None:
    """delta < 0 is rejected."""
    with pytest.raises(NegativeArgument):
        lambert_gaussianize_array([1.0], -0.5)
