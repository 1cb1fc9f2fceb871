#!/usr/bin/env python3
"""
Tests for the quasi-analytic extension and its d-bar derivative
"""

import numpy as np
import pytest

from szegolab.exceptions import InvalidParameterError, UnsupportedOrderError
from szegolab.func_classes import abs_pow, bump, eta_function, lorentz, rescale
from szegolab.qa_extension import (
    build_extension,
    holder_check_plane,
    omega_bound_constant,
    omega_profile,
    verify_l1_weight,
)


@pytest.fixture
def sqrt_extension():
    return build_extension(abs_pow(0.5), 2)


def test_omega_vanishes_off_the_cone(sqrt_extension):
    x = np.array([0.3, -0.2, 0.5, 0.0])
    y = np.array([0.3, 0.25, -0.9, 0.1])
    assert np.all(sqrt_extension.eval_omega(x, y) == 0.0)
    assert np.all(sqrt_extension.eval_ftilde(x, y) == 0.0)


def test_extension_restricts_to_function(sqrt_extension):
    x = np.linspace(-0.9, 0.9, 19)
    x = x[x != 0.0]
    np.testing.assert_allclose(sqrt_extension.eval_ftilde(x, 0.0 * x).real, abs_pow(0.5)(x), atol=1e-15)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("point", [(0.3, 0.05), (-0.4, 0.1), (0.7, -0.2)])
def test_omega_matches_finite_difference(point, n):
    """omega = (d/dx + i d/dy) f~ / 2 inside |y| < |x - x0| / 2"""
    ext = build_extension(abs_pow(0.5), n)
    x, y = point
    h = 1e-5
    dx = (ext.eval_ftilde(x + h, y) - ext.eval_ftilde(x - h, y)) / (2 * h)
    dy = (ext.eval_ftilde(x, y + h) - ext.eval_ftilde(x, y - h)) / (2 * h)
    assert complex(ext.eval_omega(x, y)) == pytest.approx(complex(0.5 * (dx + 1j * dy)), rel=1e-5, abs=1e-8)


def test_rescaling_covariance():
    """Extension of R^-gamma f(R .) equals R^-gamma f~(R x, R y)"""
    f, R = abs_pow(0.5), 0.5
    ext = build_extension(f, 2)
    scaled = build_extension(rescale(f, R), 2)
    x = np.array([0.4, -1.1, 1.5])
    y = np.array([0.1, 0.3, -0.6])
    np.testing.assert_allclose(scaled.eval_ftilde(x, y), R ** -f.gamma * ext.eval_ftilde(R * x, R * y), atol=1e-12)


def test_omega_bounded_by_majorant(sqrt_extension):
    constant = omega_bound_constant(sqrt_extension)
    assert np.isfinite(constant)
    assert constant > 0


def test_l1_weight_converges(sqrt_extension):
    report = verify_l1_weight(sqrt_extension)
    assert report.value > 0
    assert report.error_estimate <= 1e-2 * report.value + 1e-12


def test_planar_holder_constant_is_finite(sqrt_extension):
    report = holder_check_plane(sqrt_extension, pairs=4000, seed=3)
    assert report.kappa == 0.5
    assert np.isfinite(report.constant)
    assert np.isfinite(report.origin_constant)


def test_profile_columns(sqrt_extension):
    frame = omega_profile(sqrt_extension)
    assert list(frame.columns) == ["x", "y", "abs_omega", "majorant"]
    assert (frame["abs_omega"] >= 0).all()


def test_smooth_function_extension():
    ext = build_extension(bump(0.5))
    assert ext.n == bump(0.5).n
    assert ext.eval_omega(ext.f.x0, 0.0) == 0.0


@pytest.mark.parametrize("f, n, error", [
    (abs_pow(0.5), 1, UnsupportedOrderError),
    (lorentz(), 2, InvalidParameterError),
    (eta_function(1.0), 2, InvalidParameterError),
])
def test_extension_preconditions(f, n, error):
    with pytest.raises(error):
        build_extension(f, n)
