#!/usr/bin/env python3
"""
Tests for the asymptotic coefficients W0, W1, A and D
"""

import numpy as np
import pytest

from szegolab.domains import Cube, Disk, Polygon
from szegolab.exceptions import InvalidParameterError
from szegolab.func_classes import abs_pow, cos_bump, eta_function, power, rescale
from szegolab.asym_coeffs import (
    binomial_identity_check,
    coefficient_holder_ratio,
    coefficient_lipschitz_ratio,
    ga,
    gd,
    predicted_trace,
    predicted_w1,
    w0,
    w1,
    w1_extrapolated,
)
from szegolab.wiener_hopf import bump_symbol, const_symbol

NODES = 256


def constant(c):
    return lambda x, xi: np.full(np.broadcast_shapes(x.shape[:-1], xi.shape[:-1]), c)


@pytest.mark.parametrize("s", [0.5, 1.0, -2.0])
def test_ga_of_square(s):
    assert ga(power(2), s).value == pytest.approx(-s ** 2 / (4.0 * np.pi ** 2), rel=1e-10)


def test_ga_of_entropy():
    result = ga(eta_function(1.0), 1.0)
    assert result.real == pytest.approx(1.0 / 12.0, rel=1e-8)
    assert result.quadrature_error_estimate < 1e-8
    assert ga(eta_function(1.0), 0.0).value == 0.0


def test_gd_edge_cases():
    g = power(3)
    assert gd(g, 0.7, 0.7).value == 0.0
    assert gd(g, 0.7, 0.0).value == pytest.approx(ga(g, 0.7).value, rel=1e-12)


@pytest.mark.parametrize("g", [power(3), eta_function(1.0), abs_pow(0.5)], ids=["poly", "eta", "abs_pow"])
def test_gd_is_symmetric(g):
    assert gd(g, 0.7, 0.2).value == pytest.approx(gd(g, 0.2, 0.7).value, rel=1e-10, abs=1e-14)


def test_complex_argument_needs_entire_function():
    assert np.isfinite(ga(power(2), 1.0 + 0.5j).value)
    with pytest.raises(InvalidParameterError):
        ga(eta_function(1.0), 0.5 + 0.1j)


@pytest.mark.parametrize("p, z, s", [(2, 0.5, 1.0), (3, -0.25, 0.75), (4, 0.3 + 0.2j, 0.5 - 0.4j)])
def test_binomial_identity(p, z, s):
    assert binomial_identity_check(p, z, s) <= 1e-10


def test_binomial_identity_range():
    with pytest.raises(InvalidParameterError):
        binomial_identity_check(9, 0.5, 1.0)


def test_w0_on_unit_disks(unit_disk):
    result = w0(const_symbol(1.0), unit_disk, unit_disk)
    assert result.real == pytest.approx(0.25, rel=1e-12)
    assert result.quadrature_error_estimate <= 1e-12


def test_w0_is_additive_over_disjoint_pieces(unit_disk):
    def b(x, xi):
        return np.exp(-np.sum(x ** 2, axis=-1) - np.sum(xi ** 2, axis=-1))

    whole = Polygon(vertices=((-1.0, -0.5), (1.0, -0.5), (1.0, 0.5), (-1.0, 0.5)))
    left = Polygon(vertices=((-1.0, -0.5), (0.25, -0.5), (0.25, 0.5), (-1.0, 0.5)))
    right = Polygon(vertices=((0.25, -0.5), (1.0, -0.5), (1.0, 0.5), (0.25, 0.5)))
    total = w0(b, whole, unit_disk).real
    assert w0(b, left, unit_disk).real + w0(b, right, unit_disk).real == pytest.approx(total, rel=1e-10)


def test_w0_callable_matches_symbol(unit_disk):
    square = Cube(dimension=2, half_width=0.5)
    symbol = w0(bump_symbol(1.0), square, unit_disk).real
    callable_value = w0(lambda x, xi: bump_symbol(1.0).eval(x, xi), square, unit_disk).real
    assert symbol == pytest.approx(callable_value, rel=1e-10)


def test_w1_of_constant_on_unit_circles(unit_disk):
    """(2 pi)^-1 (1/12) int int |cos(theta - phi)| = 1/3"""
    coarse = w1(constant(1.0 / 12.0), unit_disk.boundary_mesh(NODES), unit_disk.boundary_mesh(NODES))
    assert coarse.real == pytest.approx(1.0 / 3.0, rel=1e-3)
    extrapolated = w1_extrapolated(constant(1.0 / 12.0), unit_disk, unit_disk, NODES)
    assert extrapolated.real == pytest.approx(1.0 / 3.0, rel=1e-6)


def test_w1_scales_with_radius():
    small, large = Disk(dimension=2, radius=1.0), Disk(dimension=2, radius=2.0)
    ratio = w1_extrapolated(constant(1.0), large, small, NODES).real / w1_extrapolated(constant(1.0), small, small,
                                                                                        NODES).real
    assert ratio == pytest.approx(2.0, rel=1e-8)


def test_predicted_w1_for_square(unit_disk):
    result = predicted_w1(power(2), const_symbol(1.0), unit_disk, unit_disk, nodes=NODES, threads=1)
    assert result.real == pytest.approx(-1.0 / np.pi ** 2, rel=1e-6)


def test_predicted_w1_for_jump(unit_disk):
    result = predicted_w1(power(2), const_symbol(1.0), unit_disk, unit_disk, a1=const_symbol(0.5), nodes=NODES,
                          threads=1)
    assert result.real == pytest.approx(-1.0 / (4.0 * np.pi ** 2), rel=1e-6)


def test_predicted_w1_vanishes_for_equal_jump(unit_disk):
    a = const_symbol(0.5)
    assert predicted_w1(eta_function(1.0), a, unit_disk, unit_disk, a1=a, nodes=NODES).value == 0.0


def test_predicted_trace_combines_terms(unit_disk):
    alpha = 8.0
    result = predicted_trace(power(2), const_symbol(1.0), unit_disk, unit_disk, alpha, nodes=NODES)
    expected = alpha ** 2 * 0.25 - alpha * np.log(alpha) / np.pi ** 2
    assert result.real == pytest.approx(expected, rel=1e-6)


def test_predicted_trace_complement_term_needs_vanishing_at_zero(unit_disk):
    with pytest.raises(InvalidParameterError):
        predicted_trace(cos_bump(), const_symbol(1.0), unit_disk, unit_disk, 4.0, a1=bump_symbol(2.0))
    with pytest.raises(InvalidParameterError):
        predicted_trace(power(2), const_symbol(1.0), unit_disk, unit_disk, 4.0, a1=const_symbol(0.5))


@pytest.mark.parametrize("s", [0.25, 1.0, -0.8])
def test_lipschitz_bound(s):
    assert coefficient_lipschitz_ratio(cos_bump(), s) <= 1.0


def test_holder_bound_is_finite():
    ratios = [coefficient_holder_ratio(abs_pow(0.5), s) for s in (0.01, 0.1, 0.5)]
    assert all(np.isfinite(r) and r > 0 for r in ratios)


def test_holder_ratio_shrinks_with_support():
    """|t|^(1/2) cut off at radius r: A(g; s) ~ r^(1/2) while the bound only falls like r^(1/4)"""
    radii = [2.0 ** -k for k in range(1, 7)]
    ratios = [coefficient_holder_ratio(rescale(abs_pow(0.5), 1.0 / r), 0.5) for r in radii]
    assert all(np.isfinite(r) and r > 0 for r in ratios)
    assert max(ratios) <= 1.0
    for wider, narrower in zip(ratios, ratios[1:]):
        assert narrower < wider


@pytest.mark.parametrize("s", [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, -0.3, -1.5])
def test_lipschitz_bound_over_many_arguments(s):
    assert coefficient_lipschitz_ratio(cos_bump(), s) <= 1.0
