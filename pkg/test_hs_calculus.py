#!/usr/bin/env python3
"""
Tests for the Helffer-Sjostrand functional calculus against the spectral oracle
"""

import numpy as np
import pytest

from szegolab.ensembles import contraction, gue, instance_rng, with_spectrum
from szegolab.exceptions import DomainError, ShapeMismatchError
from szegolab.func_classes import abs_pow, bump, gauss_bump, poly_bump
from szegolab.hs_calculus import (
    DenseOperator,
    hs_apply,
    hs_apply_function,
    perturbation,
    quasi_commutator,
    resolvent,
    resolvent_identity_defect,
    spectral_apply,
)
from szegolab.models import CalculusMethod, HSScheme, QuadratureSpec
from szegolab.qa_extension import build_extension


def deviation(approx: DenseOperator, exact: DenseOperator) -> float:
    return float(np.linalg.norm(approx.entries - exact.entries, 2))


@pytest.mark.parametrize("f", [gauss_bump(), bump(1.0)])
def test_smooth_function_matches_spectral(f, hermitian_matrix):
    spec = QuadratureSpec(target_tolerance=1e-7)
    approx = hs_apply_function(f, hermitian_matrix, spec, n=6, threads=1)
    assert deviation(approx, spectral_apply(f, hermitian_matrix)) <= 1e-6
    assert approx.hermitian
    assert approx.error_estimate <= 1e-7


def test_square_root_singularity(hermitian_matrix):
    f = abs_pow(0.5)
    approx = hs_apply_function(f, hermitian_matrix, QuadratureSpec(target_tolerance=1e-4), n=2, threads=1)
    assert deviation(approx, spectral_apply(f, hermitian_matrix)) <= 1e-3


def test_two_point_singularities(hermitian_matrix):
    f = poly_bump(3)
    approx = hs_apply_function(f, hermitian_matrix, QuadratureSpec(target_tolerance=1e-6), threads=1)
    assert deviation(approx, spectral_apply(f, hermitian_matrix)) <= 1e-5
    assert len(approx.grid_meta["pieces"]) == 3


def test_function_supported_off_spectrum(rng):
    """bump(0.2) vanishes on a spectrum inside [0.5, 0.75]"""
    A = with_spectrum(rng.uniform(0.5, 0.75, 10), rng)
    approx = hs_apply_function(bump(0.2), A, QuadratureSpec(target_tolerance=1e-6), threads=1)
    assert approx.norm() <= 1e-6


def test_resolvent_scheme_agrees_with_eigen_scheme(hermitian_matrix):
    ext = build_extension(gauss_bump(), 6)
    eigen = hs_apply(ext, hermitian_matrix, QuadratureSpec(target_tolerance=1e-7), threads=1)
    direct = hs_apply(ext, hermitian_matrix, QuadratureSpec(target_tolerance=1e-7, scheme=HSScheme.RESOLVENT),
                      threads=1)
    assert deviation(eigen, direct) <= 1e-6


def test_extension_orders_agree(hermitian_matrix):
    spec = QuadratureSpec(target_tolerance=1e-7)
    second = hs_apply(build_extension(gauss_bump(), 2), hermitian_matrix, spec, threads=1)
    third = hs_apply(build_extension(gauss_bump(), 3), hermitian_matrix, spec, threads=1)
    assert deviation(second, third) <= 1e-6


def test_results_do_not_depend_on_thread_count(hermitian_matrix):
    spec = QuadratureSpec(target_tolerance=1e-6)
    one = hs_apply_function(abs_pow(0.5), hermitian_matrix, spec, threads=1)
    four = hs_apply_function(abs_pow(0.5), hermitian_matrix, spec, threads=4)
    np.testing.assert_array_equal(one.entries, four.entries)


def test_non_hermitian_input_rejected(rng):
    with pytest.raises(DomainError):
        spectral_apply(gauss_bump(), rng.standard_normal((4, 4)))
    with pytest.raises(DomainError):
        DenseOperator.checked_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_resolvent_norm_and_real_axis(hermitian_matrix):
    z = 0.1 + 0.25j
    R = resolvent(hermitian_matrix, z)
    assert R.norm() <= 1.0 / 0.25 * (1 + 1e-10)
    with pytest.raises(DomainError):
        resolvent(hermitian_matrix, 0.3)


@pytest.mark.parametrize("instance", range(5))
def test_resolvent_identity(instance):
    rng = instance_rng(7, instance)
    A, B = gue(6, rng, 1.0), gue(4, rng, 1.0)
    J = contraction(6, 4, rng)
    assert resolvent_identity_defect(A, B, J, 0.2 + 0.3j) <= 1e-10


def test_quasi_commutator_vanishes_for_commuting_data(hermitian_matrix):
    identity = np.eye(hermitian_matrix.shape[0])
    value = quasi_commutator(abs_pow(0.5), hermitian_matrix, hermitian_matrix, identity)
    assert value.norm() <= 1e-14


def test_quasi_commutator_hs_method_carries_error(rng):
    A, B = gue(5, rng, 0.7), gue(5, rng, 0.7)
    J = contraction(5, 5, rng)
    spec = QuadratureSpec(target_tolerance=1e-6)
    hs = quasi_commutator(gauss_bump(), A, B, J, method=CalculusMethod.HS, spec=spec, n=4)
    exact = quasi_commutator(gauss_bump(), A, B, J)
    assert hs.error_estimate is not None
    assert deviation(hs, exact) <= 1e-5


def test_perturbation_shapes(rng):
    with pytest.raises(ShapeMismatchError):
        perturbation(gue(3, rng), gue(4, rng), np.eye(3))
    V = perturbation(gue(3, rng), gue(2, rng), np.ones((3, 2)))
    assert V.shape == (3, 2)
