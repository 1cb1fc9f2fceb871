#!/usr/bin/env python3
"""
Tests for the grid discretization of Wiener-Hopf operators and their traces
"""

import numpy as np
import pytest

from szegolab.domains import Disk
from szegolab.exceptions import ConstraintError, InvalidParameterError, NyquistError, ShapeMismatchError
from szegolab.func_classes import eta_function, zero_function
from szegolab.models import CrossVariant, GridConfig
from szegolab.schatten import require_projection, singular_values
from szegolab.wiener_hopf import (
    MAX_DENSE_BOX,
    WHModel,
    assemble_H,
    assemble_S,
    assemble_T,
    assemble_V,
    build_model,
    bump_symbol,
    bump_x_symbol,
    const_symbol,
    cross_term,
    gauss_xi_symbol,
    idempotency_defect,
    op_alpha,
    projection_omega,
    trace_D,
    trace_V_power,
)


def test_nyquist_violation_reports_required_points(unit_disk):
    grid = GridConfig(n_base=8, alpha_ref=4.0, n_cap=16)
    with pytest.raises(NyquistError) as info:
        build_model(unit_disk, unit_disk, 32.0, grid)
    assert info.value.required_n == 42
    assert info.value.required_n % 2 == 0


def test_dimension_mismatch(unit_disk):
    with pytest.raises(ShapeMismatchError):
        WHModel(lambda_domain=unit_disk, omega_domain=Disk(dimension=3), alpha=2.0, n_points=12)


def test_grid_rule_is_even_and_capped(small_grid):
    assert small_grid.points_for(2.0) == 12
    assert small_grid.points_for(3.0) == 16
    assert small_grid.points_for(100.0) == 16


def test_commensurate_projection_is_exact(commensurate_model):
    assert commensurate_model.dxi == pytest.approx(1.0)
    assert set(np.unique(commensurate_model.omega_multiplier)) <= {0.0, 1.0}
    P = projection_omega(commensurate_model)
    require_projection(P)
    assert idempotency_defect(P) <= 1e-12
    assert idempotency_defect(commensurate_model) == 0.0


def test_idempotency_defect_halves_as_alpha_doubles(unit_disk):
    grid = GridConfig(n_base=24, alpha_ref=4.0, n_cap=96)
    defects = [idempotency_defect(build_model(unit_disk, unit_disk, alpha, grid)) for alpha in (8.0, 16.0, 32.0)]
    assert all(d > 0 for d in defects)
    for coarse, fine in zip(defects, defects[1:]):
        assert 0.35 <= fine / coarse <= 0.65


def test_constant_symbol_is_identity(small_model):
    np.testing.assert_allclose(op_alpha(small_model, const_symbol(1.0)).entries, np.eye(small_model.size),
                               atol=1e-12)


def test_op_alpha_is_linear_in_the_symbol(small_model):
    a, b = bump_x_symbol(), gauss_xi_symbol(0.7)
    combined = op_alpha(small_model, a.scaled(2.0) + b).entries
    separate = 2.0 * op_alpha(small_model, a).entries + op_alpha(small_model, b).entries
    np.testing.assert_allclose(combined, separate, atol=1e-12)


@pytest.mark.parametrize("symbol", [bump_symbol(1.0), gauss_xi_symbol(0.7), const_symbol(0.5)])
def test_real_translation_invariant_symbol_gives_hermitian_operator(small_model, symbol):
    A = op_alpha(small_model, symbol).entries
    np.testing.assert_allclose(A, A.conj().T, atol=1e-12)


def test_truncations_share_the_hermitian_part(small_model):
    """S is the Hermitian part of T, H the Hermitian part of V"""
    a, a1 = bump_x_symbol(), const_symbol(0.5)
    T = assemble_T(small_model, a).entries
    np.testing.assert_allclose(assemble_S(small_model, a).entries, 0.5 * (T + T.conj().T), atol=1e-12)
    V = assemble_V(small_model, a, a1).entries
    np.testing.assert_allclose(assemble_H(small_model, a, a1).entries, 0.5 * (V + V.conj().T), atol=1e-12)
    np.testing.assert_allclose(V, T + assemble_T(small_model, a1, complement=True).entries, atol=1e-12)


def test_dense_box_limit(unit_disk):
    model = WHModel(lambda_domain=unit_disk, omega_domain=unit_disk, alpha=2.0, n_points=66)
    assert model.size > MAX_DENSE_BOX
    with pytest.raises(ConstraintError):
        op_alpha(model, const_symbol(1.0))


def test_truncated_operator_is_hermitian_contraction(small_model):
    S = assemble_S(small_model, const_symbol(1.0))
    assert S.hermitian
    assert S.shape == (small_model.lambda_rows.size,) * 2
    lam = np.linalg.eigvalsh(S.entries)
    assert lam.min() >= -1e-12
    assert lam.max() <= 1.0 + 1e-12


def test_trace_of_zero_function_vanishes(small_model):
    assert trace_D(small_model, const_symbol(1.0), zero_function()) == 0.0


def test_exact_and_matrix_bulk_paths_agree(small_model):
    g = eta_function(1.0)
    exact = trace_D(small_model, const_symbol(1.0), g, path="exact")
    matrix = trace_D(small_model, const_symbol(1.0), g, path="matrix")
    assert exact == pytest.approx(matrix, abs=1e-9)


def test_x_dependent_symbol_needs_matrix_path(small_model):
    with pytest.raises(InvalidParameterError):
        trace_D(small_model, bump_x_symbol(), eta_function(1.0), path="exact")
    with pytest.raises(InvalidParameterError):
        trace_D(small_model, const_symbol(1.0), eta_function(1.0), path="fourier")
    assert np.isfinite(trace_D(small_model, bump_x_symbol(), eta_function(1.0)))


def test_jump_with_equal_symbols_has_no_trace(commensurate_model):
    """a1 = a removes the jump across the boundary of Omega"""
    a = const_symbol(0.5)
    assert trace_D(commensurate_model, a, eta_function(1.0), a1=a) == pytest.approx(0.0, abs=1e-9)
    assert abs(trace_V_power(commensurate_model, a, a, 2)) <= 1e-9


def test_power_out_of_range(small_model):
    a = const_symbol(0.5)
    with pytest.raises(InvalidParameterError):
        trace_V_power(small_model, a, a, 7)


@pytest.mark.parametrize("variant", list(CrossVariant))
def test_cross_terms_vanish_for_zero_symbol(small_model, variant):
    assert cross_term(small_model, const_symbol(0.0), variant).norm() == 0.0


def test_fourier_cross_term_keeps_singular_values(small_model):
    a = const_symbol(1.0)
    reduced = cross_term(small_model, a, CrossVariant.PROJECTION)
    assert reduced.grid_meta["basis"] == "fourier"
    P = projection_omega(small_model).entries
    full = P @ op_alpha(small_model, a).entries @ (np.eye(small_model.size) - P)
    expected = singular_values(full).values
    got = singular_values(reduced).values
    np.testing.assert_allclose(got, expected[:got.size], atol=1e-12)
    assert np.all(expected[got.size:] <= 1e-12)


def test_sandwiched_cross_term_shape(small_model):
    T = cross_term(small_model, const_symbol(1.0), CrossVariant.SANDWICHED)
    assert T.shape == (small_model.lambda_rows.size, small_model.lambda_complement.size)
    assert T.norm() > 0
