#!/usr/bin/env python3
"""
Tests for the experiment and sweep services
"""

import numpy as np
import pytest

from szegolab.exceptions import FitError
from szegolab.models import (
    BoundSweepConfig,
    ClosureConfig,
    CrossGrowthConfig,
    CrossVariant,
    GridConfig,
    HSSuiteConfig,
    JumpConfig,
    JumpPath,
    SplitConfig,
    SzegoConfig,
    Theorem,
)
from szegolab.services.experiment_service import ExperimentService, fit_two_term
from szegolab.services.sweep_service import SweepService

SMALL_GRID = GridConfig(n_base=12, alpha_ref=2.0, n_cap=16)


@pytest.fixture
def experiments():
    with ExperimentService(threads=2) as service:
        yield service


def test_two_term_fit_recovers_coefficients():
    alphas = np.array([4.0, 8.0, 16.0, 32.0])
    traces = alphas * (0.25 * np.log(alphas) - 1.5)
    c1, c2, rms, se = fit_two_term(alphas, traces)
    assert c1 == pytest.approx(0.25)
    assert c2 == pytest.approx(-1.5)
    assert rms <= 1e-12
    assert se <= 1e-10


def test_two_term_fit_in_three_dimensions():
    alphas = np.array([2.0, 4.0, 8.0])
    c1, c2, _, _ = fit_two_term(alphas, alphas ** 2 * (2.0 * np.log(alphas) + 1.0), dimension=3)
    assert (c1, c2) == pytest.approx((2.0, 1.0))


@pytest.mark.parametrize("alphas", [[4.0, 8.0], [4.0, 5.0, 6.0]])
def test_two_term_fit_rejects_short_ranges(alphas):
    with pytest.raises(FitError):
        fit_two_term(alphas, np.ones(len(alphas)))


def test_szego_sweep_of_zero_function(experiments):
    config = SzegoConfig(function="zero", alphas=[2.0, 3.0, 4.0], grid=SMALL_GRID, w1_nodes=64)
    result = experiments.szego_sweep(config)
    assert result.alpha_values == [2.0, 3.0, 4.0]
    assert result.predicted_W1 == 0.0
    assert result.relative_gap is None
    assert result.consistent_with_zero()


def test_sweep_rejects_short_alpha_range_before_tracing(experiments, mocker):
    trace = mocker.patch("szegolab.services.experiment_service.trace_D")
    config = SzegoConfig(function="zero", alphas=[2.0, 3.0], grid=SMALL_GRID, w1_nodes=64)
    with pytest.raises(FitError):
        experiments.szego_sweep(config)
    trace.assert_not_called()


def test_linear_jump_has_no_trace(experiments):
    """V_alpha with g_1: the trace difference and its prediction both vanish"""
    config = JumpConfig(path=JumpPath.POLYNOMIAL, power=1, symbol="const:1", symbol_jump="const:0.5",
                        alphas=[2.0, 3.0, 4.0], grid=SMALL_GRID, w1_nodes=64)
    result = experiments.jump_sweep(config)
    assert abs(result.predicted_W1) <= 1e-10
    assert np.all(np.abs(result.traces) <= 1e-9)


def test_jump_config_needs_power_for_polynomial_path():
    with pytest.raises(ValueError):
        JumpConfig(path=JumpPath.POLYNOMIAL)


def test_cross_growth_of_zero_symbol(experiments):
    config = CrossGrowthConfig(symbol="const:0", alphas=[2.0, 4.0], grid=SMALL_GRID)
    table = experiments.cross_growth_sweep(config)
    assert table.band == 1.0
    assert [row.alpha for row in table.rows] == [2.0, 4.0]


def test_cross_growth_rows_are_positive(experiments):
    config = CrossGrowthConfig(variant=CrossVariant.PROJECTION, alphas=[2.0, 4.0], grid=SMALL_GRID)
    table = experiments.cross_growth_sweep(config)
    assert all(row.quasi_norm_power > 0 for row in table.rows)
    assert 1.0 <= table.band < np.inf


def test_hs_suite_small(experiments):
    config = HSSuiteConfig(functions=["gauss_bump"], singular_functions=["abs_pow:0.5"], dimension=8, trials=2)
    report = experiments.hs_vs_spectral_suite(config)
    assert len(report.cases) == 4
    assert report.failed == 0
    assert report.max_deviation <= config.singular_threshold


def test_hs_suite_records_bad_labels(experiments):
    config = HSSuiteConfig(functions=["no_such_function"], singular_functions=[], dimension=4, trials=1)
    report = experiments.hs_vs_spectral_suite(config)
    assert report.failed == 1
    assert report.cases[0].error


def test_split_sweep_rows(experiments):
    config = SplitConfig(function="eta:1", radii=[0.25, 0.125], alpha=2.0, grid=SMALL_GRID, w1_nodes=64)
    rows = experiments.split_sweep(config)
    assert [row.radius for row in rows] == [0.25, 0.125]
    assert all(np.isfinite(row.trace_singular_piece) and row.seminorm_ratio > 0 for row in rows)


def test_closure_sweep_rows(experiments):
    config = ClosureConfig(function="cos_bump", degree=12, alphas=[2.0, 4.0], grid=SMALL_GRID)
    rows = experiments.polynomial_closure_sweep(config)
    assert len(rows) == 2
    assert all(row.epsilon > 0 and row.normalized >= 0 for row in rows)


def test_bound_sweep_is_independent_of_thread_count():
    config = BoundSweepConfig(theorem=Theorem.QUASI_COMMUTATOR, trials=6, dims=[4, 6], seed=3)
    with SweepService(threads=1) as serial, SweepService(threads=3) as parallel:
        rows_serial, summary_serial = serial.bound_sweep(config)
        rows_parallel, summary_parallel = parallel.bound_sweep(config)
    assert [r.ratio for r in rows_serial] == [r.ratio for r in rows_parallel]
    assert summary_serial.max_ratio == summary_parallel.max_ratio
    assert sorted(summary_serial.max_by_dimension) == [4, 6]


def test_bks_sweep_has_no_violations_for_p_at_least_one():
    config = BoundSweepConfig(theorem=Theorem.BKS, trials=8, dims=[4], gammas=[0.25, 0.5], ps=[1.0, 2.0])
    with SweepService(threads=2) as service:
        rows, summary = service.bound_sweep(config)
    assert summary.violations == 0
    assert {(row.params["gamma"], row.params["p"]) for row in rows} == {
        (0.25, 1.0), (0.5, 1.0), (0.25, 2.0), (0.5, 2.0),
    }
    assert summary.max_ratio <= 1.0 + 1e-9


@pytest.mark.parametrize("theorem", [Theorem.PROJECTION, Theorem.UNBOUNDED, Theorem.LIPSCHITZ])
def test_other_theorems_give_finite_ratios(theorem):
    config = BoundSweepConfig(theorem=theorem, trials=4, dims=[6], function="abs_pow:0.5")
    with SweepService(threads=2) as service:
        rows, summary = service.bound_sweep(config)
    assert summary.trials == 4
    assert all(np.isfinite(row.ratio) for row in rows)


@pytest.mark.slow
def test_entropy_sweep_matches_prediction():
    """eta_1 on unit disks: the log coefficient approaches W1(A(eta; 1)) = 1/3"""
    with ExperimentService(threads=4) as service:
        result = service.szego_sweep(SzegoConfig())
    assert result.predicted_W1 == pytest.approx(1.0 / 3.0, rel=1e-4)
    assert result.relative_gap <= 0.15


@pytest.mark.slow
def test_polynomial_jump_sweep_matches_prediction():
    """a = 1, a1 = 1/2, g_2 on unit disks: W1(D(g_2; 1, 1/2)) = -1/(4 pi^2)"""
    config = JumpConfig(path=JumpPath.POLYNOMIAL, power=2, symbol="const:1", symbol_jump="const:0.5")
    with ExperimentService(threads=4) as service:
        result = service.jump_sweep(config)
    assert result.predicted_W1 == pytest.approx(-1.0 / (4.0 * np.pi ** 2), rel=1e-4)
    assert result.relative_gap <= 0.3


@pytest.mark.slow
@pytest.mark.parametrize("variant", [CrossVariant.SANDWICHED, CrossVariant.PROJECTION])
def test_cross_growth_band_is_at_most_two(variant):
    config = CrossGrowthConfig(variant=variant, q=0.5, alphas=[4.0, 8.0, 16.0, 32.0])
    with ExperimentService(threads=4) as service:
        table = service.cross_growth_sweep(config)
    assert all(row.quasi_norm_power > 0 for row in table.rows)
    assert table.band <= 2.0


@pytest.mark.slow
def test_polynomial_closure_stays_bounded():
    config = ClosureConfig(function="cos_bump", degree=12, alphas=[4.0, 8.0, 16.0, 32.0])
    with ExperimentService(threads=4) as service:
        rows = service.polynomial_closure_sweep(config)
    normalized = np.array([row.normalized for row in rows])
    assert np.all(np.isfinite(normalized))
    assert normalized.max() <= 2.0 * max(normalized[0], 1e-12)
