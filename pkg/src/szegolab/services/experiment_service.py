"""
Service layer for the alpha sweeps: Szego asymptotics, jump symbols,
cross-term growth, and the Helffer-Sjostrand acceptance suite.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..asym_coeffs import predicted_w1
from ..config import settings
from ..domains import build_domain
from ..ensembles import instance_rng, uniform_spectrum
from ..exceptions import FitError, LabError
from ..func_classes import chebyshev_approximant, power, seminorm_n, split_at_singularity
from ..hs_calculus import hs_apply_function, spectral_apply
from ..models import (
    ClosureConfig,
    ClosureRow,
    CrossGrowthConfig,
    CrossVariant,
    GrowthRow,
    GrowthTable,
    HSCase,
    HSSuiteConfig,
    HSSuiteReport,
    JumpConfig,
    JumpPath,
    QuadratureSpec,
    SplitConfig,
    SplitRow,
    SweepResult,
    SzegoConfig,
)
from ..registry import function_from_label, symbol_from_label
from ..schatten import norm_p
from ..wiener_hopf import WHModel, build_model, cross_term, trace_D, trace_V_power

logger = structlog.get_logger(__name__)

MIN_ALPHA_SPAN = 2.0


def fit_two_term(alphas: Sequence[float], traces: Sequence[float], dimension: int = 2) -> Tuple[float, float, float, float]:
    """
    Least-squares fit tr = c1 alpha^(d-1) log(alpha) + c2 alpha^(d-1).
    Returns (c1, c2, rms residual of tr / alpha^(d-1), standard error of c1).
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size < 3:
        raise FitError(f"two-term fit needs at least 3 alpha values, got {alphas.size}", MIN_ALPHA_SPAN)
    span = alphas.max() / alphas.min()
    if span < MIN_ALPHA_SPAN:
        raise FitError(f"alpha range spans a factor {span:.3g}; need at least {MIN_ALPHA_SPAN:g}", MIN_ALPHA_SPAN)
    y = np.asarray(traces, dtype=float) / alphas ** (dimension - 1)
    x = np.log(alphas)
    design = np.column_stack([x, np.ones_like(x)])
    (c1, c2), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ np.array([c1, c2])
    rms = float(np.sqrt(np.mean(residual ** 2)))
    dof = max(alphas.size - 2, 1)
    spread = float(np.sum((x - x.mean()) ** 2))
    se = float(np.sqrt(np.sum(residual ** 2) / dof / spread))
    return float(c1), float(c2), rms, se


def _relative_gap(fitted: float, predicted: float) -> Optional[float]:
    return None if predicted == 0 else abs(fitted - predicted) / abs(predicted)


class ExperimentService:
    """Runs alpha sweeps on a worker pool; results come back in alpha order"""

    def __init__(self, threads: Optional[int] = None):
        self.threads = threads or settings.thread_count
        self.executor = ThreadPoolExecutor(max_workers=self.threads)

    def close(self) -> None:
        self.executor.shutdown(wait=True)

    def __enter__(self) -> "ExperimentService":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _map(self, fn: Callable, items: Sequence) -> List:
        return list(self.executor.map(fn, items))

    def _model(self, config, alpha: float) -> WHModel:
        return build_model(config.lambda_domain, config.omega_domain, alpha, config.grid, config.dimension)

    def _domains(self, config):
        return (build_domain(config.lambda_domain, config.dimension),
                build_domain(config.omega_domain, config.dimension))

    def _sweep(self, config: SzegoConfig, trace: Callable[[WHModel], float], predicted: float,
               label: str) -> SweepResult:
        def one(alpha: float) -> float:
            value = trace(self._model(config, alpha))
            logger.info("sweep point", label=label, alpha=alpha, trace=value)
            return value

        alphas = list(config.alphas)
        fit_two_term(alphas, np.ones(len(alphas)), config.dimension)
        traces = self._map(one, alphas)
        c1, c2, residual, se = fit_two_term(alphas, traces, config.dimension)
        normalized = [t / a ** (config.dimension - 1) for t, a in zip(traces, alphas)]
        return SweepResult(
            alpha_values=alphas, traces=traces, normalized_traces=normalized, fitted_c1=c1, fitted_c2=c2,
            predicted_W1=predicted, relative_gap=_relative_gap(c1, predicted), fit_residual=residual,
            c1_standard_error=se, label=label,
        )

    def szego_sweep(self, config: SzegoConfig) -> SweepResult:
        """tr D_alpha(a, Lambda, Omega; g) over the alpha list against W1(A(g; re a))"""
        a = symbol_from_label(config.symbol)
        g = function_from_label(config.function)
        lam, omega = self._domains(config)
        predicted = predicted_w1(g, a, lam, omega, nodes=config.w1_nodes).real
        logger.info("szego sweep", function=config.function, symbol=config.symbol, predicted=predicted)
        return self._sweep(config, lambda model: trace_D(model, a, g, threads=1), predicted,
                           f"szego {config.function} {config.symbol}")

    def jump_sweep(self, config: JumpConfig) -> SweepResult:
        """H_alpha(a, a1) with any g, or V_alpha(a, a1) with g_p, against W1(D(g; re a, re a1))"""
        a = symbol_from_label(config.symbol)
        a1 = symbol_from_label(config.symbol_jump)
        if not (a.xi_compact and a1.xi_compact):
            logger.warning("jump symbols are not compact in xi; the discrete box truncates them",
                           symbol=config.symbol, symbol_jump=config.symbol_jump)
        lam, omega = self._domains(config)
        if config.path == JumpPath.POLYNOMIAL:
            g = power(config.power)
            trace = lambda model: float(np.real(trace_V_power(model, a, a1, config.power, threads=1)))
        else:
            g = function_from_label(config.function)
            trace = lambda model: trace_D(model, a, g, a1=a1, threads=1)
        predicted = predicted_w1(g, a, lam, omega, a1=a1, nodes=config.w1_nodes).real
        logger.info("jump sweep", function=g.label, path=config.path.value, predicted=predicted)
        return self._sweep(config, trace, predicted, f"jump {g.label} {config.symbol}|{config.symbol_jump}")

    def cross_growth_sweep(self, config: CrossGrowthConfig) -> GrowthTable:
        """||cross term||_q^q against alpha^(d-1) log(alpha) (sandwiched) or alpha^(d-1)"""
        a = symbol_from_label(config.symbol)
        d = config.dimension

        def one(alpha: float) -> GrowthRow:
            model = build_model(config.lambda_domain, config.omega_domain, alpha, config.grid, d)
            value = norm_p(cross_term(model, a, config.variant, threads=1), config.q) ** config.q
            scale = alpha ** (d - 1) * (np.log(alpha) if config.variant == CrossVariant.SANDWICHED else 1.0)
            logger.info("cross growth", variant=config.variant.value, alpha=alpha, value=value)
            return GrowthRow(alpha=alpha, quasi_norm_power=value, normalized=value / scale)

        rows = self._map(one, list(config.alphas))
        normalized = np.array([r.normalized for r in rows])
        if np.all(normalized == 0):
            band = 1.0
        elif np.min(normalized) == 0:
            band = np.inf
        else:
            band = float(normalized.max() / normalized.min())
        return GrowthTable(variant=config.variant, q=config.q, rows=rows, band=band)

    def hs_vs_spectral_suite(self, config: HSSuiteConfig) -> HSSuiteReport:
        """Operator-norm deviation of hs_apply from spectral_apply on random Hermitian matrices"""
        started = time.perf_counter()
        cases = [(label, False) for label in config.functions] + [(label, True) for label in config.singular_functions]

        def one(trial: int) -> List[HSCase]:
            rng = instance_rng(config.seed, trial)
            A = uniform_spectrum(config.dimension, -config.spectrum_radius, config.spectrum_radius, rng)
            out = []
            for label, singular in cases:
                tol = config.singular_tolerance if singular else config.smooth_tolerance
                threshold = config.singular_threshold if singular else config.smooth_threshold
                order = config.singular_order if singular else config.smooth_order
                try:
                    f = function_from_label(label)
                    approx = hs_apply_function(f, A, QuadratureSpec(target_tolerance=tol), n=order, threads=1)
                    deviation = float(np.linalg.norm(approx.entries - spectral_apply(f, A).entries, 2))
                    out.append(HSCase(function=label, trial=trial, dimension=config.dimension, deviation=deviation,
                                      tolerance=tol, threshold=threshold,
                                      error_estimate=approx.error_estimate or 0.0,
                                      passed=deviation <= threshold))
                except LabError as e:
                    logger.warning("hs case failed", function=label, trial=trial, error=str(e))
                    out.append(HSCase(function=label, trial=trial, dimension=config.dimension, deviation=np.inf,
                                      tolerance=tol, threshold=threshold, error_estimate=np.inf, passed=False,
                                      error=str(e)))
            return out

        results = [case for batch in self._map(one, range(config.trials)) for case in batch]
        passed = sum(case.passed for case in results)
        report = HSSuiteReport(
            cases=results, passed=passed, failed=len(results) - passed,
            max_deviation=max((case.deviation for case in results), default=0.0),
            elapsed_seconds=time.perf_counter() - started,
        )
        logger.info("hs suite", passed=report.passed, failed=report.failed, max_deviation=report.max_deviation)
        return report

    def split_sweep(self, config: SplitConfig) -> List[SplitRow]:
        """Localized singular piece g zeta((t - z)/R) as R shrinks: seminorm, W1 and trace"""
        a = symbol_from_label(config.symbol)
        g = function_from_label(config.function)
        lam, omega = self._domains(config)
        base = seminorm_n(g.model_copy(update={"n": 1})).value
        model = self._model(config, config.alpha)

        def one(radius: float) -> SplitRow:
            piece, _ = split_at_singularity(g, config.singular_point, radius)
            norm = seminorm_n(piece.model_copy(update={"n": 1})).value
            w1 = predicted_w1(piece, a, lam, omega, nodes=config.w1_nodes, threads=1).real
            trace = trace_D(model, a, piece, threads=1)
            logger.info("split", radius=radius, w1=w1, trace=trace)
            return SplitRow(radius=radius, seminorm_ratio=norm / base if base else 0.0,
                            w1_singular_piece=w1, trace_singular_piece=trace)

        return self._map(one, list(config.radii))

    def polynomial_closure_sweep(self, config: ClosureConfig) -> List[ClosureRow]:
        """|tr D(g) - tr D(g_eps)| / (eps alpha^(d-1) log alpha) for a Chebyshev approximant g_eps"""
        a = symbol_from_label(config.symbol)
        g = function_from_label(config.function)
        approx, eps = chebyshev_approximant(g, config.degree, tuple(config.interval))
        d = config.dimension

        def one(alpha: float) -> ClosureRow:
            model = self._model(config, alpha)
            difference = abs(trace_D(model, a, g, threads=1) - trace_D(model, a, approx, threads=1))
            scale = eps * alpha ** (d - 1) * np.log(alpha)
            return ClosureRow(alpha=alpha, epsilon=eps, trace_difference=difference,
                              normalized=difference / scale if scale > 0 else 0.0)

        return self._map(one, list(config.alphas))
