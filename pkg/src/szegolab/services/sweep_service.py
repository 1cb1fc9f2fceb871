"""
Randomized sweeps of the quasi-commutator inequalities. Every instance draws
from its own seeded generator, so results do not depend on the thread count.
"""

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import structlog

from ..config import settings
from ..ensembles import contraction, gue, haar_projection, instance_rng, perturbed_pair, wishart
from ..func_classes import SingularFunction, seminorm_n
from ..models import BoundSweepConfig, BoundSweepRow, BoundSweepSummary, Theorem
from ..registry import function_from_label
from ..schatten import bks_check, projection_ratio, ps_ratio, quasi_commutator_ratio, unbounded_support_bound

logger = structlog.get_logger(__name__)

GEST_RADIUS = 3.0


def _instance_quasi_commutator(config: BoundSweepConfig, f: SingularFunction, norm: float, m: int,
                               rng: np.random.Generator) -> Tuple[float, Dict[str, float]]:
    A, B = perturbed_pair(m, rng, decay=config.decay)
    J = contraction(m, m, rng)
    return quasi_commutator_ratio(f, A, B, J, config.sigma, config.p, norm), {}


def _instance_projection(config: BoundSweepConfig, f: SingularFunction, norm: float, m: int,
                         rng: np.random.Generator) -> Tuple[float, Dict[str, float]]:
    A = gue(m, rng, radius=0.75)
    rank = int(rng.integers(1, m))
    P = haar_projection(m, rng, rank)
    ratio = projection_ratio(f, A, P, config.sigma, config.p, norm, tol=config.projection_tol)
    return ratio, {"rank": float(rank)}


def _instance_gest(config: BoundSweepConfig, f: SingularFunction, norm: float, m: int,
                   rng: np.random.Generator) -> Tuple[float, Dict[str, float]]:
    A, B = perturbed_pair(m, rng, radius=GEST_RADIUS, decay=config.decay)
    J = contraction(m, m, rng)
    return unbounded_support_bound(f, A, B, J, config.sigma, config.p), {}


def _instance_ps(config: BoundSweepConfig, f: SingularFunction, norm: float, m: int,
                 rng: np.random.Generator) -> Tuple[float, Dict[str, float]]:
    A, B = perturbed_pair(m, rng, decay=config.decay)
    return ps_ratio(f, A, B, config.p), {}


class SweepService:
    """Random-instance sweeps for bound-sweep"""

    INSTANCES: Dict[Theorem, Callable] = {
        Theorem.QUASI_COMMUTATOR: _instance_quasi_commutator,
        Theorem.PROJECTION: _instance_projection,
        Theorem.UNBOUNDED: _instance_gest,
        Theorem.LIPSCHITZ: _instance_ps,
    }

    def __init__(self, threads: Optional[int] = None):
        self.threads = threads or settings.thread_count
        self.executor = ThreadPoolExecutor(max_workers=self.threads)

    def close(self) -> None:
        self.executor.shutdown(wait=True)

    def __enter__(self) -> "SweepService":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _bks_instance(self, config: BoundSweepConfig, instance: int, m: int) -> Tuple[BoundSweepRow, bool]:
        rng = instance_rng(config.seed, instance)
        gamma = config.gammas[instance % len(config.gammas)]
        p = config.ps[(instance // len(config.gammas)) % len(config.ps)]
        report = bks_check(wishart(m, rng), wishart(m, rng), gamma, p, slack=config.inequality_slack)
        ratio = report.lhs / report.rhs if report.rhs > 0 else (0.0 if report.lhs == 0 else np.inf)
        row = BoundSweepRow(instance=instance, dimension=m, params={"gamma": gamma, "p": p}, ratio=ratio)
        return row, not report.holds

    def bound_sweep(self, config: BoundSweepConfig) -> Tuple[List[BoundSweepRow], BoundSweepSummary]:
        """Draw config.trials instances, cycling over config.dims, and collect the bound ratios"""
        f = None if config.theorem == Theorem.BKS else self._function(config)
        norm = seminorm_n(f).value if config.theorem in (Theorem.QUASI_COMMUTATOR, Theorem.PROJECTION) else 0.0

        def one(instance: int) -> Tuple[BoundSweepRow, bool]:
            m = config.dims[instance % len(config.dims)]
            if config.theorem == Theorem.BKS:
                return self._bks_instance(config, instance, m)
            ratio, params = self.INSTANCES[config.theorem](config, f, norm, m, instance_rng(config.seed, instance))
            params = dict(params, sigma=config.sigma, p=config.p)
            return BoundSweepRow(instance=instance, dimension=m, params=params, ratio=ratio), False

        results = list(self.executor.map(one, range(config.trials)))
        rows = [row for row, _ in results]
        summary = self._summarize(config, rows, sum(violated for _, violated in results))
        logger.info("bound sweep", theorem=config.theorem.value, trials=config.trials,
                    max_ratio=summary.max_ratio, scaling=summary.dimension_scaling_factor,
                    violations=summary.violations)
        return rows, summary

    @staticmethod
    def _function(config: BoundSweepConfig) -> SingularFunction:
        if config.theorem == Theorem.UNBOUNDED:
            return function_from_label("lorentz")
        return function_from_label(config.function, n=config.n)

    @staticmethod
    def _summarize(config: BoundSweepConfig, rows: List[BoundSweepRow], violations: int) -> BoundSweepSummary:
        ratios = np.array([row.ratio for row in rows])
        by_dimension: Dict[int, float] = defaultdict(float)
        for row in rows:
            by_dimension[row.dimension] = max(by_dimension[row.dimension], row.ratio)
        maxima = [by_dimension[m] for m in sorted(by_dimension)]
        steps = [hi / lo for lo, hi in zip(maxima, maxima[1:]) if lo > 0]
        return BoundSweepSummary(
            theorem=config.theorem, trials=len(rows),
            max_ratio=float(ratios.max(initial=0.0)), mean_ratio=float(ratios.mean()) if ratios.size else 0.0,
            max_by_dimension=dict(by_dimension), dimension_scaling_factor=max(steps, default=1.0),
            violations=violations,
        )
