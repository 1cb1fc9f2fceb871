"""
Quasi-analytic extension of a singular function into the plane.

For f with a single singular point x0 the extension is

    f~(x, y) = sum_{l<n} f^(l)(x) (iy)^l / l! * zeta(y / (x - x0)),

supported in the cone |y| < |x - x0|, and its d-bar derivative omega is
evaluated in closed form. All evaluators are pure and may be shared
between threads.
"""

from functools import cached_property
from math import factorial
from typing import Optional, Tuple

import numpy as np
import pandas as pd
import structlog

from .exceptions import InvalidParameterError, QuadratureError, UnsupportedOrderError
from .func_classes import ZETA, SingularFunction, holder_constant, seminorm_n
from .models import L1WeightReport, PlanarHolderReport

logger = structlog.get_logger(__name__)


class QAExtension:
    """Evaluator pair (f~, omega) of a one-point singular function"""

    def __init__(self, f: SingularFunction, n: int):
        self.f = f
        self.n = n
        self.gamma = f.gamma

    def __repr__(self) -> str:
        return f"QAExtension({self.f.label!r}, n={self.n})"

    @cached_property
    def seminorm(self) -> float:
        return seminorm_n(self.f).value

    def _cone(self, x, y) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        u = x - self.f.x0
        inside = (u != 0.0) & (np.abs(y) < np.abs(u))
        us = np.where(inside, u, 1.0)
        return x, y, us, inside

    def _taylor(self, x: np.ndarray, y: np.ndarray, terms: int) -> np.ndarray:
        total = np.zeros(x.shape, dtype=complex)
        iy = 1j * y
        for l in range(terms):
            total = total + self.f.eval_derivative(l, x) * iy ** l / factorial(l)
        return total

    def eval_ftilde(self, x, y) -> np.ndarray:
        x, y, us, inside = self._cone(x, y)
        values = self._taylor(x, y, self.n) * ZETA.eval(y / us)
        return np.where(inside, values, 0.0)

    def eval_omega(self, x, y) -> np.ndarray:
        """d-bar derivative (d/dx + i d/dy) f~ / 2; exactly zero off the open cone."""
        x, y, us, inside = self._cone(x, y)
        v = y / us
        sigma = ZETA.eval(v)
        head = 0.5 * self.f.eval_derivative(self.n, x) * (1j * y) ** (self.n - 1) / factorial(self.n - 1) * sigma
        dsigma = 0.5 * ZETA.eval_derivative(1, v) * (-y / us ** 2 + 1j / us)
        tail = self._taylor(x, y, self.n) * dsigma
        return np.where(inside, head + tail, 0.0)

    def majorant(self, x, y) -> np.ndarray:
        """|||f|||_n |x - x0|^(gamma - n) |y|^(n - 1) on the cone, zero elsewhere"""
        x, y, us, inside = self._cone(x, y)
        values = self.seminorm * np.abs(us) ** (self.gamma - self.n) * np.abs(y) ** (self.n - 1)
        within = inside & (np.abs(x - self.f.x0) <= self.f.R)
        return np.where(within, values, 0.0)


def build_extension(f: SingularFunction, n: Optional[int] = None) -> QAExtension:
    """Quasi-analytic extension of order n (defaults to f.n)"""
    n = f.n if n is None else n
    if n < 2:
        raise UnsupportedOrderError(f"extension order must be >= 2, got {n}")
    if not f.compact:
        raise InvalidParameterError(
            f"{f.label or 'f'} is not compactly supported; split it with unit_partition first"
        )
    if not f.one_point:
        raise InvalidParameterError(
            f"{f.label or 'f'} has several singular points; use partition_at_singularities first"
        )
    logger.debug("built extension", label=f.label, n=n, gamma=f.gamma)
    return QAExtension(f, n)


def cone_grid(ext: QAExtension, radial: int = 200, angular: int = 81) -> Tuple[np.ndarray, np.ndarray]:
    """Log-spaced |x - x0| in [1e-6 R, R] on both sides times v = y / (x - x0) in (-1, 1)."""
    R = ext.f.R
    d = R * np.logspace(-6.0, 0.0, radial)
    u = np.concatenate([-d[::-1], d])
    v = np.linspace(-0.995, 0.995, angular)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    return (ext.f.x0 + uu).ravel(), (vv * uu).ravel()


def omega_bound_constant(ext: QAExtension, radial: int = 200, angular: int = 81) -> float:
    """Empirical C in |omega| <= C |||f|||_n |x - x0|^(gamma - n) |y|^(n - 1)"""
    x, y = cone_grid(ext, radial, angular)
    if ext.seminorm == 0.0:
        return 0.0
    omega = np.abs(ext.eval_omega(x, y))
    bound = ext.majorant(x, y)
    live = bound > 0
    if not np.any(live):
        return 0.0
    return float(np.max(omega[live] / bound[live]))


def omega_profile(ext: QAExtension, x=None, y=None) -> pd.DataFrame:
    """Table of (x, y, |omega|, majorant) on the cone grid or the given points"""
    if x is None or y is None:
        x, y = cone_grid(ext, radial=60, angular=21)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return pd.DataFrame({
        "x": x.ravel(),
        "y": y.ravel(),
        "abs_omega": np.abs(ext.eval_omega(x, y)).ravel(),
        "majorant": ext.majorant(x, y).ravel(),
    })


def _geometric_panels(R: float, levels: int) -> np.ndarray:
    """Edges 0 < R 2^-levels < ... < R/2 < R"""
    return np.concatenate([[0.0], R * 2.0 ** -np.arange(levels, -1, -1)])


def _panel_nodes(edges: np.ndarray, order: int, split: int) -> Tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(order)
    fine = np.unique(np.concatenate([
        np.linspace(a, b, split + 1) for a, b in zip(edges[:-1], edges[1:])
    ]))
    a, b = fine[:-1, None], fine[1:, None]
    nodes = 0.5 * (b - a) * t[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


def _l1_integral(ext: QAExtension, order: int, split: int, levels: int) -> Tuple[float, int]:
    # x = x0 + u, y = v u, dx dy = |u| du dv, integrand |omega| / |y| |u| = |omega| / |v|
    R = ext.f.R
    du_nodes, du_weights = _panel_nodes(_geometric_panels(R, levels), order, split)
    dv_nodes, dv_weights = _panel_nodes(np.array([0.0, 0.5, 1.0]), order, split)
    total = 0.0
    for side in (-1.0, 1.0):
        u = side * du_nodes
        for vside in (-1.0, 1.0):
            v = vside * dv_nodes
            uu, vv = np.meshgrid(u, v, indexing="ij")
            omega = np.abs(ext.eval_omega(ext.f.x0 + uu, vv * uu))
            integrand = omega / np.abs(vv)
            total += float(du_weights @ integrand @ dv_weights)
    return total, 4 * du_nodes.size * dv_nodes.size


def verify_l1_weight(ext: QAExtension, order: int = 12, rtol: float = 1e-2,
                     atol: float = 1e-12) -> L1WeightReport:
    """
    Integral of |omega(x, y)| / |y| over the plane, computed twice with the
    mesh doubled. Raises QuadratureError when the two disagree beyond rtol.
    """
    levels = int(np.ceil(40.0 / ext.gamma))
    coarse, _ = _l1_integral(ext, order, 1, levels)
    fine, nodes = _l1_integral(ext, order, 2, levels + 8)
    error = abs(fine - coarse)
    if error > rtol * abs(fine) + atol:
        raise QuadratureError(
            f"L1 weight of omega not converged: {coarse:.6g} vs {fine:.6g}",
            achieved_error=error, refinements=2,
        )
    constant = omega_bound_constant(ext)
    logger.debug("verified L1 weight", label=ext.f.label, value=fine, error=error, nodes=nodes)
    return L1WeightReport(value=fine, error_estimate=error, node_count=nodes, majorant_constant=constant)


def holder_check_plane(ext: QAExtension, pairs: int = 20000, seed: int = 0) -> PlanarHolderReport:
    """Empirical planar Hoelder constant of f~ at kappa = min(gamma, 1) from random pairs."""
    rng = np.random.default_rng(seed)
    kappa = min(ext.gamma, 1.0)
    R = ext.f.R
    radius = R * 10.0 ** rng.uniform(-6.0, 0.1, pairs)
    angle = rng.uniform(0.0, 2.0 * np.pi, pairs)
    p = np.column_stack([ext.f.x0 + radius * np.cos(angle), radius * np.sin(angle)])
    step = R * 10.0 ** rng.uniform(-7.0, 0.0, pairs)
    heading = rng.uniform(0.0, 2.0 * np.pi, pairs)
    q = p + np.column_stack([step * np.cos(heading), step * np.sin(heading)])
    half = pairs // 2
    q[half:] = p[rng.permutation(pairs)[half:]]

    fp = ext.eval_ftilde(p[:, 0], p[:, 1])
    fq = ext.eval_ftilde(q[:, 0], q[:, 1])
    dist = np.hypot(*(p - q).T)
    live = dist > 0
    constant = float(np.max(np.abs(fp - fq)[live] / dist[live] ** kappa)) if np.any(live) else 0.0

    u = np.abs(p[:, 0] - ext.f.x0)
    near = u > 0
    origin = float(np.max(np.abs(fp[near]) / u[near] ** ext.gamma)) if np.any(near) else 0.0

    # pairs along the real axis, where f~ = f
    line = np.sort(p[:2000, 0])
    constant = max(constant, holder_constant(np.real(ext.eval_ftilde(line, 0.0 * line)), line, kappa))
    return PlanarHolderReport(kappa=kappa, constant=constant, origin_constant=origin, pairs=pairs)
