"""
Singular values, Schatten quasi-norms and numerical checks of the
quasi-commutator inequalities.
"""

from typing import Optional

import numpy as np
import scipy.linalg
import structlog

from .exceptions import (
    ConstraintError,
    InvalidParameterError,
    NotPositiveSemidefiniteError,
    NumericError,
    ProjectionError,
)
from .func_classes import SingularFunction, seminorm_n, unit_partition
from .hs_calculus import DenseOperator, Operand, as_matrix, eigh, perturbation, quasi_commutator, resolvent, spectral_apply
from .models import InequalityReport, QuasiNormReport, SingularValueProfile

logger = structlog.get_logger(__name__)

INEQUALITY_SLACK = 1e-10
PROJECTION_TOL = 1e-10
SUP_WINDOW = 16.0
SUP_WINDOW_MAX = 1024.0
SUP_DENSITY = 250.0


def singular_values(T: Operand) -> SingularValueProfile:
    matrix = as_matrix(T)
    if matrix.size == 0:
        return SingularValueProfile(values=np.zeros(0), source_dim=max(matrix.shape, default=0))
    try:
        values = scipy.linalg.svdvals(matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"singular value decomposition failed: {e}") from e
    values = np.sort(np.maximum(values, 0.0))[::-1]
    return SingularValueProfile(values=values, source_dim=max(matrix.shape))


def _quasi_norm(values: np.ndarray, p: float) -> float:
    if values.size == 0:
        return 0.0
    top = float(values[0])
    if top == 0.0:
        return 0.0
    if np.isinf(p):
        return top
    return top * float(np.sum((values / top) ** p)) ** (1.0 / p)


def schatten_norm(T: Operand, p: float) -> QuasiNormReport:
    """(sum s_k^p)^(1/p); p = inf gives the operator norm"""
    if not p > 0:
        raise InvalidParameterError(f"Schatten exponent must be > 0, got {p}")
    profile = singular_values(T)
    return QuasiNormReport(p=p, value=_quasi_norm(profile.values, p), q_exponent=min(p, 1.0))


def norm_p(T: Operand, p: float) -> float:
    return schatten_norm(T, p).value


def fractional_power_abs(T: Operand, sigma: float) -> DenseOperator:
    """|T|^sigma = V S^sigma V* from T = W S V*"""
    if not 0.0 < sigma <= 1.0:
        raise InvalidParameterError(f"sigma must lie in (0, 1], got {sigma}")
    matrix = as_matrix(T)
    _, s, vh = scipy.linalg.svd(matrix, full_matrices=False)
    power = (vh.conj().T * s[None, :] ** sigma) @ vh
    return DenseOperator.hermitian_from(power)


def q_triangle_check(T1: Operand, T2: Operand, q: float) -> InequalityReport:
    """||T1 + T2||^q <= ||T1||^q + ||T2||^q in S_q"""
    if not 0.0 < q <= 1.0:
        raise InvalidParameterError(f"q must lie in (0, 1], got {q}")
    lhs = norm_p(as_matrix(T1) + as_matrix(T2), q) ** q
    rhs = norm_p(T1, q) ** q + norm_p(T2, q) ** q
    return _report(lhs, rhs)


def _report(lhs: float, rhs: float, slack: float = INEQUALITY_SLACK) -> InequalityReport:
    return InequalityReport(lhs=lhs, rhs=rhs, slack=rhs - lhs, holds=bool(lhs <= rhs + slack * max(1.0, rhs)))


def _psd_power(matrix: np.ndarray, gamma: float, name: str) -> np.ndarray:
    lam, u = eigh(matrix)
    scale = max(1.0, float(np.max(np.abs(lam), initial=0.0)))
    if lam.size and lam[0] < -INEQUALITY_SLACK * scale:
        raise NotPositiveSemidefiniteError(f"{name} is not positive semidefinite: min eigenvalue {lam[0]:.3e}")
    return (u * np.clip(lam, 0.0, None)[None, :] ** gamma) @ u.conj().T


def bks_check(A: Operand, B: Operand, gamma: float, p: float, slack: float = INEQUALITY_SLACK) -> InequalityReport:
    """||A^gamma - B^gamma||_p <= || |A - B|^gamma ||_p for A, B >= 0"""
    if not 0.0 < gamma <= 1.0:
        raise InvalidParameterError(f"gamma must lie in (0, 1], got {gamma}")
    a, b = as_matrix(A), as_matrix(B)
    lhs = norm_p(_psd_power(a, gamma, "A") - _psd_power(b, gamma, "B"), p)
    rhs = norm_p(fractional_power_abs(a - b, gamma), p)
    return _report(lhs, rhs, slack)


def resolvent_sandwich_check(A: Operand, B: Operand, J: Operand, z: complex, sigma: float, p: float) -> InequalityReport:
    """|| R(z;A) V R(z;B) ||_p <= || |V|^sigma ||_p ||J||^(1-sigma) 2^(1-sigma) / |Im z|^(1+sigma)"""
    v = perturbation(A, B, J).entries
    w = resolvent(A, z).entries @ v @ resolvent(B, z).entries
    y = abs(np.imag(z))
    j_norm = float(scipy.linalg.norm(as_matrix(J), 2))
    lhs = norm_p(w, p)
    rhs = norm_p(fractional_power_abs(v, sigma), p) * j_norm ** (1.0 - sigma) * 2.0 ** (1.0 - sigma) / y ** (1.0 + sigma)
    return _report(lhs, rhs)


def check_exponents(n: int, sigma: float, p: float, gamma: Optional[float] = None) -> float:
    """Validate n >= 2, sigma in (0, 1], sigma < gamma, 1/(n - sigma) < q; returns q = min(p, 1)."""
    q = min(p, 1.0)
    if n < 2:
        raise ConstraintError(f"smoothness order must be >= 2, got n = {n}")
    if not 0.0 < sigma <= 1.0:
        raise ConstraintError(f"sigma must lie in (0, 1], got {sigma}")
    if gamma is not None and not sigma < gamma:
        raise ConstraintError(f"sigma = {sigma} must be smaller than gamma = {gamma}")
    if not 1.0 / (n - sigma) < q:
        raise ConstraintError(
            f"(n - sigma)^-1 = {1.0 / (n - sigma):.4g} must be < q = {q:.4g} "
            f"(n = 2 and sigma = 1 cannot be combined)"
        )
    return q


def _ratio(numerator: float, denominator: float) -> float:
    if numerator == 0.0:
        return 0.0
    if denominator == 0.0:
        return np.inf
    return numerator / denominator


def quasi_commutator_ratio(f: SingularFunction, A: Operand, B: Operand, J: Operand, sigma: float, p: float,
                           seminorm: Optional[float] = None) -> float:
    """||f(A)J - Jf(B)||_p / (|||f|||_n R^(gamma - sigma) ||J||^(1-sigma) || |V|^sigma ||_p)"""
    check_exponents(f.n, sigma, p, f.gamma)
    numerator = norm_p(quasi_commutator(f, A, B, J), p)
    v = perturbation(A, B, J)
    norm = seminorm if seminorm is not None else seminorm_n(f).value
    j_norm = float(scipy.linalg.norm(as_matrix(J), 2)) if as_matrix(J).size else 0.0
    denominator = norm * f.R ** (f.gamma - sigma) * j_norm ** (1.0 - sigma) * norm_p(fractional_power_abs(v, sigma), p)
    return _ratio(numerator, denominator)


def require_projection(P: Operand, tol: float = PROJECTION_TOL) -> np.ndarray:
    matrix = as_matrix(P)
    if matrix.shape[0] != matrix.shape[1]:
        raise ProjectionError(f"projection must be square, got shape {matrix.shape}")
    idempotent = float(np.max(np.abs(matrix @ matrix - matrix), initial=0.0))
    selfadjoint = float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))
    if max(idempotent, selfadjoint) > tol:
        raise ProjectionError(
            f"not an orthogonal projection: |P^2 - P| = {idempotent:.3e}, |P - P*| = {selfadjoint:.3e}"
        )
    return matrix


def projection_ratio(f: SingularFunction, A: Operand, P: Operand, sigma: float, p: float,
                     seminorm: Optional[float] = None, tol: float = PROJECTION_TOL) -> float:
    """||f(PAP)P - Pf(A)||_p / (|||f|||_n R^(gamma - sigma) || |PA(I-P)|^sigma ||_p)"""
    proj = require_projection(P, tol)
    a = as_matrix(A)
    compressed = DenseOperator.hermitian_from(proj @ a @ proj)
    if not np.any(proj):
        return 0.0
    # V = B1 J - J B2 = -PA(I - P), ||J|| = 1
    return quasi_commutator_ratio(f, compressed, DenseOperator.hermitian_from(a), proj, sigma, p, seminorm)


def derivative_scale(g: SingularFunction, rho: float, order: int, samples: int = 8001) -> float:
    """
    max_k rho^k sup |g^(k)| for k <= order, sampled.

    Compact g is sampled on its support. Otherwise the window [-W, W] starts at
    W = 16 and doubles while the decay tail max_k rho^k (1 + W)^-beta exceeds the
    sampled maximum, up to W = 1024. Without a decay rate the window stays at 16.
    """
    def sampled(lo: float, hi: float) -> float:
        grid = np.linspace(lo, hi, max(samples, int(SUP_DENSITY * (hi - lo)) + 1))
        return max(rho ** k * float(np.max(np.abs(g.eval_derivative(k, grid)))) for k in range(order + 1))

    lo, hi = g.support
    if np.isfinite(lo):
        return sampled(lo, hi)
    window = SUP_WINDOW
    value = sampled(-window, window)
    if g.decay is None:
        logger.warning("derivative sup sampled on a fixed window", function=g.label, window=window)
        return value
    tail = max(rho ** k for k in range(order + 1))
    while tail * (1.0 + window) ** (-g.decay) > value and window < SUP_WINDOW_MAX:
        window *= 2.0
        value = sampled(-window, window)
    return value


def smooth_bound_ratio(g: SingularFunction, rho: float, A: Operand, B: Operand, J: Operand,
                       sigma: float, p: float) -> float:
    """||g(A)J - Jg(B)||_p / (max_k rho^k ||g^(k)|| rho^-sigma ||J||^(1-sigma) || |V|^sigma ||_p)"""
    check_exponents(g.n, sigma, p)
    numerator = norm_p(quasi_commutator(g, A, B, J), p)
    v = perturbation(A, B, J)
    j_norm = float(scipy.linalg.norm(as_matrix(J), 2))
    scale = derivative_scale(g, rho, g.n)
    denominator = scale * rho ** (-sigma) * j_norm ** (1.0 - sigma) * norm_p(fractional_power_abs(v, sigma), p)
    return _ratio(numerator, denominator)


def smooth_projection_ratio(g: SingularFunction, rho: float, A: Operand, P: Operand, sigma: float, p: float) -> float:
    proj = require_projection(P)
    a = as_matrix(A)
    return smooth_bound_ratio(
        g, rho, DenseOperator.hermitian_from(proj @ a @ proj), DenseOperator.hermitian_from(a), proj, sigma, p,
    )


def unbounded_support_bound(g: SingularFunction, A: Operand, B: Operand, J: Operand, sigma: float, p: float,
                            beta: Optional[float] = None) -> float:
    """
    ||g(A)J - Jg(B)||_p / (||J||^(1-sigma) || |V|^sigma ||_p) for smooth g with
    |g^(k)(x)| <= (1 + |x|)^-beta, assembled from unit-width pieces g_m.
    """
    beta = beta if beta is not None else g.decay
    if beta is None:
        raise ConstraintError(f"{g.label or 'g'} declares no decay exponent beta")
    q = check_exponents(g.n, sigma, p)
    if not q * beta > 1.0:
        raise ConstraintError(f"q * beta = {q * beta:.4g} must be > 1")
    a, b, j = as_matrix(A), as_matrix(B), as_matrix(J)
    spectrum = np.concatenate([np.linalg.eigvalsh(a), np.linalg.eigvalsh(b)])
    lo, hi = int(np.floor(spectrum.min())) - 1, int(np.ceil(spectrum.max())) + 1
    difference = np.zeros_like(j, dtype=complex)
    for m, piece in unit_partition(g, range(lo, hi + 1)):
        difference += quasi_commutator(piece, A, B, J).entries
    v = perturbation(A, B, J)
    j_norm = float(scipy.linalg.norm(j, 2))
    denominator = j_norm ** (1.0 - sigma) * norm_p(fractional_power_abs(v, sigma), p)
    return _ratio(norm_p(difference, p), denominator)


def ps_ratio(f: SingularFunction, A: Operand, B: Operand, p: float) -> float:
    """||f(A) - f(B)||_p / ||A - B||_p"""
    numerator = norm_p(spectral_apply(f, A).entries - spectral_apply(f, B).entries, p)
    return _ratio(numerator, norm_p(as_matrix(A) - as_matrix(B), p))
