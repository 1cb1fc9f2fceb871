"""
Asymptotic coefficients of the Szego-type trace formulas:

    W0(b) = (2 pi)^-d  int_Omega int_Lambda b dx dxi
    W1(b) = (2 pi)^-(d-1)  int_dLambda int_dOmega b |n_L . n_P| dS dS
    A(g; s) = (2 pi)^-2  int_0^1 [g(st) - (1-t) g(0) - t g(s)] / (t (1-t)) dt
    D(g; s, s1) = (2 pi)^-2  int_0^1 [g(st + s1(1-t)) - t g(s) - (1-t) g(s1)] / (t (1-t)) dt
"""

from concurrent.futures import ThreadPoolExecutor
from math import comb
from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.integrate
import structlog

from .config import settings
from .domains import BoundaryMesh, Cube, Difference, DomainSpec
from .exceptions import InvalidParameterError, QuadratureError
from .func_classes import SingularFunction, power, seminorm_n
from .models import CoeffResult
from .wiener_hopf import Symbol2

logger = structlog.get_logger(__name__)

SymbolLike = Union[Symbol2, Callable[[np.ndarray, np.ndarray], np.ndarray]]

_QUAD_OPTIONS = dict(epsabs=1e-14, epsrel=1e-12, limit=400)
_PAIR_CHUNK = 1 << 20
# above this many distinct symbol values A(g; .) is interpolated
_MAX_EXACT_VALUES = 256


def _evaluate(b: SymbolLike, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    return b.eval(x, xi) if isinstance(b, Symbol2) else np.asarray(b(x, xi))


def _scalar(g: SingularFunction, z: complex) -> complex:
    if np.iscomplexobj(z) and np.imag(z) != 0:
        return complex(g(np.atleast_1d(np.complex128(z)))[0])
    return complex(g(np.atleast_1d(float(np.real(z))))[0])


def _check_segment(g: SingularFunction, s: complex, s1: complex) -> None:
    if not g.entire and (np.imag(s) != 0 or np.imag(s1) != 0):
        raise InvalidParameterError(
            f"{g.label or 'g'} is defined on the real line only; s = {s}, s1 = {s1} must be real"
        )


def _quad(fn: Callable[[float], complex], a: float, b: float) -> Tuple[complex, float, int]:
    parts, error, evaluations = [], 0.0, 0
    for take in (np.real, np.imag):
        value, err, info = scipy.integrate.quad(lambda u: float(take(fn(u))), a, b, full_output=1,
                                                **_QUAD_OPTIONS)[:3]
        parts.append(value)
        error += err
        evaluations += int(info["neval"])
    return complex(parts[0], parts[1]), error, evaluations


def _segment_integral(g: SingularFunction, s: complex, s1: complex) -> CoeffResult:
    """(2 pi)^-2 int_0^1 [g(st + s1(1-t)) - t g(s) - (1-t) g(s1)] / (t(1-t)) dt"""
    _check_segment(g, s, s1)
    if s == s1:
        return CoeffResult(value=0.0, quadrature_error_estimate=0.0, node_count=0)
    gs, gs1 = _scalar(g, s), _scalar(g, s1)

    def integrand(t: float) -> complex:
        return (_scalar(g, s * t + s1 * (1.0 - t)) - t * gs - (1.0 - t) * gs1) / (t * (1.0 - t))

    # t = u^2 near 0 and 1 - t = u^2 near 1 remove the Hoelder endpoint behaviour
    edge = np.sqrt(0.5)
    left = _quad(lambda u: 2.0 * u * integrand(u * u), 0.0, edge)
    right = _quad(lambda u: 2.0 * u * integrand(1.0 - u * u), 0.0, edge)
    value = (left[0] + right[0]) / (4.0 * np.pi ** 2)
    error = (left[1] + right[1]) / (4.0 * np.pi ** 2)
    if not np.isfinite(value):
        raise QuadratureError(f"coefficient integral of {g.label or 'g'} is not finite",
                              achieved_error=np.inf, refinements=0)
    return CoeffResult(value=value, quadrature_error_estimate=error, node_count=left[2] + right[2])


def ga(g: SingularFunction, s: complex) -> CoeffResult:
    """A(g; s); complex s only for entire g"""
    return _segment_integral(g, s, 0.0)


def gd(g: SingularFunction, s: complex, s1: complex) -> CoeffResult:
    """D(g; s, s1); vanishes for s = s1 and equals A(g; s) for s1 = 0"""
    return _segment_integral(g, s, s1)


def _table(fn: Callable[..., CoeffResult], values: np.ndarray, cache: Optional[dict] = None) -> Tuple[np.ndarray, float]:
    """fn on every distinct row of values (interpolated when there are many); returns values and error"""
    cache = {} if cache is None else cache

    def cached(*key) -> CoeffResult:
        key = tuple(float(k) for k in key)
        if key not in cache:
            cache[key] = fn(*key)
        return cache[key]

    values = np.round(np.asarray(values, dtype=float), 12)
    flat = values.reshape(-1, values.shape[-1])
    unique, inverse = np.unique(flat, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    if unique.shape[1] == 1 and unique.shape[0] > _MAX_EXACT_VALUES:
        knots = np.linspace(unique[0, 0], unique[-1, 0], 2 * _MAX_EXACT_VALUES + 1)
        results = [cached(s) for s in knots]
        table = np.array([r.value for r in results])
        out = np.interp(flat[:, 0], knots, table.real) + 1j * np.interp(flat[:, 0], knots, table.imag)
        return out.reshape(values.shape[:-1]), max(r.quadrature_error_estimate for r in results)
    results = [cached(*row) for row in unique]
    table = np.array([r.value for r in results])
    return table[inverse].reshape(values.shape[:-1]), max((r.quadrature_error_estimate for r in results),
                                                           default=0.0)


def w0(b: SymbolLike, lambda_domain: DomainSpec, omega_domain: DomainSpec, order: int = 32) -> CoeffResult:
    """Volume coefficient by tensor quadrature over Lambda x Omega"""
    d = lambda_domain.dimension
    scale = (2.0 * np.pi) ** -d

    def level(n: int) -> Tuple[complex, int]:
        px, wx = lambda_domain.volume_quadrature(n)
        pxi, wxi = omega_domain.volume_quadrature(n)
        if isinstance(b, Symbol2):
            total = 0j
            for term in b.terms:
                fx = wx.sum() if term.phi is None else wx @ term.phi(px)
                total += fx * (wxi @ term.psi(pxi))
            return total, px.shape[0] + pxi.shape[0]
        total = 0j
        step = max(1, _PAIR_CHUNK // pxi.shape[0])
        for start in range(0, px.shape[0], step):
            block = _evaluate(b, px[start:start + step, None, :], pxi[None, :, :])
            total += wx[start:start + step] @ block @ wxi
        return total, px.shape[0] * pxi.shape[0]

    coarse, _ = level(order)
    fine, nodes = level(order + order // 2)
    return CoeffResult(value=scale * fine, quadrature_error_estimate=scale * abs(fine - coarse), node_count=nodes)


def _pair_sum(values_fn: Callable[[np.ndarray, np.ndarray], np.ndarray], L: BoundaryMesh, P: BoundaryMesh,
              threads: Optional[int] = None) -> complex:
    """sum over node pairs of values_fn(x, xi) |n_L . n_P| w_L w_P, chunked over L nodes"""
    step = max(1, _PAIR_CHUNK // max(P.size, 1))
    starts = list(range(0, L.size, step))

    def chunk(start: int) -> complex:
        sl = slice(start, start + step)
        weight = np.abs(L.normals[sl] @ P.normals.T) * L.weights[sl, None] * P.weights[None, :]
        return complex(np.sum(values_fn(L.points[sl, None, :], P.points[None, :, :]) * weight))

    with ThreadPoolExecutor(max_workers=threads or settings.thread_count) as executor:
        partial = list(executor.map(chunk, starts))
    return complex(np.sum(partial))


def w1(b: SymbolLike, boundary_L: BoundaryMesh, boundary_P: BoundaryMesh, threads: Optional[int] = None) -> CoeffResult:
    """Surface coefficient on one pair of meshes (no error estimate; see w1_extrapolated)"""
    if np.any(np.abs(np.linalg.norm(boundary_L.normals, axis=1) - 1.0) > 1e-12) or \
            np.any(np.abs(np.linalg.norm(boundary_P.normals, axis=1) - 1.0) > 1e-12):
        raise InvalidParameterError("mesh normals must have unit length")
    d = boundary_L.points.shape[1]
    value = _pair_sum(lambda x, xi: _evaluate(b, x, xi), boundary_L, boundary_P, threads)
    return CoeffResult(value=(2.0 * np.pi) ** (1 - d) * value, quadrature_error_estimate=0.0,
                       node_count=boundary_L.size * boundary_P.size)


def w1_extrapolated(b: SymbolLike, lambda_domain: DomainSpec, omega_domain: DomainSpec,
                    nodes: Optional[int] = None, threads: Optional[int] = None) -> CoeffResult:
    """Richardson combination of W1 on meshes of nodes and 2 * nodes points"""
    nodes = nodes or settings.w1_nodes
    coarse = w1(b, lambda_domain.boundary_mesh(nodes), omega_domain.boundary_mesh(nodes), threads)
    fine = w1(b, lambda_domain.boundary_mesh(2 * nodes), omega_domain.boundary_mesh(2 * nodes), threads)
    value = (4.0 * fine.value - coarse.value) / 3.0
    return CoeffResult(value=value, quadrature_error_estimate=abs(fine.value - coarse.value) / 3.0,
                       node_count=coarse.node_count + fine.node_count)


def _coefficient_field(g: SingularFunction, a: Symbol2, a1: Optional[Symbol2], x: np.ndarray,
                       xi: np.ndarray, cache: Optional[dict] = None) -> Tuple[np.ndarray, float]:
    s = a.real_part(x, xi)
    if a1 is None:
        return _table(lambda v: ga(g, v), s[..., None], cache)
    s, s1 = np.broadcast_arrays(s, a1.real_part(x, xi))
    return _table(lambda v, v1: gd(g, v, v1), np.stack([s, s1], axis=-1), cache)


def predicted_w1(g: SingularFunction, a: Symbol2, lambda_domain: DomainSpec, omega_domain: DomainSpec,
                 a1: Optional[Symbol2] = None, nodes: Optional[int] = None,
                 threads: Optional[int] = None) -> CoeffResult:
    """
    W1(A(g; re a); dLambda, dOmega), or W1(D(g; re a, re a1)) for the jump
    formulas, Richardson-extrapolated over two mesh levels.
    """
    nodes = nodes or settings.w1_nodes
    errors, cache = [], {}

    def field(x, xi):
        values, err = _coefficient_field(g, a, a1, x, xi, cache)
        errors.append(err)
        return values

    result = w1_extrapolated(field, lambda_domain, omega_domain, nodes, threads)
    error = result.quadrature_error_estimate + max(errors, default=0.0) * _surface_factor(lambda_domain, omega_domain)
    logger.debug("predicted W1", g=g.label, symbol=a.label, value=result.real, error=error)
    return result.model_copy(update={"quadrature_error_estimate": error})


def _surface_factor(lambda_domain: DomainSpec, omega_domain: DomainSpec) -> float:
    d = lambda_domain.dimension
    return (2.0 * np.pi) ** (1 - d) * (lambda_domain.surface_area() or 1.0) * (omega_domain.surface_area() or 1.0)


def _complement_box(omega_domain: DomainSpec, a1: Symbol2) -> DomainSpec:
    """Omega_1 intersected with a cube holding supp a1 and Omega"""
    if not a1.xi_compact:
        raise InvalidParameterError("the volume term over Omega_1 needs a symbol a1 compact in xi")
    lo, hi = omega_domain.bounding_box()
    half = max(a1.xi_support_radius, float(np.max(np.abs(np.concatenate([lo, hi])))))
    outer = Cube(dimension=omega_domain.dimension, half_width=half * (1.0 + 1e-9))
    return Difference(dimension=omega_domain.dimension, outer=outer, inner=omega_domain)


def predicted_trace(g: SingularFunction, a: Symbol2, lambda_domain: DomainSpec, omega_domain: DomainSpec,
                    alpha: float, a1: Optional[Symbol2] = None, nodes: Optional[int] = None) -> CoeffResult:
    """alpha^d W0(g(re a)) [+ alpha^d W0(g(re a1); Lambda, Omega_1)] + alpha^(d-1) log(alpha) W1"""
    d = lambda_domain.dimension

    def composed(symbol: Symbol2):
        return lambda x, xi: g(np.asarray(symbol.real_part(x, xi), dtype=float))

    volume = w0(composed(a), lambda_domain, omega_domain)
    value, error = volume.value, volume.quadrature_error_estimate
    if a1 is not None:
        if abs(_scalar(g, 0.0)) > 0:
            raise InvalidParameterError("the Omega_1 volume term is finite only for g(0) = 0")
        extra = w0(composed(a1), lambda_domain, _complement_box(omega_domain, a1))
        value, error = value + extra.value, error + extra.quadrature_error_estimate
    surface = predicted_w1(g, a, lambda_domain, omega_domain, a1, nodes)
    total = alpha ** d * value + alpha ** (d - 1) * np.log(alpha) * surface.value
    total_error = alpha ** d * error + alpha ** (d - 1) * np.log(alpha) * surface.quadrature_error_estimate
    return CoeffResult(value=total, quadrature_error_estimate=total_error,
                       node_count=volume.node_count + surface.node_count)


def binomial_identity_check(p: int, z: complex, s: complex) -> float:
    """|sum_l C(p, l) z^(p-l) A(g_l; s) - D(g_p; s + z, z)|"""
    if not 1 <= p <= 8:
        raise InvalidParameterError(f"p must lie in [1, 8], got {p}")
    lhs = sum(comb(p, l) * z ** (p - l) * ga(power(l), s).value for l in range(1, p + 1))
    rhs = gd(power(p), s + z, z).value
    return float(abs(lhs - rhs))


def _sup_derivative(g: SingularFunction, samples: int = 20001) -> float:
    lo, hi = g.support
    if not np.isfinite(lo):
        lo, hi = -8.0, 8.0
    grid = np.linspace(lo, hi, samples)
    return float(np.max(np.abs(g.eval_derivative(1, grid))))


def coefficient_lipschitz_ratio(g: SingularFunction, s: float) -> float:
    """|A(g; s)| / (pi^-2 |s| ||g'||_inf); at most one for Lipschitz g"""
    bound = abs(s) * _sup_derivative(g) / np.pi ** 2
    value = abs(ga(g, s).value)
    return 0.0 if value == 0.0 else value / bound


def coefficient_holder_ratio(g: SingularFunction, s: float) -> float:
    """|A(g; s)| / (|s|^(kappa/2) R^(gamma/2) |||g|||_1) with kappa = min(1, gamma)"""
    kappa = min(1.0, g.gamma)
    norm = seminorm_n(g.model_copy(update={"n": 1})).value
    bound = abs(s) ** (kappa / 2.0) * g.R ** (g.gamma / 2.0) * norm
    value = abs(ga(g, s).value)
    return 0.0 if value == 0.0 else value / bound
