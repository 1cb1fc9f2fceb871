"""
Singular function classes: the cutoff zeta, functions with power-type
singularities and their weighted seminorm, the entropy family eta_beta,
and the cutoff/partition constructions built on top of them.
"""

from math import comb, factorial
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial.hermite import hermval
from pydantic import BaseModel, ConfigDict, Field

from .config import settings
from .exceptions import InvalidParameterError, SeminormDivergenceError
from .models import HolderReport, SeminormReport

logger = structlog.get_logger(__name__)

# exp(-1/u) underflows to exactly zero below this
_PSI_FLOOR = 1.0 / 700.0
_GROWTH_FACTOR = 1.5


def _as_array(t) -> np.ndarray:
    return np.asarray(t, dtype=float)


def _falling(a: float, k: int) -> float:
    """a (a-1) ... (a-k+1)"""
    out = 1.0
    for j in range(k):
        out *= a - j
    return out


def quotient_derivatives(num: Sequence[np.ndarray], den: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Derivatives of N/D from derivatives of N and D (general Leibniz recursion)."""
    order = len(num) - 1
    out: List[np.ndarray] = []
    for k in range(order + 1):
        acc = num[k].copy() if isinstance(num[k], np.ndarray) else np.asarray(num[k])
        for j in range(k):
            acc = acc - comb(k, j) * out[j] * den[k - j]
        out.append(acc / den[0])
    return out


def _psi_derivatives(u: np.ndarray, order: int) -> List[np.ndarray]:
    """psi(u) = exp(-1/u) for u > 0 and its derivatives P_k(1/u) exp(-1/u)."""
    live = u > _PSI_FLOOR
    w = np.where(live, 1.0 / np.where(live, u, 1.0), 0.0)
    e = np.where(live, np.exp(-w), 0.0)
    poly = Polynomial([1.0])
    square = Polynomial([0.0, 0.0, 1.0])
    out = []
    for _ in range(order + 1):
        out.append(np.where(live, poly(w) * e, 0.0))
        poly = square * (poly - poly.deriv())
    return out


def smooth_step_derivatives(u, order: int) -> List[np.ndarray]:
    """s(u) = psi(u) / (psi(u) + psi(1-u)): 0 for u <= 0, 1 for u >= 1, C-infinity."""
    u = _as_array(u)
    inside = (u > 0.0) & (u < 1.0)
    uu = np.where(inside, u, 0.5)
    left = _psi_derivatives(uu, order)
    right = _psi_derivatives(1.0 - uu, order)
    den = [left[k] + (-1) ** k * right[k] for k in range(order + 1)]
    inner = quotient_derivatives(left, den)
    out = []
    for k in range(order + 1):
        outside = np.where(u >= 1.0, 1.0, 0.0) if k == 0 else 0.0
        out.append(np.where(inside, inner[k], outside))
    return out


class CutoffZeta:
    """zeta(t) = 1 for |t| <= 1/2, 0 for |t| >= 1, smooth in between."""

    def eval(self, t) -> np.ndarray:
        return self.eval_derivative(0, t)

    def eval_derivative(self, k: int, t) -> np.ndarray:
        if k < 0:
            raise InvalidParameterError(f"derivative order must be >= 0, got {k}")
        t = _as_array(t)
        a = np.abs(t)
        ramp = (a > 0.5) & (a < 1.0)
        u = np.where(ramp, 2.0 - 2.0 * a, 0.5)
        sk = smooth_step_derivatives(u, k)[k]
        chain = (-2.0 * np.sign(t)) ** k
        plateau = np.where(a <= 0.5, 1.0, 0.0) if k == 0 else 0.0
        return np.where(ramp, sk * chain, plateau)

    def __call__(self, t) -> np.ndarray:
        return self.eval(t)


ZETA = CutoffZeta()


class SingularFunction(BaseModel):
    """
    A scalar function f with power-type singularities at singular_points,
    obeying |f^(k)(x)| <= |||f|||_n |x - x0|^(gamma - k) for k <= n,
    and (when compact) vanishing outside [x0 - R, x0 + R].
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    derivative: Callable[[int, np.ndarray], np.ndarray]
    singular_points: Tuple[float, ...] = ()
    gamma: float = Field(..., gt=0)
    n: int = Field(2, ge=1)
    x0: float = 0.0
    R: float = Field(1.0, gt=0)
    label: str = ""
    compact: bool = True
    entire: bool = False
    is_real: bool = True
    decay: Optional[float] = Field(None, description="beta in |f^(k)(x)| <= (1+|x|)^(-beta)")

    def eval_derivative(self, k: int, t) -> np.ndarray:
        if k < 0:
            raise InvalidParameterError(f"derivative order must be >= 0, got {k}")
        if self.entire and np.iscomplexobj(t):
            values = np.asarray(self.derivative(k, np.asarray(t, dtype=complex)))
        else:
            values = np.asarray(self.derivative(k, _as_array(t)))
        if self.is_real and not np.iscomplexobj(t):
            return np.real(values)
        return values

    def __call__(self, t) -> np.ndarray:
        return self.eval_derivative(0, t)

    @property
    def support(self) -> Tuple[float, float]:
        if not self.compact or not np.isfinite(self.R):
            return (-np.inf, np.inf)
        return (self.x0 - self.R, self.x0 + self.R)

    @property
    def one_point(self) -> bool:
        return all(z == self.x0 for z in self.singular_points)


# Elementary members of the class

def zero_function() -> SingularFunction:
    return SingularFunction(
        derivative=lambda k, t: np.zeros_like(t, dtype=float),
        gamma=1.0, n=2, label="zero", entire=True,
    )


def power(p: int) -> SingularFunction:
    """g_p(t) = t^p"""
    if p < 0:
        raise InvalidParameterError(f"power must be >= 0, got {p}")

    def derivative(k, t):
        if k > p:
            return np.zeros_like(t)
        return _falling(p, k) * t ** (p - k)

    return SingularFunction(
        derivative=derivative, gamma=max(float(p), 1.0), n=max(p, 2), label=f"poly:{p}",
        compact=False, R=np.inf, entire=True,
    )


def _abs_pow_derivative(gamma: float) -> Callable[[int, np.ndarray], np.ndarray]:
    def derivative(k, t):
        a = np.abs(t)
        safe = np.where(a > 0, a, 1.0)
        values = _falling(gamma, k) * safe ** (gamma - k) * np.sign(t) ** k
        return np.where(a > 0, values, 0.0)

    return derivative


def eta_derivative(beta: float) -> Callable[[int, np.ndarray], np.ndarray]:
    """Derivatives of eta_beta on (0, 1); identically zero elsewhere."""
    if beta <= 0:
        raise InvalidParameterError(f"beta must be > 0, got {beta}")

    def derivative(k, t):
        inside = (t > 0.0) & (t < 1.0)
        s = np.where(inside, t, 0.5)
        r = 1.0 - s
        if beta == 1.0:
            if k == 0:
                values = -s * np.log(s) - r * np.log(r)
            elif k == 1:
                values = np.log(r) - np.log(s)
            else:
                values = (-1) ** (k - 1) * factorial(k - 2) * s ** (1 - k) - factorial(k - 2) * r ** (1 - k)
        else:
            u = [s ** beta + r ** beta]
            for j in range(1, k + 1):
                u.append(_falling(beta, j) * (s ** (beta - j) + (-1) ** j * r ** (beta - j)))
            if k == 0:
                values = np.log(u[0]) / (1.0 - beta)
            else:
                ratio = quotient_derivatives(u[1:k + 1], u[:k])
                values = ratio[k - 1] / (1.0 - beta)
        return np.where(inside, values, 0.0)

    return derivative


def eta(beta: float, t) -> np.ndarray:
    """Renyi entropy function eta_beta (von Neumann for beta = 1), zero outside [0, 1]."""
    return eta_derivative(beta)(0, _as_array(t))


def eta_function(beta: float, n: int = 2) -> SingularFunction:
    gamma = 0.5 if beta == 1.0 else min(beta, 1.0)
    return SingularFunction(
        derivative=eta_derivative(beta), singular_points=(0.0, 1.0), gamma=gamma, n=n,
        x0=0.0, R=1.0, label=f"eta:{beta:g}",
    )


def cutoff(center: float = 0.0, radius: float = 1.0) -> SingularFunction:
    """zeta((t - center) / radius) as a smooth member of the class"""
    if radius <= 0:
        raise InvalidParameterError(f"cutoff radius must be > 0, got {radius}")

    def derivative(k, t):
        return radius ** (-k) * ZETA.eval_derivative(k, (t - center) / radius)

    return SingularFunction(
        derivative=derivative, gamma=2.0, n=6, x0=center + 2.0 * radius, R=3.0 * radius,
        label=f"zeta[{center:g},{radius:g}]",
    )


def abs_pow(gamma: float, n: int = 2) -> SingularFunction:
    """|t|^gamma zeta(t)"""
    if gamma <= 0:
        raise InvalidParameterError(f"gamma must be > 0, got {gamma}")
    raw = SingularFunction(
        derivative=_abs_pow_derivative(gamma), singular_points=(0.0,), gamma=gamma, n=n,
        compact=False, R=np.inf,
    )
    return multiply(raw, cutoff(), x0=0.0, R=1.0, gamma=gamma, n=n, compact=True, label=f"abs_pow:{gamma:g}")


def gauss_bump(width: float = 0.5) -> SingularFunction:
    """exp(-t^2 / width^2) zeta(t / 1.5)"""
    a = 1.0 / width

    def derivative(k, t):
        coeffs = np.zeros(k + 1)
        coeffs[k] = 1.0
        return (-a) ** k * hermval(a * t, coeffs) * np.exp(-(a * t) ** 2)

    raw = SingularFunction(derivative=derivative, gamma=2.0, n=6, compact=False, R=np.inf, entire=True)
    return smooth_as_singular(multiply(raw, cutoff(0.0, 1.5)), 0.0, 1.5, label="gauss_bump")


def cos_bump() -> SingularFunction:
    """cos(pi t / 2) zeta(t / 1.5)"""
    w = np.pi / 2.0

    def derivative(k, t):
        return w ** k * np.cos(w * t + k * np.pi / 2.0)

    raw = SingularFunction(derivative=derivative, gamma=2.0, n=6, compact=False, R=np.inf, entire=True)
    return smooth_as_singular(multiply(raw, cutoff(0.0, 1.5)), 0.0, 1.5, label="cos_bump")


def poly_bump(p: int) -> SingularFunction:
    """(1 - t^2)^p on [-1, 1]: C^(p-1) with power singularities at +-1"""
    if p < 1:
        raise InvalidParameterError(f"poly_bump power must be >= 1, got {p}")
    base = Polynomial([1.0, 0.0, -1.0]) ** p

    def derivative(k, t):
        return np.where(np.abs(t) < 1.0, base.deriv(k)(t) if k else base(t), 0.0)

    return SingularFunction(
        derivative=derivative, singular_points=(-1.0, 1.0), gamma=float(p), n=max(2, p),
        x0=0.0, R=1.0, label=f"poly_bump:{p}",
    )


def lorentz() -> SingularFunction:
    """(1 + x^2)^(-1), smooth with decay beta = 2"""

    def derivative(k, t):
        t = np.asarray(t, dtype=complex)
        values = (-1) ** k * factorial(k) / 2j * ((t - 1j) ** (-k - 1) - (t + 1j) ** (-k - 1))
        return np.real(values)

    return SingularFunction(
        derivative=derivative, gamma=1.0, n=4, compact=False, R=np.inf, decay=2.0, label="lorentz",
    )


def smooth_gamma2() -> SingularFunction:
    """zeta normalized so that max_{k<=2} sup |g^(k)| = 1, declared with gamma = 2"""
    grid = np.linspace(-1.0, 1.0, 4001)
    scale = max(np.max(np.abs(ZETA.eval_derivative(k, grid))) for k in range(3))

    def derivative(k, t):
        return ZETA.eval_derivative(k, t) / scale

    raw = SingularFunction(derivative=derivative, gamma=2.0, n=6, label="zeta")
    return smooth_as_singular(raw, 0.0, 1.0, label="smooth_gamma2")


def bump(rho: float) -> SingularFunction:
    """zeta(t / rho)"""
    return smooth_as_singular(cutoff(0.0, rho), 0.0, rho, label=f"bump:{rho:g}")


# Constructions

def multiply(f: SingularFunction, h: SingularFunction, **overrides) -> SingularFunction:
    """Pointwise product with derivatives by the Leibniz rule; metadata follows f unless overridden."""

    def derivative(k, t):
        total = 0.0
        for j in range(k + 1):
            total = total + comb(k, j) * f.eval_derivative(j, t) * h.eval_derivative(k - j, t)
        return total

    fields = dict(
        singular_points=f.singular_points, gamma=f.gamma, n=min(f.n, h.n), x0=f.x0, R=f.R,
        label=f"{f.label}*{h.label}", compact=f.compact or h.compact,
        entire=f.entire and h.entire, is_real=f.is_real and h.is_real, decay=f.decay,
    )
    if not f.compact and h.compact:
        fields.update(x0=h.x0, R=h.R)
    fields.update(overrides)
    return SingularFunction(derivative=derivative, **fields)


def combine(f: SingularFunction, h: SingularFunction, cf: float = 1.0, ch: float = 1.0, **overrides) -> SingularFunction:
    """cf * f + ch * h"""

    def derivative(k, t):
        return cf * f.eval_derivative(k, t) + ch * h.eval_derivative(k, t)

    fields = dict(
        singular_points=tuple(sorted(set(f.singular_points) | set(h.singular_points))),
        gamma=min(f.gamma, h.gamma), n=min(f.n, h.n), x0=f.x0, R=f.R,
        label=f"{cf:g}*{f.label}+{ch:g}*{h.label}", compact=f.compact and h.compact,
        entire=f.entire and h.entire, is_real=f.is_real and h.is_real,
    )
    fields.update(overrides)
    return SingularFunction(derivative=derivative, **fields)


def localize(f: SingularFunction, center: float, radius: float) -> SingularFunction:
    """f(t) zeta((t - center) / radius), declared around center"""
    return multiply(
        f, cutoff(center, radius),
        singular_points=tuple(z for z in f.singular_points if abs(z - center) < radius),
        x0=center, R=radius, compact=True, label=f"{f.label}@{center:g}",
    )


def rescale(f: SingularFunction, R: float) -> SingularFunction:
    """g(t) = R^(-gamma) f(R t); leaves the seminorm unchanged."""
    if R <= 0:
        raise InvalidParameterError(f"rescaling factor must be > 0, got {R}")
    gamma = f.gamma

    def derivative(k, t):
        return R ** (k - gamma) * f.eval_derivative(k, R * t)

    return f.model_copy(update=dict(
        derivative=derivative,
        singular_points=tuple(z / R for z in f.singular_points),
        x0=f.x0 / R, R=f.R / R, label=f"{f.label}/{R:g}",
    ))


def smooth_as_singular(g: SingularFunction, center: float, rho: float, n: Optional[int] = None,
                       label: Optional[str] = None) -> SingularFunction:
    """A smooth g supported in (center - rho, center + rho) seen as x0 = center + 2 rho, gamma = 2, R = 3 rho."""
    if rho <= 0:
        raise InvalidParameterError(f"rho must be > 0, got {rho}")
    return g.model_copy(update=dict(
        singular_points=(), gamma=2.0, n=n or g.n, x0=center + 2.0 * rho, R=3.0 * rho,
        compact=True, label=label or g.label,
    ))


def partition_at_singularities(f: SingularFunction) -> List[SingularFunction]:
    """One-point pieces f zeta((t - z) / rho) for each singular point z plus a smooth remainder."""
    if f.one_point:
        return [f]
    points = sorted(set(f.singular_points))
    gaps = np.diff(points)
    rho = min(1.0, 0.5 * float(np.min(gaps))) if len(points) > 1 else 1.0
    pieces = [localize(f, z, rho) for z in points]

    def derivative(k, t):
        values = f.eval_derivative(k, t)
        for piece in pieces:
            values = values - piece.eval_derivative(k, t)
        return values

    if f.compact:
        lo, hi = f.support
        center, half = 0.5 * (lo + hi), 0.5 * (hi - lo) * (1.0 + 2.0 ** -20)
        remainder = SingularFunction(
            derivative=derivative, gamma=2.0, n=f.n, x0=center + 2.0 * half, R=3.0 * half,
            label=f"{f.label}~smooth", is_real=f.is_real,
        )
    else:
        remainder = SingularFunction(
            derivative=derivative, gamma=f.gamma, n=f.n, x0=f.x0, R=np.inf, compact=False,
            label=f"{f.label}~smooth", is_real=f.is_real, decay=f.decay,
        )
    logger.debug("partitioned function", label=f.label, pieces=len(pieces), rho=rho)
    return pieces + [remainder]


def unit_partition_weight(x, k: int = 0) -> np.ndarray:
    """Upsilon(x) = s(x + 1) - s(x); supported in (-1, 1), integer shifts sum to one."""
    x = _as_array(x)
    return smooth_step_derivatives(x + 1.0, k)[k] - smooth_step_derivatives(x, k)[k]


def unit_partition(g: SingularFunction, m_range: Sequence[int]) -> List[Tuple[int, SingularFunction]]:
    """Pieces g_m = Upsilon(. - m) g, each smooth and supported in (m - 1, m + 1)."""
    pieces = []
    for m in m_range:
        weight = SingularFunction(
            derivative=lambda k, t, m=m: unit_partition_weight(t - m, k),
            gamma=2.0, n=6, x0=m + 2.0, R=3.0,
        )
        piece = multiply(g, weight)
        pieces.append((m, smooth_as_singular(piece, float(m), 1.0, label=f"{g.label}[{m}]")))
    return pieces


def chebyshev_approximant(g: SingularFunction, degree: int, interval: Tuple[float, float] = (-1.0, 1.0),
                          samples: int = 4001) -> Tuple[SingularFunction, float]:
    """Chebyshev interpolant g_eps of g and eps = max_{k<=2} max |(g - g_eps)^(k)| on the interval."""
    lo, hi = interval
    if not hi > lo:
        raise InvalidParameterError(f"empty interval {interval}")
    cheb = Chebyshev.interpolate(lambda t: np.real(g(t)), degree, domain=[lo, hi])
    grid = np.linspace(lo, hi, samples)
    eps = max(
        float(np.max(np.abs(g.eval_derivative(k, grid) - cheb.deriv(k)(grid) if k else g(grid) - cheb(grid))))
        for k in range(3)
    )

    def derivative(k, t):
        return cheb.deriv(k)(t) if k else cheb(t)

    approx = SingularFunction(
        derivative=derivative, gamma=1.0, n=max(2, g.n), compact=False, R=np.inf, entire=True,
        label=f"cheb{degree}({g.label})",
    )
    logger.debug("chebyshev approximant", label=g.label, degree=degree, eps=eps)
    return approx, eps


# Seminorm and Hoelder sampling

def seminorm_grid(f: SingularFunction, points_per_decade: Optional[int] = None,
                  decades: Optional[int] = None, uniform_points: Optional[int] = None) -> np.ndarray:
    """Distances R 10^(-decades..0) on both sides of x0 plus a uniform grid over the support."""
    ppd = points_per_decade or settings.seminorm_points_per_decade
    dec = decades or settings.seminorm_decades
    uni = uniform_points or settings.seminorm_uniform_points
    scale = f.R if np.isfinite(f.R) else 1.0
    span = f.R if np.isfinite(f.R) else 16.0
    d = scale * np.logspace(-dec, 0.0, dec * ppd + 1)
    uniform = f.x0 + span * np.linspace(-1.0, 1.0, uni)
    grid = np.concatenate([f.x0 - d[::-1], f.x0 + d, uniform])
    return grid[grid != f.x0]


def _weighted_derivatives(f: SingularFunction, grid: np.ndarray) -> np.ndarray:
    dist = np.abs(grid - f.x0)
    rows = []
    for k in range(f.n + 1):
        values = np.abs(f.eval_derivative(k, grid))
        rows.append(values * dist ** (k - f.gamma))
    return np.vstack(rows)


def _diverges(weighted: np.ndarray, grid: np.ndarray, f: SingularFunction, ppd: int, dec: int) -> bool:
    if not np.all(np.isfinite(weighted)):
        return True
    scale = f.R if np.isfinite(f.R) else 1.0
    dist = np.abs(grid - f.x0) / scale
    peak = weighted.max(axis=0)
    per_decade = []
    for j in range(3):
        band = (dist >= 10.0 ** (-dec + j)) & (dist < 10.0 ** (-dec + j + 1))
        per_decade.append(float(peak[band].max()) if np.any(band) else 0.0)
    inner, middle, outer = per_decade
    return outer > 0 and middle > _GROWTH_FACTOR * outer and inner > _GROWTH_FACTOR * middle


def seminorm_n(f: SingularFunction, points_per_decade: Optional[int] = None,
               decades: Optional[int] = None, uniform_points: Optional[int] = None) -> SeminormReport:
    """
    Sampled |||f|||_n = max_{k<=n} sup_{x != x0} |f^(k)(x)| |x - x0|^(k - gamma).

    Functions with several singular points are measured piecewise on
    partition_at_singularities. Raises SeminormDivergenceError when the
    weighted values keep growing over the innermost decades.
    """
    ppd = points_per_decade or settings.seminorm_points_per_decade
    dec = decades or settings.seminorm_decades
    if not f.one_point:
        reports = [seminorm_n(piece, ppd, dec, uniform_points) for piece in partition_at_singularities(f)]
        best = max(reports, key=lambda r: r.value)
        return best.model_copy(update=dict(grid_points=sum(r.grid_points for r in reports)))

    grid = seminorm_grid(f, ppd, dec, uniform_points)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        weighted = _weighted_derivatives(f, grid)
    if _diverges(weighted, grid, f, ppd, dec):
        raise SeminormDivergenceError(
            f"seminorm diverges: gamma={f.gamma}/n={f.n} inconsistent with {f.label or 'f'}"
        )
    k, i = np.unravel_index(int(np.argmax(weighted)), weighted.shape)
    value = float(weighted[k, i])
    logger.debug("seminorm sampled", label=f.label, value=value, points=grid.size)
    return SeminormReport(
        value=value, grid_points=int(grid.size), points_per_decade=ppd, decades=dec,
        argmax_order=int(k), argmax_point=float(grid[i]),
    )


def fbound_violation(f: SingularFunction, norm: float, grid: Optional[np.ndarray] = None) -> float:
    """max over the grid of |f^(k)(x)| - norm |x - x0|^(gamma - k); <= 0 when the bound holds."""
    grid = seminorm_grid(f) if grid is None else grid[grid != f.x0]
    dist = np.abs(grid - f.x0)
    worst = -np.inf
    for k in range(f.n + 1):
        excess = np.abs(f.eval_derivative(k, grid)) - norm * dist ** (f.gamma - k)
        worst = max(worst, float(np.max(excess)))
    return worst


def _holder_unit_grid(points_per_side: int = 160, uniform: int = 600) -> np.ndarray:
    d = np.logspace(-6.0, 0.0, points_per_side)
    return np.concatenate([-d[::-1], d, np.linspace(-1.1, 1.1, uniform)])


def holder_sample_points(f: SingularFunction) -> np.ndarray:
    """Sample points scaled from one unit grid around x0 and every singular point."""
    unit = _holder_unit_grid()
    scale = f.R if np.isfinite(f.R) else 8.0
    centers = sorted({f.x0, *f.singular_points})
    pts = [f.x0 + scale * unit] + [z + scale * unit[:320] for z in centers if z != f.x0]
    return np.unique(np.concatenate(pts))


def holder_constant(values: np.ndarray, points: np.ndarray, kappa: float, chunk: int = 512) -> float:
    """sup over pairs of |v_i - v_j| / |p_i - p_j|^kappa"""
    best = 0.0
    for start in range(0, points.size, chunk):
        p = points[start:start + chunk, None]
        v = values[start:start + chunk, None]
        dist = np.abs(p - points[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dist > 0, np.abs(v - values[None, :]) / dist ** kappa, 0.0)
        best = max(best, float(np.max(ratio)))
    return best


def holder_modulus(f: SingularFunction) -> HolderReport:
    """kappa = min(gamma, 1) and the empirical Hoelder constant of f on a sample grid."""
    kappa = min(f.gamma, 1.0)
    points = holder_sample_points(f)
    values = f(points)
    constant = holder_constant(values, points, kappa)
    sup_norm = float(np.max(np.abs(values)))
    if f.compact and f.one_point:
        dist = np.abs(points - f.x0)
        live = dist > 0
        zeroth = float(np.max(np.abs(values[live]) * dist[live] ** (-f.gamma)))
        sup_bound = zeroth * f.R ** f.gamma
    else:
        sup_bound = np.inf
    return HolderReport(
        kappa=kappa, constant=constant, sup_norm=sup_norm, sup_bound=float(sup_bound),
        sup_bound_ok=bool(sup_norm <= sup_bound * (1.0 + 1e-12) + 1e-300),
    )


def split_at_singularity(g: SingularFunction, z: float, R: float) -> Tuple[SingularFunction, SingularFunction]:
    """g1 = g zeta((t - z) / R) and g2 = g - g1, smooth near z."""
    if not 0.0 < R <= 1.0:
        raise InvalidParameterError(f"split radius must satisfy 0 < R <= 1, got {R}")
    if z not in g.singular_points and z != g.x0:
        raise InvalidParameterError(f"{z} is not a singular point of {g.label or 'g'}")
    g1 = localize(g, z, R)
    g2 = combine(
        g, g1, 1.0, -1.0,
        singular_points=tuple(p for p in g.singular_points if p != z),
        gamma=g.gamma, n=g.n, label=f"{g.label}-split@{z:g}",
    )
    return g1, g2
