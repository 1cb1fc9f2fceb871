"""
Grid discretization of multidimensional Wiener-Hopf operators.

Lambda is sampled on a periodic box of side L = box_factor * diam(Lambda)
with N points per axis. Frequencies are the discrete ones of that box,
eta_k = 2 pi k / L, and the symbol variable is xi = eta / alpha, so that

    op_alpha(a) = F^-1 diag(a(x, eta / alpha)) F

with the symbol averaged over each frequency cell (oversampling s per
axis) and x-dependence handled in the left quantization. Operators are
applied to blocks of grid columns through FFTs; x-independent operators
use their circulant kernel directly.
"""

from concurrent.futures import ThreadPoolExecutor
from functools import cached_property
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.fft
import scipy.linalg
import structlog
from pydantic import BaseModel, ConfigDict, Field

from .config import settings
from .domains import DomainSpec, build_domain
from .exceptions import ConstraintError, InvalidParameterError, NyquistError, ShapeMismatchError
from .func_classes import ZETA, SingularFunction
from .hs_calculus import DenseOperator, as_matrix
from .models import CrossVariant, DomainConfig, GridConfig
from .schatten import norm_p

logger = structlog.get_logger(__name__)

# largest box (points) for which full-box dense matrices are formed
MAX_DENSE_BOX = 4096
_CHUNK_COLUMNS = 256
_CHUNK_ENTRIES = 1 << 21

Field2 = Callable[[np.ndarray], np.ndarray]


class SymbolTerm(BaseModel):
    """phi(x) psi(xi); phi None means phi = 1"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    psi: Field2
    phi: Optional[Field2] = None


class Symbol2(BaseModel):
    """
    Symbol a(x, xi) written as a finite sum of separable terms.
    xi_support_radius is set when a vanishes for |xi| >= radius,
    x_support_radius when a vanishes for |x - x_center| >= radius.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    terms: Tuple[SymbolTerm, ...]
    xi_support_radius: Optional[float] = Field(None, gt=0)
    x_support_radius: Optional[float] = Field(None, gt=0)
    is_real: bool = True
    label: str = ""

    @property
    def x_independent(self) -> bool:
        return all(term.phi is None for term in self.terms)

    @property
    def xi_compact(self) -> bool:
        return self.xi_support_radius is not None

    def eval(self, x, xi) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        total = np.zeros(shape, dtype=complex)
        for term in self.terms:
            value = term.psi(xi)
            if term.phi is not None:
                value = value * term.phi(x)
            total = total + value
        return np.real(total) if self.is_real else total

    def real_part(self, x, xi) -> np.ndarray:
        return np.real(self.eval(x, xi))

    def __add__(self, other: "Symbol2") -> "Symbol2":
        radius = None
        if self.xi_compact and other.xi_compact:
            radius = max(self.xi_support_radius, other.xi_support_radius)
        xr = None
        if self.x_support_radius and other.x_support_radius:
            xr = max(self.x_support_radius, other.x_support_radius)
        return Symbol2(terms=self.terms + other.terms, xi_support_radius=radius, x_support_radius=xr,
                       is_real=self.is_real and other.is_real, label=f"{self.label}+{other.label}")

    def scaled(self, c: complex) -> "Symbol2":
        terms = tuple(SymbolTerm(psi=(lambda xi, f=t.psi: c * f(xi)), phi=t.phi) for t in self.terms)
        return self.model_copy(update={"terms": terms, "is_real": self.is_real and np.imag(c) == 0,
                                       "label": f"{c:g}*{self.label}"})

    def __sub__(self, other: "Symbol2") -> "Symbol2":
        return self + other.scaled(-1.0)


def const_symbol(c: complex) -> Symbol2:
    c = complex(c)
    value = c.real if c.imag == 0 else c
    return Symbol2(terms=(SymbolTerm(psi=lambda xi: np.full(xi.shape[:-1], value)),),
                   is_real=c.imag == 0, label=f"const:{value:g}")


def bump_symbol(radius: float = 1.0) -> Symbol2:
    """zeta(|xi| / radius)"""
    return Symbol2(terms=(SymbolTerm(psi=lambda xi: ZETA.eval(np.linalg.norm(xi, axis=-1) / radius)),),
                   xi_support_radius=radius, label=f"bump:{radius:g}")


def bump_x_symbol(x_radius: float = 0.5, xi_radius: float = 1.0) -> Symbol2:
    """zeta(|x| / x_radius) zeta(|xi| / xi_radius), compact in both variables"""
    return Symbol2(
        terms=(SymbolTerm(psi=lambda xi: ZETA.eval(np.linalg.norm(xi, axis=-1) / xi_radius),
                          phi=lambda x: ZETA.eval(np.linalg.norm(x, axis=-1) / x_radius)),),
        xi_support_radius=xi_radius, x_support_radius=x_radius, label=f"bump_x:{x_radius:g}",
    )


def gauss_xi_symbol(width: float = 1.0) -> Symbol2:
    """exp(-|xi|^2 / (2 width^2))"""
    return Symbol2(terms=(SymbolTerm(psi=lambda xi: np.exp(-np.sum(xi ** 2, axis=-1) / (2.0 * width ** 2))),),
                   label=f"gauss_xi:{width:g}")


class WHModel(BaseModel):
    """Lambda, Omega, alpha and the periodic grid carrying them"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lambda_domain: DomainSpec
    omega_domain: DomainSpec
    alpha: float = Field(..., ge=1.0)
    n_points: int = Field(..., ge=4)
    box_factor: float = Field(2.0, ge=1.0)
    oversampling: int = Field(4, ge=1)

    def __init__(self, **data):
        super().__init__(**data)
        # ValueError subclasses raised here must not turn into ValidationError
        self._check_grid()

    def _check_grid(self) -> None:
        if self.lambda_domain.dimension != self.omega_domain.dimension:
            raise ShapeMismatchError("Lambda and Omega must have the same dimension")
        lo, hi = self.omega_domain.bounding_box()
        xi_max = float(np.max(np.abs(np.concatenate([lo, hi]))))
        if not self.alpha * xi_max * self.h < np.pi:
            required = int(np.floor(self.alpha * xi_max * self.side / np.pi)) + 1
            required += required % 2
            raise NyquistError(
                f"grid of {self.n_points} points per axis cannot resolve |xi| <= {xi_max:g} at "
                f"alpha = {self.alpha:g}; need N >= {required}", required_n=required,
            )

    @property
    def dimension(self) -> int:
        return self.lambda_domain.dimension

    @property
    def side(self) -> float:
        return self.box_factor * self.lambda_domain.diameter

    @property
    def h(self) -> float:
        return self.side / self.n_points

    @property
    def size(self) -> int:
        return self.n_points ** self.dimension

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_points,) * self.dimension

    @property
    def dxi(self) -> float:
        """Width of one frequency cell in the xi variable"""
        return 2.0 * np.pi / (self.side * self.alpha)

    @cached_property
    def multi_index(self) -> np.ndarray:
        return np.stack(np.unravel_index(np.arange(self.size), self.shape), axis=-1)

    @cached_property
    def points(self) -> np.ndarray:
        lower = self.lambda_domain.center - 0.5 * self.side
        return lower + (self.multi_index + 0.5) * self.h

    @cached_property
    def xi_points(self) -> np.ndarray:
        axis = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.h) / self.alpha
        return axis[self.multi_index]

    @cached_property
    def lambda_rows(self) -> np.ndarray:
        return np.flatnonzero(self.lambda_domain.indicator(self.points))

    @cached_property
    def lambda_complement(self) -> np.ndarray:
        mask = np.ones(self.size, dtype=bool)
        mask[self.lambda_rows] = False
        return np.flatnonzero(mask)

    def cell_average(self, fn: Field2) -> np.ndarray:
        """Mean of fn over each frequency cell, shaped like the FFT output"""
        s = self.oversampling
        offsets = ((np.arange(s) + 0.5) / s - 0.5) * self.dxi
        sub = np.stack(np.meshgrid(*([offsets] * self.dimension), indexing="ij"), axis=-1)
        total = np.zeros(self.size, dtype=complex)
        for offset in sub.reshape(-1, self.dimension):
            total += fn(self.xi_points + offset)
        return (total / s ** self.dimension).reshape(self.shape)

    @cached_property
    def omega_multiplier(self) -> np.ndarray:
        return np.real(self.cell_average(lambda xi: self.omega_domain.indicator(xi).astype(float)))

    def symbol_multipliers(self, a: Symbol2) -> List[Tuple[Optional[np.ndarray], np.ndarray]]:
        """(phi sampled on the grid, cell-averaged psi) per term"""
        out = []
        for term in a.terms:
            phi = None if term.phi is None else np.asarray(term.phi(self.points), dtype=complex)
            out.append((phi, self.cell_average(term.psi)))
        return out

    def grid_meta(self) -> dict:
        return {"alpha": self.alpha, "n_points": self.n_points, "h": self.h, "side": self.side,
                "lambda_points": int(self.lambda_rows.size)}


def build_model(lambda_domain, omega_domain, alpha: float, grid: Optional[GridConfig] = None,
                dimension: int = 2) -> WHModel:
    """Model with N taken from the grid rule"""
    grid = grid or GridConfig(box_factor=settings.box_factor, oversampling=settings.symbol_oversampling)
    if isinstance(lambda_domain, (DomainConfig, dict)):
        lambda_domain = build_domain(lambda_domain, dimension)
    if isinstance(omega_domain, (DomainConfig, dict)):
        omega_domain = build_domain(omega_domain, dimension)
    return WHModel(lambda_domain=lambda_domain, omega_domain=omega_domain, alpha=alpha,
                   n_points=grid.points_for(alpha), box_factor=grid.box_factor, oversampling=grid.oversampling)


# Column-block application

def _fourier(model: WHModel, multiplier: np.ndarray, X: np.ndarray) -> np.ndarray:
    axes = tuple(range(model.dimension))
    Y = X.reshape(model.shape + (X.shape[1],))
    Y = scipy.fft.ifftn(multiplier[..., None] * scipy.fft.fftn(Y, axes=axes), axes=axes)
    return Y.reshape(model.size, X.shape[1])


def _apply_symbol(model: WHModel, parts, X: np.ndarray, adjoint: bool = False) -> np.ndarray:
    total = np.zeros(X.shape, dtype=complex)
    for phi, psi in parts:
        if adjoint:
            Y = X if phi is None else np.conj(phi)[:, None] * X
            total += _fourier(model, np.conj(psi), Y)
        else:
            Y = _fourier(model, psi, X)
            total += Y if phi is None else phi[:, None] * Y
    return total


class _Compressed:
    """K = mL part(op_alpha(a)) mR with real Fourier multipliers mL, mR (None = identity)"""

    def __init__(self, model: WHModel, a: Symbol2, left: Optional[np.ndarray], right: Optional[np.ndarray],
                 hermitian_part: bool = False):
        self.model = model
        self.a = a
        self.left = left
        self.right = right
        self.hermitian_part = hermitian_part
        self.parts = model.symbol_multipliers(a)

    def _mult(self, m, X):
        return X if m is None else _fourier(self.model, m, X)

    def _core(self, X, adjoint):
        if self.hermitian_part:
            return 0.5 * (_apply_symbol(self.model, self.parts, X) + _apply_symbol(self.model, self.parts, X, True))
        return _apply_symbol(self.model, self.parts, X, adjoint)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return self._mult(self.left, self._core(self._mult(self.right, X), False))

    def apply_adjoint(self, X: np.ndarray) -> np.ndarray:
        return self._mult(self.right, self._core(self._mult(self.left, X), True))

    def circulant_multiplier(self) -> Optional[np.ndarray]:
        if not self.a.x_independent:
            return None
        core = sum(psi for _, psi in self.parts)
        if self.hermitian_part:
            core = np.real(core)
        for m in (self.left, self.right):
            if m is not None:
                core = core * m
        return core


def _circulant_block(model: WHModel, multiplier: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """K[i, j] = ifftn(multiplier)[(i - j) mod N] on the given rows and columns"""
    kernel = scipy.fft.ifftn(multiplier).ravel()
    out = np.empty((rows.size, cols.size), dtype=complex)
    if rows.size == 0 or cols.size == 0:
        return out
    ri, ci = model.multi_index[rows], model.multi_index[cols]
    step = max(1, _CHUNK_ENTRIES // cols.size)
    for start in range(0, rows.size, step):
        diff = (ri[start:start + step, None, :] - ci[None, :, :]) % model.n_points
        lin = np.ravel_multi_index(tuple(np.moveaxis(diff, -1, 0)), model.shape)
        out[start:start + step] = kernel[lin]
    return out


def _unit_columns(size: int, index: np.ndarray) -> np.ndarray:
    E = np.zeros((size, index.size), dtype=complex)
    E[index, np.arange(index.size)] = 1.0
    return E


def _columns(apply: Callable[[np.ndarray], np.ndarray], model: WHModel, cols: np.ndarray,
             threads: Optional[int]) -> np.ndarray:
    """apply(E_cols) in parallel column chunks"""
    chunks = [cols[i:i + _CHUNK_COLUMNS] for i in range(0, cols.size, _CHUNK_COLUMNS)]
    if not chunks:
        return np.zeros((model.size, 0), dtype=complex)
    workers = threads or settings.thread_count
    with ThreadPoolExecutor(max_workers=workers) as executor:
        blocks = list(executor.map(lambda c: apply(_unit_columns(model.size, c)), chunks))
    return np.concatenate(blocks, axis=1)


def _block(op: _Compressed, rows: np.ndarray, cols: np.ndarray, threads: Optional[int] = None) -> np.ndarray:
    multiplier = op.circulant_multiplier()
    if multiplier is not None:
        return _circulant_block(op.model, multiplier, rows, cols)
    if rows.size <= cols.size:
        Z = _columns(op.apply_adjoint, op.model, rows, threads)
        return Z[cols, :].conj().T
    return _columns(op.apply, op.model, cols, threads)[rows, :]


def _all(model: WHModel) -> np.ndarray:
    return np.arange(model.size)


def _require_dense_box(model: WHModel) -> None:
    if model.size > MAX_DENSE_BOX:
        raise ConstraintError(
            f"full-box matrix of {model.size} points exceeds {MAX_DENSE_BOX}; use a coarser grid"
        )


# Operators

def op_alpha(model: WHModel, a: Symbol2, threads: Optional[int] = None) -> DenseOperator:
    """Full-box matrix of op_alpha(a)"""
    _require_dense_box(model)
    op = _Compressed(model, a, None, None)
    entries = _block(op, _all(model), _all(model), threads)
    return DenseOperator(entries=entries, grid_meta=model.grid_meta())


def projection_omega(model: WHModel) -> DenseOperator:
    _require_dense_box(model)
    index = _all(model)
    entries = _circulant_block(model, model.omega_multiplier, index, index)
    return DenseOperator.hermitian_from(entries, grid_meta=model.grid_meta())


def _omega(model: WHModel, complement: bool) -> np.ndarray:
    return 1.0 - model.omega_multiplier if complement else model.omega_multiplier


def assemble_S(model: WHModel, a: Symbol2, complement: bool = False, threads: Optional[int] = None) -> DenseOperator:
    """chi_L P re op(a) P chi_L on the Lambda points; complement=True uses Omega_1 = box \\ Omega"""
    m = _omega(model, complement)
    rows = model.lambda_rows
    entries = _block(_Compressed(model, a, m, m, hermitian_part=True), rows, rows, threads)
    return DenseOperator.hermitian_from(entries, grid_meta=model.grid_meta())


def assemble_T(model: WHModel, a: Symbol2, complement: bool = False, threads: Optional[int] = None) -> DenseOperator:
    """chi_L P op(a) P chi_L on the Lambda points"""
    m = _omega(model, complement)
    rows = model.lambda_rows
    entries = _block(_Compressed(model, a, m, m), rows, rows, threads)
    return DenseOperator(entries=entries, grid_meta=model.grid_meta())


def assemble_V(model: WHModel, a: Symbol2, a1: Symbol2, threads: Optional[int] = None) -> DenseOperator:
    """T(a; Lambda, Omega) + T(a1; Lambda, Omega_1)"""
    entries = assemble_T(model, a, False, threads).entries + assemble_T(model, a1, True, threads).entries
    return DenseOperator(entries=entries, grid_meta=model.grid_meta())


def assemble_H(model: WHModel, a: Symbol2, a1: Symbol2, threads: Optional[int] = None) -> DenseOperator:
    """S(a; Lambda, Omega) + S(a1; Lambda, Omega_1)"""
    entries = assemble_S(model, a, False, threads).entries + assemble_S(model, a1, True, threads).entries
    return DenseOperator.hermitian_from(entries, grid_meta=model.grid_meta())


def _bulk_parts(model: WHModel, a: Symbol2, a1: Optional[Symbol2], hermitian: bool) -> List[_Compressed]:
    parts = [_Compressed(model, a, model.omega_multiplier, model.omega_multiplier, hermitian_part=hermitian)]
    if a1 is not None:
        m1 = 1.0 - model.omega_multiplier
        parts.append(_Compressed(model, a1, m1, m1, hermitian_part=hermitian))
    return parts


def _bulk_trace(model: WHModel, parts: List[_Compressed], g: Callable[[np.ndarray], np.ndarray],
                path: str, hermitian: bool, threads: Optional[int]) -> complex:
    """tr chi_L g(K_box) chi_L for the full-box operator K_box = sum of parts"""
    rows = model.lambda_rows
    if path == "exact":
        multipliers = [p.circulant_multiplier() for p in parts]
        if any(m is None for m in multipliers):
            raise InvalidParameterError("the exact bulk trace needs x-independent symbols; use path='matrix'")
        total = sum(multipliers).ravel()
        return rows.size / model.size * complex(np.sum(g(np.real(total) if hermitian else total)))
    _require_dense_box(model)
    index = _all(model)
    box = sum(_block(p, index, index, threads) for p in parts)
    if hermitian:
        lam, u = scipy.linalg.eigh(0.5 * (box + box.conj().T))
        weights = np.sum(np.abs(u[rows, :]) ** 2, axis=0)
        return complex(weights @ g(lam))
    return complex(np.trace(g(box)[np.ix_(rows, rows)]))


def _default_path(a: Symbol2, a1: Optional[Symbol2]) -> str:
    return "exact" if a.x_independent and (a1 is None or a1.x_independent) else "matrix"


def trace_D(model: WHModel, a: Symbol2, g: SingularFunction, a1: Optional[Symbol2] = None,
            path: Optional[str] = None, threads: Optional[int] = None) -> float:
    """
    tr[chi_L g(S) chi_L - chi_L g(S_box) chi_L] with S = S_alpha(a; Lambda, Omega),
    or H_alpha(a, a1) when a1 is given. The bulk term uses Lambda replaced by the
    whole box, traced over the Lambda rows: path 'exact' integrates the kernel
    diagonal for x-independent symbols, 'matrix' diagonalizes the box operator.
    """
    path = path or _default_path(a, a1)
    if path not in ("exact", "matrix"):
        raise InvalidParameterError(f"unknown trace path '{path}'")
    S = assemble_S(model, a, False, threads) if a1 is None else assemble_H(model, a, a1, threads)
    lam = scipy.linalg.eigvalsh(S.entries) if S.entries.size else np.zeros(0)
    local = float(np.sum(g(lam)))
    bulk = _bulk_trace(model, _bulk_parts(model, a, a1, True), g, path, True, threads)
    logger.debug("trace D", alpha=model.alpha, points=int(lam.size), path=path, local=local, bulk=bulk.real)
    return local - bulk.real


def trace_V_power(model: WHModel, a: Symbol2, a1: Symbol2, p: int, path: Optional[str] = None,
                  threads: Optional[int] = None) -> complex:
    """tr[V^p - chi_L V_box^p chi_L] for the non-self-adjoint V_alpha(a, a1), by repeated products"""
    if not 1 <= p <= 6:
        raise InvalidParameterError(f"power must lie in [1, 6], got {p}")
    path = path or _default_path(a, a1)
    V = assemble_V(model, a, a1, threads).entries
    local = complex(np.trace(np.linalg.matrix_power(V, p))) if V.size else 0j
    bulk = _bulk_trace(model, _bulk_parts(model, a, a1, False),
                       lambda m: np.linalg.matrix_power(m, p) if m.ndim == 2 else m ** p, path, False, threads)
    return local - bulk


def cross_term(model: WHModel, a: Symbol2, variant: CrossVariant, threads: Optional[int] = None) -> DenseOperator:
    """
    sandwiched: chi_L P op(a) P (I - chi_L); indicator: chi_L op(a) (I - chi_L);
    projection: P op(a) (I - P), returned as a smaller operator with the same
    non-zero singular values.
    """
    variant = CrossVariant(variant)
    meta = dict(model.grid_meta(), variant=variant.value)
    rows, outside = model.lambda_rows, model.lambda_complement
    p = model.omega_multiplier
    if variant == CrossVariant.SANDWICHED:
        return DenseOperator(entries=_block(_Compressed(model, a, p, p), rows, outside, threads), grid_meta=meta)
    if variant == CrossVariant.INDICATOR:
        return DenseOperator(entries=_block(_Compressed(model, a, None, None), rows, outside, threads), grid_meta=meta)

    op = _Compressed(model, a, p, 1.0 - p)
    multiplier = op.circulant_multiplier()
    if multiplier is not None:
        # diagonal in the Fourier basis
        values = multiplier.ravel()
        return DenseOperator(entries=np.diag(values[np.abs(values) > 0]), grid_meta=dict(meta, basis="fourier"))
    support = np.zeros(model.size, dtype=bool)
    for phi, _ in op.parts:
        support |= True if phi is None else np.abs(phi) > 0
    cols = np.flatnonzero(support)
    # P op(a) (I - P) = (P E_S) A2, A2 = sum_r diag(phi_r) [psi_r (I - P)] restricted to the rows S
    left = _columns(lambda X: _fourier(model, p, X), model, cols, threads)
    r_factor = scipy.linalg.qr(left, mode="r")[0][: cols.size]
    a2 = np.zeros((cols.size, model.size), dtype=complex)
    for phi, psi in op.parts:
        adjoint_rows = _columns(lambda X, m=(1.0 - p) * np.conj(psi): _fourier(model, m, X), model, cols, threads)
        weight = np.ones(cols.size) if phi is None else phi[cols]
        a2 += weight[:, None] * adjoint_rows.conj().T
    return DenseOperator(entries=r_factor @ a2, grid_meta=dict(meta, basis="factored"))


def idempotency_defect(P) -> float:
    """||P^2 - P||_1 / ||P||_1; a WHModel uses its exact Fourier multiplier"""
    if isinstance(P, WHModel):
        p = P.omega_multiplier
        total = float(np.sum(np.abs(p)))
        return float(np.sum(np.abs(p * p - p))) / total if total else 0.0
    matrix = as_matrix(P)
    total = norm_p(matrix, 1.0)
    return norm_p(matrix @ matrix - matrix, 1.0) / total if total else 0.0
