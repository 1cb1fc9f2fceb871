"""
f(A) for Hermitian matrices through the Helffer-Sjostrand integral

    f(A) = (1/pi) \\iint omega(x, y) (A - x - iy)^(-1) dx dy

with an adaptive tensor Gauss-Legendre quadrature on the cone, plus the
eigendecomposition oracle used to check it.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import structlog
from pydantic import BaseModel, ConfigDict, field_validator

from .config import settings
from .exceptions import DomainError, EigenSolverError, NumericError, QuadratureError, ShapeMismatchError
from .func_classes import SingularFunction, partition_at_singularities
from .models import CalculusMethod, HSScheme, QuadratureSpec
from .qa_extension import QAExtension, build_extension

logger = structlog.get_logger(__name__)

HERMITIAN_TOL = 1e-12
# complex entries per evaluation chunk of the quadrature
_CHUNK_ENTRIES = 1 << 22


class DenseOperator(BaseModel):
    """Finite matrix with an optional Hermitian flag and discretization metadata"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray
    hermitian: bool = False
    grid_meta: Optional[Dict[str, Any]] = None
    error_estimate: Optional[float] = None

    @field_validator("entries")
    def validate_entries(cls, v):
        v = np.asarray(v)
        if v.ndim != 2:
            raise ValueError(f"operator entries must be a matrix, got shape {v.shape}")
        return v

    @classmethod
    def hermitian_from(cls, matrix, **kwargs) -> "DenseOperator":
        """Symmetrized copy flagged Hermitian"""
        matrix = np.asarray(matrix)
        return cls(entries=0.5 * (matrix + matrix.conj().T), hermitian=True, **kwargs)

    @classmethod
    def checked_hermitian(cls, matrix, **kwargs) -> "DenseOperator":
        matrix = np.asarray(matrix)
        defect = hermitian_defect(matrix)
        if defect > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(matrix), initial=0.0))):
            raise DomainError(f"matrix is not Hermitian: max |A - A*| = {defect:.3e}")
        return cls.hermitian_from(matrix, **kwargs)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    def adjoint(self) -> "DenseOperator":
        return DenseOperator(entries=self.entries.conj().T, hermitian=self.hermitian, grid_meta=self.grid_meta)

    def norm(self) -> float:
        """Operator (spectral) norm"""
        if self.entries.size == 0:
            return 0.0
        return float(scipy.linalg.norm(self.entries, 2))


Operand = Union[DenseOperator, np.ndarray]


def hermitian_defect(matrix: np.ndarray) -> float:
    if matrix.shape[0] != matrix.shape[1]:
        return np.inf
    return float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))


def as_matrix(op: Operand) -> np.ndarray:
    return op.entries if isinstance(op, DenseOperator) else np.asarray(op)


def _require_hermitian(op: Operand, name: str = "A") -> np.ndarray:
    matrix = as_matrix(op)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ShapeMismatchError(f"{name} must be square, got shape {matrix.shape}")
    if not (isinstance(op, DenseOperator) and op.hermitian):
        scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
        if hermitian_defect(matrix) > HERMITIAN_TOL * scale:
            raise DomainError(f"{name} is not Hermitian")
    return matrix


def eigh(op: Operand) -> Tuple[np.ndarray, np.ndarray]:
    matrix = _require_hermitian(op)
    try:
        return scipy.linalg.eigh(matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenSolverError(f"eigendecomposition failed: {e}") from e


def resolvent(A: Operand, z: complex, check: bool = True) -> DenseOperator:
    """(A - z)^(-1) by LU factorization"""
    if np.imag(z) == 0:
        raise DomainError(f"resolvent needs Im z != 0, got z = {z}")
    matrix = _require_hermitian(A)
    m = matrix.shape[0]
    R = scipy.linalg.solve(matrix - z * np.eye(m), np.eye(m, dtype=complex))
    if check:
        bound = 1.0 / abs(np.imag(z))
        norm = float(scipy.linalg.norm(R, 2)) if m else 0.0
        if norm > bound * (1.0 + 1e-8):
            raise NumericError(f"resolvent norm {norm:.6g} exceeds 1/|Im z| = {bound:.6g}")
    return DenseOperator(entries=R)


# Adaptive cone quadrature
#
# Cells are rectangles [u0, u1] x [v0, v1] in x = x0 + u, y = v |u|,
# dx dy = |u| du dv. For real f only v > 0 is integrated and the result
# is X + X*.

def _initial_cells(ext: QAExtension, eigenvalues: np.ndarray, spec: QuadratureSpec,
                   real: bool) -> np.ndarray:
    R = ext.f.R
    levels = int(min(60, np.ceil(np.log2(1.0 / spec.target_tolerance) / ext.gamma) + 2))
    radial = R * 2.0 ** -np.arange(0, levels + 1)
    shifted = eigenvalues - ext.f.x0
    if shifted.size > 256:
        shifted = np.quantile(shifted, np.linspace(0.0, 1.0, 256))
    shifted = shifted[np.abs(shifted) < R]
    u_edges = np.unique(np.concatenate([[0.0], radial, -radial, shifted]))
    v_edges = np.array([0.0, 0.5, 1.0]) if real else np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    u0, v0 = np.meshgrid(u_edges[:-1], v_edges[:-1], indexing="ij")
    u1, v1 = np.meshgrid(u_edges[1:], v_edges[1:], indexing="ij")
    cells = np.column_stack([u0.ravel(), u1.ravel(), v0.ravel(), v1.ravel(), np.zeros(u0.size)])
    return cells[cells[:, 1] > cells[:, 0]]


def _children(cells: np.ndarray) -> np.ndarray:
    u0, u1, v0, v1, depth = cells.T
    um, vm = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
    d = depth + 1
    kids = np.stack([
        np.column_stack([u0, um, v0, vm, d]),
        np.column_stack([um, u1, v0, vm, d]),
        np.column_stack([u0, um, vm, v1, d]),
        np.column_stack([um, u1, vm, v1, d]),
    ], axis=1)
    return kids.reshape(-1, 5)


class _CellIntegrator:
    """Maps cells to their Gauss-Legendre nodes z_k and weights c_k = |u| omega w / pi."""

    def __init__(self, ext: QAExtension, eigenvalues: np.ndarray, order: int, threads: int):
        self.ext = ext
        self.eigenvalues = eigenvalues
        t, w = np.polynomial.legendre.leggauss(order)
        tu, tv = np.meshgrid(t, t, indexing="ij")
        self.tu, self.tv = tu.ravel(), tv.ravel()
        self.w = np.outer(w, w).ravel()
        self.nodes_per_cell = self.w.size
        self.threads = threads

    def nodes(self, cells: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        u0, u1, v0, v1 = (cells[:, j, None] for j in range(4))
        hu, hv = 0.5 * (u1 - u0), 0.5 * (v1 - v0)
        u = 0.5 * (u0 + u1) + hu * self.tu[None, :]
        v = 0.5 * (v0 + v1) + hv * self.tv[None, :]
        y = v * np.abs(u)
        x = self.ext.f.x0 + u
        omega = self.ext.eval_omega(x, y)
        c = omega * np.abs(u) * (hu * hv) * self.w[None, :] / np.pi
        return (x + 1j * y), c

    def _chunk(self, cells: np.ndarray) -> np.ndarray:
        z, c = self.nodes(cells)
        lam = self.eigenvalues
        # d_i = sum_k c_k / (lambda_i - z_k), per cell
        out = np.empty((cells.shape[0], lam.size), dtype=complex)
        for j in range(cells.shape[0]):
            out[j] = (c[j][None, :] / (lam[:, None] - z[j][None, :])).sum(axis=1)
        return out

    def evaluate(self, cells: np.ndarray) -> np.ndarray:
        if cells.shape[0] == 0:
            return np.zeros((0, self.eigenvalues.size), dtype=complex)
        per_chunk = max(1, _CHUNK_ENTRIES // max(1, self.eigenvalues.size * self.nodes_per_cell))
        chunks = [cells[i:i + per_chunk] for i in range(0, cells.shape[0], per_chunk)]
        if self.threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                parts = list(executor.map(self._chunk, chunks))
        else:
            parts = [self._chunk(chunk) for chunk in chunks]
        return np.concatenate(parts, axis=0)


def _adaptive_cells(integrator: _CellIntegrator, cells: np.ndarray, spec: QuadratureSpec,
                    symmetric_factor: float) -> Tuple[np.ndarray, np.ndarray, float, int]:
    """Refine the worst cells until the summed error estimate meets the tolerance."""
    m = integrator.eigenvalues.size
    coarse = integrator.evaluate(cells)
    kids = _children(cells)
    kid_values = integrator.evaluate(kids).reshape(cells.shape[0], 4, m)
    rounds = 0
    while True:
        fine = kid_values.sum(axis=1)
        errors = np.max(np.abs(coarse - fine), axis=1, initial=0.0)
        total = symmetric_factor * float(errors.sum())
        if total <= spec.target_tolerance:
            break
        splittable = cells[:, 4] < spec.max_refinement_depth
        if not np.any(splittable & (errors > 0)):
            raise QuadratureError(
                f"Helffer-Sjostrand quadrature stuck at depth {spec.max_refinement_depth}: "
                f"error {total:.3e} > {spec.target_tolerance:.3e}",
                achieved_error=total, refinements=rounds,
            )
        candidates = np.flatnonzero(splittable)
        order = candidates[np.argsort(-errors[candidates], kind="stable")]
        count = max(1, int(np.ceil(0.1 * order.size)))
        chosen = np.sort(order[:count])
        if cells.shape[0] + 3 * count > spec.max_cells:
            raise QuadratureError(
                f"Helffer-Sjostrand quadrature exceeded {spec.max_cells} cells: "
                f"error {total:.3e} > {spec.target_tolerance:.3e}",
                achieved_error=total, refinements=rounds,
            )
        keep = np.ones(cells.shape[0], dtype=bool)
        keep[chosen] = False
        new_cells = kids.reshape(cells.shape[0], 4, 5)[chosen].reshape(-1, 5)
        new_coarse = kid_values[chosen].reshape(-1, m)
        new_kids = _children(new_cells)
        new_kid_values = integrator.evaluate(new_kids).reshape(new_cells.shape[0], 4, m)

        cells = np.concatenate([cells[keep], new_cells])
        coarse = np.concatenate([coarse[keep], new_coarse])
        kids = np.concatenate([kids.reshape(-1, 4, 5)[keep].reshape(-1, 5), new_kids])
        kid_values = np.concatenate([kid_values[keep], new_kid_values])
        rounds += 1
    logger.debug("quadrature converged", cells=int(cells.shape[0]), rounds=rounds, error=total)
    return cells, fine, total, rounds


def _ordered_sum(cells: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Pairwise sum over cells in (u0, v0, depth) order"""
    order = np.lexsort((cells[:, 4], cells[:, 2], cells[:, 0]))
    return np.ascontiguousarray(values[order].T).sum(axis=1)


def hs_apply(ext: QAExtension, A: Operand, spec: Optional[QuadratureSpec] = None,
             threads: Optional[int] = None) -> DenseOperator:
    """
    (1/pi) \\iint omega(x, y) R(x + iy; A) dx dy by adaptive quadrature.

    Real f integrates the upper half plane and returns X + X*. The
    certified error estimate (operator norm) is attached to the result.
    """
    spec = spec or QuadratureSpec(
        target_tolerance=settings.hs_tolerance, max_refinement_depth=settings.hs_max_depth,
        gauss_order=settings.hs_gauss_order, max_cells=settings.hs_max_cells,
    )
    lam, U = eigh(A)
    m = lam.size
    real = ext.f.is_real
    integrator = _CellIntegrator(ext, lam, spec.gauss_order, threads or settings.thread_count)
    cells = _initial_cells(ext, lam, spec, real)
    if spec.y_floor > 0:
        far = np.maximum(np.abs(cells[:, 2]), np.abs(cells[:, 3])) * np.maximum(
            np.abs(cells[:, 0]), np.abs(cells[:, 1])) > spec.y_floor
        cells = cells[far]
    symmetric_factor = 2.0 if real else 1.0
    cells, values, error, rounds = _adaptive_cells(integrator, cells, spec, symmetric_factor)

    if spec.scheme == HSScheme.RESOLVENT:
        matrix = _resolvent_reassembly(integrator, cells, as_matrix(A))
        if real:
            matrix = matrix + matrix.conj().T
    else:
        d = _ordered_sum(cells, values)
        if real:
            matrix = (U * (2.0 * d.real)[None, :]) @ U.conj().T
        else:
            matrix = (U * d[None, :]) @ U.conj().T

    meta = dict(cells=int(cells.shape[0]), rounds=rounds, scheme=spec.scheme.value, dimension=m)
    logger.info("hs_apply", label=ext.f.label, n=ext.n, error=error, **meta)
    if real:
        return DenseOperator.hermitian_from(matrix, grid_meta=meta, error_estimate=error)
    return DenseOperator(entries=matrix, grid_meta=meta, error_estimate=error)


def _resolvent_reassembly(integrator: _CellIntegrator, cells: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """sum_k c_k (A - z_k)^(-1) over the Gauss nodes of the children of every cell"""
    m = matrix.shape[0]
    kids = _children(cells[np.lexsort((cells[:, 4], cells[:, 2], cells[:, 0]))])
    identity = np.eye(m, dtype=complex)
    total = np.zeros((m, m), dtype=complex)
    batch = max(1, (1 << 24) // max(1, m * m * integrator.nodes_per_cell))
    for start in range(0, kids.shape[0], batch):
        z, c = integrator.nodes(kids[start:start + batch])
        z, c = z.ravel(), c.ravel()
        live = c != 0
        if not np.any(live):
            continue
        shifted = matrix[None, :, :] - z[live, None, None] * identity[None, :, :]
        solves = np.linalg.solve(shifted, np.broadcast_to(identity, shifted.shape))
        total += np.tensordot(c[live], solves, axes=(0, 0))
    return total


def hs_apply_function(f: SingularFunction, A: Operand, spec: Optional[QuadratureSpec] = None,
                      n: Optional[int] = None, threads: Optional[int] = None) -> DenseOperator:
    """hs_apply for a general function, one extension per partition piece"""
    pieces = partition_at_singularities(f)
    total, error, meta = None, 0.0, []
    for piece in pieces:
        result = hs_apply(build_extension(piece, n), A, spec, threads)
        total = result.entries if total is None else total + result.entries
        error += result.error_estimate or 0.0
        meta.append(result.grid_meta)
    grid_meta = dict(pieces=meta)
    if f.is_real:
        return DenseOperator.hermitian_from(total, grid_meta=grid_meta, error_estimate=error)
    return DenseOperator(entries=total, grid_meta=grid_meta, error_estimate=error)


def spectral_apply(f: SingularFunction, A: Operand) -> DenseOperator:
    """U f(Lambda) U* from the eigendecomposition of A"""
    lam, U = eigh(A)
    values = f(lam)
    matrix = (U * values[None, :]) @ U.conj().T
    if f.is_real:
        return DenseOperator.hermitian_from(matrix)
    return DenseOperator(entries=matrix)


def apply_function(f: SingularFunction, A: Operand, method: CalculusMethod = CalculusMethod.SPECTRAL,
                   spec: Optional[QuadratureSpec] = None, n: Optional[int] = None) -> DenseOperator:
    if method == CalculusMethod.HS:
        return hs_apply_function(f, A, spec, n)
    return spectral_apply(f, A)


def perturbation(A: Operand, B: Operand, J: Operand) -> DenseOperator:
    """V = AJ - JB"""
    a, b, j = as_matrix(A), as_matrix(B), as_matrix(J)
    _check_shapes(a, b, j)
    return DenseOperator(entries=a @ j - j @ b)


def _check_shapes(a: np.ndarray, b: np.ndarray, j: np.ndarray) -> None:
    if a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
        raise ShapeMismatchError(f"A and B must be square, got {a.shape} and {b.shape}")
    if j.shape != (a.shape[0], b.shape[0]):
        raise ShapeMismatchError(f"J must have shape {(a.shape[0], b.shape[0])}, got {j.shape}")


def quasi_commutator(f: SingularFunction, A: Operand, B: Operand, J: Operand,
                     method: CalculusMethod = CalculusMethod.SPECTRAL,
                     spec: Optional[QuadratureSpec] = None, n: Optional[int] = None) -> DenseOperator:
    """f(A) J - J f(B)"""
    a, b, j = as_matrix(A), as_matrix(B), as_matrix(J)
    _check_shapes(a, b, j)
    fa = apply_function(f, A, method, spec, n)
    fb = apply_function(f, B, method, spec, n)
    error = None
    if fa.error_estimate is not None and fb.error_estimate is not None:
        j_norm = float(scipy.linalg.norm(j, 2)) if j.size else 0.0
        error = (fa.error_estimate + fb.error_estimate) * j_norm
    return DenseOperator(entries=fa.entries @ j - j @ fb.entries, error_estimate=error)


def resolvent_identity_defect(A: Operand, B: Operand, J: Operand, z: complex) -> float:
    """|| R(z;A) J - J R(z;B) + R(z;A) V R(z;B) ||"""
    j = as_matrix(J)
    ra = resolvent(A, z).entries
    rb = resolvent(B, z).entries
    v = perturbation(A, B, J).entries
    defect = ra @ j - j @ rb + ra @ v @ rb
    return float(scipy.linalg.norm(defect, 2)) if defect.size else 0.0

