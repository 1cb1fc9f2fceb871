"""
Catalog of bounded domains in R^d used for Lambda (space) and Omega
(frequency): indicator functions, boundary meshes with exterior unit
normals, and volume quadrature rules.
"""

from math import ceil
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .exceptions import DomainError, InvalidParameterError
from .models import DomainConfig, MeshReport, SmoothnessLabel

logger = structlog.get_logger(__name__)

NORMAL_TOL = 1e-12


class BoundaryMesh(BaseModel):
    """Nodes on the boundary with exterior unit normals and surface weights"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def flipped(self) -> "BoundaryMesh":
        return BoundaryMesh(points=self.points, normals=-self.normals, weights=self.weights)

    @staticmethod
    def join(*meshes: "BoundaryMesh") -> "BoundaryMesh":
        return BoundaryMesh(
            points=np.concatenate([m.points for m in meshes]),
            normals=np.concatenate([m.normals for m in meshes]),
            weights=np.concatenate([m.weights for m in meshes]),
        )


def _gauss(order: int, a: float = 0.0, b: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w


def _sphere_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unit sphere: Gauss-Legendre in cos(theta) times uniform phi"""
    n_theta = max(2, int(ceil(np.sqrt(nodes / 2.0))))
    n_phi = 2 * n_theta
    mu, w_mu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    mm, pp = np.meshgrid(mu, phi, indexing="ij")
    st = np.sqrt(1.0 - mm ** 2)
    dirs = np.stack([st * np.cos(pp), st * np.sin(pp), mm], axis=-1).reshape(-1, 3)
    weights = np.outer(w_mu, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
    return dirs, weights


class DomainSpec(BaseModel):
    """Bounded domain in R^d"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: str
    dimension: int = Field(2, ge=2, le=3)
    smoothness: SmoothnessLabel = SmoothnessLabel.PW_C3

    def indicator(self, x) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def boundary_mesh(self, nodes: int) -> BoundaryMesh:
        raise NotImplementedError

    def volume_quadrature(self, order: int = 32) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def volume(self) -> Optional[float]:
        return None

    def surface_area(self) -> Optional[float]:
        return None

    @property
    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.max(hi - lo))

    @property
    def center(self) -> np.ndarray:
        lo, hi = self.bounding_box()
        return 0.5 * (lo + hi)

    def _points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise DomainError(f"points of dimension {x.shape[-1]} given to a {self.dimension}-d domain")
        return x


class Disk(DomainSpec):
    """Euclidean ball (disk for d = 2)"""
    kind: str = "disk"
    origin: Tuple[float, ...] = ()
    radius: float = Field(1.0, gt=0)

    @field_validator("origin")
    def validate_origin(cls, v):
        return tuple(float(c) for c in v)

    @property
    def _c(self) -> np.ndarray:
        return np.array(self.origin) if self.origin else np.zeros(self.dimension)

    def indicator(self, x) -> np.ndarray:
        x = self._points(x)
        return np.linalg.norm(x - self._c, axis=-1) <= self.radius

    def bounding_box(self):
        return self._c - self.radius, self._c + self.radius

    def boundary_mesh(self, nodes: int) -> BoundaryMesh:
        if self.dimension == 2:
            theta = 2.0 * np.pi * (np.arange(nodes) + 0.5) / nodes
            normals = np.column_stack([np.cos(theta), np.sin(theta)])
            weights = np.full(nodes, 2.0 * np.pi * self.radius / nodes)
        else:
            normals, w = _sphere_rule(nodes)
            weights = self.radius ** 2 * w
        return BoundaryMesh(points=self._c + self.radius * normals, normals=normals, weights=weights)

    def volume_quadrature(self, order: int = 32):
        r, wr = _gauss(order, 0.0, self.radius)
        if self.dimension == 2:
            m = 2 * order
            theta = 2.0 * np.pi * np.arange(m) / m
            dirs = np.column_stack([np.cos(theta), np.sin(theta)])
            wd = np.full(m, 2.0 * np.pi / m)
            wr = wr * r
        else:
            dirs, wd = _sphere_rule(2 * order * order)
            wr = wr * r ** 2
        points = self._c + (r[:, None, None] * dirs[None, :, :]).reshape(-1, self.dimension)
        return points, np.outer(wr, wd).ravel()

    def volume(self) -> float:
        return np.pi * self.radius ** 2 if self.dimension == 2 else 4.0 / 3.0 * np.pi * self.radius ** 3

    def surface_area(self) -> float:
        return 2.0 * np.pi * self.radius if self.dimension == 2 else 4.0 * np.pi * self.radius ** 2


class Cube(DomainSpec):
    """Axis-aligned cube (square for d = 2)"""
    kind: str = "square"
    origin: Tuple[float, ...] = ()
    half_width: float = Field(1.0, gt=0)

    @property
    def _c(self) -> np.ndarray:
        return np.array(self.origin, dtype=float) if self.origin else np.zeros(self.dimension)

    def indicator(self, x) -> np.ndarray:
        x = self._points(x)
        return np.max(np.abs(x - self._c), axis=-1) <= self.half_width

    def bounding_box(self):
        return self._c - self.half_width, self._c + self.half_width

    def boundary_mesh(self, nodes: int) -> BoundaryMesh:
        d, h = self.dimension, self.half_width
        per_face = max(1, nodes // (2 * d))
        k = per_face if d == 2 else max(1, int(round(np.sqrt(per_face))))
        t, w = _gauss(k, -h, h)
        if d == 3:
            t1, t2 = np.meshgrid(t, t, indexing="ij")
            face = np.column_stack([t1.ravel(), t2.ravel()])
            fw = np.outer(w, w).ravel()
        else:
            face, fw = t[:, None], w
        points, normals, weights = [], [], []
        for axis in range(d):
            others = [i for i in range(d) if i != axis]
            for side in (-1.0, 1.0):
                p = np.zeros((fw.size, d))
                p[:, others] = face
                p[:, axis] = side * h
                n = np.zeros((fw.size, d))
                n[:, axis] = side
                points.append(self._c + p)
                normals.append(n)
                weights.append(fw)
        return BoundaryMesh(points=np.concatenate(points), normals=np.concatenate(normals),
                            weights=np.concatenate(weights))

    def volume_quadrature(self, order: int = 32):
        t, w = _gauss(order, -self.half_width, self.half_width)
        grids = np.meshgrid(*([t] * self.dimension), indexing="ij")
        weights = np.ones_like(grids[0])
        for g in np.meshgrid(*([w] * self.dimension), indexing="ij"):
            weights = weights * g
        points = np.stack([g.ravel() for g in grids], axis=-1)
        return self._c + points, weights.ravel()

    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.dimension

    def surface_area(self) -> float:
        return 2.0 * self.dimension * (2.0 * self.half_width) ** (self.dimension - 1)


class Polygon(DomainSpec):
    """Simple polygon with counter-clockwise vertices"""
    kind: str = "polygon"
    vertices: Tuple[Tuple[float, float], ...]

    @field_validator("vertices")
    def validate_vertices(cls, v):
        if len(v) < 3:
            raise ValueError("a polygon needs at least three vertices")
        verts = np.asarray(v, dtype=float)
        x, y = verts[:, 0], verts[:, 1]
        signed = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
        if signed == 0.0:
            raise ValueError("degenerate polygon")
        if signed < 0:
            verts = verts[::-1]
        return tuple(tuple(float(c) for c in p) for p in verts)

    @field_validator("dimension")
    def validate_dimension(cls, v):
        if v != 2:
            raise ValueError("polygons are planar")
        return v

    @property
    def _v(self) -> np.ndarray:
        return np.asarray(self.vertices)

    def _edges(self) -> Tuple[np.ndarray, np.ndarray]:
        a = self._v
        return a, np.roll(a, -1, axis=0)

    def indicator(self, x) -> np.ndarray:
        x = self._points(x)
        px, py = x[..., 0, None], x[..., 1, None]
        a, b = self._edges()
        ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
        crosses = (ay > py) != (by > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
        inside = np.sum(crosses & (px < xint), axis=-1) % 2 == 1
        return inside

    def bounding_box(self):
        return self._v.min(axis=0), self._v.max(axis=0)

    def boundary_mesh(self, nodes: int) -> BoundaryMesh:
        a, b = self._edges()
        lengths = np.linalg.norm(b - a, axis=1)
        perimeter = float(lengths.sum())
        points, normals, weights = [], [], []
        for pa, pb, length in zip(a, b, lengths):
            k = max(2, int(round(nodes * length / perimeter)))
            t, w = _gauss(k)
            tangent = (pb - pa) / length
            normal = np.array([tangent[1], -tangent[0]])
            points.append(pa + t[:, None] * (pb - pa))
            normals.append(np.tile(normal, (k, 1)))
            weights.append(w * length)
        return BoundaryMesh(points=np.concatenate(points), normals=np.concatenate(normals),
                            weights=np.concatenate(weights))

    def volume_quadrature(self, order: int = 32):
        # fan triangulation from the first vertex with signed areas; collapsed square per triangle
        u, wu = _gauss(order)
        uu, vv = np.meshgrid(u, u, indexing="ij")
        ww = np.outer(wu, wu) * uu
        v = self._v
        points, weights = [], []
        for b, c in zip(v[1:-1], v[2:]):
            e1, e2 = b - v[0], c - v[0]
            det = e1[0] * e2[1] - e1[1] * e2[0]
            direction = (1.0 - vv)[..., None] * e1 + vv[..., None] * e2
            points.append((v[0] + uu[..., None] * direction).reshape(-1, 2))
            weights.append((det * ww).ravel())
        return np.concatenate(points), np.concatenate(weights)

    def volume(self) -> float:
        x, y = self._v[:, 0], self._v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def surface_area(self) -> float:
        a, b = self._edges()
        return float(np.linalg.norm(b - a, axis=1).sum())


class Difference(DomainSpec):
    """outer minus inner, with inner contained in outer"""
    kind: str = "difference"
    outer: DomainSpec
    inner: DomainSpec

    def indicator(self, x) -> np.ndarray:
        x = self._points(x)
        return self.outer.indicator(x) & ~self.inner.indicator(x)

    def bounding_box(self):
        return self.outer.bounding_box()

    def boundary_mesh(self, nodes: int) -> BoundaryMesh:
        outer_area = self.outer.surface_area() or 1.0
        inner_area = self.inner.surface_area() or 1.0
        share = max(1, int(round(nodes * inner_area / (outer_area + inner_area))))
        return BoundaryMesh.join(self.outer.boundary_mesh(max(1, nodes - share)),
                                 self.inner.boundary_mesh(share).flipped())

    def volume_quadrature(self, order: int = 32):
        po, wo = self.outer.volume_quadrature(order)
        pi, wi = self.inner.volume_quadrature(order)
        return np.concatenate([po, pi]), np.concatenate([wo, -wi])

    def volume(self) -> Optional[float]:
        vo, vi = self.outer.volume(), self.inner.volume()
        return None if vo is None or vi is None else vo - vi

    def surface_area(self) -> Optional[float]:
        so, si = self.outer.surface_area(), self.inner.surface_area()
        return None if so is None or si is None else so + si


def build_domain(config: Union[DomainConfig, Dict[str, Any]], dimension: int = 2) -> DomainSpec:
    """Domain from a catalog entry {kind, params}"""
    if isinstance(config, dict):
        config = DomainConfig(**config)
    params = dict(config.params)
    try:
        if config.kind == "disk":
            return Disk(dimension=dimension, origin=tuple(params.get("center", ())),
                        radius=params.get("radius", 1.0))
        if config.kind == "square":
            half = params.get("half_width", 0.5 * params["side"] if "side" in params else 1.0)
            return Cube(dimension=dimension, origin=tuple(params.get("center", ())), half_width=half,
                        smoothness=SmoothnessLabel.PW_C3)
        if config.kind == "polygon":
            return Polygon(dimension=2, vertices=tuple(tuple(p) for p in params["vertices"]),
                           smoothness=SmoothnessLabel.PW_C3)
        if config.kind == "difference":
            return Difference(dimension=dimension, outer=build_domain(params["outer"], dimension),
                              inner=build_domain(params["inner"], dimension),
                              smoothness=SmoothnessLabel.LIPSCHITZ)
    except KeyError as e:
        raise InvalidParameterError(f"domain '{config.kind}' is missing parameter {e}") from e
    except ValueError as e:
        raise InvalidParameterError(f"invalid '{config.kind}' domain: {e}") from e
    raise InvalidParameterError(f"unknown domain kind '{config.kind}'; known: disk, square, polygon, difference")


def mesh_nodes_for(domain: DomainSpec, alpha: float, minimum: int = 256) -> int:
    """At least 8 alpha nodes per unit boundary length"""
    area = domain.surface_area() or np.pi * domain.diameter
    if domain.dimension == 2:
        return max(minimum, int(ceil(8.0 * alpha * area)))
    return max(minimum, int(ceil((8.0 * alpha) ** 2 * area)))


def validate_mesh(domain: DomainSpec, nodes: int, eps: Optional[float] = None,
                  area_tol: float = 1e-6) -> MeshReport:
    """Unit normals, total surface weight and outward orientation of the boundary mesh"""
    mesh = domain.boundary_mesh(nodes)
    eps = eps if eps is not None else 1e-7 * domain.diameter
    defect = float(np.max(np.abs(np.linalg.norm(mesh.normals, axis=1) - 1.0), initial=0.0))
    outside = domain.indicator(mesh.points + eps * mesh.normals)
    inside = domain.indicator(mesh.points - eps * mesh.normals)
    failures = int(np.sum(outside | ~inside))
    area = float(mesh.weights.sum())
    reference = domain.surface_area()
    area_error = None if reference is None else abs(area - reference) / reference
    valid = defect <= NORMAL_TOL and failures == 0 and (area_error is None or area_error <= area_tol)
    logger.debug("validated mesh", kind=domain.kind, nodes=mesh.size, failures=failures, area_error=area_error)
    return MeshReport(nodes=mesh.size, max_normal_defect=defect, surface_area=area, reference_area=reference,
                      area_error=area_error, orientation_failures=failures, valid=valid)
