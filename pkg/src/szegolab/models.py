"""
Pydantic models for szegolab: run/experiment configurations and result reports
"""

from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator


# Enums for validation
class HSScheme(str, Enum):
    """How resolvents are applied inside the Helffer-Sjostrand integral"""
    EIGEN = "eigen"
    RESOLVENT = "resolvent"


class CalculusMethod(str, Enum):
    """Ways to evaluate f(A)"""
    HS = "hs"
    SPECTRAL = "spectral"


class CrossVariant(str, Enum):
    """Off-diagonal blocks whose quasi-norms grow like alpha^{d-1}"""
    SANDWICHED = "sandwiched"
    INDICATOR = "indicator"
    PROJECTION = "projection"


class Theorem(str, Enum):
    """Inequalities covered by bound-sweep"""
    QUASI_COMMUTATOR = "2.4"
    PROJECTION = "2.8"
    UNBOUNDED = "gest"
    BKS = "bks"
    LIPSCHITZ = "ps"


class SmoothnessLabel(str, Enum):
    LIPSCHITZ = "lipschitz"
    PW_C1 = "pw-C1"
    PW_C3 = "pw-C3"


class JumpPath(str, Enum):
    """Self-adjoint H_alpha with any g, or non-self-adjoint V_alpha with g_p"""
    HERMITIAN = "H"
    POLYNOMIAL = "V"


# Numerical parameter models
class QuadratureSpec(BaseModel):
    """Parameters of the adaptive Helffer-Sjostrand quadrature"""
    model_config = ConfigDict(frozen=True)

    target_tolerance: float = Field(1e-6, gt=0, description="Operator-norm error target")
    max_refinement_depth: int = Field(40, ge=1, description="Maximal quadtree depth of a cell")
    y_floor: float = Field(0.0, ge=0, description="Cells with |y| below this are dropped")
    scheme: HSScheme = HSScheme.EIGEN
    gauss_order: int = Field(8, ge=2, le=32)
    max_cells: int = Field(200_000, ge=16)


class GridConfig(BaseModel):
    """Grid rule N(alpha) = n_base * alpha / alpha_ref, capped at n_cap"""
    n_base: int = Field(24, ge=4)
    alpha_ref: float = Field(4.0, gt=0)
    n_cap: int = Field(96, ge=4)
    box_factor: float = Field(2.0, ge=1.0)
    oversampling: int = Field(4, ge=1, le=16)

    def points_for(self, alpha: float) -> int:
        n = int(round(self.n_base * alpha / self.alpha_ref))
        n = min(max(n, 4), self.n_cap)
        return n + (n % 2)


class DomainConfig(BaseModel):
    kind: str = Field(..., description="Catalog name: disk, square, polygon")
    params: Dict[str, Any] = Field(default_factory=dict)


# Request Models
TOLERANCE_KEYS = (
    "target_tolerance", "smooth_tolerance", "smooth_threshold", "singular_tolerance", "singular_threshold",
    "inequality_slack", "projection_tol",
)


class RunConfig(BaseModel):
    """Resolved settings of one CLI invocation"""
    subcommand: str
    config_path: Optional[Path] = None
    seed: int = 0
    thread_count: int = Field(1, ge=1)
    output_dir: Path = Path("results")
    tolerance_overrides: Dict[str, float] = Field(default_factory=dict)

    @field_validator("subcommand")
    def validate_subcommand(cls, v):
        if not v.strip():
            raise ValueError("Subcommand cannot be empty")
        return v.strip()

    @field_validator("tolerance_overrides")
    def validate_tolerance_overrides(cls, v):
        unknown = sorted(set(v) - set(TOLERANCE_KEYS))
        if unknown:
            raise ValueError(f"unknown tolerance overrides {unknown}, expected a subset of {list(TOLERANCE_KEYS)}")
        if any(value <= 0 for value in v.values()):
            raise ValueError("tolerance overrides must be positive")
        return v


class SzegoConfig(BaseModel):
    """Alpha sweep of tr D_alpha(a, Lambda, Omega; g)"""
    lambda_domain: DomainConfig = Field(default_factory=lambda: DomainConfig(kind="disk"))
    omega_domain: DomainConfig = Field(default_factory=lambda: DomainConfig(kind="disk"))
    symbol: str = "const:1"
    function: str = "eta:1"
    alphas: List[float] = Field(default_factory=lambda: [4, 6, 8, 12, 16, 24, 32])
    grid: GridConfig = Field(default_factory=GridConfig)
    w1_nodes: int = Field(1024, ge=16)
    dimension: int = Field(2, ge=2, le=3)
    threads: int = Field(1, ge=1)

    @field_validator("alphas")
    def validate_alphas(cls, v):
        if sorted(v) != list(v):
            raise ValueError("alphas must be ascending")
        if any(a < 1 for a in v):
            raise ValueError("alphas must be >= 1")
        return v


class JumpConfig(SzegoConfig):
    """Alpha sweep for symbols with a jump across the boundary of Omega"""
    symbol_jump: str = "const:0.5"
    path: JumpPath = JumpPath.HERMITIAN
    power: Optional[int] = Field(None, ge=1, le=6)

    @model_validator(mode="after")
    def validate_path(self):
        if self.path == JumpPath.POLYNOMIAL and self.power is None:
            raise ValueError("the V_alpha path needs a polynomial power")
        return self


class CrossGrowthConfig(BaseModel):
    lambda_domain: DomainConfig = Field(default_factory=lambda: DomainConfig(kind="disk"))
    omega_domain: DomainConfig = Field(default_factory=lambda: DomainConfig(kind="disk"))
    symbol: str = "const:1"
    variant: CrossVariant = CrossVariant.SANDWICHED
    q: float = Field(0.5, gt=0, le=1)
    alphas: List[float] = Field(default_factory=lambda: [4, 8, 16, 32])
    grid: GridConfig = Field(default_factory=GridConfig)
    dimension: int = Field(2, ge=2, le=3)
    threads: int = Field(1, ge=1)


class HSSuiteConfig(BaseModel):
    functions: List[str] = Field(
        default_factory=lambda: ["gauss_bump", "cos_bump", "bump:1", "smooth_gamma2", "poly_bump:3"]
    )
    singular_functions: List[str] = Field(default_factory=lambda: ["abs_pow:0.5"])
    dimension: int = Field(64, ge=1)
    trials: int = Field(20, ge=1)
    spectrum_radius: float = Field(0.75, gt=0)
    smooth_tolerance: float = Field(1e-7, gt=0)
    smooth_threshold: float = Field(1e-6, gt=0)
    singular_tolerance: float = Field(1e-4, gt=0)
    singular_threshold: float = Field(1e-3, gt=0)
    smooth_order: int = Field(6, ge=2)
    singular_order: int = Field(2, ge=2)
    seed: int = 0
    threads: int = Field(1, ge=1)


class SplitConfig(SzegoConfig):
    radii: List[float] = Field(default_factory=lambda: [2.0 ** -k for k in range(1, 7)])
    alpha: float = Field(8.0, ge=1)
    singular_point: float = 0.0


class ClosureConfig(SzegoConfig):
    degree: int = Field(12, ge=2, le=60)
    interval: List[float] = Field(default_factory=lambda: [-1.0, 1.0])


class BoundSweepConfig(BaseModel):
    theorem: Theorem = Theorem.QUASI_COMMUTATOR
    trials: int = Field(200, ge=1)
    seed: int = 0
    dims: List[int] = Field(default_factory=lambda: [8, 16, 24])
    function: str = "abs_pow:0.5"
    sigma: float = Field(0.4, gt=0, le=1)
    p: float = Field(1.0, gt=0)
    n: int = Field(2, ge=2)
    decay: float = Field(2.0, gt=0)
    gammas: List[float] = Field(default_factory=lambda: [0.25, 0.5, 0.75])
    ps: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    inequality_slack: float = Field(1e-10, gt=0, description="Relative slack before a BKS instance counts as violated")
    projection_tol: float = Field(1e-10, gt=0, description="Allowed |P^2 - P| and |P - P*|")
    threads: int = Field(1, ge=1)


# Response Models
class SeminormReport(BaseModel):
    """Sampled value of the weighted seminorm and the grid it was taken on"""
    value: float = Field(..., ge=0)
    grid_points: int
    points_per_decade: int
    decades: int
    argmax_order: int = 0
    argmax_point: Optional[float] = None


class HolderReport(BaseModel):
    kappa: float
    constant: float = Field(..., ge=0)
    sup_norm: float = Field(..., ge=0)
    sup_bound: float = Field(..., ge=0)
    sup_bound_ok: bool


class PlanarHolderReport(BaseModel):
    kappa: float
    constant: float = Field(..., ge=0)
    origin_constant: float = Field(..., ge=0)
    pairs: int


class L1WeightReport(BaseModel):
    value: float = Field(..., ge=0)
    error_estimate: float = Field(..., ge=0)
    node_count: int
    majorant_constant: float = Field(..., ge=0)


class InequalityReport(BaseModel):
    """lhs <= rhs checked numerically; slack = rhs - lhs"""
    lhs: float
    rhs: float
    slack: float
    holds: bool


class SingularValueProfile(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    source_dim: int

    @field_validator("values")
    def validate_values(cls, v):
        v = np.asarray(v, dtype=float)
        if v.size and (np.any(v < 0) or np.any(np.diff(v) > 0)):
            raise ValueError("singular values must be non-negative and sorted descending")
        return v


class QuasiNormReport(BaseModel):
    p: float
    value: float = Field(..., ge=0)
    q_exponent: float = Field(..., gt=0, le=1)

    @property
    def kappa(self) -> float:
        """Quasi-triangle constant of the ideal"""
        return 2.0 ** (1.0 / self.q_exponent - 1.0)


class CoeffResult(BaseModel):
    value: complex
    quadrature_error_estimate: float = Field(..., ge=0)
    node_count: int = Field(0, ge=0)

    @field_validator("value")
    def validate_value(cls, v):
        if not np.isfinite(v):
            raise ValueError("coefficient value is not finite")
        return v

    @field_serializer("value")
    def serialize_value(self, v: complex):
        v = complex(v)
        return v.real if v.imag == 0 else {"real": v.real, "imag": v.imag}

    @property
    def real(self) -> float:
        return float(np.real(self.value))


class MeshReport(BaseModel):
    """Checks of a boundary mesh against its domain"""
    nodes: int
    max_normal_defect: float = Field(..., ge=0)
    surface_area: float
    reference_area: Optional[float] = None
    area_error: Optional[float] = None
    orientation_failures: int = Field(..., ge=0)
    valid: bool


class CoeffsReport(BaseModel):
    """Output of the coeffs subcommand"""
    function: str
    symbol: str
    W0: Optional[CoeffResult] = None
    W1: Optional[CoeffResult] = None
    GA: Dict[str, CoeffResult] = Field(default_factory=dict)
    GD: Dict[str, CoeffResult] = Field(default_factory=dict)


class SweepResult(BaseModel):
    """Alpha sweep of a trace and its two-term fit"""
    alpha_values: List[float]
    traces: List[float]
    normalized_traces: List[float]
    fitted_c1: float
    fitted_c2: float
    predicted_W1: float
    relative_gap: Optional[float]
    fit_residual: float
    c1_standard_error: float
    label: str = ""

    @model_validator(mode="after")
    def validate_lengths(self):
        if not (len(self.alpha_values) == len(self.traces) == len(self.normalized_traces)):
            raise ValueError("alpha_values, traces and normalized_traces must have equal length")
        return self

    def consistent_with_zero(self, factor: float = 3.0, atol: float = 1e-9) -> bool:
        return abs(self.fitted_c1) <= factor * max(self.fit_residual, self.c1_standard_error) + atol


class GrowthRow(BaseModel):
    alpha: float
    quasi_norm_power: float
    normalized: float


class GrowthTable(BaseModel):
    variant: CrossVariant
    q: float
    rows: List[GrowthRow]
    band: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.rows])


class HSCase(BaseModel):
    function: str
    trial: int
    dimension: int
    deviation: float
    tolerance: float
    threshold: float
    error_estimate: float
    passed: bool
    error: Optional[str] = None


class HSSuiteReport(BaseModel):
    cases: List[HSCase]
    passed: int
    failed: int
    max_deviation: float
    elapsed_seconds: float


class BoundSweepRow(BaseModel):
    instance: int
    dimension: int
    params: Dict[str, float]
    ratio: float


class BoundSweepSummary(BaseModel):
    theorem: Theorem
    trials: int
    max_ratio: float
    mean_ratio: float
    max_by_dimension: Dict[int, float]
    dimension_scaling_factor: float
    violations: int


class SplitRow(BaseModel):
    radius: float
    seminorm_ratio: float
    w1_singular_piece: float
    trace_singular_piece: float


class ClosureRow(BaseModel):
    alpha: float
    epsilon: float
    trace_difference: float
    normalized: float


# Error Models
class ErrorReport(BaseModel):
    """Error report written next to the run outputs"""
    error: str
    exit_code: int
    detail: Optional[str] = None
    timestamp: datetime = Field(default_factory=datetime.now)
