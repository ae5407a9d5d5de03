"""Enums, configuration and report models for lamerecon."""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Rank(str, Enum):
    """Tensor rank of a field."""
    SCALAR = "scalar"
    VECTOR = "vector"
    MATRIX = "matrix"


class Variant(str, Enum):
    """Which rearrangement of the elasticity identity a bundle carries."""
    MU = "mu"
    LAMBDA = "lambda"


class DesignVariant(str, Enum):
    """Which reconstruction a designed boundary set is meant to serve."""
    MU = "mu"
    LAMBDA = "lambda"
    BOTH = "both"


class RecoveryMode(str, Enum):
    """Global μ recovery strategy."""
    LS = "ls"
    RAY = "ray"


class BoundarySource(str, Enum):
    """Where the pipeline takes its Dirichlet data from."""
    DESIGNED = "designed"
    FAMILY = "family"
    FILE = "file"


class AmplitudeStatus(str, Enum):
    OK = "ok"
    WARNING = "warning"


class ForwardReport(BaseModel):
    """Per-solution diagnostics of a forward solve."""
    label: str
    condition_estimate: float
    residual_sup: float


class MetricsReport(BaseModel):
    """Error summary of a recovered field against the truth."""
    sup_abs: float
    mean_abs: float
    sup_rel: float
    mean_rel: float
    coverage: float
    interior_coverage: float
    points: int
    profiles: List[List[float]] = Field(default_factory=list)


class MuRecoveryReport(BaseModel):
    mode: RecoveryMode
    recovered_fraction: float
    unreachable_points: int
    nonpositive_points: int
    mode_disagreement_sup: Optional[float] = None


class LambdaRecoveryReport(BaseModel):
    recovered_fraction: float
    negative_points: int
    extrapolated_points: int = 0


class AnchorReport(BaseModel):
    """Design diagnostics for one anchor point."""
    anchor: Tuple[float, ...]
    skipped: bool = False
    reason: Optional[str] = None
    pins: Dict[str, Dict[str, float]] = Field(default_factory=dict)
    amplitude_residuals: Dict[str, float] = Field(default_factory=dict)
    independence_radius: Optional[float] = None


class DesignReport(BaseModel):
    variant: DesignVariant
    dim: int
    tau: float
    trace_count: int
    required_count: int
    meets_required_count: bool
    labels: List[str]
    anchors: List[AnchorReport]


class ForwardManifest(BaseModel):
    """Summary written next to forward solutions."""
    grid: Dict[str, Any]
    k: float
    solutions: List[ForwardReport]


class TauSweepReport(BaseModel):
    taus: List[float]
    relative_residuals: List[float]
    slope: float


class PipelineConfig(BaseModel):
    """Experiment description read from a flat KEY=value file."""

    model_config = ConfigDict(extra="forbid")

    dim: int = Field(2, ge=2, le=3)
    grid_points: int = Field(65, ge=5)
    k: float = Field(1.0, ge=0.0)

    mu_phantom: str = "bump"
    mu_base: float = Field(1.5, gt=0)
    mu_amplitude: float = 0.3
    lambda_phantom: str = "sinusoid"
    lambda_base: float = Field(2.0, gt=0)
    lambda_amplitude: float = 0.5

    boundary_source: BoundarySource = BoundarySource.DESIGNED
    boundary_family: str = "polynomial"
    boundary_count: int = Field(8, ge=1)
    boundary_dir: Optional[str] = None
    design_variant: DesignVariant = DesignVariant.LAMBDA
    design_anchors: str = ""
    design_tau: float = Field(2.0, gt=0)

    noise_amplitude: float = Field(0.0, ge=0.0)
    noise_kernel_width: float = Field(0.05, gt=0)
    seed: int = 0

    mu_mode: RecoveryMode = RecoveryMode.LS
    compare_modes: bool = True
    use_true_mu_for_lambda: bool = False
    inpaint_lambda: bool = False
    max_targets: Optional[int] = Field(None, ge=1)

    sigma_min_rel: Optional[float] = Field(None, gt=0)
    kappa_rel: Optional[float] = Field(None, gt=0)
    transport_cond_cap: Optional[float] = Field(None, gt=0)
    solver_cond_cap: Optional[float] = Field(None, gt=0)

    tau_sweep: str = ""
    output_dir: str = "runs/latest"

    @field_validator("boundary_dir", "max_targets", "sigma_min_rel", "kappa_rel",
                     "transport_cond_cap", "solver_cond_cap", mode="before")
    @classmethod
    def _empty_is_none(cls, v):
        if isinstance(v, str) and not v.strip():
            return None
        return v

    def anchor_points(self) -> List[Tuple[float, ...]]:
        """Parse "x,y;x,y" anchors; the default is the domain center."""
        if not self.design_anchors.strip():
            return [(0.5,) * self.dim]
        anchors = []
        for chunk in self.design_anchors.split(";"):
            coords = tuple(float(c) for c in chunk.split(",") if c.strip())
            if len(coords) != self.dim:
                raise ValueError(f"Anchor {chunk!r} does not have {self.dim} coordinates")
            anchors.append(coords)
        return anchors

    def tau_values(self) -> List[float]:
        return [float(t) for t in self.tau_sweep.split(",") if t.strip()]


class RunManifest(BaseModel):
    """Everything needed to reproduce and audit one pipeline run."""
    package_version: str
    library_versions: Dict[str, str]
    config: Dict[str, Any]
    config_hash: str
    artifacts: Dict[str, str] = Field(default_factory=dict)
    forward: List[ForwardReport] = Field(default_factory=list)
    design: Optional[DesignReport] = None
    elimination_coverage: Dict[str, float] = Field(default_factory=dict)
    mu_report: Optional[MuRecoveryReport] = None
    lambda_report: Optional[LambdaRecoveryReport] = None
    mu_metrics: Optional[MetricsReport] = None
    lambda_metrics: Optional[MetricsReport] = None
    tau_sweep: Optional[TauSweepReport] = None
    timings: Dict[str, float] = Field(default_factory=dict)
