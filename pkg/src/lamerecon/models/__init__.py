"""Data models for lamerecon."""

from .types import (
    Rank,
    Variant,
    DesignVariant,
    RecoveryMode,
    BoundarySource,
    AmplitudeStatus,
    ForwardReport,
    ForwardManifest,
    MetricsReport,
    MuRecoveryReport,
    LambdaRecoveryReport,
    AnchorReport,
    DesignReport,
    TauSweepReport,
    PipelineConfig,
    RunManifest,
)
from .grid import Grid, GridField, Mask, check_same_grid
from .records import (
    LameParameters,
    BoundaryData,
    LinearSystem,
    ForwardResult,
    ReductionBundle,
    EliminationPlan,
    ThetaField,
    CombinedFlat,
    TransportSystem,
    RayResult,
    MuRecoveryResult,
    KappaSigma,
    LambdaResult,
    ComplexDirection,
    V1Field,
    CgoAmplitude,
)

__all__ = [
    "Rank",
    "Variant",
    "DesignVariant",
    "RecoveryMode",
    "BoundarySource",
    "AmplitudeStatus",
    "ForwardReport",
    "ForwardManifest",
    "MetricsReport",
    "MuRecoveryReport",
    "LambdaRecoveryReport",
    "AnchorReport",
    "DesignReport",
    "TauSweepReport",
    "PipelineConfig",
    "RunManifest",
    "Grid",
    "GridField",
    "Mask",
    "check_same_grid",
    "LameParameters",
    "BoundaryData",
    "LinearSystem",
    "ForwardResult",
    "ReductionBundle",
    "EliminationPlan",
    "ThetaField",
    "CombinedFlat",
    "TransportSystem",
    "RayResult",
    "MuRecoveryResult",
    "KappaSigma",
    "LambdaResult",
    "ComplexDirection",
    "V1Field",
    "CgoAmplitude",
]
