"""Numerical workers for lamerecon."""

from .forward_solver import ForwardSolver, elasticity_residual
from .reduction import reduce_mu, reduce_lambda, reduce_fields, identity_residual
from .elimination import Eliminator
from .mu_recovery import MuRecovery, build_transport
from .lambda_recovery import (
    compute_kappa_sigma,
    kappa_sigma_from,
    recover_lambda,
    harmonic_inpaint,
    lambda_with_inpainting,
)
from .cgo_design import (
    AmplitudeSolver,
    CgoDesigner,
    assemble_V1,
    solve_amplitude,
    build_displacement,
    phase_amplitude,
    tau_sweep,
    design_boundary_set,
)
from .noise import inject_noise
from .metrics import metrics, error_field

__all__ = [
    "ForwardSolver",
    "elasticity_residual",
    "reduce_mu",
    "reduce_lambda",
    "reduce_fields",
    "identity_residual",
    "Eliminator",
    "MuRecovery",
    "build_transport",
    "compute_kappa_sigma",
    "kappa_sigma_from",
    "recover_lambda",
    "harmonic_inpaint",
    "lambda_with_inpainting",
    "AmplitudeSolver",
    "CgoDesigner",
    "assemble_V1",
    "solve_amplitude",
    "build_displacement",
    "phase_amplitude",
    "tau_sweep",
    "design_boundary_set",
    "inject_noise",
    "metrics",
    "error_field",
]
