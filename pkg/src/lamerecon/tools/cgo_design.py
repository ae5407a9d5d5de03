"""Leading-order CGO amplitudes and the boundary data designed from them.

The reduced system gives, for u = μ^{-1/2}w + μ^{-1}∇f − f∇μ^{-1} with
w = e^{iρ·x}r and f = e^{iρ·x}s, the leading transport equation

    θ·∇R = −½ V₁ M_θ R,    R = (r, s),  M_θ = [[0, θ], [θᵀ, 0]].

Writing R = exp(A₀ζ)P with A₀ = −½V₁(x₀)M_θ and ζ = θ̄·(x − x₀)/2 leaves
θ·∇P = BP with B vanishing for constant V₁; P comes from `DbarSolver`.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.linalg import expm

from ..config import settings
from ..errors import ContractViolation, InsufficientDataError, PositivityError, UnsupportedDirectionError
from ..models import (
    AmplitudeStatus, AnchorReport, BoundaryData, CgoAmplitude, ComplexDirection, DesignReport,
    DesignVariant, GridField, LameParameters, TauSweepReport, V1Field
)
from ..phantoms.design_recipes import AMPLITUDE_RECIPES, BASE_DIRECTIONS, design_set
from .calculus import first_derivatives, hessians
from .dbar import DbarSolver
from .forward_solver import elasticity_residual


def assemble_V1(params: LameParameters, k: float) -> V1Field:
    """V₁ = [[−2μ^{1/2}Hess(μ^{-1}) + μ^{-3/2}k²I, −∇μ/μ], [0, (λ+μ)/(λ+2μ)μ^{1/2}]]."""
    params.check_positive(lam_too=False)
    grid = params.grid
    dim = grid.dim
    lam, mu = params.lam.values, params.mu.values
    if np.any(lam + 2.0 * mu <= 0):
        raise PositivityError("λ + 2μ must be positive")
    dmu = first_derivatives(mu, grid.spacing)
    hmu = hessians(mu, grid.spacing)
    hess_inv = (-hmu / (mu ** 2)[..., None, None]
                + 2.0 * np.einsum("...a,...b->...ab", dmu, dmu) / (mu ** 3)[..., None, None])
    matrix = np.zeros(grid.shape + (dim + 1, dim + 1))
    matrix[..., :dim, :dim] = (-2.0 * np.sqrt(mu)[..., None, None] * hess_inv
                               + (mu ** -1.5 * k * k)[..., None, None] * np.eye(dim))
    matrix[..., :dim, dim] = -dmu / mu[..., None]
    matrix[..., dim, dim] = (lam + mu) / (lam + 2.0 * mu) * np.sqrt(mu)
    return V1Field(matrix=GridField(grid=grid, values=matrix))


def theta_matrix(theta: np.ndarray) -> np.ndarray:
    """M_θ = [[0, θ], [θᵀ, 0]]."""
    n = len(theta)
    m = np.zeros((n + 1, n + 1), dtype=complex)
    m[:n, n] = theta
    m[n, :n] = theta
    return m


def plane_axes(direction: ComplexDirection) -> Tuple[int, int, float, float]:
    """(p, q, σ_α, σ_β) for α = σ_α e_p, β = σ_β e_q."""
    alpha, beta = np.asarray(direction.alpha), np.asarray(direction.beta)
    axes = []
    for vec, name in ((alpha, "alpha"), (beta, "beta")):
        nonzero = np.flatnonzero(np.abs(vec) > 1e-12)
        if len(nonzero) != 1:
            raise UnsupportedDirectionError(
                f"{name} = {tuple(vec)} is not a signed coordinate axis")
        axes.append((int(nonzero[0]), float(np.sign(vec[nonzero[0]]))))
    (p, sa), (q, sb) = axes
    return p, q, sa, sb


def inner_flags(shape: Tuple[int, ...], frame_cells: int) -> np.ndarray:
    """Points at least max(frame_cells, 1) cells away from every face."""
    f = max(int(frame_cells), 1)
    flags = np.zeros(shape, dtype=bool)
    flags[tuple(slice(f, n - f) for n in shape)] = True
    return flags


class AmplitudeBasis(BaseModel):
    """Solutions R_j of the transport equation with R(x₀) = e_j."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    direction: ComplexDirection
    anchor: Tuple[int, ...]
    values: np.ndarray
    theta_values: np.ndarray
    coupling: np.ndarray
    converged: bool = True


class AmplitudeSolver:
    """Solves θ·∇R = −½V₁M_θR with a pinned anchor value."""

    def __init__(self, padding: Optional[float] = None, rtol: Optional[float] = None,
                 maxiter: Optional[int] = None, tolerance: Optional[float] = None,
                 frame_cells: Optional[int] = None):
        """Initialize the amplitude solver."""
        self.logger = logging.getLogger(__name__)
        self.dbar = DbarSolver(padding=padding, rtol=rtol, maxiter=maxiter)
        self.tolerance = tolerance if tolerance is not None else settings.amplitude_tolerance
        self.frame_cells = frame_cells if frame_cells is not None else settings.frame_cells

    def basis(self, v1: V1Field, direction: ComplexDirection,
              anchor: Sequence[float]) -> AmplitudeBasis:
        """Fundamental solution normalized to the identity at the snapped anchor."""
        grid = v1.grid
        dim = grid.dim
        if direction.dim != dim:
            raise UnsupportedDirectionError(f"Direction is {direction.dim}D, grid is {dim}D")
        p, q, sa, sb = plane_axes(direction)
        index = grid.nearest_index(anchor)
        theta = direction.theta
        m = dim + 1

        coupling = -0.5 * v1.matrix.values.astype(complex) @ theta_matrix(theta)
        a0 = coupling[index]
        x0 = grid.point(index)
        zeta = sum(np.conj(theta[a]) * (c - x0[a]) for a, c in enumerate(grid.coordinates())) / 2.0
        gauge = expm(zeta[..., None, None] * a0)
        gauge_inv = expm(-zeta[..., None, None] * a0)
        reduced = gauge_inv @ (coupling - a0) @ gauge

        # move the (p, q) plane to the last grid axes; any remaining axis indexes slices
        rest = [a for a in range(dim) if a not in (p, q)]
        order = rest + [p, q]
        moved = np.moveaxis(reduced, order, list(range(dim)))
        plane = self.dbar.plane((grid.extents[p], grid.extents[q]), (grid.spacing[p], grid.spacing[q]))
        slices = moved.reshape((-1,) + moved.shape[-4:])
        anchor_pq = (index[p], index[q])
        basis_slices, theta_slices = [], []
        converged = True
        for s, coupling_slice in enumerate(slices):
            c, dc, ok = self.dbar.fundamental(coupling_slice, plane, sa, sb)
            converged &= ok
            c0 = c[anchor_pq]
            cond = np.linalg.cond(c0)
            if not np.isfinite(cond) or cond > 1e12:
                raise ContractViolation(
                    f"Amplitude basis is degenerate at the anchor (slice {s}, cond {cond:.2e})")
            c0_inv = np.linalg.inv(c0)
            basis_slices.append(c @ c0_inv)
            theta_slices.append(dc @ c0_inv)
        shape_moved = moved.shape[:-2] + (m, m)
        p_basis = np.moveaxis(np.stack(basis_slices).reshape(shape_moved), list(range(dim)), order)
        p_theta = np.moveaxis(np.stack(theta_slices).reshape(shape_moved), list(range(dim)), order)

        values = gauge @ p_basis
        theta_values = a0 @ values + gauge @ p_theta
        self.logger.debug(f"Amplitude basis for θ={np.round(theta, 3)} at {tuple(x0)}")
        return AmplitudeBasis(direction=direction, anchor=index, values=values,
                              theta_values=theta_values, coupling=coupling, converged=converged)

    def from_basis(self, basis: AmplitudeBasis, pin: Sequence[complex], grid) -> CgoAmplitude:
        """R = R_basis·pin with its residual |θ·∇R − AR| / |R| on the inner region."""
        pin = np.asarray(pin, dtype=complex)
        m = basis.values.shape[-1]
        if pin.shape != (m,):
            raise ContractViolation(f"Pin must have {m} entries, got {pin.shape}")
        rs = basis.values @ pin
        theta_rs = basis.theta_values @ pin
        residual = theta_rs - (basis.coupling @ rs[..., None])[..., 0]
        inner = inner_flags(grid.shape, self.frame_cells)
        scale = np.abs(rs[inner]).max()
        residual_norm = float(np.abs(residual[inner]).max() / scale) if scale > 0 else 0.0
        status = AmplitudeStatus.OK
        if residual_norm > self.tolerance or not basis.converged:
            status = AmplitudeStatus.WARNING
            self.logger.warning(f"Amplitude residual {residual_norm:.2e} exceeds {self.tolerance:.1e}")
        return CgoAmplitude(rs=GridField(grid=grid, values=rs),
                            theta_derivative=GridField(grid=grid, values=theta_rs),
                            direction=basis.direction, anchor=basis.anchor,
                            residual_norm=residual_norm, status=status)

    def solve_amplitude(self, v1: V1Field, direction: ComplexDirection, pin: Sequence[complex],
                        anchor: Sequence[float]) -> CgoAmplitude:
        return self.from_basis(self.basis(v1, direction, anchor), pin, v1.grid)


def solve_amplitude(v1: V1Field, direction: ComplexDirection, pin: Sequence[complex],
                    anchor: Optional[Sequence[float]] = None) -> CgoAmplitude:
    """Amplitude with R(x₀) = pin; x₀ defaults to the domain center."""
    grid = v1.grid
    if anchor is None:
        anchor = [grid.origin[a] + 0.5 * grid.spacing[a] * (grid.extents[a] - 1) for a in range(grid.dim)]
    return AmplitudeSolver().solve_amplitude(v1, direction, pin, anchor)


def phase_amplitude(amp: CgoAmplitude, params: LameParameters,
                    direction: Optional[ComplexDirection] = None) -> GridField:
    """U with u = e^{iρ·x}U: U = μ^{-1/2}r + μ^{-1}(iρs + ∇s) + s∇μ/μ²."""
    params.check_positive(lam_too=False)
    grid = amp.rs.grid
    direction = direction or amp.direction
    rho = direction.rho
    mu = params.mu.values
    dmu = first_derivatives(mu, grid.spacing)
    s = amp.s
    ds = first_derivatives(s, grid.spacing)
    values = (amp.r / np.sqrt(mu)[..., None]
              + (1j * rho * s[..., None] + ds) / mu[..., None]
              + s[..., None] * dmu / (mu ** 2)[..., None])
    return GridField(grid=grid, values=values)


def build_displacement(amp: CgoAmplitude, params: LameParameters,
                       direction: Optional[ComplexDirection] = None) -> GridField:
    """Leading-order CGO displacement e^{iρ·x}U."""
    direction = direction or amp.direction
    u = phase_amplitude(amp, params, direction)
    grid = u.grid
    phase = np.exp(1j * sum(direction.rho[a] * c for a, c in enumerate(grid.coordinates())))
    return u.with_values(phase[..., None] * u.values)


def tau_sweep(params: LameParameters, direction: ComplexDirection, taus: Sequence[float],
              k: float, pin: Optional[Sequence[complex]] = None,
              anchor: Optional[Sequence[float]] = None,
              solver: Optional[AmplitudeSolver] = None) -> TauSweepReport:
    """Decay of the elasticity residual of leading-order CGO fields as τ grows.

    Reports sup|L_ρU| / (τ·sup|U|) over the inner region for each τ and the
    log-log slope.
    """
    taus = [float(t) for t in taus]
    if len(taus) < 4:
        raise InsufficientDataError(f"A τ sweep needs at least 4 values, got {len(taus)}")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ContractViolation(f"τ values must be strictly increasing, got {taus}")
    solver = solver or AmplitudeSolver()
    grid = params.grid
    if pin is None:
        pin = AMPLITUDE_RECIPES["u0"].pin(direction.theta)
    if anchor is None:
        anchor = [grid.origin[a] + 0.5 * grid.spacing[a] * (grid.extents[a] - 1) for a in range(grid.dim)]
    amp = solver.solve_amplitude(assemble_V1(params, k), direction, pin, anchor)
    inner = inner_flags(grid.shape, solver.frame_cells)

    relative = []
    for tau in taus:
        rho_dir = direction.with_tau(tau)
        u = phase_amplitude(amp, params, rho_dir)
        residual = elasticity_residual(u, params, k, phase=rho_dir.rho)
        res_sup = np.abs(residual.values[inner]).max()
        u_sup = np.abs(u.values[inner]).max()
        relative.append(float(res_sup / (tau * u_sup)))
        solver.logger.info(f"τ={tau:g}: relative residual {relative[-1]:.3e}")
    logs = np.log(np.maximum(relative, np.finfo(float).tiny))
    slope = float(np.polyfit(np.log(taus), logs, 1)[0])
    return TauSweepReport(taus=taus, relative_residuals=relative, slope=slope)


class CgoDesigner:
    """Builds boundary traces from CGO fields of a parameter guess."""

    def __init__(self, solver: Optional[AmplitudeSolver] = None):
        """Initialize the designer."""
        self.logger = logging.getLogger(__name__)
        self.solver = solver or AmplitudeSolver()

    @staticmethod
    def required_count(dim: int) -> int:
        return 3 * dim + 1

    def _direction(self, dim: int, key: str, rotated: bool, tau: float) -> ComplexDirection:
        alpha, beta = BASE_DIRECTIONS[dim][key]
        base = ComplexDirection(alpha=alpha, beta=beta, tau=tau)
        return base.rotated() if rotated else base

    def _traces(self, u: GridField, label: str) -> List[BoundaryData]:
        traces = []
        for part, values in (("re", u.values.real), ("im", u.values.imag)):
            trace = BoundaryData.from_field(GridField(grid=u.grid, values=values))
            scale = float(np.abs(trace.values).max())
            if scale == 0.0:
                self.logger.warning(f"Trace {label}.{part} vanishes on the boundary; dropped")
                continue
            traces.append(BoundaryData(grid=u.grid, values=trace.values / scale,
                                       label=f"{label}.{part}"))
        return traces

    @staticmethod
    def independence_radius(amp: CgoAmplitude) -> float:
        """Radius of the largest anchor ball keeping |s| and |θ·r| above half their anchor values."""
        grid = amp.rs.grid
        s = np.abs(amp.s)
        tr = np.abs(amp.r @ amp.direction.theta)
        ok = (s >= 0.5 * s[amp.anchor]) & (tr >= 0.5 * tr[amp.anchor])
        x0 = grid.point(amp.anchor)
        dist = np.sqrt(sum((c - x0[a]) ** 2 for a, c in enumerate(grid.coordinates())))
        bad = ~ok
        return float(dist[bad].min()) if bad.any() else float(dist.max())

    def design_boundary_set(self, params_guess: LameParameters, variant: DesignVariant,
                            anchors: Sequence[Sequence[float]], tau: float,
                            k: float) -> Tuple[List[BoundaryData], DesignReport]:
        """Re/Im boundary traces of every recipe of `variant` at every admissible anchor."""
        grid = params_guess.grid
        dim = grid.dim
        variant = DesignVariant(variant)
        names = design_set(dim, variant)
        v1 = assemble_V1(params_guess, k)

        traces: List[BoundaryData] = []
        reports: List[AnchorReport] = []
        for a, anchor in enumerate(anchors):
            cache: Dict[Tuple[str, bool], AmplitudeBasis] = {}
            anchor_traces: List[BoundaryData] = []
            pins: Dict[str, Dict[str, float]] = {}
            residuals: Dict[str, float] = {}
            radius = None
            try:
                for name in names:
                    recipe = AMPLITUDE_RECIPES[name]
                    key = (recipe.direction, recipe.rotated)
                    direction = self._direction(dim, recipe.direction, recipe.rotated, tau)
                    if key not in cache:
                        cache[key] = self.solver.basis(v1, direction, anchor)
                    base_theta = self._direction(dim, recipe.direction, False, tau).theta
                    amp = self.solver.from_basis(cache[key], recipe.pin(base_theta), grid)
                    r0 = amp.r[amp.anchor]
                    s0 = amp.s[amp.anchor]
                    theta_r = complex(r0 @ direction.theta)
                    pins[name] = {"s_re": float(s0.real), "s_im": float(s0.imag),
                                  "theta_r_re": theta_r.real, "theta_r_im": theta_r.imag}
                    residuals[name] = amp.residual_norm
                    if name == "u0":
                        radius = self.independence_radius(amp)
                    u = build_displacement(amp, params_guess, direction)
                    anchor_traces.extend(self._traces(u, f"{name}@a{a}"))
            except ContractViolation as e:
                self.logger.warning(f"Skipping anchor {tuple(anchor)}: {e}")
                reports.append(AnchorReport(anchor=tuple(float(x) for x in anchor),
                                            skipped=True, reason=str(e)))
                continue
            traces.extend(anchor_traces)
            reports.append(AnchorReport(anchor=tuple(float(x) for x in anchor), pins=pins,
                                        amplitude_residuals=residuals,
                                        independence_radius=radius))

        if not traces:
            raise InsufficientDataError("No anchor admitted a CGO design")
        required = self.required_count(dim)
        report = DesignReport(variant=variant, dim=dim, tau=tau, trace_count=len(traces),
                              required_count=required,
                              meets_required_count=len(traces) >= required,
                              labels=[t.label for t in traces], anchors=reports)
        self.logger.info(f"Designed {len(traces)} traces for {variant.value} "
                         f"({'meets' if report.meets_required_count else 'below'} {required})")
        return traces, report


def design_boundary_set(params_guess: LameParameters, variant: DesignVariant,
                        anchors: Sequence[Sequence[float]], tau: float,
                        k: float = 0.0) -> Tuple[List[BoundaryData], DesignReport]:
    return CgoDesigner().design_boundary_set(params_guess, variant, anchors, tau, k)
