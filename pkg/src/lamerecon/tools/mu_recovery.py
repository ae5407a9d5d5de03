"""Transport system ∇μ + Γμ = Φ and its integration from boundary values."""

import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy import ndimage
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import spsolve

from ..config import settings
from ..errors import ContractViolation
from ..models import (
    CombinedFlat, Grid, GridField, Mask, MuRecoveryResult, RayResult, Rank, RecoveryMode,
    TransportSystem, check_same_grid
)

BoundaryMu = Union[float, GridField]


def build_transport(combined: Sequence[CombinedFlat], k: float,
                    cond_cap: Optional[float] = None) -> TransportSystem:
    """Rows β_l·∇μ + γ_lμ = −k²r*_l, solved pointwise for Γ = A⁺γ and Φ = −k²A⁺r*.

    Each row is scaled by 1/|β_l|; points where cond(A) exceeds the cap are masked out.
    """
    cond_cap = cond_cap if cond_cap is not None else settings.transport_cond_cap
    if not combined:
        raise ContractViolation("No eliminated combinations given")
    grid = check_same_grid(*[c.v.grid for c in combined])
    dim = grid.dim
    if len(combined) < dim:
        raise ContractViolation(f"Transport needs at least {dim} targets, got {len(combined)}")
    v = np.stack([c.v.flat_values() for c in combined], axis=1)      # (N, T, 2·dim)
    rstar = np.stack([c.rhs_star.values.ravel() for c in combined], axis=1)
    beta = v[:, :, :dim]
    gamma = v[:, :, dim:].sum(axis=-1)

    norms = np.linalg.norm(beta, axis=-1)
    safe = np.where(norms > 0, norms, 1.0)
    a = beta / safe[..., None]
    sv = np.linalg.svd(a, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(sv[:, -1] > 0, sv[:, 0] / sv[:, -1], np.inf)

    flags = np.ones(grid.n_points, dtype=bool)
    for c in combined:
        flags &= c.mask.flags.ravel()
    flags &= np.isfinite(cond) & (cond <= cond_cap) & np.all(norms > 0, axis=1)

    gamma_vec = np.zeros((grid.n_points, dim))
    phi = np.zeros((grid.n_points, dim))
    if flags.any():
        pinv = np.linalg.pinv(a[flags])
        gamma_vec[flags] = np.einsum("pit,pt->pi", pinv, gamma[flags] / safe[flags])
        phi[flags] = -k * k * np.einsum("pit,pt->pi", pinv, rstar[flags] / safe[flags])

    def vec(x):
        return GridField(grid=grid, values=x.reshape(grid.shape + x.shape[1:]))

    return TransportSystem(
        gamma_vec=vec(gamma_vec), phi=vec(phi),
        beta=[vec(beta[:, t]) for t in range(beta.shape[1])],
        gamma=[vec(gamma[:, t]) for t in range(gamma.shape[1])],
        rhs=[vec(-k * k * rstar[:, t]) for t in range(rstar.shape[1])],
        condition=np.where(np.isfinite(cond), cond, np.finfo(float).max).reshape(grid.shape),
        mask=Mask(grid=grid, flags=flags.reshape(grid.shape)))


def _boundary_values(grid: Grid, boundary_mu: BoundaryMu) -> np.ndarray:
    """Full-grid array holding μ on the boundary (interior entries unused)."""
    if isinstance(boundary_mu, GridField):
        check_same_grid(grid, boundary_mu.grid)
        boundary_mu.require(Rank.SCALAR)
        values = np.array(boundary_mu.values, dtype=float)
    else:
        values = np.full(grid.shape, float(boundary_mu))
    if np.any(values[grid.boundary_flags()] <= 0):
        raise ContractViolation("Boundary μ must be positive")
    return values


def _extrapolate_boundary_layer(values: np.ndarray, dim: int) -> np.ndarray:
    """Linear extrapolation of the two nearest inner layers onto the boundary layer.

    Axes are handled in turn, so edges and corners end up extrapolated along every axis.
    """
    out = np.array(values)
    for a in range(dim):
        lead = (slice(None),) * a
        out[lead + (0,)] = 2.0 * out[lead + (1,)] - out[lead + (2,)]
        out[lead + (-1,)] = 2.0 * out[lead + (-2,)] - out[lead + (-3,)]
    return out


def _derivative_matrix(n: int, h: float) -> sp.csr_matrix:
    """1D first-derivative matrix matching the calculus stencils."""
    d = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        d[i, i - 1], d[i, i + 1] = -0.5 / h, 0.5 / h
    d[0, 0], d[0, 1], d[0, 2] = -1.5 / h, 2.0 / h, -0.5 / h
    d[n - 1, n - 1], d[n - 1, n - 2], d[n - 1, n - 3] = 1.5 / h, -2.0 / h, 0.5 / h
    return d.tocsr()


def _laplacian_1d(n: int, h: float) -> sp.csr_matrix:
    main = np.full(n, -2.0 / h ** 2)
    off = np.full(n - 1, 1.0 / h ** 2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _fourth_difference(n: int) -> sp.csr_matrix:
    """Rows i = 2..n-3 of the centred fourth difference (1, -4, 6, -4, 1)."""
    rows = n - 4
    return sp.diags([np.ones(rows), np.full(rows, -4.0), np.full(rows, 6.0), np.full(rows, -4.0),
                     np.ones(rows)], [0, 1, 2, 3, 4], shape=(rows, n), format="csr")


def _kron_axis(grid: Grid, op1d: sp.spmatrix, axis: int) -> sp.csr_matrix:
    mats = [sp.identity(n, format="csr") for n in grid.extents]
    mats[axis] = op1d
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


class MuRecovery:
    """Recovers μ from a transport system and boundary values."""

    def __init__(self, step_factor: Optional[float] = None, ray_sources: Optional[int] = None,
                 regularization: Optional[float] = None):
        """Initialize the recovery worker."""
        self.logger = logging.getLogger(__name__)
        self.step_factor = step_factor if step_factor is not None else settings.ray_step_factor
        self.ray_sources = ray_sources if ray_sources is not None else settings.ray_sources
        self.regularization = (regularization if regularization is not None
                               else settings.ls_regularization)

    # ray mode

    def integrate_ray(self, system: TransportSystem, boundary_mu: BoundaryMu,
                      x0: Sequence[float]) -> RayResult:
        """Integrate along straight segments from x0, snapped to its nearest node, to every masked point.

        μ(x) = e^{-G(1)} (μ(x0) + ∫₀¹ e^{G(t)} Φ(ψ(t))·ψ' dt),  G(t) = ∫₀ᵗ Γ(ψ)·ψ' ds,
        with ψ(t) = x0 + t(x − x0). Points whose segment leaves the mask stay unset.
        """
        grid = system.grid
        dim = grid.dim
        start = grid.nearest_index(np.asarray(x0, dtype=float))
        x0 = np.asarray(grid.point(start), dtype=float)
        mu0 = float(_boundary_values(grid, boundary_mu)[start])

        flags = system.mask.flags
        allowed = flags | grid.boundary_flags()
        gamma_vals = np.where(flags[..., None], system.gamma_vec.values, 0.0)
        phi_vals = np.where(flags[..., None], system.phi.values, 0.0)
        missing = (grid.boundary_flags() & ~flags)[..., None]
        if missing.any():
            gamma_vals = np.where(missing, _extrapolate_boundary_layer(gamma_vals, dim), gamma_vals)
            phi_vals = np.where(missing, _extrapolate_boundary_layer(phi_vals, dim), phi_vals)
        axes = grid.axes()
        gamma_i = RegularGridInterpolator(axes, gamma_vals, method="linear", bounds_error=False,
                                          fill_value=None)
        phi_i = RegularGridInterpolator(axes, phi_vals, method="linear", bounds_error=False,
                                        fill_value=None)
        allowed_i = RegularGridInterpolator(axes, allowed.astype(float), method="nearest",
                                            bounds_error=False, fill_value=None)

        points = grid.points()
        target_flags = flags.ravel().copy()
        target_flags[np.ravel_multi_index(start, grid.shape)] = False
        targets = np.flatnonzero(target_flags)
        mu = np.zeros(grid.n_points)
        reached = np.zeros(grid.n_points, dtype=bool)
        if len(targets) == 0:
            return self._ray_result(grid, mu, reached)

        span = points[targets] - x0
        lengths = np.linalg.norm(span, axis=1)
        steps = max(1, int(np.ceil(lengths.max() / (self.step_factor * grid.min_spacing))))
        t = np.linspace(0.0, 1.0, steps + 1)
        for chunk in np.array_split(np.arange(len(targets)), max(1, len(targets) // 2048)):
            path = x0 + t[None, :, None] * span[chunk, None, :]       # (P, S, dim)
            flat_path = path.reshape(-1, dim)
            ok = np.all(allowed_i(flat_path).reshape(len(chunk), -1) > 0.5, axis=1)
            g_dot = np.einsum("psi,pi->ps", gamma_i(flat_path).reshape(path.shape), span[chunk])
            f_dot = np.einsum("psi,pi->ps", phi_i(flat_path).reshape(path.shape), span[chunk])
            big_g = cumulative_trapezoid(g_dot, t, axis=1, initial=0.0)
            integral = trapezoid(np.exp(big_g) * f_dot, t, axis=1)
            values = np.exp(-big_g[:, -1]) * (mu0 + integral)
            idx = targets[chunk]
            mu[idx[ok]] = values[ok]
            reached[idx[ok]] = True
        start_flat = np.ravel_multi_index(start, grid.shape)
        mu[start_flat], reached[start_flat] = mu0, bool(flags.ravel()[start_flat])
        return self._ray_result(grid, mu, reached)

    @staticmethod
    def _ray_result(grid: Grid, mu: np.ndarray, reached: np.ndarray) -> RayResult:
        return RayResult(mu=GridField(grid=grid, values=mu.reshape(grid.shape)),
                         reached=Mask(grid=grid, flags=reached.reshape(grid.shape)),
                         nonpositive=Mask(grid=grid, flags=(reached & (mu <= 0)).reshape(grid.shape)))

    def ray_sources_for(self, grid: Grid) -> List[np.ndarray]:
        """Evenly spaced boundary points used as ray sources."""
        boundary = grid.boundary_indices()
        picks = np.linspace(0, len(boundary), self.ray_sources, endpoint=False).astype(int)
        points = grid.points()
        return [points[boundary[i]] for i in picks]

    def recover_rays(self, system: TransportSystem, boundary_mu: BoundaryMu) -> Tuple[np.ndarray, np.ndarray]:
        grid = system.grid
        total = np.zeros(grid.n_points)
        hits = np.zeros(grid.n_points)
        for x0 in self.ray_sources_for(grid):
            ray = self.integrate_ray(system, boundary_mu, x0)
            reached = ray.reached.flags.ravel()
            total[reached] += ray.mu.values.ravel()[reached]
            hits[reached] += 1
        reached = hits > 0
        mu = np.where(reached, total / np.where(reached, hits, 1.0), 0.0)
        return mu, reached

    # least-squares mode

    def recover_least_squares(self, system: TransportSystem, boundary_mu: BoundaryMu) -> np.ndarray:
        """Stacked rows ∂_aμ + Γ_aμ = Φ_a on masked points, Dirichlet boundary.

        Unknowns without a row of their own get a harmonic fill row. Fourth
        differences of weight `regularization` pin the odd-odd checkerboard mode
        that central differences cannot see; they vanish on cubics, so consistent
        data is reproduced.
        """
        grid = system.grid
        dim = grid.dim
        mu_b = _boundary_values(grid, boundary_mu).ravel()
        boundary = grid.boundary_flags().ravel()
        unknown = ~boundary
        masked = system.mask.flags.ravel()
        rows_at = np.flatnonzero(masked)
        gamma = system.gamma_vec.flat_values()
        phi = system.phi.flat_values()

        blocks, rhs = [], []
        for a in range(dim):
            op = _kron_axis(grid, _derivative_matrix(grid.extents[a], grid.spacing[a]), a)
            op = op + sp.diags(gamma[:, a])
            blocks.append(op[rows_at])
            rhs.append(phi[rows_at, a])
        rowless = np.flatnonzero(unknown & ~masked)
        if len(rowless):
            lap = sum(_kron_axis(grid, _laplacian_1d(grid.extents[a], grid.spacing[a]), a)
                      for a in range(dim))
            blocks.append(grid.min_spacing ** 2 * lap[rowless])
            rhs.append(np.zeros(len(rowless)))
        blocks.append(self.regularization * sp.vstack(
            [_kron_axis(grid, _fourth_difference(n), a) for a, n in enumerate(grid.extents)]))
        rhs.append(np.zeros(blocks[-1].shape[0]))

        full = sp.vstack(blocks, format="csr")
        b = np.concatenate(rhs) - full[:, np.flatnonzero(boundary)] @ mu_b[boundary]
        a_mat = full[:, np.flatnonzero(unknown)]
        normal = (a_mat.T @ a_mat).tocsc()
        x = spsolve(normal, a_mat.T @ b)
        mu = mu_b.copy()
        mu[unknown] = x
        return mu

    def recover_global(self, system: TransportSystem, boundary_mu: BoundaryMu,
                       mode: RecoveryMode = RecoveryMode.LS,
                       compare_modes: bool = False) -> MuRecoveryResult:
        """Recover μ on the whole grid; the recovered mask marks supported points."""
        grid = system.grid
        mode = RecoveryMode(mode)
        flags = system.mask.flags
        ls_mu = ray_mu = None
        ray_reached = None
        if mode is RecoveryMode.LS or compare_modes:
            ls_mu = self.recover_least_squares(system, boundary_mu)
        if mode is RecoveryMode.RAY or compare_modes:
            ray_mu, ray_reached = self.recover_rays(system, boundary_mu)

        if mode is RecoveryMode.LS:
            mu, recovered = ls_mu, flags.ravel().copy()
        else:
            mu, recovered = ray_mu, ray_reached

        labels, count = ndimage.label(flags)
        touching = np.unique(labels[ndimage.binary_dilation(grid.boundary_flags()) & (labels > 0)])
        unreachable = (labels > 0) & ~np.isin(labels, touching)
        if count and unreachable.any():
            self.logger.warning(f"{int(unreachable.sum())} masked points lie in components "
                                f"not touching the boundary")
        recovered &= ~unreachable.ravel()

        disagreement = None
        if compare_modes:
            both = flags.ravel() & ray_reached
            diff = np.where(both, np.abs(ls_mu - ray_mu), 0.0)
            disagreement = GridField(grid=grid, values=diff.reshape(grid.shape))
            if both.any():
                self.logger.info(f"Mode disagreement sup {diff.max():.3e} on {int(both.sum())} points")

        nonpositive = recovered & (mu <= 0)
        if nonpositive.any():
            self.logger.warning(f"{int(nonpositive.sum())} recovered points have μ <= 0")
        return MuRecoveryResult(
            mu=GridField(grid=grid, values=mu.reshape(grid.shape)),
            recovered=Mask(grid=grid, flags=recovered.reshape(grid.shape)),
            unreachable=Mask(grid=grid, flags=unreachable),
            nonpositive=Mask(grid=grid, flags=nonpositive.reshape(grid.shape)),
            disagreement=disagreement)
