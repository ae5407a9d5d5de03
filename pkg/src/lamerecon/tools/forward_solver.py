"""Finite-difference Dirichlet solver for the isotropic elasticity system.

The operator is discretized in expanded (non-divergence) form

    (λ+μ)∇(∇·u) + μΔu + (∇λ)(∇·u) + 2S(∇u)∇μ + k²u = f

over interior unknowns; Dirichlet values are moved to the right-hand side.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, onenormest, splu, svds

from ..config import settings
from ..errors import ContractViolation, EigenvalueProximityError
from ..models import (
    BoundaryData, ForwardReport, ForwardResult, GridField, LameParameters, LinearSystem, Rank, check_same_grid
)
from .calculus import first_derivatives, hessians

Stencil = List[Tuple[Tuple[int, ...], float]]


def _unit(dim: int, a: int, step: int) -> Tuple[int, ...]:
    off = [0] * dim
    off[a] = step
    return tuple(off)


def _first_stencil(dim: int, a: int, h: float) -> Stencil:
    return [(_unit(dim, a, 1), 0.5 / h), (_unit(dim, a, -1), -0.5 / h)]


def _second_stencil(dim: int, a: int, b: int, spacing: Sequence[float]) -> Stencil:
    if a == b:
        h2 = spacing[a] ** 2
        return [(_unit(dim, a, 1), 1.0 / h2), (_unit(dim, a, -1), 1.0 / h2),
                ((0,) * dim, -2.0 / h2)]
    w = 0.25 / (spacing[a] * spacing[b])
    out = []
    for sa in (1, -1):
        for sb in (1, -1):
            off = [0] * dim
            off[a], off[b] = sa, sb
            out.append((tuple(off), w * sa * sb))
    return out


def elasticity_residual(u: GridField, params: LameParameters, k: float,
                        phase: Optional[np.ndarray] = None) -> GridField:
    """Evaluate ∇·(λ(∇·u)I + 2S(∇u)μ) + k²u at interior points (boundary set to 0).

    With `phase=ρ` the field is read as U in u = e^{iρ·x}U and the result is
    e^{-iρ·x}(operator applied to u), i.e. every ∂_j becomes ∂_j + iρ_j.
    """
    grid = check_same_grid(u.grid, params.grid)
    dim = grid.dim
    u.require(Rank.VECTOR, dim)
    U = u.values
    lam, mu = params.lam.values, params.mu.values
    dlam = first_derivatives(lam, grid.spacing)
    dmu = first_derivatives(mu, grid.spacing)
    jac = first_derivatives(U, grid.spacing)     # [..., i, j] = ∂_j U_i
    hess = hessians(U, grid.spacing)             # [..., i, a, b] = ∂_a∂_b U_i

    if phase is not None:
        rho = np.asarray(phase, dtype=complex)
        if rho.shape != (dim,):
            raise ContractViolation(f"phase must have {dim} entries")
        # (∂_a + iρ_a)(∂_b + iρ_b)U_i
        hess = (hess.astype(complex)
                + 1j * rho[None, :] * jac[..., :, None]
                + 1j * rho[:, None] * jac[..., None, :]
                - np.multiply.outer(U, np.outer(rho, rho)))
        jac = jac + 1j * np.multiply.outer(U, rho)

    div = np.einsum("...ii->...", jac)
    grad_div = np.einsum("...jij->...i", hess)
    lap = np.einsum("...iaa->...i", hess)
    strain = jac + np.swapaxes(jac, -1, -2)
    out = ((lam + mu)[..., None] * grad_div + mu[..., None] * lap + dlam * div[..., None]
           + np.einsum("...ij,...j->...i", strain, dmu) + k * k * U)
    out[grid.boundary_flags()] = 0.0
    return u.with_values(out)


class ForwardSolver:
    """Assembles and solves the Dirichlet problem on a grid."""

    def __init__(self, cond_cap: Optional[float] = None):
        """Initialize the solver."""
        self.logger = logging.getLogger(__name__)
        self.cond_cap = cond_cap if cond_cap is not None else settings.solver_cond_cap

    def assemble(self, params: LameParameters, k: float, g: BoundaryData,
                 body_force: Optional[GridField] = None) -> LinearSystem:
        """Build the sparse interior system for boundary data `g`."""
        grid = check_same_grid(params.grid, g.grid)
        if k < 0:
            raise ContractViolation(f"k must be non-negative, got {k}")
        if np.iscomplexobj(g.values):
            raise ContractViolation("Boundary data must be real; split complex traces first")
        params.check_positive(lam_too=False)
        dim = grid.dim
        strides = np.array([int(np.prod(grid.extents[a + 1:])) for a in range(dim)])

        pts = grid.interior_indices()
        n_int = len(pts)
        unknown_of = np.full(grid.n_points, -1, dtype=np.int64)
        unknown_of[pts] = np.arange(n_int)

        lam = params.lam.values.ravel()[pts]
        mu = params.mu.values.ravel()[pts]
        dlam = first_derivatives(params.lam.values, grid.spacing).reshape(-1, dim)[pts]
        dmu = first_derivatives(params.mu.values, grid.spacing).reshape(-1, dim)[pts]
        g_full = g.to_field().flat_values()

        terms = []
        for i in range(dim):
            for j in range(dim):
                terms.append((i, j, lam + mu, _second_stencil(dim, i, j, grid.spacing)))
                terms.append((i, j, dlam[:, i], _first_stencil(dim, j, grid.spacing[j])))
                terms.append((i, i, dmu[:, j], _first_stencil(dim, j, grid.spacing[j])))
                terms.append((i, j, dmu[:, j], _first_stencil(dim, i, grid.spacing[i])))
            for a in range(dim):
                terms.append((i, i, mu, _second_stencil(dim, a, a, grid.spacing)))
            terms.append((i, i, np.full(n_int, k * k), [((0,) * dim, 1.0)]))

        rows, cols, vals = [], [], []
        rhs = np.zeros(dim * n_int)
        if body_force is not None:
            check_same_grid(grid, body_force.grid)
            body_force.require(Rank.VECTOR, dim)
            rhs += body_force.flat_values()[pts].T.ravel()
        local = np.arange(n_int)
        for i, j, coef, stencil in terms:
            for offset, weight in stencil:
                nb = pts + int(np.dot(offset, strides))
                w = coef * weight
                inside = unknown_of[nb] >= 0
                rows.append(i * n_int + local[inside])
                cols.append(j * n_int + unknown_of[nb[inside]])
                vals.append(w[inside])
                np.subtract.at(rhs, i * n_int + local[~inside], w[~inside] * g_full[nb[~inside], j])

        n = dim * n_int
        matrix = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(n, n)).tocsr()
        self.logger.debug(f"Assembled {n}x{n} system with {matrix.nnz} nonzeros (k={k})")
        return LinearSystem(grid=grid, matrix=matrix, rhs=rhs, ordering=pts, boundary=g)

    def condition_estimate(self, matrix: sp.spmatrix, lu) -> float:
        """sqrt(‖A‖₁‖A‖∞) / σ_min(A), σ_min from ARPACK with a fixed start vector."""
        norm_1 = float(abs(matrix).sum(axis=0).max())
        norm_inf = float(abs(matrix).sum(axis=1).max())
        n = matrix.shape[0]
        inverse = LinearOperator((n, n), matvec=lu.solve,
                                 rmatvec=lambda x: lu.solve(x, trans="T"), dtype=float)
        try:
            inv_norm = float(svds(inverse, k=1, v0=np.ones(n) / np.sqrt(n), tol=1e-4,
                                  return_singular_vectors=False, solver="arpack")[0])
        except ArpackNoConvergence:
            self.logger.warning("ARPACK did not converge; falling back to a 1-norm estimate")
            inv_norm = float(onenormest(inverse))
        return float(np.sqrt(norm_1 * norm_inf) * inv_norm)

    def solve(self, system: LinearSystem) -> ForwardResult:
        """Factorize, solve and return the full-grid displacement."""
        grid = system.grid
        try:
            lu = splu(system.matrix.tocsc())
        except RuntimeError as e:
            raise EigenvalueProximityError(f"Singular forward factorization: {e}") from e
        cond = self.condition_estimate(system.matrix, lu)
        if not np.isfinite(cond) or cond > self.cond_cap:
            raise EigenvalueProximityError(
                f"Condition estimate {cond:.3e} exceeds {self.cond_cap:.1e}", condition_estimate=cond)
        x = lu.solve(system.rhs)
        n_int = len(system.ordering)
        full = system.boundary.to_field().flat_values().copy()
        full[system.ordering] = x.reshape(grid.dim, n_int).T
        displacement = GridField(grid=grid, values=full.reshape(grid.shape + (grid.dim,)))
        self.logger.debug(f"Solved forward problem, condition estimate {cond:.3e}")
        return ForwardResult(displacement=displacement, condition_estimate=cond)

    def solve_boundary(self, params: LameParameters, k: float, g: BoundaryData,
                       body_force: Optional[GridField] = None) -> ForwardResult:
        return self.solve(self.assemble(params, k, g, body_force))

    def solve_many(self, params: LameParameters, k: float,
                   traces: Sequence[BoundaryData]) -> List[ForwardResult]:
        results = []
        for g in traces:
            results.append(self.solve_boundary(params, k, g))
            self.logger.info(f"Forward solve {g.label or len(results)}: "
                             f"cond≈{results[-1].condition_estimate:.2e}")
        return results

    def report(self, result: ForwardResult, params: LameParameters, k: float,
               label: str = "") -> ForwardReport:
        res = elasticity_residual(result.displacement, params, k)
        return ForwardReport(label=label, condition_estimate=result.condition_estimate,
                             residual_sup=float(np.abs(res.values).max()))
