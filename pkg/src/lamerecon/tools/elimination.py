"""Per-point basis selection and Θ elimination over a reduction bundle."""

import itertools
import logging
from typing import List, Optional, Tuple

import numpy as np

from ..config import settings
from ..errors import ContractViolation, InsufficientDataError
from ..models import (
    CombinedFlat, EliminationPlan, GridField, Mask, ReductionBundle, ThetaField, Variant
)


def distinct_entries(variant: Variant, dim: int) -> List[int]:
    """Indices of the sharp entries that are not duplicates of one another."""
    if variant is Variant.MU:
        return list(range(dim)) + [dim]
    return [0] + list(range(dim, 2 * dim))


def min_targets(variant: Variant, dim: int) -> int:
    return dim if variant is Variant.MU else 1


def _unit_columns(cols: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Scale columns (last axis indexes columns) to unit norm; zero columns stay zero."""
    norms = np.linalg.norm(cols, axis=-2)
    safe = np.where(norms > 0, norms, 1.0)
    return cols / safe[..., None, :], norms


def _smallest_singular(mats: np.ndarray) -> np.ndarray:
    return np.linalg.svd(mats, compute_uv=False)[..., -1]


class Eliminator:
    """Chooses well-conditioned bases and annihilates target sharp vectors."""

    def __init__(self, sigma_min_rel: Optional[float] = None, subset_cap: Optional[int] = None,
                 max_targets: Optional[int] = None, include_boundary: bool = False):
        """Initialize the eliminator."""
        self.logger = logging.getLogger(__name__)
        self.sigma_min_rel = sigma_min_rel if sigma_min_rel is not None else settings.sigma_min_rel
        self.subset_cap = subset_cap if subset_cap is not None else settings.subset_cap
        self.max_targets = max_targets
        self.include_boundary = include_boundary

    def _columns(self, bundle: ReductionBundle) -> np.ndarray:
        """(N, m, J): distinct sharp entries of every solution as columns."""
        entries = distinct_entries(bundle.variant, bundle.dim)
        return np.transpose(bundle.sharp_array()[:, :, entries], (1, 2, 0))

    def _enumerate(self, unit: np.ndarray, m: int) -> np.ndarray:
        n_points, _, count = unit.shape
        best = np.full(n_points, -1.0)
        selection = np.zeros((n_points, m), dtype=np.int64)
        for combo in itertools.combinations(range(count), m):
            sigma = _smallest_singular(unit[:, :, list(combo)])
            better = sigma > best
            best[better] = sigma[better]
            selection[better] = combo
        return selection

    def _greedy(self, unit: np.ndarray, m: int) -> np.ndarray:
        n_points, _, count = unit.shape
        residual = unit.copy()
        chosen = np.zeros((n_points, count), dtype=bool)
        picks = []
        rows = np.arange(n_points)
        for _ in range(m):
            norms = np.linalg.norm(residual, axis=1)
            norms[chosen] = -1.0
            pick = np.argmax(norms, axis=1)
            picks.append(pick)
            chosen[rows, pick] = True
            q = residual[rows, :, pick]
            qn = np.linalg.norm(q, axis=1, keepdims=True)
            q = np.where(qn > 0, q / np.where(qn > 0, qn, 1.0), 0.0)
            residual = residual - q[:, :, None] * np.einsum("pe,pej->pj", q, residual)[:, None, :]
        return np.sort(np.stack(picks, axis=1), axis=1)

    def independence_map(self, bundle: ReductionBundle) -> EliminationPlan:
        """Select, per point, the basis maximizing σ_min of its unit-column matrix."""
        dim = bundle.dim
        m = dim + 1
        need = min_targets(bundle.variant, dim)
        if bundle.count < m + need:
            raise InsufficientDataError(
                f"{bundle.variant.value}-variant needs at least {m + need} solutions, "
                f"got {bundle.count}")
        cols = self._columns(bundle)
        unit, _ = _unit_columns(cols)
        n_subsets = len(list(itertools.combinations(range(bundle.count), m)))
        if n_subsets <= self.subset_cap:
            selection = self._enumerate(unit, m)
        else:
            self.logger.info(f"{n_subsets} candidate bases exceed cap {self.subset_cap}; "
                             f"using greedy pivoting")
            selection = self._greedy(unit, m)

        rows = np.arange(cols.shape[0])[:, None]
        sigma_rel = _smallest_singular(np.transpose(unit[rows, :, selection], (0, 2, 1)))
        sigma_min = _smallest_singular(np.transpose(cols[rows, :, selection], (0, 2, 1)))

        is_basis = np.zeros((cols.shape[0], bundle.count), dtype=bool)
        is_basis[rows, selection] = True
        order = np.argsort(is_basis, axis=1, kind="stable")
        target_count = bundle.count - m
        if self.max_targets is not None:
            target_count = max(need, min(target_count, self.max_targets))
        targets = order[:, :target_count]

        grid = bundle.grid
        flags = (sigma_rel >= self.sigma_min_rel) & np.isfinite(sigma_rel)
        if not self.include_boundary:
            flags &= ~grid.boundary_flags().ravel()
        mask = Mask(grid=grid, flags=flags.reshape(grid.shape))
        self.logger.info(f"Independence map: {mask.interior_fraction:.1%} of interior passes "
                         f"(basis {m}, targets {target_count}, J={bundle.count})")
        return EliminationPlan(variant=bundle.variant, dim=dim, basis_count=m,
                               target_count=target_count, selection=selection, targets=targets,
                               sigma_min=sigma_min, sigma_rel=sigma_rel, mask=mask)

    def _basis_and_target(self, plan: EliminationPlan, bundle: ReductionBundle,
                          target_index: int) -> Tuple[np.ndarray, np.ndarray]:
        if not 0 <= target_index < plan.target_count:
            raise ContractViolation(f"target_index {target_index} outside 0..{plan.target_count - 1}")
        if plan.variant != bundle.variant:
            raise ContractViolation("Plan and bundle variants differ")
        cols = self._columns(bundle)
        rows = np.arange(cols.shape[0])
        basis = np.transpose(cols[rows[:, None], :, plan.selection], (0, 2, 1))
        target = cols[rows, :, plan.targets[:, target_index]]
        return basis, target

    def solve_theta(self, plan: EliminationPlan, bundle: ReductionBundle,
                    target_index: int) -> ThetaField:
        """Θ with target + Σ_j Θ_j basis_j = 0 on masked points, zero elsewhere."""
        basis, target = self._basis_and_target(plan, bundle, target_index)
        flags = plan.mask.flags.ravel()
        theta = np.zeros((len(flags), plan.basis_count))
        if flags.any():
            unit, norms = _unit_columns(basis[flags])
            scaled = np.linalg.solve(unit, -target[flags][..., None])[..., 0]
            theta[flags] = scaled / np.where(norms > 0, norms, 1.0)
        grid = plan.grid
        coefficients = GridField(grid=grid, values=theta.reshape(grid.shape + (plan.basis_count,)))
        return ThetaField(target_index=target_index, coefficients=coefficients, mask=plan.mask)

    def annihilation_residual(self, plan: EliminationPlan, bundle: ReductionBundle,
                              theta: ThetaField) -> np.ndarray:
        """|t + BΘ| / |t| per point (absolute where t = 0); zero off the mask."""
        basis, target = self._basis_and_target(plan, bundle, theta.target_index)
        coeff = theta.coefficients.flat_values()
        resid = np.linalg.norm(target + np.einsum("pij,pj->pi", basis, coeff), axis=1)
        scale = np.linalg.norm(target, axis=1)
        rel = resid / np.where(scale > 0, scale, 1.0)
        return np.where(plan.mask.flags.ravel(), rel, 0.0)

    def combine_flat(self, plan: EliminationPlan, bundle: ReductionBundle,
                     theta: ThetaField) -> CombinedFlat:
        """v = target flat + Σ Θ_j basis flats, r* likewise; zero off the mask."""
        flats = bundle.flat_array()
        stars = bundle.star_array()
        n_points = flats.shape[1]
        rows = np.arange(n_points)
        tgt = plan.targets[:, theta.target_index]
        coeff = theta.coefficients.flat_values()
        v = flats[tgt, rows].copy()
        rstar = stars[tgt, rows].copy()
        for c in range(plan.basis_count):
            sel = plan.selection[:, c]
            v += coeff[:, c, None] * flats[sel, rows]
            rstar += coeff[:, c] * stars[sel, rows]
        off = ~plan.mask.flags.ravel()
        v[off] = 0.0
        rstar[off] = 0.0
        grid = plan.grid
        return CombinedFlat(
            target_index=theta.target_index,
            v=GridField(grid=grid, values=v.reshape(grid.shape + (2 * plan.dim,))),
            rhs_star=GridField(grid=grid, values=rstar.reshape(grid.shape)),
            mask=theta.mask)

    def eliminate(self, bundle: ReductionBundle) -> Tuple[EliminationPlan, List[CombinedFlat]]:
        """Independence map plus one combined flat per target."""
        plan = self.independence_map(bundle)
        combined = [self.combine_flat(plan, bundle, self.solve_theta(plan, bundle, t))
                    for t in range(plan.target_count)]
        return plan, combined
