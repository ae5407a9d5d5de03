"""Algebraic λ recovery from λ-variant eliminated combinations."""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy import ndimage
from scipy.sparse.linalg import spsolve

from ..config import settings
from ..errors import ContractViolation, PositivityError
from ..models import (
    CombinedFlat, GridField, KappaSigma, LambdaResult, Mask, Rank, check_same_grid
)

logger = logging.getLogger(__name__)


def compute_kappa_sigma(v: Union[GridField, Sequence[GridField]],
                        rhs_star: Union[GridField, Sequence[GridField]],
                        dim: int, masks: Optional[Sequence[Mask]] = None,
                        kappa_rel: Optional[float] = None) -> KappaSigma:
    """κ = sum of the first dim entries of v, σ = −(sum of all entries).

    The mask keeps points where the target-stacked |κ| reaches ε_κ = kappa_rel·median|v|.
    """
    kappa_rel = kappa_rel if kappa_rel is not None else settings.kappa_rel
    vs = [v] if isinstance(v, GridField) else list(v)
    rs = [rhs_star] if isinstance(rhs_star, GridField) else list(rhs_star)
    if len(vs) != len(rs) or not vs:
        raise ContractViolation("Need one rhs_star per eliminated combination")
    grid = check_same_grid(*[f.grid for f in vs + rs])
    for f in vs:
        f.require(Rank.VECTOR, 2 * dim)

    flags = np.ones(grid.shape, dtype=bool)
    for m in masks or []:
        flags &= m.flags
    kappa = [f.values[..., :dim].sum(axis=-1) for f in vs]
    sigma = [-f.values.sum(axis=-1) for f in vs]
    scale = [np.linalg.norm(f.values, axis=-1) for f in vs]

    stacked_scale = np.sqrt(sum(s ** 2 for s in scale))
    reference = stacked_scale[flags & (stacked_scale > 0)]
    epsilon = kappa_rel * (float(np.median(reference)) if reference.size else 1.0)
    kappa_norm = np.sqrt(sum(kv ** 2 for kv in kappa))
    flags &= kappa_norm >= epsilon

    def field(x):
        return GridField(grid=grid, values=x)

    return KappaSigma(kappa=[field(x) for x in kappa], sigma=[field(x) for x in sigma],
                      rhs_star=[f for f in rs], scale=[field(x) for x in scale],
                      epsilon=epsilon, mask=Mask(grid=grid, flags=flags))


def kappa_sigma_from(combined: Sequence[CombinedFlat], dim: int,
                     kappa_rel: Optional[float] = None) -> KappaSigma:
    return compute_kappa_sigma([c.v for c in combined], [c.rhs_star for c in combined], dim,
                               masks=[c.mask for c in combined], kappa_rel=kappa_rel)


def recover_lambda(ks: KappaSigma, mu: GridField, k: float) -> LambdaResult:
    """λ = σμ/κ − (k²/κ)r* on the mask; several targets combine by least squares.

    Each target row κ_lλ = σ_lμ − k²r*_l is scaled by 1/|v_l|.
    """
    grid = check_same_grid(ks.mask.grid, mu.grid)
    mu.require(Rank.SCALAR)
    flags = ks.mask.flags
    if np.any(mu.values[flags] <= 0):
        raise PositivityError("μ must be positive wherever λ is recovered")
    num = np.zeros(grid.shape)
    den = np.zeros(grid.shape)
    for kappa, sigma, rstar, scale in zip(ks.kappa, ks.sigma, ks.rhs_star, ks.scale):
        w = 1.0 / np.where(scale.values > 0, scale.values, 1.0) ** 2
        num += w * kappa.values * (sigma.values * mu.values - k * k * rstar.values)
        den += w * kappa.values ** 2
    lam = np.where(flags, num / np.where(flags & (den > 0), den, 1.0), 0.0)
    negative = flags & (lam < 0)
    if negative.any():
        logger.warning(f"{int(negative.sum())} recovered points have λ < 0")
    return LambdaResult(lam=GridField(grid=grid, values=lam), recovered=Mask(grid=grid, flags=flags),
                        negative=Mask(grid=grid, flags=negative),
                        extrapolated=Mask.full(grid, False))


def _graph_laplacian(grid) -> sp.csr_matrix:
    """5/7-point Laplacian on the full grid with one-sided rows at the edges."""
    n = grid.n_points
    index = np.arange(n).reshape(grid.shape)
    rows, cols, vals = [], [], []
    for a in range(grid.dim):
        w = 1.0 / grid.spacing[a] ** 2
        for lo_s, hi_s in ((slice(None, -1), slice(1, None)), (slice(1, None), slice(None, -1))):
            lo = [slice(None)] * grid.dim
            hi = [slice(None)] * grid.dim
            lo[a], hi[a] = lo_s, hi_s
            p = index[tuple(lo)].ravel()
            q = index[tuple(hi)].ravel()
            rows += [p, p]
            cols += [q, p]
            vals += [np.full(p.size, w), np.full(p.size, -w)]
    return sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n)).tocsr()


def harmonic_inpaint(field: GridField, mask: Mask) -> Tuple[GridField, Mask]:
    """Fill points outside `mask` with the discrete harmonic extension of the masked values.

    Returns the filled field and the mask of extrapolated points. Holes with no
    masked neighbour anywhere in their component take the mean masked value.
    """
    grid = check_same_grid(field.grid, mask.grid)
    field.require(Rank.SCALAR)
    known = mask.flags.copy()
    values = np.array(field.values, dtype=float)
    if known.all() or not known.any():
        return field, Mask.full(grid, False)
    extrapolated = ~known

    labels, count = ndimage.label(~known)
    near_known = ndimage.binary_dilation(known)
    coupled = np.unique(labels[near_known & (labels > 0)])
    isolated = (labels > 0) & ~np.isin(labels, coupled)
    if isolated.any():
        values[isolated] = values[known].mean()
        known = known | isolated

    holes = np.flatnonzero(~known.ravel())
    fixed = np.flatnonzero(known.ravel())
    flat = values.ravel()
    if holes.size:
        lap = _graph_laplacian(grid)
        a_hh = lap[holes][:, holes].tocsc()
        b = -(lap[holes][:, fixed] @ flat[fixed])
        flat[holes] = spsolve(a_hh, b)
    logger.info(f"Inpainted {int(extrapolated.sum())} points ({count} holes)")
    return (GridField(grid=grid, values=flat.reshape(grid.shape)),
            Mask(grid=grid, flags=extrapolated))


def lambda_with_inpainting(result: LambdaResult) -> LambdaResult:
    filled, extrapolated = harmonic_inpaint(result.lam, result.recovered)
    return LambdaResult(lam=filled, recovered=result.recovered, negative=result.negative,
                        extrapolated=extrapolated)
