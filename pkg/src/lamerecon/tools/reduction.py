"""Pointwise rearrangements u♯·F + u♭·G = −k²u* of the elasticity system.

With d = ∇·u and B_l = Σ_m (∂_m u_l + ∂_l u_m) − d (so B_1 = a+b, B_2 = a−b
in 2D and (B_1, B_2, B_3) = (b23, b13, b12) in 3D):

    μ-variant:  u♯ = (∇d, d, ..., d)        F = (λ+μ, ..., ∇(λ+μ))
                u♭ = (B, ∂_1B_1, ..., ∂_nB_n) G = (∇μ, μ, ..., μ)
    λ-variant:  u♯ = (d, ..., d, B)          F = (∇(λ+μ), ∇μ)
                u♭ = (∇d, ∂_1B_1, ..., ∂_nB_n) G = (λ+μ, ..., μ, ...)

All derivatives reuse the forward solver's stencils, so the identity holds
to solver precision at interior points of a discrete forward solution.
"""

import logging
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..errors import ContractViolation
from ..models import GridField, LameParameters, Rank, ReductionBundle, Variant, check_same_grid
from .calculus import first_derivatives, hessians

logger = logging.getLogger(__name__)

Fields = Union[GridField, Sequence[GridField]]


def _derived(u: GridField) -> Tuple[np.ndarray, ...]:
    """d, ∇d, B and (∂_l B_l)_l as arrays on the grid."""
    dim = u.grid.dim
    u.require(Rank.VECTOR, dim)
    jac = first_derivatives(u.values, u.grid.spacing)   # [..., i, j] = ∂_j u_i
    hess = hessians(u.values, u.grid.spacing)           # [..., i, a, b]
    d = np.einsum("...ii->...", jac)
    grad_d = np.einsum("...jij->...i", hess)
    b = np.sum(jac + np.swapaxes(jac, -1, -2), axis=-1) - d[..., None]
    db = np.empty_like(b)
    for l in range(dim):
        db[..., l] = sum(hess[..., l, l, m] + hess[..., m, l, l] - hess[..., m, l, m]
                         for m in range(dim))
    return d, grad_d, b, db


def _as_list(u: Fields) -> List[GridField]:
    fields = [u] if isinstance(u, GridField) else list(u)
    if not fields:
        raise ContractViolation("No displacement fields given")
    check_same_grid(*[f.grid for f in fields])
    return fields


def _reduce(u: Fields, variant: Variant, labels: Sequence[str] = ()) -> ReductionBundle:
    fields = _as_list(u)
    dim = fields[0].grid.dim
    sharp, flat, star = [], [], []
    for f in fields:
        if f.is_complex:
            raise ContractViolation("Internal data must be real")
        d, grad_d, b, db = _derived(f)
        repeated = np.repeat(d[..., None], dim, axis=-1)
        if variant is Variant.MU:
            s = np.concatenate([grad_d, repeated], axis=-1)
            fl = np.concatenate([b, db], axis=-1)
        else:
            s = np.concatenate([repeated, b], axis=-1)
            fl = np.concatenate([grad_d, db], axis=-1)
        sharp.append(f.with_values(s))
        flat.append(f.with_values(fl))
        star.append(f.with_values(f.values.sum(axis=-1)))
    labels = list(labels) or [f"u{j}" for j in range(len(fields))]
    logger.debug(f"Reduced {len(fields)} fields ({variant.value}-variant, {dim}D)")
    return ReductionBundle(variant=variant, dim=dim, sharp=sharp, flat=flat, star=star,
                           source_labels=labels)


def reduce_mu(u: Fields, labels: Sequence[str] = ()) -> ReductionBundle:
    return _reduce(u, Variant.MU, labels)


def reduce_lambda(u: Fields, labels: Sequence[str] = ()) -> ReductionBundle:
    return _reduce(u, Variant.LAMBDA, labels)


def reduce_fields(u: Fields, variant: Variant, labels: Sequence[str] = ()) -> ReductionBundle:
    return _reduce(u, Variant(variant), labels)


def coefficient_vectors(params: LameParameters, variant: Variant) -> Tuple[np.ndarray, np.ndarray]:
    """F and G built from known parameters (test oracle only)."""
    grid = params.grid
    dim = grid.dim
    lam, mu = params.lam.values, params.mu.values
    dsum = first_derivatives(lam + mu, grid.spacing)
    dmu = first_derivatives(mu, grid.spacing)
    ones = np.ones(grid.shape + (dim,))
    if variant is Variant.MU:
        f_vec = np.concatenate([(lam + mu)[..., None] * ones, dsum], axis=-1)
        g_vec = np.concatenate([dmu, mu[..., None] * ones], axis=-1)
    else:
        f_vec = np.concatenate([dsum, dmu], axis=-1)
        g_vec = np.concatenate([(lam + mu)[..., None] * ones, mu[..., None] * ones], axis=-1)
    return f_vec, g_vec


def identity_residual(bundle: ReductionBundle, params: LameParameters, k: float,
                      index: int = 0) -> GridField:
    """u♯·F + u♭·G + k²u* for solution `index` of the bundle."""
    check_same_grid(bundle.grid, params.grid)
    if bundle.dim != params.grid.dim:
        raise ContractViolation(f"Bundle is {bundle.dim}D but parameters are {params.grid.dim}D")
    f_vec, g_vec = coefficient_vectors(params, bundle.variant)
    sharp = bundle.sharp[index].values
    flat = bundle.flat[index].values
    value = (np.sum(sharp * f_vec, axis=-1) + np.sum(flat * g_vec, axis=-1)
             + k * k * bundle.star[index].values)
    return bundle.star[index].with_values(value)
