"""Second-order finite-difference calculus on uniform grids.

Interior points use central stencils. Boundary points use second-order
one-sided stencils so every derivative is defined up to the boundary.
Mixed second derivatives are compositions of first-derivative stencils,
diagonal ones use the fused three-point stencil.
"""

from typing import Sequence

import numpy as np

from ..models import Grid, GridField, Rank


def _along(ndim: int, axis: int, s) -> tuple:
    index = [slice(None)] * ndim
    index[axis] = s
    return tuple(index)


def diff1(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """First derivative of `a` along a spatial axis."""
    n = a.ndim
    out = np.empty_like(a)
    out[_along(n, axis, slice(1, -1))] = (
        a[_along(n, axis, slice(2, None))] - a[_along(n, axis, slice(None, -2))]) / (2.0 * h)
    out[_along(n, axis, 0)] = (
        -3.0 * a[_along(n, axis, 0)] + 4.0 * a[_along(n, axis, 1)] - a[_along(n, axis, 2)]) / (2.0 * h)
    out[_along(n, axis, -1)] = (
        3.0 * a[_along(n, axis, -1)] - 4.0 * a[_along(n, axis, -2)] + a[_along(n, axis, -3)]) / (2.0 * h)
    return out


def diff2(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second derivative of `a` along a spatial axis (fused stencil)."""
    n = a.ndim
    h2 = h * h
    out = np.empty_like(a)
    out[_along(n, axis, slice(1, -1))] = (
        a[_along(n, axis, slice(2, None))] - 2.0 * a[_along(n, axis, slice(1, -1))]
        + a[_along(n, axis, slice(None, -2))]) / h2
    for end, step in ((0, 1), (-1, -1)):
        out[_along(n, axis, end)] = (
            2.0 * a[_along(n, axis, end)] - 5.0 * a[_along(n, axis, end + step)]
            + 4.0 * a[_along(n, axis, end + 2 * step)] - a[_along(n, axis, end + 3 * step)]) / h2
    return out


def first_derivatives(values: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """All first derivatives, stacked on a new trailing axis."""
    return np.stack([diff1(values, a, h) for a, h in enumerate(spacing)], axis=-1)


def hessians(values: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """All second derivatives, stacked on two new trailing axes (symmetric)."""
    d = len(spacing)
    firsts = [diff1(values, a, h) for a, h in enumerate(spacing)]
    out = np.empty(values.shape + (d, d), dtype=values.dtype)
    for a in range(d):
        out[..., a, a] = diff2(values, a, spacing[a])
        for b in range(a + 1, d):
            mixed = diff1(firsts[a], b, spacing[b])
            out[..., a, b] = mixed
            out[..., b, a] = mixed
    return out


def gradient(f: GridField) -> GridField:
    f.require(Rank.SCALAR)
    return f.with_values(first_derivatives(f.values, f.grid.spacing))


def divergence(v: GridField) -> GridField:
    v.require(Rank.VECTOR, v.grid.dim)
    total = sum(diff1(v.values[..., a], a, h) for a, h in enumerate(v.grid.spacing))
    return v.with_values(total)


def jacobian(u: GridField) -> GridField:
    """J_ij = ∂_j u_i."""
    u.require(Rank.VECTOR, u.grid.dim)
    return u.with_values(first_derivatives(u.values, u.grid.spacing))


def sym_grad(u: GridField) -> GridField:
    jac = jacobian(u).values
    return u.with_values(0.5 * (jac + np.swapaxes(jac, -1, -2)))


def second_derivatives(f: GridField) -> GridField:
    f.require(Rank.SCALAR)
    return f.with_values(hessians(f.values, f.grid.spacing))


def component_hessians(u: GridField) -> np.ndarray:
    """Hessian of every component of a vector field, shape grid + (c, d, d)."""
    u.require(Rank.VECTOR)
    return hessians(u.values, u.grid.spacing)


def c2_norm(f: GridField) -> float:
    """Discrete C² norm: max over points of |f| + |∇f| + |∇²f|."""
    grid: Grid = f.grid
    values = f.values.reshape(grid.shape + (f.components,))
    firsts = first_derivatives(values, grid.spacing)
    seconds = hessians(values, grid.spacing)
    pointwise = (np.sqrt(np.sum(np.abs(values) ** 2, axis=-1))
                 + np.sqrt(np.sum(np.abs(firsts) ** 2, axis=(-2, -1)))
                 + np.sqrt(np.sum(np.abs(seconds) ** 2, axis=(-3, -2, -1))))
    return float(pointwise.max())
