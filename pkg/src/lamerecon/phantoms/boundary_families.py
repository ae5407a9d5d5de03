"""Analytic Dirichlet data families, keyed by name.

Affine data solves the constant-coefficient static system exactly but leaves
∇(∇·u) constant, so it only suits forward checks. The polynomial and
plane-wave families give solutions whose u♯ vectors vary from point to point.
"""

import itertools
from typing import Callable, Dict, List

import numpy as np

from ..errors import ContractViolation
from ..models import BoundaryData, Grid, GridField
from .library import unit_coordinates

POLYNOMIAL_SEED = 20240611


def _monomials(dim: int, degree: int) -> List[tuple]:
    return [alpha for alpha in itertools.product(range(degree + 1), repeat=dim) if sum(alpha) <= degree]


def _from_values(grid: Grid, components: List[np.ndarray], label: str) -> BoundaryData:
    field = GridField(grid=grid, values=np.stack(components, axis=-1))
    return BoundaryData.from_field(field, label=label)


def polynomial_family(grid: Grid, count: int) -> List[BoundaryData]:
    """Cubic vector polynomials with reproducible pseudorandom coefficients."""
    xs = unit_coordinates(grid)
    monomials = _monomials(grid.dim, 3)
    basis = [np.prod([x ** p for x, p in zip(xs, alpha)], axis=0) for alpha in monomials]
    rng = np.random.default_rng(POLYNOMIAL_SEED)
    traces = []
    for j in range(count):
        coeffs = rng.uniform(-1.0, 1.0, size=(grid.dim, len(monomials)))
        comps = [sum(c * b for c, b in zip(coeffs[i], basis)) for i in range(grid.dim)]
        traces.append(_from_values(grid, comps, f"polynomial{j}"))
    return traces


def plane_wave_family(grid: Grid, count: int) -> List[BoundaryData]:
    """a_j cos(2π k_j·x + φ_j) with rotating directions and alternating polarization."""
    xs = unit_coordinates(grid)
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    traces = []
    for j in range(count):
        angle = np.pi * ((j * golden) % 1.0)
        direction = np.zeros(grid.dim)
        direction[0], direction[1] = np.cos(angle), np.sin(angle)
        if grid.dim == 3:
            direction[2] = 0.5 * np.cos(2 * angle)
            direction /= np.linalg.norm(direction)
        if j % 2 == 0:
            polarization = direction
        else:
            polarization = np.zeros(grid.dim)
            polarization[0], polarization[1] = -direction[1], direction[0]
            polarization /= np.linalg.norm(polarization)
        wavenumber = 1.0 + 0.25 * (j % 4)
        phase = 2 * np.pi * wavenumber * sum(d * x for d, x in zip(direction, xs)) + 0.3 * j
        comps = [polarization[i] * np.cos(phase) for i in range(grid.dim)]
        traces.append(_from_values(grid, comps, f"plane_wave{j}"))
    return traces


def linear_family(grid: Grid, count: int) -> List[BoundaryData]:
    """Affine fields x ↦ e_i x_j, then translations e_i."""
    xs = unit_coordinates(grid)
    dim = grid.dim
    shapes = [(i, j) for i in range(dim) for j in range(dim)] + [(i, None) for i in range(dim)]
    if count > len(shapes):
        raise ContractViolation(f"The linear family has {len(shapes)} members, asked for {count}")
    traces = []
    for n, (i, j) in enumerate(shapes[:count]):
        comps = [np.zeros(grid.shape) for _ in range(dim)]
        comps[i] = xs[j].copy() if j is not None else np.ones(grid.shape)
        traces.append(_from_values(grid, comps, f"linear{n}"))
    return traces


BOUNDARY_FAMILIES: Dict[str, Callable[[Grid, int], List[BoundaryData]]] = {
    "polynomial": polynomial_family,
    "plane_wave": plane_wave_family,
    "linear": linear_family,
}


def boundary_family(name: str, grid: Grid, count: int) -> List[BoundaryData]:
    if name not in BOUNDARY_FAMILIES:
        raise ContractViolation(
            f"Unknown boundary family {name!r}; choose from {sorted(BOUNDARY_FAMILIES)}")
    if count < 1:
        raise ContractViolation("Boundary family count must be positive")
    return BOUNDARY_FAMILIES[name](grid, count)
