"""Analytic Lamé parameter phantoms, keyed by name."""

from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..errors import ContractViolation
from ..models import Grid, GridField, LameParameters

BUMP_WIDTH = 0.2


def unit_coordinates(grid: Grid) -> List[np.ndarray]:
    """Coordinates rescaled to [0, 1] along every axis."""
    out = []
    for a, c in enumerate(grid.coordinates()):
        length = grid.spacing[a] * (grid.extents[a] - 1)
        out.append((c - grid.origin[a]) / length)
    return out


def _constant(grid: Grid, base: float, amplitude: float) -> np.ndarray:
    return np.full(grid.shape, float(base))


def _linear(grid: Grid, base: float, amplitude: float) -> np.ndarray:
    return base + amplitude * unit_coordinates(grid)[0]


def _sinusoid(grid: Grid, base: float, amplitude: float) -> np.ndarray:
    return base + amplitude * np.prod([np.cos(np.pi * x) for x in unit_coordinates(grid)], axis=0)


def _bump(grid: Grid, base: float, amplitude: float) -> np.ndarray:
    r2 = sum((x - 0.5) ** 2 for x in unit_coordinates(grid))
    return base + amplitude * np.exp(-r2 / (2 * BUMP_WIDTH ** 2))


PHANTOMS: Dict[str, Callable[[Grid, float, float], np.ndarray]] = {
    "constant": _constant,
    "linear": _linear,
    "sinusoid": _sinusoid,
    "bump": _bump,
}


def make_phantom(name: str, grid: Grid, base: float, amplitude: float = 0.0) -> GridField:
    """Sample the named phantom: base plus amplitude times its profile."""
    if name not in PHANTOMS:
        raise ContractViolation(f"Unknown phantom {name!r}; choose from {sorted(PHANTOMS)}")
    return GridField(grid=grid, values=PHANTOMS[name](grid, base, amplitude))


def lame_phantom(grid: Grid, lambda_name: str, lambda_base: float, lambda_amplitude: float,
                 mu_name: str, mu_base: float, mu_amplitude: float,
                 bounds: Optional[Tuple[float, float]] = None) -> LameParameters:
    extra = {"bounds": bounds} if bounds is not None else {}
    params = LameParameters(lam=make_phantom(lambda_name, grid, lambda_base, lambda_amplitude),
                            mu=make_phantom(mu_name, grid, mu_base, mu_amplitude), **extra)
    return params.check_positive()
