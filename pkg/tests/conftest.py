"""Shared fixtures; puts src/ on sys.path for a source checkout."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from lamerecon.models import Grid, GridField, LameParameters  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale experiment")


@pytest.fixture
def grid33() -> Grid:
    return Grid.unit(2, 33)


@pytest.fixture
def smooth_params(grid33) -> LameParameters:
    """λ = 2 + x₁, μ = 1.5 + 0.5x₂ on the unit square."""
    return LameParameters(lam=GridField.from_function(grid33, lambda x, y: 2.0 + x),
                          mu=GridField.from_function(grid33, lambda x, y: 1.5 + 0.5 * y))


@pytest.fixture
def unit_params(grid33) -> LameParameters:
    return LameParameters.constant(grid33, 1.0, 1.0)


def vector_field(grid: Grid, *components) -> GridField:
    """Vector field from callables of the coordinates."""
    coords = grid.coordinates()
    return GridField(grid=grid, values=np.stack([np.broadcast_to(c(*coords), grid.shape)
                                                 for c in components], axis=-1))


@pytest.fixture(scope="session")
def smooth_solutions():
    """Eight forward solutions (k=1) of polynomial boundary data on the 33-point square."""
    from lamerecon.phantoms import boundary_family
    from lamerecon.tools import ForwardSolver

    grid = Grid.unit(2, 33)
    params = LameParameters(lam=GridField.from_function(grid, lambda x, y: 2.0 + x),
                            mu=GridField.from_function(grid, lambda x, y: 1.5 + 0.5 * y))
    traces = boundary_family("polynomial", grid, 8)
    results = ForwardSolver().solve_many(params, 1.0, traces)
    return params, [r.displacement for r in results]
