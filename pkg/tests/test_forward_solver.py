"""Dirichlet forward solver: manufactured solutions and eigenvalue proximity."""

import numpy as np
import pytest
from scipy.sparse.linalg import eigsh

from lamerecon.errors import ContractViolation, EigenvalueProximityError
from lamerecon.models import BoundaryData, Grid, GridField, LameParameters
from lamerecon.phantoms import boundary_family
from lamerecon.tools import ForwardSolver, elasticity_residual

from conftest import vector_field


def _manufactured(grid: Grid, k: float):
    """u = (sin x sin y, eˣ cos y) with λ = 2 + x, μ = 1.5 + 0.5y and its load."""
    x, y = grid.coordinates()
    lam, mu = 2.0 + x, 1.5 + 0.5 * y
    u = np.stack([np.sin(x) * np.sin(y), np.exp(x) * np.cos(y)], axis=-1)
    jac = np.empty(grid.shape + (2, 2))
    jac[..., 0, 0], jac[..., 0, 1] = np.cos(x) * np.sin(y), np.sin(x) * np.cos(y)
    jac[..., 1, 0], jac[..., 1, 1] = np.exp(x) * np.cos(y), -np.exp(x) * np.sin(y)
    grad_div = np.stack([-np.sin(x) * np.sin(y) - np.exp(x) * np.sin(y),
                         np.cos(x) * np.cos(y) - np.exp(x) * np.cos(y)], axis=-1)
    lap = np.stack([-2.0 * np.sin(x) * np.sin(y), np.zeros(grid.shape)], axis=-1)
    div = jac[..., 0, 0] + jac[..., 1, 1]
    dlam = np.array([1.0, 0.0])
    dmu = np.array([0.0, 0.5])
    strain = jac + np.swapaxes(jac, -1, -2)
    load = ((lam + mu)[..., None] * grad_div + mu[..., None] * lap + div[..., None] * dlam
            + strain @ dmu + k * k * u)
    params = LameParameters(lam=GridField(grid=grid, values=lam), mu=GridField(grid=grid, values=mu))
    return params, GridField(grid=grid, values=u), GridField(grid=grid, values=load)


def test_manufactured_solution_converges_at_second_order():
    solver = ForwardSolver()
    errors = []
    for n in (17, 33, 65):
        grid = Grid.unit(2, n)
        params, exact, load = _manufactured(grid, k=1.0)
        trace = BoundaryData.from_field(exact)
        result = solver.solve_boundary(params, 1.0, trace, body_force=load)
        errors.append(np.abs(result.displacement.values - exact.values).max())
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert errors[-1] < 1e-3
    assert np.all(orders > 1.8)


def test_solution_has_small_discrete_residual(smooth_params):
    solver = ForwardSolver()
    trace = boundary_family("polynomial", smooth_params.grid, 1)[0]
    result = solver.solve_boundary(smooth_params, 1.0, trace)
    report = solver.report(result, smooth_params, 1.0, label="p0")
    assert report.label == "p0"
    assert report.residual_sup < 1e-8
    assert 1.0 < report.condition_estimate < solver.cond_cap
    assert np.array_equal(BoundaryData.from_field(result.displacement).values, trace.values)


def test_residual_with_phase_matches_plain_residual(smooth_params):
    grid = smooth_params.grid
    rho = np.array([2.0, 2.0j])
    x, y = grid.coordinates()
    phase = np.exp(1j * (rho[0] * x + rho[1] * y))
    amplitude = np.stack([1.0 + x * y, y ** 2 - x], axis=-1).astype(complex)
    full = GridField(grid=grid, values=phase[..., None] * amplitude)
    plain = elasticity_residual(full, smooth_params, 1.0).values
    shifted = elasticity_residual(GridField(grid=grid, values=amplitude), smooth_params, 1.0,
                                  phase=rho).values
    interior = ~grid.boundary_flags()
    # central stencils on e^{iρ·x} only agree to O(h²)
    scale = np.abs(plain[interior]).max()
    assert np.abs(phase[..., None] * shifted - plain)[interior].max() < 0.05 * scale


def test_negative_frequency_rejected(smooth_params):
    trace = boundary_family("polynomial", smooth_params.grid, 1)[0]
    with pytest.raises(ContractViolation):
        ForwardSolver().assemble(smooth_params, -1.0, trace)


def test_complex_trace_rejected(smooth_params):
    grid = smooth_params.grid
    trace = BoundaryData(grid=grid, values=np.full((len(grid.boundary_indices()), 2), 1j))
    with pytest.raises(ContractViolation):
        ForwardSolver().assemble(smooth_params, 1.0, trace)


def test_condition_cap_raises():
    grid = Grid.unit(2, 9)
    params = LameParameters.constant(grid, 1.0, 1.0)
    trace = boundary_family("linear", grid, 1)[0]
    with pytest.raises(EigenvalueProximityError) as info:
        ForwardSolver(cond_cap=1.0).solve_boundary(params, 1.0, trace)
    assert info.value.condition_estimate > 1.0


def test_frequency_at_dirichlet_eigenvalue_raises():
    grid = Grid.unit(2, 17)
    params = LameParameters.constant(grid, 1.0, 1.0)
    trace = boundary_family("polynomial", grid, 1)[0]
    solver = ForwardSolver()
    system = solver.assemble(params, 0.0, trace)
    smallest = eigsh(-system.matrix, k=1, sigma=0.0, which="LM", tol=0.0,
                     return_eigenvectors=False)[0]
    with pytest.raises(EigenvalueProximityError):
        solver.solve_boundary(params, float(np.sqrt(smallest)), trace)


@pytest.mark.slow
def test_manufactured_convergence_order_on_fine_grids():
    solver = ForwardSolver()
    errors = []
    for n in (33, 65, 129):
        grid = Grid.unit(2, n)
        params, exact, load = _manufactured(grid, k=1.0)
        result = solver.solve_boundary(params, 1.0, BoundaryData.from_field(exact), body_force=load)
        errors.append(np.abs(result.displacement.values - exact.values).max())
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 1.9)


def test_solution_commutes_with_reflections():
    grid = Grid.unit(2, 33)
    params = LameParameters.constant(grid, 1.0, 1.0)
    solver = ForwardSolver()

    # odd first component, even second: symmetric under x -> 1 - x
    mirror = vector_field(grid, lambda x, y: (x - 0.5) * y, lambda x, y: (x - 0.5) ** 2 + y)
    u = solver.solve_boundary(params, 1.0, BoundaryData.from_field(mirror)).displacement.values
    assert np.abs(u[::-1, :, 0] + u[..., 0]).max() <= 1e-9
    assert np.abs(u[::-1, :, 1] - u[..., 1]).max() <= 1e-9

    # symmetric under the diagonal swap (x, y) -> (y, x) with components exchanged
    diagonal = vector_field(grid, lambda x, y: x * y ** 2 + x, lambda x, y: x ** 2 * y + y)
    u = solver.solve_boundary(params, 1.0, BoundaryData.from_field(diagonal)).displacement.values
    swapped = np.swapaxes(u, 0, 1)[..., ::-1]
    assert np.abs(swapped - u).max() <= 1e-9
